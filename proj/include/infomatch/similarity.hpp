#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "infomatch/core.hpp"
#include "infomatch/embed.hpp"
#include "infomatch/summarize.hpp"
#include "infomatch/transport.hpp"

namespace infomatch {

enum class Metric { cosine, neg_wmd };

inline std::string_view to_string(Metric m) { return m == Metric::cosine ? "cosine" : "wmd"; }

inline Metric metric_from_string(std::string_view name) {
    if (name == "cosine") return Metric::cosine;
    if (name == "wmd" || name == "neg_wmd") return Metric::neg_wmd;
    throw DataError("unknown metric '" + std::string(name) + "'");
}

// Normalized bag-of-words over in-vocabulary words; support kept sorted so
// downstream arithmetic is order-independent.
struct NBowDistribution {
    std::vector<std::string> words;
    std::vector<std::vector<double>> vectors;
    std::vector<double> mass;

    std::size_t support_size() const { return words.size(); }
};

struct SimilarityScore {
    double value = 0.0;
    Metric metric = Metric::cosine;
};

inline double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw DataError("cosine_similarity: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine_similarity: zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline NBowDistribution nbow(const std::vector<std::string>& tokens,
                             const WordVectorStore& store) {
    std::map<std::string, double> counts;
    double total = 0.0;
    for (const auto& token : tokens) {
        if (!store.find(token)) continue;
        counts[token] += 1.0;
        total += 1.0;
    }
    if (total == 0.0) throw DataError("nbow: no in-vocabulary tokens");

    NBowDistribution dist;
    for (const auto& [word, count] : counts) {
        const std::vector<float>& vec = *store.find(word);
        dist.words.push_back(word);
        dist.vectors.emplace_back(vec.begin(), vec.end());
        dist.mass.push_back(count / total);
    }
    return dist;
}

// Optional SIF re-weighting of nBOW masses (off by default in the pipeline).
inline void apply_sif_mass(NBowDistribution& dist, const FrequencyTable& freq, double a = 1e-3) {
    double total = 0.0;
    for (std::size_t i = 0; i < dist.mass.size(); ++i) {
        dist.mass[i] *= sif_weight(dist.words[i], freq, a);
        total += dist.mass[i];
    }
    for (double& m : dist.mass) m /= total;
}

// Word Mover Distance: exact optimum of the transportation problem between
// the two mass distributions with Euclidean ground cost between word vectors.
inline double wmd(const NBowDistribution& p, const NBowDistribution& q,
                  std::size_t support_cap = 256) {
    if (p.support_size() == 0 || q.support_size() == 0) throw DataError("wmd: empty distribution");
    if (p.support_size() > support_cap || q.support_size() > support_cap)
        throw DataError("wmd: support size " +
                        std::to_string(std::max(p.support_size(), q.support_size())) +
                        " exceeds cap " + std::to_string(support_cap) +
                        "; summarize more aggressively");
    if (p.words == q.words && p.mass == q.mass) return 0.0;

    std::vector<std::vector<double>> cost(p.support_size(),
                                          std::vector<double>(q.support_size(), 0.0));
    for (std::size_t i = 0; i < p.support_size(); ++i)
        for (std::size_t j = 0; j < q.support_size(); ++j) {
            double sq = 0.0;
            for (std::size_t d = 0; d < p.vectors[i].size(); ++d) {
                double diff = p.vectors[i][d] - q.vectors[j][d];
                sq += diff * diff;
            }
            cost[i][j] = std::sqrt(sq);
        }
    return solve_transport(p.mass, q.mass, cost);
}

struct ScoringConfig {
    SummarizerConfig summarizer;
    Metric metric = Metric::cosine;
    double sif_a = 1e-3;
    std::size_t wmd_support_cap = 256;
    bool wmd_sif_mass = false;
    const Stoplist* stoplist = nullptr;
};

// Summarize both documents, then score: cosine over SIF embeddings, or the
// negated exact WMD over the summaries' stemmed nBOW. Higher means more
// similar under both metrics.
inline SimilarityScore score_pair(const TokenizedDocument& news,
                                  const TokenizedDocument& guideline,
                                  const WordVectorStore& store, const FrequencyTable& freq,
                                  const ScoringConfig& config) {
    Summary news_summary = summarize(news, config.summarizer);
    Summary guide_summary = summarize(guideline, config.summarizer);

    if (config.metric == Metric::cosine) {
        DocEmbedding a = embed_document(news_summary, store, freq, config.sif_a, config.stoplist);
        DocEmbedding b = embed_document(guide_summary, store, freq, config.sif_a, config.stoplist);
        return {cosine_similarity(a.vector, b.vector), Metric::cosine};
    }

    auto summary_tokens = [](const Summary& s) {
        std::vector<std::string> tokens;
        for (const auto& sentence : s.sentences)
            tokens.insert(tokens.end(), sentence.tokens.begin(), sentence.tokens.end());
        return tokens;
    };
    NBowDistribution p = nbow(summary_tokens(news_summary), store);
    NBowDistribution q = nbow(summary_tokens(guide_summary), store);
    if (config.wmd_sif_mass) {
        apply_sif_mass(p, freq, config.sif_a);
        apply_sif_mass(q, freq, config.sif_a);
    }
    return {-wmd(p, q, config.wmd_support_cap), Metric::neg_wmd};
}

}  // namespace infomatch
