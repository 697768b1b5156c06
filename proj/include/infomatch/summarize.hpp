#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "infomatch/core.hpp"
#include "infomatch/preprocess.hpp"

namespace infomatch {

// The nine summarizer options: a passthrough, four graph kernels, and the
// frequency/topic/vocabulary families.
enum class SummarizerKind {
    none,
    lexrank,
    textrank_overlap,
    textrank_bm25,
    textrank_cosine,
    reduction,
    luhn,
    lsa,
    klsum,
};

inline constexpr std::array<SummarizerKind, 9> kAllSummarizers = {
    SummarizerKind::none,          SummarizerKind::lexrank,       SummarizerKind::textrank_overlap,
    SummarizerKind::textrank_bm25, SummarizerKind::textrank_cosine, SummarizerKind::reduction,
    SummarizerKind::luhn,          SummarizerKind::lsa,           SummarizerKind::klsum};

inline std::string_view to_string(SummarizerKind kind) {
    switch (kind) {
        case SummarizerKind::none: return "none";
        case SummarizerKind::lexrank: return "lexrank";
        case SummarizerKind::textrank_overlap: return "textrank_overlap";
        case SummarizerKind::textrank_bm25: return "textrank_bm25";
        case SummarizerKind::textrank_cosine: return "textrank_cosine";
        case SummarizerKind::reduction: return "reduction";
        case SummarizerKind::luhn: return "luhn";
        case SummarizerKind::lsa: return "lsa";
        case SummarizerKind::klsum: return "klsum";
    }
    return "unknown";
}

inline SummarizerKind summarizer_from_string(std::string_view name) {
    for (auto kind : kAllSummarizers)
        if (to_string(kind) == name) return kind;
    throw DataError("unknown summarizer '" + std::string(name) + "'");
}

struct SummarizerConfig {
    SummarizerKind kind = SummarizerKind::none;
    std::size_t sentence_count = 5;  // k
    double damping = 0.85;
    double epsilon = 1e-6;
    std::size_t max_iter = 100;
    double lexrank_threshold = 0.1;
};

struct Summary {
    std::string doc_id;
    std::vector<std::size_t> selected;  // strictly increasing original indices
    std::vector<Sentence> sentences;
};

struct SentenceGraph {
    std::size_t n = 0;
    std::vector<std::vector<double>> weights;  // symmetric, nonnegative, zero diagonal
};

struct PageRankResult {
    std::vector<double> scores;
    bool converged = false;
    std::size_t iterations = 0;
};

// ---------------------------------------------------------------------------
// tf-idf sentence vectors

using SparseVector = std::map<std::string, double>;

// tf = raw count within the sentence, idf = ln(n / df) with sentence-level df.
inline std::vector<SparseVector> tfidf_vectors(const std::vector<Sentence>& sentences) {
    bool any_token = false;
    for (const auto& s : sentences)
        if (!s.tokens.empty()) any_token = true;
    if (sentences.empty() || !any_token)
        throw DataError("tfidf_vectors: no sentence has any token");

    std::unordered_map<std::string, std::size_t> df;
    for (const auto& s : sentences) {
        std::set<std::string> distinct(s.tokens.begin(), s.tokens.end());
        for (const auto& t : distinct) ++df[t];
    }
    const double n = static_cast<double>(sentences.size());

    std::vector<SparseVector> vectors(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        SparseVector tf;
        for (const auto& t : sentences[i].tokens) tf[t] += 1.0;
        for (auto& [term, count] : tf) {
            double idf = std::log(n / static_cast<double>(df[term]));
            double w = count * idf;
            if (w != 0.0) vectors[i][term] = w;
        }
    }
    return vectors;
}

namespace detail {

inline double sparse_cosine(const SparseVector& a, const SparseVector& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [term, w] : a) {
        na += w * w;
        auto it = b.find(term);
        if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [term, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    double value = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(value, -1.0, 1.0);
}

inline double bm25_idf(double n, double df) { return std::log(1.0 + (n - df + 0.5) / (df + 0.5)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Sentence graph

// Edge kernels: lexrank and textrank_cosine use tf-idf cosine (lexrank zeroes
// edges below its threshold); textrank_overlap uses shared-token counts over
// summed log lengths; textrank_bm25 uses a symmetrized BM25 (k1=1.2, b=0.75)
// with the nonnegative ln(1 + ...) idf; reduction reuses the cosine kernel.
inline SentenceGraph build_graph(const std::vector<Sentence>& sentences, SummarizerKind kind,
                                 double lexrank_threshold = 0.1) {
    const std::size_t n = sentences.size();
    if (n < 2) throw DataError("build_graph: need at least 2 sentences");
    SentenceGraph graph;
    graph.n = n;
    graph.weights.assign(n, std::vector<double>(n, 0.0));

    switch (kind) {
        case SummarizerKind::lexrank:
        case SummarizerKind::textrank_cosine:
        case SummarizerKind::reduction: {
            auto vectors = tfidf_vectors(sentences);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    double w = detail::sparse_cosine(vectors[i], vectors[j]);
                    w = std::max(0.0, w);
                    if (kind == SummarizerKind::lexrank && w < lexrank_threshold) w = 0.0;
                    graph.weights[i][j] = graph.weights[j][i] = w;
                }
            break;
        }
        case SummarizerKind::textrank_overlap: {
            constexpr double kDenomFloor = 1e-6;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const auto& ti = sentences[i].tokens;
                    const auto& tj = sentences[j].tokens;
                    if (ti.empty() || tj.empty()) continue;
                    std::set<std::string> si(ti.begin(), ti.end());
                    std::size_t shared = 0;
                    std::set<std::string> sj(tj.begin(), tj.end());
                    for (const auto& t : sj)
                        if (si.contains(t)) ++shared;
                    double denom = std::log(static_cast<double>(ti.size())) +
                                   std::log(static_cast<double>(tj.size()));
                    denom = std::max(denom, kDenomFloor);
                    double w = static_cast<double>(shared) / denom;
                    graph.weights[i][j] = graph.weights[j][i] = w;
                }
            break;
        }
        case SummarizerKind::textrank_bm25: {
            constexpr double k1 = 1.2, b = 0.75;
            std::unordered_map<std::string, std::size_t> df;
            double total_len = 0.0;
            for (const auto& s : sentences) {
                total_len += static_cast<double>(s.tokens.size());
                std::set<std::string> distinct(s.tokens.begin(), s.tokens.end());
                for (const auto& t : distinct) ++df[t];
            }
            const double avgdl = total_len / static_cast<double>(n);
            if (avgdl == 0.0) break;

            std::vector<std::unordered_map<std::string, double>> tf(n);
            for (std::size_t i = 0; i < n; ++i)
                for (const auto& t : sentences[i].tokens) tf[i][t] += 1.0;

            auto score = [&](std::size_t doc, std::size_t query) {
                double s = 0.0;
                const double dl = static_cast<double>(sentences[doc].tokens.size());
                for (const auto& [term, qtf] : tf[query]) {
                    auto it = tf[doc].find(term);
                    if (it == tf[doc].end()) continue;
                    double idf =
                        detail::bm25_idf(static_cast<double>(n), static_cast<double>(df[term]));
                    s += idf * it->second * (k1 + 1.0) /
                         (it->second + k1 * (1.0 - b + b * dl / avgdl));
                }
                return s;
            };
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    double w = 0.5 * (score(i, j) + score(j, i));
                    graph.weights[i][j] = graph.weights[j][i] = w;
                }
            break;
        }
        default:
            throw DataError("build_graph: not a graph-based summarizer");
    }
    return graph;
}

// ---------------------------------------------------------------------------
// PageRank

// Power iteration s <- (1-d)/n + d * P^T s on the row-normalized weight
// matrix; rows with no out-weight distribute uniformly. Stops when the L1
// change drops below epsilon; hitting max_iter only clears the converged flag.
inline PageRankResult pagerank(const SentenceGraph& graph, double damping = 0.85,
                               double epsilon = 1e-6, std::size_t max_iter = 100) {
    const std::size_t n = graph.n;
    if (n == 0) throw DataError("pagerank: empty graph");
    if (!(damping > 0.0 && damping < 1.0)) throw DataError("pagerank: damping must be in (0,1)");

    std::vector<std::vector<double>> transition(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) row_sum += graph.weights[i][j];
        if (row_sum > 0.0)
            for (std::size_t j = 0; j < n; ++j) transition[i][j] = graph.weights[i][j] / row_sum;
        else
            for (std::size_t j = 0; j < n; ++j) transition[i][j] = 1.0 / static_cast<double>(n);
    }

    PageRankResult result;
    result.scores.assign(n, 1.0 / static_cast<double>(n));
    const double teleport = (1.0 - damping) / static_cast<double>(n);
    std::vector<double> next(n);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        for (std::size_t j = 0; j < n; ++j) {
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) mass += transition[i][j] * result.scores[i];
            next[j] = teleport + damping * mass;
        }
        double change = 0.0;
        for (std::size_t j = 0; j < n; ++j) change += std::abs(next[j] - result.scores[j]);
        result.scores.swap(next);
        result.iterations = iter + 1;
        if (change < epsilon) {
            result.converged = true;
            break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// KL divergence and the KL-sum summarizer

// Natural-log KL(p||q) over aligned supports. Zero p entries contribute
// nothing; a zero q entry under positive p yields +infinity (callers smooth).
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw DataError("kl_divergence: size mismatch");
    double sp = 0.0, sq = 0.0;
    for (double x : p) {
        if (x < 0.0) throw DataError("kl_divergence: negative mass");
        sp += x;
    }
    for (double x : q) {
        if (x < 0.0) throw DataError("kl_divergence: negative mass");
        sq += x;
    }
    if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
        throw DataError("kl_divergence: distributions must sum to 1");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(0.0, kl);
}

struct KlsumTrace {
    std::vector<std::size_t> chosen;  // greedy pick order
    std::vector<double> kl_after;     // objective after each pick
};

namespace detail {

inline constexpr double kKlsumEpsilon = 1e-9;

// Distribution of `counts` over the document vocabulary; zero counts receive
// the smoothing epsilon instead of an additive offset everywhere, so a
// full-document summary reproduces P bit for bit.
inline std::vector<double> smoothed_distribution(const std::vector<double>& counts) {
    std::vector<double> dist(counts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        dist[i] = counts[i] > 0.0 ? counts[i] : kKlsumEpsilon;
        total += dist[i];
    }
    for (double& x : dist) x /= total;
    return dist;
}

}  // namespace detail

// Greedy KL-sum: P is the document unigram distribution, Q the candidate
// summary's; at each step add the sentence minimizing KL(P||Q), ties to the
// lower index, until k sentences are selected.
inline KlsumTrace klsum_trace(const std::vector<Sentence>& sentences, std::size_t k) {
    std::map<std::string, std::size_t> vocab_index;
    for (const auto& s : sentences)
        for (const auto& t : s.tokens) vocab_index.emplace(t, 0);
    std::size_t next_index = 0;
    for (auto& [term, idx] : vocab_index) idx = next_index++;
    const std::size_t vocab = vocab_index.size();
    if (vocab == 0) throw DataError("klsum: document has no tokens");

    std::vector<std::vector<double>> sentence_counts(sentences.size(),
                                                     std::vector<double>(vocab, 0.0));
    std::vector<double> doc_counts(vocab, 0.0);
    for (std::size_t i = 0; i < sentences.size(); ++i)
        for (const auto& t : sentences[i].tokens) {
            sentence_counts[i][vocab_index[t]] += 1.0;
            doc_counts[vocab_index[t]] += 1.0;
        }
    const std::vector<double> p = detail::smoothed_distribution(doc_counts);

    KlsumTrace trace;
    std::vector<char> selected(sentences.size(), 0);
    std::vector<double> summary_counts(vocab, 0.0);
    const std::size_t picks = std::min(k, sentences.size());
    for (std::size_t step = 0; step < picks; ++step) {
        double best_kl = std::numeric_limits<double>::infinity();
        std::size_t best = SIZE_MAX;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            if (selected[i]) continue;
            std::vector<double> candidate = summary_counts;
            for (std::size_t t = 0; t < vocab; ++t) candidate[t] += sentence_counts[i][t];
            double kl = kl_divergence(p, detail::smoothed_distribution(candidate));
            if (kl < best_kl) {
                best_kl = kl;
                best = i;
            }
        }
        selected[best] = 1;
        for (std::size_t t = 0; t < vocab; ++t) summary_counts[t] += sentence_counts[best][t];
        trace.chosen.push_back(best);
        trace.kl_after.push_back(best_kl);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Luhn

// Luhn's significance cutoff: stems with document frequency at or above
// max(2, ceil(0.1 * n_sentences + 4)).
inline std::size_t luhn_significance_threshold(std::size_t n_sentences) {
    double heuristic = std::ceil(0.1 * static_cast<double>(n_sentences) + 4.0);
    return std::max<std::size_t>(2, static_cast<std::size_t>(heuristic));
}

// Sentence weight = (significant words in best window)^2 / window length,
// where a window breaks after a gap of more than 4 insignificant words.
inline std::vector<double> luhn_scores(const std::vector<Sentence>& sentences) {
    constexpr std::size_t kMaxGap = 4;
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& s : sentences)
        for (const auto& t : s.tokens) ++freq[t];
    const std::size_t cutoff = luhn_significance_threshold(sentences.size());

    std::vector<double> scores(sentences.size(), 0.0);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::vector<std::size_t> significant;
        for (std::size_t pos = 0; pos < sentences[i].tokens.size(); ++pos)
            if (freq[sentences[i].tokens[pos]] >= cutoff) significant.push_back(pos);
        if (significant.empty()) continue;

        double best = 0.0;
        std::size_t run_start = 0;
        for (std::size_t t = 1; t <= significant.size(); ++t) {
            bool run_ends = t == significant.size() ||
                            significant[t] - significant[t - 1] - 1 > kMaxGap;
            if (!run_ends) continue;
            const double count = static_cast<double>(t - run_start);
            const double window =
                static_cast<double>(significant[t - 1] - significant[run_start] + 1);
            best = std::max(best, count * count / window);
            run_start = t;
        }
        scores[i] = best;
    }
    return scores;
}

// ---------------------------------------------------------------------------
// LSA

struct LsaDecomposition {
    Eigen::MatrixXd u;
    Eigen::VectorXd sigma;
    Eigen::MatrixXd v;
};

inline LsaDecomposition lsa_decompose(const Eigen::MatrixXd& x) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// Term x sentence raw count matrix; rows ordered by term for determinism.
inline Eigen::MatrixXd term_sentence_matrix(const std::vector<Sentence>& sentences) {
    std::map<std::string, std::size_t> vocab_index;
    for (const auto& s : sentences)
        for (const auto& t : s.tokens) vocab_index.emplace(t, 0);
    std::size_t next_index = 0;
    for (auto& [term, idx] : vocab_index) idx = next_index++;

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab_index.size()),
                                              static_cast<Eigen::Index>(sentences.size()));
    for (std::size_t j = 0; j < sentences.size(); ++j)
        for (const auto& t : sentences[j].tokens)
            x(static_cast<Eigen::Index>(vocab_index[t]), static_cast<Eigen::Index>(j)) += 1.0;
    return x;
}

// Sigma-weighted row norm of V^T over the top min(k, rank) components
// (Steinberger-style scoring; robust when k exceeds the matrix rank).
inline std::vector<double> lsa_scores(const std::vector<Sentence>& sentences, std::size_t k) {
    Eigen::MatrixXd x = term_sentence_matrix(sentences);
    if (x.rows() == 0) throw DataError("lsa: document has no tokens");
    auto dec = lsa_decompose(x);

    const double sigma_max = dec.sigma.size() > 0 ? dec.sigma(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index r = 0; r < dec.sigma.size(); ++r)
        if (dec.sigma(r) > 1e-12 * sigma_max) ++rank;
    const Eigen::Index top = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), rank);

    std::vector<double> scores(sentences.size(), 0.0);
    for (std::size_t j = 0; j < sentences.size(); ++j) {
        double sum = 0.0;
        for (Eigen::Index r = 0; r < top; ++r) {
            double term = dec.sigma(r) * dec.v(static_cast<Eigen::Index>(j), r);
            sum += term * term;
        }
        scores[j] = std::sqrt(sum);
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

inline Summary make_summary(const TokenizedDocument& doc, std::vector<std::size_t> selected) {
    Summary summary;
    summary.doc_id = doc.doc_id;
    summary.selected = std::move(selected);
    for (std::size_t idx : summary.selected) summary.sentences.push_back(doc.sentences[idx]);
    return summary;
}

}  // namespace detail

// Extractive dispatch over all nine kinds. Documents with at most k sentences
// are returned whole; rank ties always break to the lower sentence index.
inline Summary summarize(const TokenizedDocument& doc, const SummarizerConfig& config) {
    const std::size_t n = doc.sentences.size();
    if (n == 0) throw EmptyDocumentError("summarize: document '" + doc.doc_id + "' has no sentences");
    const std::size_t k = std::max<std::size_t>(1, config.sentence_count);

    if (config.kind == SummarizerKind::none || k >= n) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        return detail::make_summary(doc, std::move(all));
    }
    if (doc.flat_tokens.empty())
        throw DataError("summarize: document '" + doc.doc_id + "' has no processed tokens");

    std::vector<double> scores;
    switch (config.kind) {
        case SummarizerKind::lexrank:
        case SummarizerKind::textrank_overlap:
        case SummarizerKind::textrank_bm25:
        case SummarizerKind::textrank_cosine: {
            auto graph = build_graph(doc.sentences, config.kind, config.lexrank_threshold);
            scores = pagerank(graph, config.damping, config.epsilon, config.max_iter).scores;
            break;
        }
        case SummarizerKind::reduction: {
            auto graph = build_graph(doc.sentences, config.kind);
            scores.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) scores[i] += graph.weights[i][j];
            break;
        }
        case SummarizerKind::luhn:
            scores = luhn_scores(doc.sentences);
            break;
        case SummarizerKind::lsa:
            scores = lsa_scores(doc.sentences, k);
            break;
        case SummarizerKind::klsum: {
            auto trace = klsum_trace(doc.sentences, k);
            std::vector<std::size_t> chosen = trace.chosen;
            std::sort(chosen.begin(), chosen.end());
            return detail::make_summary(doc, std::move(chosen));
        }
        case SummarizerKind::none:
            break;  // handled above
    }
    return detail::make_summary(doc, detail::top_k_indices(scores, k));
}

}  // namespace infomatch
