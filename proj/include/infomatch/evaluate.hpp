#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "infomatch/corpus.hpp"
#include "infomatch/embed.hpp"
#include "infomatch/preprocess.hpp"
#include "infomatch/similarity.hpp"
#include "infomatch/summarize.hpp"

namespace infomatch {

struct ModelConfig {
    std::string embedding;  // registry name, e.g. "word2vec" or "glove"
    SummarizerKind summarizer = SummarizerKind::none;
    Metric metric = Metric::cosine;

    std::string slug() const {
        return embedding + "_" + std::string(to_string(summarizer)) + "_" +
               std::string(to_string(metric));
    }
};

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

// Points sorted by descending threshold, so TPR and FPR are non-decreasing
// along the list; sentinel thresholds just beyond the score range pin the
// (0,0) and (1,1) endpoints.
struct RocCurve {
    std::vector<RocPoint> points;
};

struct ModelReport {
    ModelConfig config;
    double cutoff = 0.0;
    double train_j = 0.0;
    double test_tpr = 0.0;
    double test_fpr = 0.0;
    double test_j = 0.0;
    double runtime_seconds = 0.0;
    std::size_t train_excluded = 0;
    std::size_t test_excluded = 0;
    bool failed = false;
    std::string error;
    RocCurve train_roc;
};

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

using ScoredPair = std::pair<double, int>;  // (score, label)

// ---------------------------------------------------------------------------
// Confusion counts and rates

// Predicted relevant iff score >= threshold (the boundary closes on the
// relevant side so the Youden argmax stays attainable).
inline Confusion confusion(const std::vector<ScoredPair>& scores, double threshold) {
    Confusion c;
    for (const auto& [score, label] : scores) {
        const bool predicted = score >= threshold;
        if (label == 1)
            predicted ? ++c.tp : ++c.fn;
        else
            predicted ? ++c.fp : ++c.tn;
    }
    return c;
}

inline double tpr(const Confusion& c) {
    if (c.tp + c.fn == 0) throw DataError("tpr: no positive pairs");
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double fpr(const Confusion& c) {
    if (c.fp + c.tn == 0) throw DataError("fpr: no negative pairs");
    return static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
}

// ---------------------------------------------------------------------------
// ROC construction

inline RocCurve roc_curve(const std::vector<ScoredPair>& scores) {
    std::size_t positives = 0, negatives = 0;
    for (const auto& [score, label] : scores) (label == 1 ? positives : negatives) += 1;
    if (positives == 0 || negatives == 0)
        throw DataError("roc_curve: both classes must be present");

    std::vector<ScoredPair> sorted = scores;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredPair& a, const ScoredPair& b) { return a.first > b.first; });

    const double hi =
        std::nextafter(sorted.front().first, std::numeric_limits<double>::infinity());
    const double lo =
        std::nextafter(sorted.back().first, -std::numeric_limits<double>::infinity());

    RocCurve curve;
    curve.points.push_back({hi, 0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < sorted.size()) {
        const double threshold = sorted[i].first;
        while (i < sorted.size() && sorted[i].first == threshold) {
            (sorted[i].second == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({threshold, static_cast<double>(tp) / positives,
                                static_cast<double>(fp) / negatives});
    }
    curve.points.push_back({lo, 1.0, 1.0});
    return curve;
}

// Argmax of J = TPR - FPR over the curve; ties break toward the higher
// threshold, delivering fewer positives.
inline std::pair<double, double> youden_optimal(const RocCurve& curve) {
    if (curve.points.empty()) throw DataError("youden_optimal: empty curve");
    double best_threshold = curve.points.front().threshold;
    double best_j = -std::numeric_limits<double>::infinity();
    for (const auto& point : curve.points) {
        const double j = point.tpr - point.fpr;
        if (j > best_j) {
            best_j = j;
            best_threshold = point.threshold;
        }
    }
    return {best_threshold, best_j};
}

// Trapezoidal area under the curve in (FPR, TPR) space.
inline double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    return area;
}

// ---------------------------------------------------------------------------
// Corpora and pair scoring

struct Corpora {
    std::unordered_map<std::string, TokenizedDocument> news;
    std::unordered_map<std::string, TokenizedDocument> guidelines;
    std::unordered_set<std::string> skipped;  // ids whose preprocessing failed
    FrequencyTable freq;
};

inline Corpora build_corpora(const std::vector<Document>& news_docs,
                             const std::vector<Document>& guideline_docs,
                             const PreprocessConfig& config = {}, Warnings* warnings = nullptr) {
    Corpora corpora;
    std::vector<TokenizedDocument> all;
    auto ingest = [&](const std::vector<Document>& docs,
                      std::unordered_map<std::string, TokenizedDocument>& target) {
        for (const auto& doc : docs) {
            try {
                TokenizedDocument tokenized = preprocess(doc, config);
                all.push_back(tokenized);
                target.emplace(doc.id, std::move(tokenized));
            } catch (const EmptyDocumentError& e) {
                corpora.skipped.insert(doc.id);
                warn(warnings, std::string("skipping document: ") + e.what());
            }
        }
    };
    ingest(news_docs, corpora.news);
    ingest(guideline_docs, corpora.guidelines);
    if (all.empty()) throw DataError("build_corpora: no usable documents");
    corpora.freq = word_probabilities(all);
    return corpora;
}

struct PairScores {
    std::vector<ScoredPair> scored;
    std::size_t excluded = 0;
};

// Scores every pair under one configuration. Pairs that fail to score (all
// tokens out of vocabulary, empty summaries, skipped documents) are excluded
// and counted rather than given a default score. Unknown ids are a hard error.
inline PairScores score_pairs(const std::vector<LabeledPair>& pairs, const Corpora& corpora,
                              const WordVectorStore& store, const ScoringConfig& config) {
    PairScores result;
    std::vector<const TokenizedDocument*> news_docs, guide_docs;
    std::vector<int> labels;
    std::vector<DocEmbedding> embeddings;  // cosine path with PC removal

    for (const auto& pair : pairs) {
        auto news_it = corpora.news.find(pair.news_id);
        if (news_it == corpora.news.end()) {
            if (corpora.skipped.contains(pair.news_id)) {
                ++result.excluded;
                continue;
            }
            throw DataError("unknown news id '" + pair.news_id + "'");
        }
        auto guide_it = corpora.guidelines.find(pair.guideline_id);
        if (guide_it == corpora.guidelines.end()) {
            if (corpora.skipped.contains(pair.guideline_id)) {
                ++result.excluded;
                continue;
            }
            throw DataError("unknown guideline id '" + pair.guideline_id + "'");
        }
        try {
            SimilarityScore score =
                score_pair(news_it->second, guide_it->second, store, corpora.freq, config);
            result.scored.emplace_back(score.value, pair.label);
        } catch (const DataError&) {
            ++result.excluded;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Model evaluation

struct EvaluationSettings {
    SummarizerConfig summarizer;  // kind is overridden per model
    double sif_a = 1e-3;
    std::size_t wmd_support_cap = 256;
    bool wmd_sif_mass = false;
    bool pc_removal = false;
    const Stoplist* stoplist = nullptr;
};

struct StoreEntry {
    std::string name;
    std::shared_ptr<const WordVectorStore> store;  // null marks a failed load
    std::string error;
};

using StoreRegistry = std::vector<StoreEntry>;

namespace detail {

inline ScoringConfig scoring_config(const ModelConfig& model, const EvaluationSettings& settings) {
    ScoringConfig config;
    config.summarizer = settings.summarizer;
    config.summarizer.kind = model.summarizer;
    config.metric = model.metric;
    config.sif_a = settings.sif_a;
    config.wmd_support_cap = settings.wmd_support_cap;
    config.wmd_sif_mass = settings.wmd_sif_mass;
    config.stoplist = settings.stoplist;
    return config;
}

}  // namespace detail

// Calibrate the cutoff on the training split via Youden's index, then apply
// that fixed cutoff to the test split.
inline ModelReport evaluate_model(const ModelConfig& model,
                                  const std::vector<LabeledPair>& train_pairs,
                                  const std::vector<LabeledPair>& test_pairs,
                                  const Corpora& corpora, const StoreRegistry& registry,
                                  const EvaluationSettings& settings = {}) {
    ModelReport report;
    report.config = model;
    const auto started = std::chrono::steady_clock::now();
    auto stop_clock = [&] {
        report.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    const StoreEntry* entry = nullptr;
    for (const auto& e : registry)
        if (e.name == model.embedding) entry = &e;
    if (!entry || !entry->store) {
        report.failed = true;
        report.error = entry ? "embedding store failed to load: " + entry->error
                             : "unknown embedding '" + model.embedding + "'";
        stop_clock();
        return report;
    }

    try {
        const ScoringConfig config = detail::scoring_config(model, settings);
        PairScores train = score_pairs(train_pairs, corpora, *entry->store, config);
        report.train_excluded = train.excluded;
        report.train_roc = roc_curve(train.scored);
        auto [cutoff, train_j] = youden_optimal(report.train_roc);
        report.cutoff = cutoff;
        report.train_j = train_j;

        PairScores test = score_pairs(test_pairs, corpora, *entry->store, config);
        report.test_excluded = test.excluded;
        Confusion c = confusion(test.scored, cutoff);
        report.test_tpr = tpr(c);
        report.test_fpr = fpr(c);
        report.test_j = report.test_tpr - report.test_fpr;
    } catch (const std::exception& e) {
        report.failed = true;
        report.error = e.what();
    }
    stop_clock();
    return report;
}

// ---------------------------------------------------------------------------
// The evaluation grid

inline std::vector<ModelConfig> grid_configs(const StoreRegistry& registry) {
    std::vector<ModelConfig> configs;
    for (const auto& entry : registry)
        for (auto summarizer : kAllSummarizers)
            for (auto metric : {Metric::cosine, Metric::neg_wmd})
                configs.push_back({entry.name, summarizer, metric});
    return configs;
}

inline std::size_t grid_thread_count(std::size_t jobs) {
    std::size_t threads = std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    if (const char* env = std::getenv("INFOMATCH_THREADS")) {
        char* end = nullptr;
        long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed > 0) threads = static_cast<std::size_t>(parsed);
    }
    return std::max<std::size_t>(1, std::min(threads, jobs));
}

// Evaluates every (embedding x summarizer x metric) combination. Failed
// configurations yield reports marked failed; the grid continues. Reports are
// sorted by test Youden's index descending (failures last), with the
// enumeration order as the deterministic tie-break.
inline std::vector<ModelReport> run_grid(const DatasetSplit& split, const Corpora& corpora,
                                         const StoreRegistry& registry,
                                         const EvaluationSettings& settings = {},
                                         std::vector<ModelConfig> configs = {}) {
    if (configs.empty()) configs = grid_configs(registry);
    std::vector<ModelReport> reports(configs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= configs.size()) return;
            reports[idx] =
                evaluate_model(configs[idx], split.train, split.test, corpora, registry, settings);
        }
    };
    const std::size_t thread_count = grid_thread_count(configs.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (reports[a].failed != reports[b].failed) return !reports[a].failed;
        if (reports[a].failed) return false;
        return reports[a].test_j > reports[b].test_j;
    });
    std::vector<ModelReport> sorted;
    sorted.reserve(reports.size());
    for (std::size_t i : order) sorted.push_back(std::move(reports[i]));
    return sorted;
}

// ---------------------------------------------------------------------------
// Report files

inline nlohmann::json report_to_json(const ModelReport& report) {
    nlohmann::json j;
    j["embedding"] = report.config.embedding;
    j["summarizer"] = std::string(to_string(report.config.summarizer));
    j["metric"] = std::string(to_string(report.config.metric));
    if (report.failed) {
        j["status"] = "failed";
        j["error"] = report.error;
    } else {
        j["status"] = "ok";
        j["cutoff"] = report.cutoff;
        j["train_j"] = report.train_j;
        j["test_tpr"] = report.test_tpr;
        j["test_fpr"] = report.test_fpr;
        j["test_j"] = report.test_j;
        j["train_excluded"] = report.train_excluded;
        j["test_excluded"] = report.test_excluded;
    }
    return j;
}

// report.json, top10.csv and the per-model ROC CSVs are byte-stable across
// reruns with the same seed and inputs; wall-clock timings go to a separate
// timings.json, which is explicitly outside the determinism contract.
inline void write_grid_outputs(const std::filesystem::path& dir,
                               const std::vector<ModelReport>& reports) {
    std::filesystem::create_directories(dir);

    nlohmann::json all = nlohmann::json::array();
    for (const auto& report : reports) all.push_back(report_to_json(report));
    std::ofstream report_file(dir / "report.json", std::ios::binary);
    report_file << all.dump(2) << '\n';

    std::ofstream top10(dir / "top10.csv", std::ios::binary);
    top10 << "embedding,summarizer,metric,cutoff_point,tpr,fpr,youdens_index\n";
    std::size_t written = 0;
    for (const auto& report : reports) {
        if (report.failed || written == 10) break;
        top10 << report.config.embedding << ',' << to_string(report.config.summarizer) << ','
              << to_string(report.config.metric) << ',' << format_double(report.cutoff) << ','
              << format_double(report.test_tpr) << ',' << format_double(report.test_fpr) << ','
              << format_double(report.test_j) << '\n';
        ++written;
    }

    nlohmann::json timings;
    for (const auto& report : reports) {
        timings[report.config.slug()] = report.runtime_seconds;
        if (report.failed) continue;
        std::ofstream roc(dir / ("roc_" + report.config.slug() + ".csv"), std::ios::binary);
        roc << "threshold,tpr,fpr\n";
        for (const auto& point : report.train_roc.points)
            roc << format_double(point.threshold) << ',' << format_double(point.tpr) << ','
                << format_double(point.fpr) << '\n';
    }
    std::ofstream timing_file(dir / "timings.json", std::ios::binary);
    timing_file << timings.dump(2) << '\n';
}

}  // namespace infomatch
