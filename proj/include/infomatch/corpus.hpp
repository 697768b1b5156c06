#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "infomatch/core.hpp"

namespace infomatch {

enum class Source { news, guideline };

inline std::string_view to_string(Source s) {
    return s == Source::news ? "news" : "guideline";
}

struct Document {
    std::string id;
    std::string text;
    Source source = Source::news;
};

struct VoteRecord {
    std::string news_id;
    std::string guideline_id;
    int votes_relevant = 0;
    int votes_irrelevant = 0;

    int annotator_count() const { return votes_relevant + votes_irrelevant; }
};

enum class LabelOrigin { majority, tie_assigned };

struct LabeledPair {
    std::string news_id;
    std::string guideline_id;
    int label = 0;  // 0 = irrelevant, 1 = relevant
    LabelOrigin origin = LabelOrigin::majority;
};

// Per-item category counts for Fleiss' kappa; every row sums to the same
// number of annotators.
struct AnnotationMatrix {
    std::vector<std::vector<int>> rows;
};

struct DatasetSplit {
    std::vector<LabeledPair> train;
    std::vector<LabeledPair> test;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Loading

// corpus.jsonl: one object per line with fields id, text and optionally
// source. Ids must be unique and text nonempty.
inline std::vector<Document> load_corpus(const std::filesystem::path& path, Source source,
                                         Warnings* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path.string());

    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON line");
        if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("text") ||
            !obj["text"].is_string())
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected string fields 'id' and 'text'");
        Document doc;
        doc.id = obj["id"].get<std::string>();
        doc.text = obj["text"].get<std::string>();
        doc.source = source;
        if (doc.id.empty())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty document id");
        if (doc.text.empty())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty document text");
        if (obj.contains("source")) {
            std::string declared = obj["source"].get<std::string>();
            if (declared != to_string(source))
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": document '" +
                                doc.id + "' declares source '" + declared + "', expected '" +
                                std::string(to_string(source)) + "'");
        }
        if (!seen.insert(doc.id).second)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate id '" +
                            doc.id + "'");
        docs.push_back(std::move(doc));
    }
    if (docs.empty()) warn(warnings, "corpus file " + path.string() + " contains no documents");
    return docs;
}

namespace detail {

inline std::vector<std::string> csv_header(std::ifstream& in, const std::filesystem::path& path,
                                           std::string_view expected) {
    std::string header;
    if (!std::getline(in, header))
        throw ParseError(path.string() + ": empty file, expected header '" + std::string(expected) +
                         "'");
    if (trim(header) != expected)
        throw ParseError(path.string() + ": bad header '" + header + "', expected '" +
                         std::string(expected) + "'");
    return {};
}

}  // namespace detail

// votes.csv: header news_id,guideline_id,votes_relevant,votes_irrelevant
inline std::vector<VoteRecord> load_votes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open votes file: " + path.string());
    detail::csv_header(in, path, "news_id,guideline_id,votes_relevant,votes_irrelevant");

    std::vector<VoteRecord> records;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_on(trim(line), ',');
        const std::string context = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != 4) throw ParseError(context + ": expected 4 fields");
        VoteRecord rec;
        rec.news_id = std::string(fields[0]);
        rec.guideline_id = std::string(fields[1]);
        rec.votes_relevant = static_cast<int>(parse_int(fields[2], context));
        rec.votes_irrelevant = static_cast<int>(parse_int(fields[3], context));
        if (rec.news_id.empty() || rec.guideline_id.empty())
            throw DataError(context + ": empty document id");
        if (rec.votes_relevant < 0 || rec.votes_irrelevant < 0)
            throw DataError(context + ": negative vote count");
        records.push_back(std::move(rec));
    }
    return records;
}

// pairs.csv: header news_id,guideline_id,label
inline std::vector<LabeledPair> load_pairs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pairs file: " + path.string());
    detail::csv_header(in, path, "news_id,guideline_id,label");

    std::vector<LabeledPair> pairs;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_on(trim(line), ',');
        const std::string context = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != 3) throw ParseError(context + ": expected 3 fields");
        LabeledPair pair;
        pair.news_id = std::string(fields[0]);
        pair.guideline_id = std::string(fields[1]);
        long long label = parse_int(fields[2], context);
        if (label != 0 && label != 1) throw DataError(context + ": label must be 0 or 1");
        pair.label = static_cast<int>(label);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

inline void save_pairs(const std::filesystem::path& path, const std::vector<LabeledPair>& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write pairs file: " + path.string());
    out << "news_id,guideline_id,label\n";
    for (const auto& p : pairs) out << p.news_id << ',' << p.guideline_id << ',' << p.label << '\n';
}

// ---------------------------------------------------------------------------
// Annotation aggregation

// Majority labels under the ">= threshold votes" rule. Exact A/2 vs A/2 ties
// are assigned alternately after a seeded shuffle, so tie-labeled pairs split
// as evenly as possible between the classes.
inline std::vector<LabeledPair> aggregate_votes(const std::vector<VoteRecord>& records,
                                                int threshold, std::uint64_t seed) {
    if (records.empty()) return {};
    const int annotators = records.front().annotator_count();
    if (annotators < 2) throw DataError("need at least 2 annotators");
    if (annotators % 2 != 0)
        throw DataError("odd annotator count (" + std::to_string(annotators) +
                        "): the tie rule requires an even number of annotators");
    for (const auto& rec : records)
        if (rec.annotator_count() != annotators)
            throw DataError("inconsistent annotator count for pair (" + rec.news_id + ", " +
                            rec.guideline_id + "): " + std::to_string(rec.annotator_count()) +
                            " vs " + std::to_string(annotators));
    // threshold = A/2 + 1 is the only value where no pair can reach the
    // threshold in both classes and every non-tie pair reaches it in one.
    if (threshold != annotators / 2 + 1)
        throw DataError("threshold must be A/2+1 = " + std::to_string(annotators / 2 + 1) +
                        " for A = " + std::to_string(annotators) + ", got " +
                        std::to_string(threshold));

    std::vector<LabeledPair> out(records.size());
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        out[i].news_id = rec.news_id;
        out[i].guideline_id = rec.guideline_id;
        if (rec.votes_relevant >= threshold) {
            out[i].label = 1;
            out[i].origin = LabelOrigin::majority;
        } else if (rec.votes_irrelevant >= threshold) {
            out[i].label = 0;
            out[i].origin = LabelOrigin::majority;
        } else {
            ties.push_back(i);
        }
    }
    seeded_shuffle(ties, seed);
    for (std::size_t t = 0; t < ties.size(); ++t) {
        out[ties[t]].label = (t % 2 == 0) ? 1 : 0;
        out[ties[t]].origin = LabelOrigin::tie_assigned;
    }
    return out;
}

inline AnnotationMatrix annotation_matrix(const std::vector<VoteRecord>& records) {
    AnnotationMatrix m;
    m.rows.reserve(records.size());
    for (const auto& rec : records) m.rows.push_back({rec.votes_relevant, rec.votes_irrelevant});
    return m;
}

// ---------------------------------------------------------------------------
// Inter-annotator agreement

inline double fleiss_kappa(const AnnotationMatrix& matrix) {
    const std::size_t items = matrix.rows.size();
    if (items < 2) throw DataError("fleiss_kappa needs at least 2 items");
    const std::size_t categories = matrix.rows.front().size();
    if (categories < 2) throw DataError("fleiss_kappa needs at least 2 categories");

    long long raters = 0;
    for (int c : matrix.rows.front()) raters += c;
    if (raters < 2) throw DataError("fleiss_kappa needs at least 2 annotators");

    std::vector<double> category_share(categories, 0.0);
    double mean_item_agreement = 0.0;
    for (const auto& row : matrix.rows) {
        if (row.size() != categories)
            throw DataError("fleiss_kappa: ragged annotation matrix");
        long long row_sum = 0;
        double sq = 0.0;
        for (std::size_t j = 0; j < categories; ++j) {
            if (row[j] < 0) throw DataError("fleiss_kappa: negative count");
            row_sum += row[j];
            sq += static_cast<double>(row[j]) * row[j];
            category_share[j] += row[j];
        }
        if (row_sum != raters)
            throw DataError("fleiss_kappa: row sums differ (" + std::to_string(row_sum) + " vs " +
                            std::to_string(raters) + ")");
        mean_item_agreement += (sq - raters) / (static_cast<double>(raters) * (raters - 1));
    }
    mean_item_agreement /= static_cast<double>(items);

    double expected = 0.0;
    for (double share : category_share) {
        double p = share / (static_cast<double>(items) * raters);
        expected += p * p;
    }
    // expected == 1 only when every vote lands in one category, which forces
    // perfect observed agreement as well.
    if (1.0 - expected == 0.0) return 1.0;
    return (mean_item_agreement - expected) / (1.0 - expected);
}

// Agreement bands on the conventional kappa scale; upper boundary inclusive.
inline std::string_view interpret_kappa(double kappa) {
    if (kappa < 0.0) return "no agreement";
    if (kappa <= 0.20) return "slight";
    if (kappa <= 0.40) return "fair";
    if (kappa <= 0.60) return "moderate";
    if (kappa <= 0.80) return "substantial";
    return "perfect";
}

// ---------------------------------------------------------------------------
// Train/test split

// Stratified by label; per-class test count is ceil(fraction * class size)
// with an epsilon guard so an exact product never rounds up. Output keeps the
// input order inside each part.
inline DatasetSplit split_dataset(const std::vector<LabeledPair>& pairs, double test_fraction,
                                  std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw DataError("test_fraction must be in (0, 1)");

    std::vector<std::size_t> by_label[2];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        int l = pairs[i].label;
        if (l != 0 && l != 1) throw DataError("labels must be binary");
        by_label[l].push_back(i);
    }
    for (int l : {0, 1})
        if (by_label[l].size() < 2)
            throw DataError("class " + std::to_string(l) + " has fewer than 2 items; stratified split impossible");

    std::vector<char> in_test(pairs.size(), 0);
    for (int l : {0, 1}) {
        auto idx = by_label[l];
        const auto n_test = static_cast<std::size_t>(
            std::ceil(test_fraction * static_cast<double>(idx.size()) - 1e-9));
        seeded_shuffle(idx, seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(l + 1)));
        for (std::size_t t = 0; t < n_test; ++t) in_test[idx[t]] = 1;
    }

    DatasetSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        (in_test[i] ? split.test : split.train).push_back(pairs[i]);
    return split;
}

}  // namespace infomatch
