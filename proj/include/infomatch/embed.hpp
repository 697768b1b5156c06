#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "infomatch/core.hpp"
#include "infomatch/preprocess.hpp"
#include "infomatch/summarize.hpp"

namespace infomatch {

enum class VectorFormat { text, word2vec_binary };

struct WordVectorStore {
    std::string name;
    std::size_t dimension = 0;
    std::unordered_map<std::string, std::vector<float>> entries;

    // Lookup tries the surface form first, then its lowercase form (stores
    // such as the 840B GloVe set are cased; our pipeline is not).
    const std::vector<float>* find(const std::string& word) const {
        auto it = entries.find(word);
        if (it != entries.end()) return &it->second;
        std::string lower = to_lower_ascii(word);
        if (lower != word) {
            it = entries.find(lower);
            if (it != entries.end()) return &it->second;
        }
        return nullptr;
    }
};

struct FrequencyTable {
    std::unordered_map<std::string, double> p;
    std::size_t total_tokens = 0;

    // Unseen words get the rare-word default 1/total.
    double probability(const std::string& word) const {
        auto it = p.find(word);
        if (it != p.end()) return it->second;
        return 1.0 / static_cast<double>(total_tokens);
    }
};

struct DocEmbedding {
    std::string doc_id;
    std::vector<double> vector;
    std::size_t tokens_used = 0;
    std::size_t tokens_oov = 0;
};

// ---------------------------------------------------------------------------
// Vector store IO

namespace detail {

inline void store_insert(WordVectorStore& store, std::string word, std::vector<float> values,
                         Warnings* warnings) {
    if (!store.entries.emplace(std::move(word), std::move(values)).second)
        warn(warnings, "duplicate word vector in " + store.name + "; first occurrence kept");
}

inline WordVectorStore load_vectors_text(std::ifstream& in, const std::filesystem::path& path,
                                         Warnings* warnings) {
    WordVectorStore store;
    store.name = path.string();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        std::vector<std::string_view> fields;
        for (auto f : split_on(trimmed, ' '))
            if (!f.empty()) fields.push_back(f);
        if (fields.size() < 2)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected word followed by vector components");
        if (store.dimension == 0) store.dimension = fields.size() - 1;
        if (fields.size() - 1 != store.dimension)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": word '" +
                             std::string(fields[0]) + "' has " +
                             std::to_string(fields.size() - 1) + " components, expected " +
                             std::to_string(store.dimension));
        std::vector<float> values(store.dimension);
        for (std::size_t d = 0; d < store.dimension; ++d)
            values[d] = static_cast<float>(parse_double(
                fields[d + 1], path.string() + ":" + std::to_string(lineno)));
        store_insert(store, std::string(fields[0]), std::move(values), warnings);
    }
    return store;
}

// word2vec binary layout: "vocab dim\n", then per entry the word, one space,
// and dim little-endian IEEE-754 floats. A single trailing newline after the
// floats (as written by the original word2vec tool) is tolerated.
inline WordVectorStore load_vectors_binary(std::ifstream& in, const std::filesystem::path& path,
                                           Warnings* warnings) {
    WordVectorStore store;
    store.name = path.string();
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path.string() + ": missing binary header");
    auto fields = split_on(trim(header), ' ');
    if (fields.size() != 2)
        throw ParseError(path.string() + ": bad binary header '" + header + "'");
    const auto vocab = static_cast<std::size_t>(parse_int(fields[0], path.string() + " header"));
    store.dimension = static_cast<std::size_t>(parse_int(fields[1], path.string() + " header"));
    if (store.dimension == 0) throw ParseError(path.string() + ": zero dimension");

    for (std::size_t entry = 0; entry < vocab; ++entry) {
        std::string word;
        char c;
        while (in.get(c) && c != ' ') {
            if (c != '\n') word += c;
        }
        if (!in)
            throw ParseError(path.string() + ": truncated at entry " + std::to_string(entry + 1) +
                             " of " + std::to_string(vocab));
        std::vector<float> values(store.dimension);
        std::vector<unsigned char> raw(4 * store.dimension);
        if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
            throw ParseError(path.string() + ": truncated vector for word '" + word + "'");
        for (std::size_t d = 0; d < store.dimension; ++d) {
            std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * d]) |
                                 (static_cast<std::uint32_t>(raw[4 * d + 1]) << 8) |
                                 (static_cast<std::uint32_t>(raw[4 * d + 2]) << 16) |
                                 (static_cast<std::uint32_t>(raw[4 * d + 3]) << 24);
            float f;
            std::memcpy(&f, &bits, sizeof(f));
            values[d] = f;
        }
        store_insert(store, std::move(word), std::move(values), warnings);
    }
    return store;
}

}  // namespace detail

inline WordVectorStore load_vectors(const std::filesystem::path& path, VectorFormat format,
                                    Warnings* warnings = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vector file: " + path.string());
    WordVectorStore store = format == VectorFormat::text
                                ? detail::load_vectors_text(in, path, warnings)
                                : detail::load_vectors_binary(in, path, warnings);
    if (store.entries.empty()) throw DataError("vector file " + path.string() + " is empty");
    return store;
}

inline void save_vectors_binary(const std::filesystem::path& path, const WordVectorStore& store,
                                const std::vector<std::string>& order) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vector file: " + path.string());
    out << order.size() << ' ' << store.dimension << '\n';
    for (const auto& word : order) {
        auto it = store.entries.find(word);
        if (it == store.entries.end()) throw DataError("word '" + word + "' not in store");
        out << word << ' ';
        for (float f : it->second) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof(bits));
            char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                             static_cast<char>((bits >> 16) & 0xff),
                             static_cast<char>((bits >> 24) & 0xff)};
            out.write(bytes, 4);
        }
    }
}

// ---------------------------------------------------------------------------
// Word probabilities and SIF pooling

// p(w) over surface (unstemmed, lowercased, stopwords included) tokens, so
// the table does not depend on the preprocessing flags in effect.
inline FrequencyTable word_probabilities(const std::vector<TokenizedDocument>& corpus) {
    if (corpus.empty()) throw DataError("word_probabilities: empty corpus");
    FrequencyTable table;
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& doc : corpus)
        for (const auto& sentence : doc.sentences)
            for (auto& token : tokenize(sentence.raw_text)) {
                ++counts[token];
                ++table.total_tokens;
            }
    if (table.total_tokens == 0) throw DataError("word_probabilities: corpus has no tokens");
    for (auto& [word, count] : counts)
        table.p.emplace(word, static_cast<double>(count) / static_cast<double>(table.total_tokens));
    return table;
}

inline double sif_weight(const std::string& word, const FrequencyTable& freq, double a = 1e-3) {
    return a / (a + freq.probability(word));
}

// SIF-weighted mean of the summary's word vectors. Tokens are the surface
// lowercase forms of the selected sentences after stopword removal; stems are
// never looked up (pretrained stores key surface forms).
inline DocEmbedding embed_document(const Summary& summary, const WordVectorStore& store,
                                   const FrequencyTable& freq, double a = 1e-3,
                                   const Stoplist* stoplist = nullptr) {
    const Stoplist& stops = stoplist ? *stoplist : default_stoplist();
    DocEmbedding embedding;
    embedding.doc_id = summary.doc_id;
    embedding.vector.assign(store.dimension, 0.0);
    for (const auto& sentence : summary.sentences) {
        for (const auto& token : sentence_surface_tokens(sentence, &stops)) {
            const std::vector<float>* vec = store.find(token);
            if (!vec) {
                ++embedding.tokens_oov;
                continue;
            }
            ++embedding.tokens_used;
            const double w = sif_weight(token, freq, a);
            for (std::size_t d = 0; d < store.dimension; ++d)
                embedding.vector[d] += w * static_cast<double>((*vec)[d]);
        }
    }
    if (embedding.tokens_used == 0)
        throw EmptyEmbeddingError("document '" + summary.doc_id +
                                  "' has no in-vocabulary tokens");
    for (double& x : embedding.vector) x /= static_cast<double>(embedding.tokens_used);
    return embedding;
}

// Common-component removal from the SIF paper: project out the first
// principal direction of the batch. Off by default in the pipeline.
inline void remove_principal_component(std::vector<DocEmbedding>& embeddings) {
    if (embeddings.size() < 2) return;
    const std::size_t dim = embeddings.front().vector.size();
    std::vector<double> direction(embeddings.front().vector);
    double norm = 0.0;
    for (double x : direction) norm += x * x;
    if (norm == 0.0) direction.assign(dim, 1.0);

    // Power iteration on the (uncentered) second-moment matrix.
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> next(dim, 0.0);
        for (const auto& e : embeddings) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += e.vector[d] * direction[d];
            for (std::size_t d = 0; d < dim; ++d) next[d] += dot * e.vector[d];
        }
        double next_norm = 0.0;
        for (double x : next) next_norm += x * x;
        next_norm = std::sqrt(next_norm);
        if (next_norm == 0.0) return;
        for (double& x : next) x /= next_norm;
        direction = std::move(next);
    }
    for (auto& e : embeddings) {
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) dot += e.vector[d] * direction[d];
        for (std::size_t d = 0; d < dim; ++d) e.vector[d] -= dot * direction[d];
    }
}

}  // namespace infomatch
