#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "infomatch/core.hpp"
#include "infomatch/corpus.hpp"
#include "infomatch/porter.hpp"
#include "infomatch/stopwords.hpp"

namespace infomatch {

struct Sentence {
    std::size_t index = 0;
    std::string raw_text;
    std::vector<std::string> tokens;  // processed: lowercased, filtered, stemmed per config
};

struct TokenizedDocument {
    std::string doc_id;
    std::vector<Sentence> sentences;
    std::vector<std::string> flat_tokens;
};

struct PreprocessConfig {
    bool stemming = true;
    bool stopwords = true;
    const Stoplist* stoplist = nullptr;                        // nullptr -> bundled default
    const std::vector<std::string>* abbreviations = nullptr;   // nullptr -> bundled default
};

// Abbreviations whose trailing period does not end a sentence.
inline const std::vector<std::string>& default_abbreviations() {
    static const std::vector<std::string> list = {"dr",  "mr", "mrs", "ms", "prof", "e.g", "i.e",
                                                  "etc", "vs", "fig", "st", "jr",   "sr",  "al"};
    return list;
}

inline std::vector<std::string> load_abbreviations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open abbreviations file: " + path.string());
    std::vector<std::string> list;
    std::string line;
    while (std::getline(in, line)) {
        auto word = trim(line);
        if (!word.empty()) list.push_back(to_lower_ascii(word));
    }
    return list;
}

namespace detail {

// Word immediately before position `pos` (exclusive), lowercased, with
// leading non-alphanumeric characters and trailing periods stripped: for
// "(e.g." it yields "e.g", for "Dr" it yields "dr".
inline std::string word_before(std::string_view text, std::size_t pos) {
    std::size_t begin = pos;
    while (begin > 0 && !is_ascii_space(text[begin - 1])) --begin;
    std::string_view word = text.substr(begin, pos - begin);
    while (!word.empty() && word.back() == '.') word.remove_suffix(1);
    while (!word.empty()) {
        char c = word.front();
        bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        if (alnum) break;
        word.remove_prefix(1);
    }
    return to_lower_ascii(word);
}

}  // namespace detail

// Rule-based sentence splitter: boundaries at '.', '?', '!' followed by
// whitespace or end of text, with an abbreviation guard on periods. The whole
// text becomes one sentence when no boundary is found.
inline std::vector<std::string> split_sentences(
    std::string_view text, const std::vector<std::string>* abbreviations = nullptr) {
    const auto& abbrevs = abbreviations ? *abbreviations : default_abbreviations();

    std::vector<std::string> sentences;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        auto sentence = trim(text.substr(start, end - start));
        if (!sentence.empty()) sentences.emplace_back(sentence);
        start = end;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '.' && c != '?' && c != '!') continue;
        if (i + 1 < text.size() && !is_ascii_space(text[i + 1])) continue;
        if (c == '.') {
            std::string word = detail::word_before(text, i);
            bool guarded = false;
            for (const auto& a : abbrevs)
                if (word == a) {
                    guarded = true;
                    break;
                }
            if (guarded) continue;
        }
        emit(i + 1);
    }
    emit(text.size());
    return sentences;
}

// Lowercasing tokenizer splitting on non-alphanumeric boundaries. Hyphens
// between word characters are kept ("covid-19" stays whole); bytes >= 0x80
// count as word characters so non-ASCII words survive intact.
inline std::vector<std::string> tokenize(std::string_view text) {
    auto is_word = [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
    };
    auto lower = [](unsigned char c) -> unsigned char {
        return (c >= 'A' && c <= 'Z') ? static_cast<unsigned char>(c - 'A' + 'a') : c;
    };

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = lower(static_cast<unsigned char>(text[i]));
        if (is_word(c)) {
            current += static_cast<char>(c);
        } else if (c == '-' && !current.empty() && i + 1 < text.size() &&
                   is_word(lower(static_cast<unsigned char>(text[i + 1])))) {
            current += '-';
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

inline std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                                 const Stoplist& stoplist) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!stoplist.contains(t)) kept.push_back(t);
    return kept;
}

// Surface (unstemmed, lowercase) tokens of a sentence, optionally
// stopword-filtered. Embedding lookup runs on these, never on stems.
inline std::vector<std::string> sentence_surface_tokens(const Sentence& sentence,
                                                        const Stoplist* stoplist = nullptr) {
    auto tokens = tokenize(sentence.raw_text);
    if (stoplist) return remove_stopwords(tokens, *stoplist);
    return tokens;
}

// Full pipeline: sentence split -> per-sentence tokenize -> stopword removal
// -> Porter stemming, with the latter two switchable. Sentence structure is
// preserved; a document with no alphanumeric content at all is rejected.
inline TokenizedDocument preprocess(const Document& doc, const PreprocessConfig& config = {}) {
    const Stoplist& stoplist = config.stoplist ? *config.stoplist : default_stoplist();

    TokenizedDocument out;
    out.doc_id = doc.id;
    bool any_raw_token = false;
    for (auto& raw : split_sentences(doc.text, config.abbreviations)) {
        Sentence sentence;
        sentence.index = out.sentences.size();
        sentence.raw_text = std::move(raw);
        auto tokens = tokenize(sentence.raw_text);
        if (!tokens.empty()) any_raw_token = true;
        if (config.stopwords) tokens = remove_stopwords(tokens, stoplist);
        if (config.stemming)
            for (auto& t : tokens) t = porter_stem(t);
        sentence.tokens = std::move(tokens);
        out.sentences.push_back(std::move(sentence));
    }
    if (!any_raw_token)
        throw EmptyDocumentError("document '" + doc.id + "' has no tokenizable content");
    for (const auto& s : out.sentences)
        out.flat_tokens.insert(out.flat_tokens.end(), s.tokens.begin(), s.tokens.end());
    return out;
}

}  // namespace infomatch
