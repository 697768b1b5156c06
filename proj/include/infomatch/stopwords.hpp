#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "infomatch/core.hpp"

namespace infomatch {

using Stoplist = std::unordered_set<std::string>;

// The classic 127-word English stopword list. data/stopwords.txt carries the
// same list in file form; a test keeps the two in sync.
inline constexpr std::array<std::string_view, 127> kDefaultStopwords = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what",
    "which", "who", "whom", "this", "that", "these", "those", "am", "is", "are",
    "was", "were", "be", "been", "being", "have", "has", "had", "having", "do",
    "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about",
    "against", "between", "into", "through", "during", "before", "after", "above", "below", "to",
    "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
    "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
    "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
    "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s",
    "t", "can", "will", "just", "don", "should", "now"};

inline const Stoplist& default_stoplist() {
    static const Stoplist list(kDefaultStopwords.begin(), kDefaultStopwords.end());
    return list;
}

// stopwords.txt format: one lowercase word per line.
inline Stoplist load_stoplist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword file: " + path.string());
    Stoplist list;
    std::string line;
    while (std::getline(in, line)) {
        auto word = trim(line);
        if (!word.empty()) list.insert(std::string(word));
    }
    return list;
}

}  // namespace infomatch
