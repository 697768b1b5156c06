#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace infomatch {

// Error taxonomy. ParseError covers malformed input files (message carries
// line/offset context); DataError covers semantically invalid data. The CLI
// maps both onto exit code 2, anything else onto 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct EmptyDocumentError : DataError {
    using DataError::DataError;
};

struct EmptyEmbeddingError : DataError {
    using DataError::DataError;
};

// Non-fatal diagnostics collected by loaders; callers pass nullptr to drop them.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
    if (sink) sink->push_back(std::move(message));
}

// Deterministic Fisher-Yates shuffle. std::shuffle's draw from the engine is
// implementation-defined, so outputs would not be stable across standard
// libraries; this one is pinned to mt19937_64 modulo reduction.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// Shortest round-trip decimal form; locale-free and deterministic, used for
// every number that ends up in a report file.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("invalid number '" + std::string(s) + "' in " + context);
    return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("invalid integer '" + std::string(s) + "' in " + context);
    return v;
}

}  // namespace infomatch
