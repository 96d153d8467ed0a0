#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lexgraph {

// Base error type. Subclasses map to CLI exit codes: validation/data -> 2,
// backend/transport -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data, schema violations, broken invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

// LLM output that does not match the expected structured format.
class ParseError : public Error {
public:
    using Error::Error;
};

// Retryable network-level failure (connection refused, 5xx).
class TransportError : public Error {
public:
    using Error::Error;
};

// Non-retryable backend failure (unknown script fingerprint, 4xx, exhausted retries).
class BackendError : public Error {
public:
    using Error::Error;
};

// Persisted-file problems: bad magic, version mismatch, checksum failure.
class StoreError : public Error {
public:
    using Error::Error;
};

// --- small utilities -------------------------------------------------------

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Whitespace-delimited token count; used as the deterministic token estimate
// for usage accounting when a backend does not report real counts.
inline std::size_t approx_token_count(std::string_view text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (char c : text) {
        bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_tok) ++n;
        in_tok = !ws;
    }
    return n;
}

// --- shared domain types ----------------------------------------------------

// A criminal penalty in one of three mutually exclusive forms: a finite term
// in months, life imprisonment, or the death penalty.
struct PenaltyTerm {
    std::optional<int> months;
    bool life_imprisonment = false;
    bool death_penalty = false;

    bool operator==(const PenaltyTerm&) const = default;

    // At most one active form: a positive finite term, life, or death.
    bool single_active_form() const {
        int active = 0;
        if (months.has_value()) ++active;
        if (life_imprisonment) ++active;
        if (death_penalty) ++active;
        return active <= 1;
    }

    bool is_finite() const { return !life_imprisonment && !death_penalty; }
};

}  // namespace lexgraph
