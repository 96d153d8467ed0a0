#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"

namespace lexgraph {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }

    bool all_finite() const {
        return std::all_of(values.begin(), values.end(),
                           [](double v) { return std::isfinite(v); });
    }

    bool operator==(const EmbeddingVector&) const = default;
};

// Contract for the embedding function behind graph construction and retrieval.
// All providers participating in one graph build must share one dimension.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    // Pure for deterministic providers: identical text -> identical vector.
    virtual EmbeddingVector embed(std::string_view text) = 0;
};

// Deterministic local embedder: lowercase alphanumeric tokens hashed into
// `dimension` count buckets, L2-normalized. No model weights, fully
// reproducible, suitable for tests and offline fixtures.
class HashedTokenEmbedder final : public EmbeddingProvider {
public:
    explicit HashedTokenEmbedder(std::size_t dimension = 256) : dim_(dimension) {
        if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
    }

    std::string name() const override { return "hashed-token"; }
    std::size_t dimension() const override { return dim_; }

    EmbeddingVector embed(std::string_view text) override {
        if (text.empty()) throw ValidationError("cannot embed empty text");
        EmbeddingVector out;
        out.values.assign(dim_, 0.0);
        std::size_t tokens = 0;
        std::string tok;
        auto flush = [&] {
            if (tok.empty()) return;
            out.values[fnv1a64(tok) % dim_] += 1.0;
            ++tokens;
            tok.clear();
        };
        for (char c : text) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                tok += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            } else {
                flush();
            }
        }
        flush();
        if (tokens == 0) {
            // Token-free input (punctuation only): hash the raw bytes so the
            // vector is never zero and cosine stays defined.
            out.values[fnv1a64(text) % dim_] = 1.0;
        }
        double norm = 0.0;
        for (double v : out.values) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : out.values) v /= norm;
        return out;
    }

private:
    std::size_t dim_;
};

// Remote embedder speaking the OpenAI-compatible wire shape:
//   POST {model, input: [texts]} -> {data: [{embedding: [...]}]}
// The dimension is adopted from the first response and enforced afterwards.
class HttpEmbedder final : public EmbeddingProvider {
public:
    struct Options {
        std::string base_url;              // e.g. "http://127.0.0.1:8080"
        std::string path = "/v1/embeddings";
        std::string model;
        std::string api_key;               // empty -> no Authorization header
        int max_retries = 2;
        std::chrono::milliseconds retry_base_delay{100};
        std::size_t expected_dimension = 0;  // 0 -> adopt from first response
    };

    explicit HttpEmbedder(Options opts) : opts_(std::move(opts)), dim_(opts_.expected_dimension) {
        if (opts_.base_url.empty()) throw ValidationError("remote embedder requires a base url");
    }

    std::string name() const override { return "http:" + opts_.model; }
    std::size_t dimension() const override { return dim_; }

    EmbeddingVector embed(std::string_view text) override {
        if (text.empty()) throw ValidationError("cannot embed empty text");
        nlohmann::json body = {{"model", opts_.model}, {"input", {std::string(text)}}};
        std::string reply = post_with_retries(body.dump());
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(reply);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("embedding response is not valid JSON: ") + e.what());
        }
        if (!parsed.contains("data") || !parsed["data"].is_array() || parsed["data"].empty())
            throw BackendError("embedding response missing data[0]");
        const auto& entry = parsed["data"][0];
        if (!entry.contains("embedding") || !entry["embedding"].is_array())
            throw BackendError("embedding response missing data[0].embedding");
        EmbeddingVector out;
        out.values = entry["embedding"].get<std::vector<double>>();
        if (!out.all_finite()) throw BackendError("embedding response contains non-finite values");
        if (dim_ == 0) {
            dim_ = out.dimension();
        } else if (out.dimension() != dim_) {
            throw BackendError("embedding dimension mismatch: expected " + std::to_string(dim_) +
                               ", got " + std::to_string(out.dimension()));
        }
        return out;
    }

private:
    std::string post_with_retries(const std::string& body) {
        std::string last_error;
        for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(opts_.retry_base_delay * (1 << (attempt - 1)));
            httplib::Client client(opts_.base_url);
            httplib::Headers headers;
            if (!opts_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + opts_.api_key);
            auto res = client.Post(opts_.path, headers, body, "application/json");
            if (!res) {
                last_error = "connection failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendError("embedding endpoint returned status " +
                                   std::to_string(res->status));
            return res->body;
        }
        throw TransportError("embedding request failed after " +
                             std::to_string(opts_.max_retries + 1) + " attempts: " + last_error);
    }

    Options opts_;
    std::size_t dim_;
};

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension())
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.dimension()) +
                              " vs " + std::to_string(b.dimension()) + ")");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct ScoredId {
    std::string id;
    double score = 0.0;

    bool operator==(const ScoredId&) const = default;
};

// Descending score, ties broken by ascending id: a total, reproducible order.
inline bool scored_before(const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

// Exact top-k over an ordered id->vector map. Result length is
// min(k, |candidates|), descending by score with ascending-id ties.
inline std::vector<ScoredId> top_k(const EmbeddingVector& query,
                                   const std::map<std::string, EmbeddingVector>& candidates,
                                   std::size_t k) {
    std::vector<ScoredId> scored;
    scored.reserve(candidates.size());
    for (const auto& [id, vec] : candidates)
        scored.push_back({id, cosine_similarity(query, vec)});
    std::sort(scored.begin(), scored.end(), scored_before);
    if (scored.size() > k) scored.resize(k);
    return scored;
}

// Immutable id -> vector store with exact (brute-force) top-k search.
class VectorStore {
public:
    void add(std::string id, EmbeddingVector vec) {
        if (!vec.all_finite()) throw ValidationError("vector for '" + id + "' is not finite");
        if (!entries_.emplace(std::move(id), std::move(vec)).second)
            throw ValidationError("duplicate vector id");
    }

    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& id) const { return entries_.count(id) > 0; }

    const EmbeddingVector& get(const std::string& id) const {
        auto it = entries_.find(id);
        if (it == entries_.end()) throw ValidationError("unknown vector id: " + id);
        return it->second;
    }

    const std::map<std::string, EmbeddingVector>& entries() const { return entries_; }

    std::vector<ScoredId> top_k(const EmbeddingVector& query, std::size_t k) const {
        return lexgraph::top_k(query, entries_, k);
    }

private:
    std::map<std::string, EmbeddingVector> entries_;
};

}  // namespace lexgraph
