#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"
#include "lexgraph/community.hpp"
#include "lexgraph/embedding.hpp"
#include "lexgraph/graph_build.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/pipeline.hpp"

namespace lexgraph {

// The full resolved run configuration. Serialized into every report and
// prediction dump for provenance. Secrets never appear here: only the names
// of the environment variables to read them from.
struct RunConfig {
    // corpus inputs
    std::string cases_path;
    std::string articles_path;
    std::string interpretations_path;
    std::string test_cases_path;
    std::string graph_path;

    // chat backend
    std::string backend = "scripted";  // scripted | http
    std::string script_path;
    std::string chat_base_url;
    std::string chat_model;
    std::string chat_key_env = "LEXGRAPH_CHAT_API_KEY";

    // embedding provider
    std::string embedding = "deterministic";  // deterministic | http
    std::size_t embedding_dimension = 256;
    std::string embed_base_url;
    std::string embed_model;
    std::string embed_key_env = "LEXGRAPH_EMBED_API_KEY";

    // retrieval / build parameters
    int k = 5;
    int knn_k = 3;
    double leiden_resolution = 1.0;
    int leiden_max_passes = 10;
    std::uint64_t rng_seed = 0;
    std::size_t min_community_size = 1;
    std::size_t context_cap = 12;
    bool strict_references = false;
    int charge_case_cap = 10;
    int community_top_m = 1;
    int max_in_flight = 4;

    // outputs
    std::string report_path;
    std::string predictions_path;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["cases_path"] = cases_path;
        j["articles_path"] = articles_path;
        j["interpretations_path"] = interpretations_path;
        j["test_cases_path"] = test_cases_path;
        j["graph_path"] = graph_path;
        j["backend"] = backend;
        j["script_path"] = script_path;
        j["chat_base_url"] = chat_base_url;
        j["chat_model"] = chat_model;
        j["chat_key_env"] = chat_key_env;
        j["embedding"] = embedding;
        j["embedding_dimension"] = embedding_dimension;
        j["embed_base_url"] = embed_base_url;
        j["embed_model"] = embed_model;
        j["embed_key_env"] = embed_key_env;
        j["k"] = k;
        j["knn_k"] = knn_k;
        j["leiden_resolution"] = leiden_resolution;
        j["leiden_max_passes"] = leiden_max_passes;
        j["rng_seed"] = rng_seed;
        j["min_community_size"] = min_community_size;
        j["context_cap"] = context_cap;
        j["strict_references"] = strict_references;
        j["charge_case_cap"] = charge_case_cap;
        j["community_top_m"] = community_top_m;
        j["max_in_flight"] = max_in_flight;
        j["report_path"] = report_path;
        j["predictions_path"] = predictions_path;
        return j;
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        auto get = [&j](const char* key, auto& target) {
            if (j.contains(key)) target = j[key].get<std::decay_t<decltype(target)>>();
        };
        get("cases_path", c.cases_path);
        get("articles_path", c.articles_path);
        get("interpretations_path", c.interpretations_path);
        get("test_cases_path", c.test_cases_path);
        get("graph_path", c.graph_path);
        get("backend", c.backend);
        get("script_path", c.script_path);
        get("chat_base_url", c.chat_base_url);
        get("chat_model", c.chat_model);
        get("chat_key_env", c.chat_key_env);
        get("embedding", c.embedding);
        get("embedding_dimension", c.embedding_dimension);
        get("embed_base_url", c.embed_base_url);
        get("embed_model", c.embed_model);
        get("embed_key_env", c.embed_key_env);
        get("k", c.k);
        get("knn_k", c.knn_k);
        get("leiden_resolution", c.leiden_resolution);
        get("leiden_max_passes", c.leiden_max_passes);
        get("rng_seed", c.rng_seed);
        get("min_community_size", c.min_community_size);
        get("context_cap", c.context_cap);
        get("strict_references", c.strict_references);
        get("charge_case_cap", c.charge_case_cap);
        get("community_top_m", c.community_top_m);
        get("max_in_flight", c.max_in_flight);
        get("report_path", c.report_path);
        get("predictions_path", c.predictions_path);
        return c;
    }

    static RunConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config file: " + path.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("config file is not valid JSON: " + std::string(e.what()));
        }
        return from_json(j);
    }

    LeidenConfig leiden() const {
        LeidenConfig c;
        c.resolution = leiden_resolution;
        c.max_passes = leiden_max_passes;
        c.rng_seed = rng_seed;
        c.min_community_size = min_community_size;
        return c;
    }

    BuildOptions build_options() const {
        BuildOptions o;
        o.knn_k = knn_k;
        o.leiden = leiden();
        o.strict_references = strict_references;
        return o;
    }

    PipelineConfig pipeline() const {
        PipelineConfig p;
        p.research.k = k;
        p.research.charge_case_cap = charge_case_cap;
        p.research.community_top_m = community_top_m;
        p.adjudicator.context_cap = context_cap;
        return p;
    }
};

inline std::string read_env_key(const std::string& env_name) {
    if (env_name.empty()) return {};
    const char* value = std::getenv(env_name.c_str());
    return value ? std::string(value) : std::string{};
}

inline std::unique_ptr<ChatBackend> make_chat_backend(const RunConfig& config) {
    if (config.backend == "scripted") {
        if (config.script_path.empty())
            throw ValidationError("scripted backend requires script_path");
        return std::make_unique<ScriptedBackend>(
            ScriptedBackend::from_file(config.script_path));
    }
    if (config.backend == "http") {
        HttpChatBackend::Options opts;
        opts.base_url = config.chat_base_url;
        opts.model = config.chat_model;
        opts.api_key = read_env_key(config.chat_key_env);
        return std::make_unique<HttpChatBackend>(opts);
    }
    throw ValidationError("unknown backend '" + config.backend + "' (scripted|http)");
}

inline std::unique_ptr<EmbeddingProvider> make_embedding_provider(const RunConfig& config) {
    if (config.embedding == "deterministic")
        return std::make_unique<HashedTokenEmbedder>(config.embedding_dimension);
    if (config.embedding == "http") {
        HttpEmbedder::Options opts;
        opts.base_url = config.embed_base_url;
        opts.model = config.embed_model;
        opts.api_key = read_env_key(config.embed_key_env);
        return std::make_unique<HttpEmbedder>(opts);
    }
    throw ValidationError("unknown embedding provider '" + config.embedding +
                          "' (deterministic|http)");
}

}  // namespace lexgraph
