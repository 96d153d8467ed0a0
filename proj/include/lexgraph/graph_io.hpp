#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"
#include "lexgraph/graph.hpp"

namespace lexgraph {

inline constexpr std::string_view kGraphMagic = "lexgraph-hierargraph";
inline constexpr int kGraphFormatVersion = 1;

namespace graph_json {

using Json = nlohmann::ordered_json;

inline Json dump(const EmbeddingVector& v) { return Json(v.values); }
inline EmbeddingVector load_vector(const nlohmann::json& j) {
    return EmbeddingVector{j.get<std::vector<double>>()};
}

inline Json dump(const PenaltyTerm& term) {
    Json j;
    if (term.months.has_value()) j["months"] = *term.months;
    j["life_imprisonment"] = term.life_imprisonment;
    j["death_penalty"] = term.death_penalty;
    return j;
}
inline PenaltyTerm load_penalty(const nlohmann::json& j) {
    PenaltyTerm term;
    if (j.contains("months")) term.months = j["months"].get<int>();
    term.life_imprisonment = j["life_imprisonment"].get<bool>();
    term.death_penalty = j["death_penalty"].get<bool>();
    return term;
}

inline Json dump(const CaseDocument& doc) {
    Json j;
    j["case_id"] = doc.case_id;
    j["fact_text"] = doc.fact_text;
    j["defendants"] = doc.defendants;
    j["charge_labels"] = doc.charge_labels;
    j["cited_article_ids"] = doc.cited_article_ids;
    j["penalty"] = dump(doc.penalty);
    return j;
}
inline CaseDocument load_case(const nlohmann::json& j) {
    CaseDocument doc;
    doc.case_id = j["case_id"].get<std::string>();
    doc.fact_text = j["fact_text"].get<std::string>();
    doc.defendants = j["defendants"].get<std::vector<std::string>>();
    doc.charge_labels = j["charge_labels"].get<std::vector<std::string>>();
    doc.cited_article_ids = j["cited_article_ids"].get<std::vector<std::string>>();
    doc.penalty = load_penalty(j["penalty"]);
    return doc;
}

inline Json dump(const ArticleDocument& doc) {
    Json j;
    j["article_id"] = doc.article_id;
    j["article_number"] = doc.article_number;
    j["body_text"] = doc.body_text;
    j["interpretation_ids"] = doc.interpretation_ids;
    return j;
}
inline ArticleDocument load_article(const nlohmann::json& j) {
    ArticleDocument doc;
    doc.article_id = j["article_id"].get<std::string>();
    doc.article_number = j["article_number"].get<std::string>();
    doc.body_text = j["body_text"].get<std::string>();
    doc.interpretation_ids = j["interpretation_ids"].get<std::vector<std::string>>();
    return doc;
}

inline Json dump(const InterpretationDocument& doc) {
    Json j;
    j["interpretation_id"] = doc.interpretation_id;
    j["body_text"] = doc.body_text;
    j["target_article_ids"] = doc.target_article_ids;
    return j;
}
inline InterpretationDocument load_interpretation(const nlohmann::json& j) {
    InterpretationDocument doc;
    doc.interpretation_id = j["interpretation_id"].get<std::string>();
    doc.body_text = j["body_text"].get<std::string>();
    doc.target_article_ids = j["target_article_ids"].get<std::vector<std::string>>();
    return doc;
}

inline Json dump_edges(const std::set<std::pair<std::string, std::string>>& edges) {
    Json j = Json::array();
    for (const auto& [a, b] : edges) j.push_back(Json::array({a, b}));
    return j;
}
inline std::set<std::pair<std::string, std::string>> load_edges(const nlohmann::json& j) {
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : j) edges.insert({e[0].get<std::string>(), e[1].get<std::string>()});
    return edges;
}

inline Json dump(const OntologyFeatures& f) {
    Json j;
    j["defendant_attributes"] = f.defendant_attributes;
    j["criminal_behaviors"] = f.criminal_behaviors;
    j["victim_characteristics"] = f.victim_characteristics;
    j["subjective_mental_states"] = f.subjective_mental_states;
    return j;
}
inline OntologyFeatures load_features(const nlohmann::json& j) {
    OntologyFeatures f;
    f.defendant_attributes = j["defendant_attributes"].get<std::vector<std::string>>();
    f.criminal_behaviors = j["criminal_behaviors"].get<std::vector<std::string>>();
    f.victim_characteristics = j["victim_characteristics"].get<std::vector<std::string>>();
    f.subjective_mental_states = j["subjective_mental_states"].get<std::vector<std::string>>();
    return f;
}

inline Json dump(const HierarGraph& graph) {
    Json root;

    Json fact;
    Json case_nodes = Json::object();
    for (const auto& [id, doc] : graph.fact.case_nodes) case_nodes[id] = dump(doc);
    fact["case_nodes"] = case_nodes;
    Json article_nodes = Json::object();
    for (const auto& [id, doc] : graph.fact.article_nodes) article_nodes[id] = dump(doc);
    fact["article_nodes"] = article_nodes;
    Json offense_nodes = Json::object();
    for (const auto& [name, node] : graph.fact.offense_nodes)
        offense_nodes[name] = std::vector<std::string>(node.member_case_ids.begin(),
                                                       node.member_case_ids.end());
    fact["offense_nodes"] = offense_nodes;
    fact["edges_case_article"] = dump_edges(graph.fact.edges_case_article);
    fact["edges_case_offense"] = dump_edges(graph.fact.edges_case_offense);
    fact["case_order"] = graph.fact.case_order;
    root["fact"] = fact;

    Json ontology;
    Json feature_index = Json::object();
    for (const auto& [id, f] : graph.ontology.feature_index) feature_index[id] = dump(f);
    ontology["feature_index"] = feature_index;
    Json case_embeddings = Json::object();
    for (const auto& [id, v] : graph.ontology.case_embeddings) case_embeddings[id] = dump(v);
    ontology["case_embeddings"] = case_embeddings;
    ontology["knn_edges"] = dump_edges(graph.ontology.knn_edges);
    Json communities = Json::object();
    for (const auto& [id, node] : graph.ontology.communities) {
        Json c;
        c["member_case_ids"] = std::vector<std::string>(node.member_case_ids.begin(),
                                                        node.member_case_ids.end());
        c["summary_text"] = node.summary_text;
        c["summary_embedding"] = dump(node.summary_embedding);
        c["summary_fallback"] = node.summary_fallback;
        communities[id] = c;
    }
    ontology["communities"] = communities;
    ontology["membership"] = graph.ontology.membership;
    ontology["fallback_embedding_cases"] =
        std::vector<std::string>(graph.ontology.fallback_embedding_cases.begin(),
                                 graph.ontology.fallback_embedding_cases.end());
    root["ontology"] = ontology;

    Json rule;
    Json rule_articles = Json::object();
    for (const auto& [id, doc] : graph.rule.article_nodes) rule_articles[id] = dump(doc);
    rule["article_nodes"] = rule_articles;
    Json interpretations = Json::object();
    for (const auto& [id, doc] : graph.rule.interpretation_nodes)
        interpretations[id] = dump(doc);
    rule["interpretation_nodes"] = interpretations;
    rule["edges_article_interp"] = dump_edges(graph.rule.edges_article_interp);
    Json checklists = Json::object();
    for (const auto& [id, checklist] : graph.rule.checklists) {
        Json c;
        c["items"] = checklist.items;
        c["fallback"] = checklist.fallback;
        checklists[id] = c;
    }
    rule["checklists"] = checklists;
    root["rule"] = rule;

    Json manifest;
    manifest["embedding_provider"] = graph.manifest.embedding_provider;
    manifest["embedding_dimension"] = graph.manifest.embedding_dimension;
    manifest["llm_backend"] = graph.manifest.llm_backend;
    manifest["knn_k"] = graph.manifest.knn_k;
    manifest["leiden_resolution"] = graph.manifest.leiden.resolution;
    manifest["leiden_max_passes"] = graph.manifest.leiden.max_passes;
    manifest["leiden_rng_seed"] = graph.manifest.leiden.rng_seed;
    manifest["leiden_min_community_size"] = graph.manifest.leiden.min_community_size;
    manifest["corpus_fingerprint"] = graph.manifest.corpus_fingerprint;
    root["manifest"] = manifest;
    root["build_warnings"] = graph.build_warnings;
    return root;
}

inline HierarGraph load_graph(const nlohmann::json& root) {
    HierarGraph graph;
    const auto& fact = root.at("fact");
    for (const auto& [id, j] : fact.at("case_nodes").items())
        graph.fact.case_nodes.emplace(id, load_case(j));
    for (const auto& [id, j] : fact.at("article_nodes").items())
        graph.fact.article_nodes.emplace(id, load_article(j));
    for (const auto& [name, j] : fact.at("offense_nodes").items()) {
        OffenseNode node;
        node.offense_name = name;
        for (const auto& id : j) node.member_case_ids.insert(id.get<std::string>());
        graph.fact.offense_nodes.emplace(name, std::move(node));
    }
    graph.fact.edges_case_article = load_edges(fact.at("edges_case_article"));
    graph.fact.edges_case_offense = load_edges(fact.at("edges_case_offense"));
    graph.fact.case_order = fact.at("case_order").get<std::vector<std::string>>();

    const auto& ontology = root.at("ontology");
    for (const auto& [id, j] : ontology.at("feature_index").items())
        graph.ontology.feature_index.emplace(id, load_features(j));
    for (const auto& [id, j] : ontology.at("case_embeddings").items())
        graph.ontology.case_embeddings.emplace(id, load_vector(j));
    graph.ontology.knn_edges = load_edges(ontology.at("knn_edges"));
    for (const auto& [id, j] : ontology.at("communities").items()) {
        CommunityNode node;
        node.community_id = id;
        for (const auto& m : j.at("member_case_ids"))
            node.member_case_ids.insert(m.get<std::string>());
        node.summary_text = j.at("summary_text").get<std::string>();
        node.summary_embedding = load_vector(j.at("summary_embedding"));
        node.summary_fallback = j.at("summary_fallback").get<bool>();
        graph.ontology.communities.emplace(id, std::move(node));
    }
    graph.ontology.membership =
        ontology.at("membership").get<std::map<std::string, std::string>>();
    for (const auto& id : ontology.at("fallback_embedding_cases"))
        graph.ontology.fallback_embedding_cases.insert(id.get<std::string>());

    const auto& rule = root.at("rule");
    for (const auto& [id, j] : rule.at("article_nodes").items())
        graph.rule.article_nodes.emplace(id, load_article(j));
    for (const auto& [id, j] : rule.at("interpretation_nodes").items())
        graph.rule.interpretation_nodes.emplace(id, load_interpretation(j));
    graph.rule.edges_article_interp = load_edges(rule.at("edges_article_interp"));
    for (const auto& [id, j] : rule.at("checklists").items()) {
        DiagnosticChecklist checklist;
        checklist.article_id = id;
        checklist.items = j.at("items").get<std::vector<std::string>>();
        checklist.fallback = j.at("fallback").get<bool>();
        graph.rule.checklists.emplace(id, std::move(checklist));
    }

    const auto& manifest = root.at("manifest");
    graph.manifest.embedding_provider = manifest.at("embedding_provider").get<std::string>();
    graph.manifest.embedding_dimension = manifest.at("embedding_dimension").get<std::size_t>();
    graph.manifest.llm_backend = manifest.at("llm_backend").get<std::string>();
    graph.manifest.knn_k = manifest.at("knn_k").get<int>();
    graph.manifest.leiden.resolution = manifest.at("leiden_resolution").get<double>();
    graph.manifest.leiden.max_passes = manifest.at("leiden_max_passes").get<int>();
    graph.manifest.leiden.rng_seed = manifest.at("leiden_rng_seed").get<std::uint64_t>();
    graph.manifest.leiden.min_community_size =
        manifest.at("leiden_min_community_size").get<std::size_t>();
    graph.manifest.corpus_fingerprint = manifest.at("corpus_fingerprint").get<std::string>();
    graph.build_warnings = root.at("build_warnings").get<std::vector<std::string>>();
    return graph;
}

}  // namespace graph_json

// Self-describing text container: a magic+version header line, a checksum
// line over the payload bytes, then the single-line JSON payload. Identical
// graphs persist to identical bytes.
inline std::string serialize_graph(const HierarGraph& graph) {
    const std::string payload = graph_json::dump(graph).dump();
    std::string out;
    out += std::string(kGraphMagic) + " v" + std::to_string(kGraphFormatVersion) + "\n";
    out += "checksum fnv1a64 " + to_hex(fnv1a64(payload)) + "\n";
    out += payload;
    out += '\n';
    return out;
}

inline void persist(const HierarGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StoreError("cannot write graph file: " + path.string());
    out << serialize_graph(graph);
    if (!out) throw StoreError("short write to graph file: " + path.string());
}

inline HierarGraph deserialize_graph(const std::string& content) {
    std::istringstream in(content);
    std::string header, checksum_line, payload;
    if (!std::getline(in, header)) throw StoreError("graph file is empty");
    std::istringstream hs(header);
    std::string magic, version_tag;
    hs >> magic >> version_tag;
    if (magic != kGraphMagic)
        throw StoreError("not a graph file (bad magic '" + magic + "')");
    if (version_tag.size() < 2 || version_tag[0] != 'v')
        throw StoreError("malformed version tag '" + version_tag + "'");
    int version = 0;
    try {
        version = std::stoi(version_tag.substr(1));
    } catch (const std::exception&) {
        throw StoreError("malformed version tag '" + version_tag + "'");
    }
    if (version != kGraphFormatVersion)
        throw StoreError("unsupported graph format version " + std::to_string(version) +
                         " (supported: " + std::to_string(kGraphFormatVersion) + ")");
    if (!std::getline(in, checksum_line)) throw StoreError("graph file missing checksum line");
    std::istringstream cs(checksum_line);
    std::string checksum_tag, algo, expected;
    cs >> checksum_tag >> algo >> expected;
    if (checksum_tag != "checksum" || algo != "fnv1a64" || expected.size() != 16)
        throw StoreError("malformed checksum line");
    if (!std::getline(in, payload)) throw StoreError("graph file missing payload");
    const std::string actual = to_hex(fnv1a64(payload));
    if (actual != expected)
        throw StoreError("graph file checksum mismatch (expected " + expected + ", got " +
                         actual + ")");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(std::string("graph payload is not valid JSON: ") + e.what());
    }
    try {
        return graph_json::load_graph(root);
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(std::string("graph payload has unexpected shape: ") + e.what());
    }
}

inline HierarGraph load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot open graph file: " + path.string());
    std::ostringstream body;
    body << in.rdbuf();
    return deserialize_graph(body.str());
}

}  // namespace lexgraph
