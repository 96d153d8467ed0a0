#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lexgraph/common.hpp"
#include "lexgraph/community.hpp"
#include "lexgraph/corpus.hpp"
#include "lexgraph/embedding.hpp"

namespace lexgraph {

enum class NodeKind { case_node, article_node, offense_node, interpretation_node,
                      community_node };

inline const char* to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::case_node: return "case";
        case NodeKind::article_node: return "article";
        case NodeKind::offense_node: return "offense";
        case NodeKind::interpretation_node: return "interpretation";
        case NodeKind::community_node: return "community";
    }
    return "?";
}

struct OffenseNode {
    std::string offense_name;
    std::set<std::string> member_case_ids;

    bool operator==(const OffenseNode&) const = default;
};

// Precedent layer: cases linked to their cited articles and convicted
// offenses. Edge sets exactly mirror the documents' declared citations and
// charge labels after reference resolution.
struct FactGraph {
    std::map<std::string, CaseDocument> case_nodes;
    std::map<std::string, ArticleDocument> article_nodes;
    std::map<std::string, OffenseNode> offense_nodes;
    std::set<std::pair<std::string, std::string>> edges_case_article;
    std::set<std::pair<std::string, std::string>> edges_case_offense;
    // Corpus order of case ids; charge-anchored retrieval treats later
    // entries as more recent.
    std::vector<std::string> case_order;

    bool operator==(const FactGraph&) const = default;

    std::vector<std::string> articles_cited_by(const std::string& case_id) const {
        std::vector<std::string> out;
        auto it = edges_case_article.lower_bound({case_id, ""});
        for (; it != edges_case_article.end() && it->first == case_id; ++it)
            out.push_back(it->second);
        return out;
    }

    std::set<std::string> cases_for_offense(const std::string& offense_name) const {
        auto it = offense_nodes.find(offense_name);
        if (it == offense_nodes.end()) return {};
        return it->second.member_case_ids;
    }
};

// The four keyword dimensions of the legal ontology.
struct OntologyFeatures {
    std::vector<std::string> defendant_attributes;
    std::vector<std::string> criminal_behaviors;
    std::vector<std::string> victim_characteristics;
    std::vector<std::string> subjective_mental_states;

    bool operator==(const OntologyFeatures&) const = default;

    bool empty() const {
        return defendant_attributes.empty() && criminal_behaviors.empty() &&
               victim_characteristics.empty() && subjective_mental_states.empty();
    }
};

// Fixed rendering of the four keyword lists; this string is what the
// embedding provider sees, for cases and queries alike.
inline std::string render_feature_text(const OntologyFeatures& features) {
    std::string out;
    out += "defendant attributes: " + join(features.defendant_attributes, ", ");
    out += "; criminal behaviors: " + join(features.criminal_behaviors, ", ");
    out += "; victim characteristics: " + join(features.victim_characteristics, ", ");
    out += "; subjective mental states: " + join(features.subjective_mental_states, ", ");
    return out;
}

struct CommunityNode {
    std::string community_id;
    std::set<std::string> member_case_ids;
    std::string summary_text;
    EmbeddingVector summary_embedding;
    bool summary_fallback = false;

    bool operator==(const CommunityNode&) const = default;
};

// Semantic layer: feature-indexed cases, symmetrized k-NN edges over feature
// embeddings, and a community partition with summarized community nodes.
struct OntologyGraph {
    std::map<std::string, OntologyFeatures> feature_index;
    std::map<std::string, EmbeddingVector> case_embeddings;
    // Undirected edges stored with endpoints ordered (first < second).
    std::set<std::pair<std::string, std::string>> knn_edges;
    std::map<std::string, CommunityNode> communities;
    std::map<std::string, std::string> membership;
    // Cases whose features failed to extract and were embedded from raw text.
    std::set<std::string> fallback_embedding_cases;

    bool operator==(const OntologyGraph&) const = default;

    bool has_edge(const std::string& a, const std::string& b) const {
        return knn_edges.count({std::min(a, b), std::max(a, b)}) > 0;
    }
};

struct DiagnosticChecklist {
    std::string article_id;
    std::vector<std::string> items;
    bool fallback = false;

    bool operator==(const DiagnosticChecklist&) const = default;
};

inline constexpr std::string_view kFallbackChecklistItem =
    "Do the case facts satisfy every element of this article?";

// Statutory layer: articles linked to judicial interpretations, each article
// carrying its diagnostic checklist.
struct RuleGraph {
    std::map<std::string, ArticleDocument> article_nodes;
    std::map<std::string, InterpretationDocument> interpretation_nodes;
    std::set<std::pair<std::string, std::string>> edges_article_interp;
    std::map<std::string, DiagnosticChecklist> checklists;

    bool operator==(const RuleGraph&) const = default;

    std::vector<std::string> interpretations_for(const std::string& article_id) const {
        std::vector<std::string> out;
        auto it = edges_article_interp.lower_bound({article_id, ""});
        for (; it != edges_article_interp.end() && it->first == article_id; ++it)
            out.push_back(it->second);
        return out;
    }
};

struct BuildManifest {
    std::string embedding_provider;
    std::size_t embedding_dimension = 0;
    std::string llm_backend;
    int knn_k = 3;
    LeidenConfig leiden;
    std::string corpus_fingerprint;

    bool operator==(const BuildManifest& other) const {
        return embedding_provider == other.embedding_provider &&
               embedding_dimension == other.embedding_dimension &&
               llm_backend == other.llm_backend && knn_k == other.knn_k &&
               leiden.resolution == other.leiden.resolution &&
               leiden.max_passes == other.leiden.max_passes &&
               leiden.rng_seed == other.leiden.rng_seed &&
               leiden.min_community_size == other.leiden.min_community_size &&
               corpus_fingerprint == other.corpus_fingerprint;
    }
};

// The three-layer hierarchical legal graph over one shared id space.
struct HierarGraph {
    FactGraph fact;
    OntologyGraph ontology;
    RuleGraph rule;
    BuildManifest manifest;
    // Non-fatal build notes (extraction failures, checklist fallbacks, lint).
    std::vector<std::string> build_warnings;

    bool operator==(const HierarGraph&) const = default;
};

}  // namespace lexgraph
