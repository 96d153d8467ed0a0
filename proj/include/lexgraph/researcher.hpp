#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lexgraph/embedding.hpp"
#include "lexgraph/graph.hpp"
#include "lexgraph/graph_build.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/parsers.hpp"
#include "lexgraph/prompts.hpp"

namespace lexgraph {

inline constexpr std::string_view kResearchStage = "researcher";

// A legal query aligned to the ontology: extracted features plus the same
// feature-text embedding rendering used at indexing time.
struct Query {
    std::string fact_text;
    std::vector<std::string> defendants;
    OntologyFeatures features;
    EmbeddingVector embedding;
    bool fallback_embedding = false;
};

enum class Strategy { semantic, community, charge_anchored };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::semantic: return "semantic";
        case Strategy::community: return "community";
        case Strategy::charge_anchored: return "charge_anchored";
    }
    return "?";
}

struct RetrievalCandidate {
    std::string node_id;
    NodeKind kind = NodeKind::case_node;
    // Present iff retrieved by a similarity strategy (semantic/community).
    std::optional<double> score;
    std::set<Strategy> strategies;
    // Human-readable provenance, e.g. "community:K0001" or "charge:Theft".
    std::vector<std::string> provenance;
};

struct RetrievalResult {
    // Deduplicated, ordered by node_id; merged strategy sets.
    std::vector<RetrievalCandidate> candidates;
    // Articles cited by any candidate case, resolved through the fact graph.
    std::set<std::string> article_ids;
    std::vector<std::string> predicted_charges;
    std::vector<std::string> warnings;

    const RetrievalCandidate* find(const std::string& node_id) const {
        for (const auto& c : candidates)
            if (c.node_id == node_id) return &c;
        return nullptr;
    }
};

struct ResearchConfig {
    int k = 5;
    // Eq-level neighbor expansion is uncapped; this bounds it per charge,
    // keeping the newest cases in corpus order.
    int charge_case_cap = 10;
    // Number of communities considered by community expansion (1 = argmax).
    int community_top_m = 1;
    // When feature extraction fails, embed the raw fact text instead.
    bool raw_text_fallback = true;
};

// Aligns the raw case description with the ontology dimensions via the
// keyword-extraction template and embeds the rendered features. Extraction
// failure falls back to a raw-text embedding, flagged on the query.
inline Query align_query(Gateway& gateway, EmbeddingProvider& provider,
                         const std::string& fact_text,
                         const std::vector<std::string>& defendants) {
    Query query;
    query.fact_text = fact_text;
    query.defendants = defendants;
    CaseDocument pseudo;
    pseudo.case_id = "query";
    pseudo.fact_text = fact_text;
    const ExtractionOutcome outcome = extract_ontology_features(gateway, pseudo);
    query.features = outcome.features;
    if (outcome.failed || outcome.features.empty()) {
        query.embedding = provider.embed(fact_text);
        query.fallback_embedding = true;
    } else {
        query.embedding = provider.embed(render_feature_text(query.features));
    }
    return query;
}

// Top-k cases by cosine similarity over the ontology embeddings.
inline std::vector<RetrievalCandidate> retrieve_semantic(const Query& query,
                                                         const HierarGraph& graph, int k) {
    if (k < 1) throw ValidationError("retrieval k must be positive");
    std::vector<RetrievalCandidate> out;
    for (const auto& scored :
         top_k(query.embedding, graph.ontology.case_embeddings, static_cast<std::size_t>(k))) {
        RetrievalCandidate c;
        c.node_id = scored.id;
        c.kind = NodeKind::case_node;
        c.score = scored.score;
        c.strategies = {Strategy::semantic};
        c.provenance = {"semantic"};
        out.push_back(std::move(c));
    }
    return out;
}

// Single most similar community by summary embedding (argmax, ties to the
// lowest community id), then top-k cases within that community only.
// top_m > 1 widens the expansion to the m best communities.
inline std::vector<RetrievalCandidate> retrieve_community(const Query& query,
                                                          const HierarGraph& graph, int k,
                                                          int top_m = 1) {
    if (k < 1) throw ValidationError("retrieval k must be positive");
    if (top_m < 1) throw ValidationError("community top_m must be positive");
    if (graph.ontology.communities.empty()) return {};

    std::map<std::string, EmbeddingVector> summaries;
    for (const auto& [id, node] : graph.ontology.communities)
        summaries.emplace(id, node.summary_embedding);
    const auto ranked =
        top_k(query.embedding, summaries, static_cast<std::size_t>(top_m));

    std::map<std::string, RetrievalCandidate> merged;
    for (const auto& community : ranked) {
        const CommunityNode& node = graph.ontology.communities.at(community.id);
        std::map<std::string, EmbeddingVector> members;
        for (const auto& case_id : node.member_case_ids)
            members.emplace(case_id, graph.ontology.case_embeddings.at(case_id));
        for (const auto& scored : top_k(query.embedding, members, static_cast<std::size_t>(k))) {
            auto [it, inserted] = merged.try_emplace(scored.id);
            RetrievalCandidate& c = it->second;
            if (inserted) {
                c.node_id = scored.id;
                c.kind = NodeKind::case_node;
                c.score = scored.score;
                c.strategies = {Strategy::community};
            }
            c.provenance.push_back("community:" + community.id);
        }
    }
    std::vector<RetrievalCandidate> out;
    for (auto& [_, c] : merged) out.push_back(std::move(c));
    return out;
}

struct PrejudgeOutcome {
    std::vector<std::string> charges;
    bool parse_failed = false;
};

// Charge pre-judgment for charge-anchored retrieval. A reply that stays
// unparsable after the re-ask degrades to an empty charge list with a
// warning, so the strategy simply contributes nothing.
inline PrejudgeOutcome prejudge_charges(Gateway& gateway, const std::string& fact_text) {
    const RenderedPrompt prompt =
        render_prompt(TemplateId::charge_prejudge, {{"case", fact_text}});
    PrejudgeOutcome outcome;
    try {
        outcome.charges = gateway.complete_parsed(
            prompt, kResearchStage,
            [](const std::string& text) { return parse_charge_list(text); },
            "Reply with exactly one Python-style list of quoted charge names, or [].");
    } catch (const ParseError&) {
        outcome.parse_failed = true;
    }
    return outcome;
}

// Neighbor cases of each predicted charge in the fact graph, newest first in
// corpus order, capped per charge. Charges absent from the graph contribute
// nothing. Candidates carry no similarity score.
inline std::vector<RetrievalCandidate> retrieve_charge_anchored(
    const std::vector<std::string>& charges, const HierarGraph& graph, int cap_per_charge = 10) {
    std::map<std::string, std::size_t> recency;
    for (std::size_t i = 0; i < graph.fact.case_order.size(); ++i)
        recency[graph.fact.case_order[i]] = i;

    std::map<std::string, RetrievalCandidate> merged;
    std::set<std::string> seen_charges;
    for (const auto& charge : charges) {
        if (!seen_charges.insert(charge).second) continue;
        const std::set<std::string> members = graph.fact.cases_for_offense(charge);
        std::vector<std::string> ordered(members.begin(), members.end());
        std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
            return recency.at(a) > recency.at(b);
        });
        if (cap_per_charge > 0 && ordered.size() > static_cast<std::size_t>(cap_per_charge))
            ordered.resize(static_cast<std::size_t>(cap_per_charge));
        for (const auto& case_id : ordered) {
            auto [it, inserted] = merged.try_emplace(case_id);
            RetrievalCandidate& c = it->second;
            if (inserted) {
                c.node_id = case_id;
                c.kind = NodeKind::case_node;
                c.strategies = {Strategy::charge_anchored};
            }
            c.provenance.push_back("charge:" + charge);
        }
    }
    std::vector<RetrievalCandidate> out;
    for (auto& [_, c] : merged) out.push_back(std::move(c));
    return out;
}

// Union of the three retrieval strategies with strategy-set merge on
// deduplication, plus the derived article set obtained by following each
// candidate case's citation edges in the fact graph.
inline RetrievalResult research_with_query(Gateway& gateway, const HierarGraph& graph,
                                           const Query& query,
                                           const ResearchConfig& config = {}) {
    RetrievalResult result;
    if (query.fallback_embedding)
        result.warnings.push_back("feature extraction failed; query uses raw-text embedding");

    std::vector<RetrievalCandidate> semantic;
    std::vector<RetrievalCandidate> community;
    if (!graph.ontology.case_embeddings.empty()) {
        semantic = retrieve_semantic(query, graph, config.k);
        community = retrieve_community(query, graph, config.k, config.community_top_m);
    }

    const PrejudgeOutcome prejudged = prejudge_charges(gateway, query.fact_text);
    if (prejudged.parse_failed)
        result.warnings.push_back(
            "charge pre-judgment was unparsable; charge-anchored retrieval skipped");
    result.predicted_charges = prejudged.charges;
    const std::vector<RetrievalCandidate> anchored =
        retrieve_charge_anchored(prejudged.charges, graph, config.charge_case_cap);

    std::map<std::string, RetrievalCandidate> merged;
    auto absorb = [&](const std::vector<RetrievalCandidate>& batch) {
        for (const auto& c : batch) {
            auto [it, inserted] = merged.try_emplace(c.node_id, c);
            if (inserted) continue;
            RetrievalCandidate& existing = it->second;
            existing.strategies.insert(c.strategies.begin(), c.strategies.end());
            for (const auto& p : c.provenance) existing.provenance.push_back(p);
            if (!existing.score && c.score) existing.score = c.score;
        }
    };
    absorb(semantic);
    absorb(community);
    absorb(anchored);

    for (auto& [_, c] : merged) result.candidates.push_back(std::move(c));
    for (const auto& c : result.candidates) {
        if (c.kind != NodeKind::case_node) continue;
        for (const auto& article_id : graph.fact.articles_cited_by(c.node_id))
            result.article_ids.insert(article_id);
    }
    return result;
}

inline RetrievalResult research(Gateway& gateway, EmbeddingProvider& provider,
                                const HierarGraph& graph, const std::string& fact_text,
                                const std::vector<std::string>& defendants,
                                const ResearchConfig& config = {}) {
    const Query query = align_query(gateway, provider, fact_text, defendants);
    return research_with_query(gateway, graph, query, config);
}

}  // namespace lexgraph
