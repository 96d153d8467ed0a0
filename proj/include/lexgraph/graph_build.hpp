#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lexgraph/common.hpp"
#include "lexgraph/community.hpp"
#include "lexgraph/corpus.hpp"
#include "lexgraph/embedding.hpp"
#include "lexgraph/graph.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/parsers.hpp"
#include "lexgraph/prompts.hpp"

namespace lexgraph {

inline constexpr std::string_view kBuildStage = "graph_build";

// Cases, articles, and lazily-created offense nodes with citation and
// conviction edges mirroring the bundle. Dangling article references throw
// under strict mode and are skipped with a warning otherwise.
inline FactGraph build_fact_graph(const CorpusBundle& bundle, bool strict = false,
                                  std::vector<std::string>* warnings = nullptr) {
    FactGraph graph;
    for (const auto& article : bundle.articles)
        graph.article_nodes.emplace(article.article_id, article);
    for (const auto& c : bundle.cases) {
        graph.case_nodes.emplace(c.case_id, c);
        graph.case_order.push_back(c.case_id);
        for (const auto& article_id : c.cited_article_ids) {
            if (!graph.article_nodes.count(article_id)) {
                if (strict)
                    throw ValidationError("case '" + c.case_id +
                                          "' cites unknown article '" + article_id + "'");
                if (warnings)
                    warnings->push_back("case '" + c.case_id + "' cites unknown article '" +
                                        article_id + "'; edge skipped");
                continue;
            }
            graph.edges_case_article.insert({c.case_id, article_id});
        }
        for (const auto& charge : c.charge_labels) {
            auto [it, _] = graph.offense_nodes.try_emplace(charge, OffenseNode{charge, {}});
            it->second.member_case_ids.insert(c.case_id);
            graph.edges_case_offense.insert({c.case_id, charge});
        }
    }
    return graph;
}

struct ExtractionOutcome {
    OntologyFeatures features;
    bool failed = false;
    std::string error;
};

inline ExtractionOutcome extract_ontology_features(Gateway& gateway, const CaseDocument& doc) {
    const RenderedPrompt prompt =
        render_prompt(TemplateId::keyword_extraction, {{"case", doc.fact_text}});
    ExtractionOutcome outcome;
    try {
        const KeywordLists lists = gateway.complete_parsed(
            prompt, kBuildStage, [](const std::string& text) { return parse_keyword_json(text); },
            "Reply with exactly one JSON object holding the four keyword arrays.");
        outcome.features.defendant_attributes = lists.defendant_attributes;
        outcome.features.criminal_behaviors = lists.criminal_behaviors;
        outcome.features.victim_characteristics = lists.victim_characteristics;
        outcome.features.subjective_mental_states = lists.subjective_mental_states;
    } catch (const ParseError& e) {
        outcome.failed = true;
        outcome.error = e.what();
    }
    return outcome;
}

// Keywords should be generalized legal traits; digits suggest raw amounts or
// dates leaked through. Lint only, never fatal.
inline std::vector<std::string> lint_features(const std::string& case_id,
                                              const OntologyFeatures& features) {
    std::vector<std::string> warnings;
    auto check = [&](const char* dim, const std::vector<std::string>& keywords) {
        for (const auto& kw : keywords)
            if (std::any_of(kw.begin(), kw.end(),
                            [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                warnings.push_back("case '" + case_id + "' " + dim + " keyword '" + kw +
                                   "' looks like a raw number or date");
    };
    check("defendant_attributes", features.defendant_attributes);
    check("criminal_behaviors", features.criminal_behaviors);
    check("victim_characteristics", features.victim_characteristics);
    check("subjective_mental_states", features.subjective_mental_states);
    return warnings;
}

// Feature-indexed cases connected to their knn_k nearest neighbors by cosine
// similarity of feature embeddings; the edge set is the symmetrized union of
// the directed k-NN lists. Cases with failed extraction fall back to raw-text
// embeddings and are flagged.
inline OntologyGraph build_ontology_graph(const CorpusBundle& bundle,
                                          const std::map<std::string, ExtractionOutcome>& features,
                                          EmbeddingProvider& provider, int knn_k) {
    if (knn_k < 1) throw ValidationError("knn_k must be positive");
    OntologyGraph graph;
    for (const auto& doc : bundle.cases) {
        const auto it = features.find(doc.case_id);
        if (it == features.end())
            throw ValidationError("no extraction outcome for case '" + doc.case_id + "'");
        const ExtractionOutcome& outcome = it->second;
        graph.feature_index[doc.case_id] = outcome.features;
        if (outcome.failed || outcome.features.empty()) {
            graph.case_embeddings[doc.case_id] = provider.embed(doc.fact_text);
            graph.fallback_embedding_cases.insert(doc.case_id);
        } else {
            graph.case_embeddings[doc.case_id] =
                provider.embed(render_feature_text(outcome.features));
        }
    }
    for (const auto& [case_id, vec] : graph.case_embeddings) {
        std::map<std::string, EmbeddingVector> others;
        for (const auto& [other_id, other_vec] : graph.case_embeddings)
            if (other_id != case_id) others.emplace(other_id, other_vec);
        for (const auto& neighbor : top_k(vec, others, static_cast<std::size_t>(knn_k)))
            graph.knn_edges.insert({std::min(case_id, neighbor.id),
                                    std::max(case_id, neighbor.id)});
    }
    return graph;
}

inline std::string fallback_summary(const OntologyGraph& graph,
                                    const std::set<std::string>& member_ids) {
    std::vector<std::string> keywords;
    std::set<std::string> seen;
    for (const auto& id : member_ids) {
        const auto& f = graph.feature_index.at(id);
        for (const auto& list :
             {&f.criminal_behaviors, &f.defendant_attributes, &f.subjective_mental_states}) {
            for (const auto& kw : *list)
                if (seen.insert(kw).second) keywords.push_back(kw);
        }
    }
    if (keywords.size() > 12) keywords.resize(12);
    if (keywords.empty())
        return "precedent cases: " + join({member_ids.begin(), member_ids.end()}, ", ");
    return "precedent cases involving " + join(keywords, ", ");
}

// Leiden partition of the k-NN graph; one community node per part, with an
// LLM summary over member feature snippets and its embedding. A failed
// summary falls back to the members' concatenated top keywords, flagged.
inline void detect_communities(OntologyGraph& graph, Gateway& gateway,
                               EmbeddingProvider& provider, const LeidenConfig& config = {}) {
    graph.communities.clear();
    graph.membership.clear();
    if (graph.case_embeddings.empty()) return;

    std::vector<std::string> ids;
    for (const auto& [id, _] : graph.case_embeddings) ids.push_back(id);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    WeightedGraph knn(ids.size());
    for (const auto& [a, b] : graph.knn_edges) {
        const double sim =
            cosine_similarity(graph.case_embeddings.at(a), graph.case_embeddings.at(b));
        knn.add_edge(index.at(a), index.at(b), std::max(sim, 0.0));
    }

    const Partition partition = leiden(knn, config);
    std::map<int, std::set<std::string>> members;
    for (std::size_t i = 0; i < ids.size(); ++i)
        members[partition.assignment[i]].insert(ids[i]);

    for (const auto& [part, case_ids] : members) {
        CommunityNode node;
        char buf[16];
        std::snprintf(buf, sizeof buf, "K%04d", part);
        node.community_id = buf;
        node.member_case_ids = case_ids;

        std::string snippets;
        for (const auto& id : case_ids)
            snippets += "- " + id + ": " + render_feature_text(graph.feature_index.at(id)) + "\n";
        const RenderedPrompt prompt =
            render_prompt(TemplateId::community_summary, {{"member_snippets", snippets}});
        try {
            node.summary_text = trim(gateway.complete(prompt, kBuildStage));
            if (node.summary_text.empty()) throw ParseError("empty summary");
        } catch (const ParseError&) {
            node.summary_text = fallback_summary(graph, case_ids);
            node.summary_fallback = true;
        }
        node.summary_embedding = provider.embed(node.summary_text);
        for (const auto& id : case_ids) graph.membership[id] = node.community_id;
        graph.communities.emplace(node.community_id, std::move(node));
    }
}

// Articles linked to their judicial interpretations via the declared
// cross-references in both directions; each article gets an LLM-generated
// diagnostic checklist, falling back to a single generic condition on
// failure.
inline RuleGraph build_rule_graph(const CorpusBundle& bundle, Gateway& gateway,
                                  std::vector<std::string>* warnings = nullptr) {
    RuleGraph graph;
    for (const auto& article : bundle.articles)
        graph.article_nodes.emplace(article.article_id, article);
    for (const auto& interp : bundle.interpretations)
        graph.interpretation_nodes.emplace(interp.interpretation_id, interp);

    for (const auto& article : bundle.articles)
        for (const auto& interp_id : article.interpretation_ids)
            if (graph.interpretation_nodes.count(interp_id))
                graph.edges_article_interp.insert({article.article_id, interp_id});
    for (const auto& interp : bundle.interpretations)
        for (const auto& article_id : interp.target_article_ids)
            if (graph.article_nodes.count(article_id))
                graph.edges_article_interp.insert({article_id, interp.interpretation_id});

    for (const auto& [article_id, article] : graph.article_nodes) {
        DiagnosticChecklist checklist;
        checklist.article_id = article_id;
        const RenderedPrompt prompt = render_prompt(
            TemplateId::checklist_generation,
            {{"article", article.article_number.empty()
                             ? article.body_text
                             : article.article_number + ": " + article.body_text}});
        try {
            checklist.items = gateway.complete_parsed(
                prompt, kBuildStage,
                [](const std::string& text) { return parse_checklist_json(text); },
                "Reply with exactly one JSON array of condition strings.");
            if (checklist.items.size() > 8) checklist.items.resize(8);
        } catch (const ParseError& e) {
            checklist.items = {std::string(kFallbackChecklistItem)};
            checklist.fallback = true;
            if (warnings)
                warnings->push_back("checklist generation failed for article '" + article_id +
                                    "': " + e.what());
        }
        graph.checklists.emplace(article_id, std::move(checklist));
    }
    return graph;
}

struct BuildOptions {
    int knn_k = 3;
    LeidenConfig leiden;
    bool strict_references = false;
};

// Full offline construction: fact graph, feature extraction, ontology graph
// with communities, rule graph, and the build manifest.
inline HierarGraph build_hierargraph(const CorpusBundle& bundle, Gateway& gateway,
                                     EmbeddingProvider& provider,
                                     const BuildOptions& options = {}) {
    HierarGraph graph;
    graph.fact = build_fact_graph(bundle, options.strict_references, &graph.build_warnings);

    std::map<std::string, ExtractionOutcome> outcomes;
    for (const auto& doc : bundle.cases) {
        ExtractionOutcome outcome = extract_ontology_features(gateway, doc);
        if (outcome.failed)
            graph.build_warnings.push_back("feature extraction failed for case '" + doc.case_id +
                                           "': " + outcome.error);
        for (auto& w : lint_features(doc.case_id, outcome.features))
            graph.build_warnings.push_back(std::move(w));
        outcomes.emplace(doc.case_id, std::move(outcome));
    }
    graph.ontology = build_ontology_graph(bundle, outcomes, provider, options.knn_k);
    detect_communities(graph.ontology, gateway, provider, options.leiden);
    for (const auto& [id, community] : graph.ontology.communities)
        if (community.summary_fallback)
            graph.build_warnings.push_back("summary generation failed for community '" + id +
                                           "'; keyword fallback used");
    graph.rule = build_rule_graph(bundle, gateway, &graph.build_warnings);

    graph.manifest.embedding_provider = provider.name();
    graph.manifest.embedding_dimension = provider.dimension();
    graph.manifest.llm_backend = gateway.backend().name();
    graph.manifest.knn_k = options.knn_k;
    graph.manifest.leiden = options.leiden;
    graph.manifest.corpus_fingerprint = corpus_fingerprint(bundle);
    return graph;
}

}  // namespace lexgraph
