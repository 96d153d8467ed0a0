#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexgraph/auditor.hpp"
#include "lexgraph/graph.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/parsers.hpp"
#include "lexgraph/prompts.hpp"
#include "lexgraph/researcher.hpp"

namespace lexgraph {

inline constexpr std::string_view kAdjudicateStage = "adjudicator";

struct ContextBlock {
    int number = 0;  // 1-based, contiguous
    std::string node_id;
    NodeKind kind = NodeKind::article_node;
    std::string text;
};

// Numbered evidence blocks rendered deterministically: articles first by id,
// then cases by id, then offenses by name. Citation markers refer to these
// numbers.
struct EvidenceContext {
    std::vector<ContextBlock> blocks;

    bool empty() const { return blocks.empty(); }

    std::string render() const {
        std::string out;
        for (const auto& block : blocks) {
            out += "[" + std::to_string(block.number) + "] (" + to_string(block.kind) + " " +
                   block.node_id + ") " + block.text + "\n";
        }
        return out;
    }

    const ContextBlock* block_for_node(const std::string& node_id) const {
        for (const auto& block : blocks)
            if (block.node_id == node_id) return &block;
        return nullptr;
    }
};

struct AdjudicatorConfig {
    // Hard bound on context blocks; retrieval noise degrades generation, so
    // the context is kept tight: all articles first, then cases by retrieval
    // score, then offenses, until the cap is reached.
    std::size_t context_cap = 12;
};

namespace detail {

inline std::string penalty_text(const PenaltyTerm& term) {
    if (term.death_penalty) return "death penalty";
    if (term.life_imprisonment) return "life imprisonment";
    if (term.months.has_value()) return std::to_string(*term.months) + " months imprisonment";
    return "penalty unspecified";
}

inline std::string case_block_text(const CaseDocument& doc) {
    std::string text = doc.fact_text;
    text += " | outcome: convicted of " +
            (doc.charge_labels.empty() ? std::string("(unrecorded)")
                                       : join(doc.charge_labels, ", "));
    if (!doc.cited_article_ids.empty())
        text += " under " + join(doc.cited_article_ids, ", ");
    text += "; sentenced to " + penalty_text(doc.penalty);
    return text;
}

}  // namespace detail

// Organizes the verified subgraph into the numbered evidence context fed to
// the adjudicator. Selection priority under the cap: articles (by id), then
// cases by descending retrieval score (unscored last, ties by id), then
// offense summaries.
inline EvidenceContext build_context(const HierarGraph& graph, const VerifiedSubgraph& verified,
                                     const RetrievalResult& retrieval,
                                     const AdjudicatorConfig& config = {}) {
    EvidenceContext context;
    std::vector<std::string> articles(verified.articles.begin(), verified.articles.end());
    if (articles.size() > config.context_cap) articles.resize(config.context_cap);

    std::size_t budget = config.context_cap - articles.size();
    std::vector<std::pair<double, std::string>> scored_cases;
    for (const auto& case_id : verified.cases) {
        const RetrievalCandidate* candidate = retrieval.find(case_id);
        const double score =
            candidate && candidate->score ? *candidate->score : -1.0;
        scored_cases.push_back({score, case_id});
    }
    std::sort(scored_cases.begin(), scored_cases.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (scored_cases.size() > budget) scored_cases.resize(budget);
    std::vector<std::string> cases;
    for (const auto& [_, id] : scored_cases) cases.push_back(id);
    std::sort(cases.begin(), cases.end());
    budget -= cases.size();

    std::vector<std::string> offenses(verified.offenses.begin(), verified.offenses.end());
    if (offenses.size() > budget) offenses.resize(budget);

    int number = 0;
    for (const auto& article_id : articles) {
        const ArticleDocument& doc = graph.rule.article_nodes.count(article_id)
                                         ? graph.rule.article_nodes.at(article_id)
                                         : graph.fact.article_nodes.at(article_id);
        std::string text = doc.article_number.empty()
                               ? doc.body_text
                               : doc.article_number + ": " + doc.body_text;
        context.blocks.push_back({++number, article_id, NodeKind::article_node, text});
    }
    for (const auto& case_id : cases)
        context.blocks.push_back({++number, case_id, NodeKind::case_node,
                                  detail::case_block_text(graph.fact.case_nodes.at(case_id))});
    for (const auto& offense : offenses) {
        std::vector<std::string> supporting;
        for (const auto& case_id : graph.fact.cases_for_offense(offense))
            if (verified.cases.count(case_id)) supporting.push_back(case_id);
        context.blocks.push_back({++number, offense, NodeKind::offense_node,
                                  "offense '" + offense + "' established in precedents: " +
                                      join(supporting, ", ")});
    }
    return context;
}

// The final judgment: structured fields for metrics, the citation-marked
// verdict narrative, and the traceability map from cited articles to context
// blocks.
struct Judgment {
    std::vector<std::string> charges;
    std::vector<std::string> articles;
    PenaltyTerm term;
    std::string verdict_text;
    std::set<int> citations;
    // article id -> context block number backing it
    std::map<std::string, int> traceable_articles;
    std::set<std::string> uncited_articles;
    bool structured_failed = false;
    bool context_free = false;
};

// Two gateway calls: the sentencing JSON for structured fields, then the
// verdict narrative whose bracket markers become the citation set. A JSON
// reply that stays unparsable after the re-ask yields empty structured
// fields with a failure flag; the judgment still counts for metrics.
inline Judgment adjudicate(Gateway& gateway, const std::string& fact_text,
                           const std::vector<std::string>& defendants,
                           const EvidenceContext& context) {
    Judgment judgment;
    judgment.context_free = context.empty();
    const std::string rendered = context.empty() ? "(no verified evidence)" : context.render();

    const RenderedPrompt sentencing =
        render_prompt(TemplateId::sentencing_json,
                      {{"context", rendered},
                       {"case", fact_text},
                       {"defendants", defendants.empty() ? "(unnamed)" : join(defendants, ", ")}});
    try {
        const SentencingOutcome outcome = gateway.complete_parsed(
            sentencing, kAdjudicateStage,
            [](const std::string& text) { return parse_sentencing_json(text); },
            "Reply with exactly one JSON object with keys charge_name, law_article, "
            "term_of_imprisonment.");
        judgment.charges = outcome.charges;
        judgment.articles = outcome.articles;
        judgment.term = outcome.term;
    } catch (const ParseError&) {
        judgment.structured_failed = true;
    }

    const RenderedPrompt verdict = render_prompt(
        TemplateId::verdict,
        {{"context_list", rendered}, {"case_description", fact_text}});
    judgment.verdict_text = gateway.complete(verdict, kAdjudicateStage);
    judgment.citations = parse_citations(judgment.verdict_text);

    for (const auto& article_id : judgment.articles) {
        const ContextBlock* block = context.block_for_node(article_id);
        if (block && block->kind == NodeKind::article_node)
            judgment.traceable_articles.emplace(article_id, block->number);
        else
            judgment.uncited_articles.insert(article_id);
    }
    return judgment;
}

}  // namespace lexgraph
