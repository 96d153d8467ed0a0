#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lexgraph/graph.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/parsers.hpp"
#include "lexgraph/prompts.hpp"
#include "lexgraph/researcher.hpp"

namespace lexgraph {

inline constexpr std::string_view kAuditStage = "auditor";

struct ChecklistItemResult {
    std::string item_text;
    bool verdict = false;
    // Set when the reply stayed unparsable after the re-ask; the verdict is
    // then false for pruning purposes but labeled unresolved downstream.
    bool unresolved = false;
    std::string rationale;
};

struct VerificationRecord {
    std::string article_id;
    std::vector<ChecklistItemResult> item_results;
    bool is_applicable = false;
    std::string final_rationale;
    bool decision_failed = false;
};

// The evidence surviving the verify-and-prune loop, with a full audit trail:
// per-article records, prune reasons, and orphan-retention reasons.
struct VerifiedSubgraph {
    std::set<std::string> articles;
    std::set<std::string> cases;
    std::set<std::string> offenses;
    std::map<std::string, VerificationRecord> records;
    std::map<std::string, std::string> pruned;           // article_id -> reason
    std::map<std::string, std::string> pruned_cases;     // case_id -> reason
    std::map<std::string, std::string> retained_cases;   // case_id -> retention reason
    std::map<std::string, std::string> dropped_charges;  // charge -> reason

    bool empty() const { return articles.empty() && cases.empty() && offenses.empty(); }
};

// One checklist condition checked against the case facts, with the article's
// interpretations as supporting material.
inline ChecklistItemResult check_item(Gateway& gateway, const std::string& fact_text,
                                      const ArticleDocument& article,
                                      const std::vector<std::string>& interpretation_texts,
                                      const std::string& item) {
    const std::string related =
        interpretation_texts.empty() ? "none" : join(interpretation_texts, "\n");
    const RenderedPrompt prompt = render_prompt(TemplateId::auditor_item,
                                                {{"law_item", article.body_text},
                                                 {"related", related},
                                                 {"element", item},
                                                 {"case", fact_text}});
    ChecklistItemResult result;
    result.item_text = item;
    try {
        std::string raw;
        result.verdict = gateway.complete_parsed(
            prompt, kAuditStage,
            [&raw](const std::string& text) {
                raw = text;
                return parse_tagged_answer(text);
            },
            "End your reply with <answer>true</answer> or <answer>false</answer>.");
        result.rationale = raw;
    } catch (const ParseError& e) {
        result.verdict = false;
        result.unresolved = true;
        result.rationale = e.what();
    }
    return result;
}

struct DecisionOutcome {
    bool is_applicable = false;
    std::string rationale;
    bool parse_failed = false;
};

// Final applicability call for one article. The model is the authority: it
// sees the proven and disproven element lists but may overrule them. A reply
// that stays unparsable prunes conservatively.
inline DecisionOutcome decide_article(Gateway& gateway, const std::string& fact_text,
                                      const ArticleDocument& article,
                                      const std::vector<std::string>& true_list,
                                      const std::vector<std::string>& false_list) {
    const RenderedPrompt prompt =
        render_prompt(TemplateId::auditor_final,
                      {{"case", fact_text},
                       {"law", article.body_text},
                       {"true_list", true_list.empty() ? "[]" : join(true_list, "; ")},
                       {"false_list", false_list.empty() ? "[]" : join(false_list, "; ")}});
    DecisionOutcome outcome;
    try {
        std::string raw;
        outcome.is_applicable = gateway.complete_parsed(
            prompt, kAuditStage,
            [&raw](const std::string& text) {
                raw = text;
                return parse_tagged_answer(text);
            },
            "End your reply with <answer>true</answer> or <answer>false</answer>.");
        outcome.rationale = raw;
    } catch (const ParseError& e) {
        outcome.is_applicable = false;
        outcome.parse_failed = true;
        outcome.rationale = e.what();
    }
    return outcome;
}

// Verify-and-prune over the candidate evidence set. Every candidate article
// runs its checklist item by item (in checklist order) and gets a final
// applicability decision; inapplicable articles are pruned together with the
// cases whose every candidate cited article was pruned, and predicted charges
// whose anchored cases were all pruned. Empty retrieval -> empty subgraph,
// zero gateway calls.
inline VerifiedSubgraph audit(Gateway& gateway, const HierarGraph& graph,
                              const std::string& fact_text, const RetrievalResult& retrieval) {
    VerifiedSubgraph verified;

    for (const auto& article_id : retrieval.article_ids) {
        const auto article_it = graph.rule.article_nodes.find(article_id);
        if (article_it == graph.rule.article_nodes.end()) {
            verified.pruned.emplace(article_id, "article missing from rule graph");
            continue;
        }
        const ArticleDocument& article = article_it->second;
        std::vector<std::string> interpretation_texts;
        for (const auto& interp_id : graph.rule.interpretations_for(article_id))
            interpretation_texts.push_back(
                graph.rule.interpretation_nodes.at(interp_id).body_text);

        const auto checklist_it = graph.rule.checklists.find(article_id);
        const std::vector<std::string> items =
            checklist_it != graph.rule.checklists.end()
                ? checklist_it->second.items
                : std::vector<std::string>{std::string(kFallbackChecklistItem)};

        VerificationRecord record;
        record.article_id = article_id;
        std::vector<std::string> true_list, false_list;
        for (const auto& item : items) {
            ChecklistItemResult result =
                check_item(gateway, fact_text, article, interpretation_texts, item);
            if (result.verdict) {
                true_list.push_back(result.item_text);
            } else if (result.unresolved) {
                false_list.push_back(result.item_text + " (unresolved)");
            } else {
                false_list.push_back(result.item_text);
            }
            record.item_results.push_back(std::move(result));
        }

        const DecisionOutcome decision =
            decide_article(gateway, fact_text, article, true_list, false_list);
        record.is_applicable = decision.is_applicable;
        record.final_rationale = decision.rationale;
        record.decision_failed = decision.parse_failed;
        if (record.is_applicable) {
            verified.articles.insert(article_id);
        } else {
            verified.pruned.emplace(article_id, decision.parse_failed
                                                    ? "applicability decision unparsable"
                                                    : "auditor found article inapplicable");
        }
        verified.records.emplace(article_id, std::move(record));
    }

    // Case cascade: a case falls only when every candidate article it cites
    // was pruned. Cases citing no candidate article were never conditioned on
    // an article and are retained with a recorded reason.
    for (const auto& candidate : retrieval.candidates) {
        if (candidate.kind != NodeKind::case_node) continue;
        std::vector<std::string> cited_candidates;
        for (const auto& article_id : graph.fact.articles_cited_by(candidate.node_id))
            if (retrieval.article_ids.count(article_id)) cited_candidates.push_back(article_id);
        if (cited_candidates.empty()) {
            verified.cases.insert(candidate.node_id);
            verified.retained_cases.emplace(candidate.node_id,
                                            "cites no candidate article; never audited");
            continue;
        }
        bool any_survived = false;
        for (const auto& article_id : cited_candidates)
            if (verified.articles.count(article_id)) {
                any_survived = true;
                break;
            }
        if (any_survived) {
            verified.cases.insert(candidate.node_id);
        } else {
            verified.pruned_cases.emplace(candidate.node_id,
                                          "every candidate cited article was pruned");
        }
    }

    // Charge cascade: a predicted charge survives only with at least one
    // surviving anchored case.
    for (const auto& charge : retrieval.predicted_charges) {
        const std::set<std::string> anchored = graph.fact.cases_for_offense(charge);
        bool any_survived = false;
        for (const auto& case_id : anchored)
            if (verified.cases.count(case_id)) {
                any_survived = true;
                break;
            }
        if (any_survived) {
            verified.offenses.insert(charge);
        } else {
            verified.dropped_charges.emplace(
                charge, anchored.empty() ? "charge not present in fact graph"
                                         : "every anchored case was pruned");
        }
    }
    return verified;
}

}  // namespace lexgraph
