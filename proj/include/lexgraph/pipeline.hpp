#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexgraph/adjudicator.hpp"
#include "lexgraph/auditor.hpp"
#include "lexgraph/corpus.hpp"
#include "lexgraph/evaluation.hpp"
#include "lexgraph/graph.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/researcher.hpp"

namespace lexgraph {

struct PipelineConfig {
    ResearchConfig research;
    AdjudicatorConfig adjudicator;
};

// Everything one query produces, stage by stage.
struct QueryOutcome {
    Query query;
    RetrievalResult retrieval;
    VerifiedSubgraph verified;
    EvidenceContext context;
    Judgment judgment;
};

// Researcher -> Auditor -> Adjudicator over an immutable graph.
inline QueryOutcome run_query(Gateway& gateway, EmbeddingProvider& provider,
                              const HierarGraph& graph, const std::string& fact_text,
                              const std::vector<std::string>& defendants,
                              const PipelineConfig& config = {}) {
    QueryOutcome outcome;
    outcome.query = align_query(gateway, provider, fact_text, defendants);
    outcome.retrieval = research_with_query(gateway, graph, outcome.query, config.research);
    outcome.verified = audit(gateway, graph, fact_text, outcome.retrieval);
    outcome.context =
        build_context(graph, outcome.verified, outcome.retrieval, config.adjudicator);
    outcome.judgment = adjudicate(gateway, fact_text, defendants, outcome.context);
    return outcome;
}

inline PredictionRecord make_prediction_record(const CaseDocument& gold,
                                               const QueryOutcome& outcome,
                                               const HierarGraph& graph) {
    PredictionRecord record;
    record.case_id = gold.case_id;
    record.gold_charges.insert(gold.charge_labels.begin(), gold.charge_labels.end());
    record.gold_articles.insert(gold.cited_article_ids.begin(), gold.cited_article_ids.end());
    record.gold_term = gold.penalty;
    record.predicted_charges.insert(outcome.judgment.charges.begin(),
                                    outcome.judgment.charges.end());
    record.predicted_articles.insert(outcome.judgment.articles.begin(),
                                     outcome.judgment.articles.end());
    record.predicted_term = outcome.judgment.term;
    record.retrieved_article_ids = outcome.retrieval.article_ids;
    for (const auto& candidate : outcome.retrieval.candidates) {
        RetrievedContext context;
        context.node_id = candidate.node_id;
        context.kind = candidate.kind;
        if (candidate.kind == NodeKind::case_node)
            for (const auto& a : graph.fact.articles_cited_by(candidate.node_id))
                context.cited_article_ids.insert(a);
        record.retrieved_contexts.push_back(std::move(context));
    }
    for (const auto& article_id : outcome.retrieval.article_ids)
        record.retrieved_contexts.push_back(
            {article_id, NodeKind::article_node, {}});
    record.retrieved_context_size = outcome.context.blocks.size();
    record.structured_failed = outcome.judgment.structured_failed;
    return record;
}

struct MetricReport {
    std::size_t records = 0;
    double charge_accuracy = 0.0;
    double charge_micro_f1 = 0.0;
    double article_accuracy = 0.0;
    double article_micro_f1 = 0.0;
    std::optional<double> mae;
    std::size_t mae_included = 0;
    std::size_t mae_excluded = 0;
    double effectiveness = 0.0;
    bool empty_retrieval = false;
    std::optional<double> err_rate;
    ReliabilityCounts reliability;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["records"] = records;
        j["charge_accuracy"] = charge_accuracy;
        j["charge_micro_f1"] = charge_micro_f1;
        j["article_accuracy"] = article_accuracy;
        j["article_micro_f1"] = article_micro_f1;
        if (mae.has_value()) j["mae_months"] = *mae;
        j["mae_included"] = mae_included;
        j["mae_excluded"] = mae_excluded;
        j["retrieval_effectiveness"] = effectiveness;
        j["empty_retrieval"] = empty_retrieval;
        if (err_rate.has_value()) j["error_rate"] = *err_rate;
        nlohmann::ordered_json rel;
        rel["traceable_correct"] = reliability.traceable_correct;
        rel["untraceable_correct"] = reliability.untraceable_correct;
        rel["incorrect"] = reliability.incorrect;
        j["reliability"] = rel;
        return j;
    }

    std::string render_text() const {
        std::ostringstream os;
        auto row = [&os](const std::string& name, const std::string& value) {
            os << "  " << name;
            for (std::size_t i = name.size(); i < 28; ++i) os << ' ';
            os << value << '\n';
        };
        auto num = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", v);
            return std::string(buf);
        };
        os << "evaluation over " << records << " record(s)\n";
        row("charge accuracy", num(charge_accuracy));
        row("charge micro-F1", num(charge_micro_f1));
        row("article accuracy", num(article_accuracy));
        row("article micro-F1", num(article_micro_f1));
        row("MAE (months)", mae ? num(*mae) + "  [" + std::to_string(mae_included) +
                                      " incl, " + std::to_string(mae_excluded) + " excl]"
                                : "n/a  [" + std::to_string(mae_excluded) + " excl]");
        row("retrieval effectiveness",
            num(effectiveness) + (empty_retrieval ? "  [empty retrieval]" : ""));
        row("error rate", err_rate ? num(*err_rate) : "n/a");
        row("traceable correct", std::to_string(reliability.traceable_correct));
        row("untraceable correct", std::to_string(reliability.untraceable_correct));
        row("incorrect", std::to_string(reliability.incorrect));
        return os.str();
    }
};

inline MetricReport compute_metrics(const std::vector<PredictionRecord>& records) {
    MetricReport report;
    report.records = records.size();
    if (records.empty()) return report;
    report.charge_accuracy = accuracy(records);
    report.charge_micro_f1 = micro_f1(records);
    report.article_accuracy = accuracy_articles(records);
    report.article_micro_f1 = micro_f1_articles(records);
    try {
        const MaeResult mae = mae_months(records);
        report.mae = mae.mae;
        report.mae_included = mae.included;
        report.mae_excluded = mae.excluded;
    } catch (const ValidationError&) {
        report.mae_excluded = records.size();
    }
    const EffectivenessResult eff = retrieval_effectiveness(records);
    report.effectiveness = eff.value;
    report.empty_retrieval = eff.empty_retrieval;
    try {
        report.err_rate = error_rate(records);
    } catch (const ValidationError&) {
        report.err_rate = std::nullopt;
    }
    report.reliability = count_reliability(records);
    return report;
}

struct EvaluationRun {
    std::vector<PredictionRecord> records;
    MetricReport metrics;
};

// Runs the full pipeline over every test case; records are folded in
// ascending case_id order regardless of execution order.
inline EvaluationRun evaluate_corpus(Gateway& gateway, EmbeddingProvider& provider,
                                     const HierarGraph& graph,
                                     const std::vector<CaseDocument>& test_cases,
                                     const PipelineConfig& config = {}) {
    EvaluationRun run;
    for (const auto& test_case : test_cases) {
        const QueryOutcome outcome = run_query(gateway, provider, graph, test_case.fact_text,
                                               test_case.defendants, config);
        run.records.push_back(make_prediction_record(test_case, outcome, graph));
    }
    std::sort(run.records.begin(), run.records.end(),
              [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
    run.metrics = compute_metrics(run.records);
    return run;
}

// --- prediction dump (JSONL) --------------------------------------------------

inline nlohmann::ordered_json graph_json_penalty(const PenaltyTerm& term) {
    nlohmann::ordered_json j;
    if (term.months.has_value()) j["months"] = *term.months;
    j["life_imprisonment"] = term.life_imprisonment;
    j["death_penalty"] = term.death_penalty;
    return j;
}

inline nlohmann::ordered_json prediction_to_json(const PredictionRecord& r) {
    nlohmann::ordered_json j;
    j["case_id"] = r.case_id;
    j["gold_charges"] = std::vector<std::string>(r.gold_charges.begin(), r.gold_charges.end());
    j["gold_articles"] =
        std::vector<std::string>(r.gold_articles.begin(), r.gold_articles.end());
    j["gold_term"] = graph_json_penalty(r.gold_term);
    j["predicted_charges"] =
        std::vector<std::string>(r.predicted_charges.begin(), r.predicted_charges.end());
    j["predicted_articles"] =
        std::vector<std::string>(r.predicted_articles.begin(), r.predicted_articles.end());
    j["predicted_term"] = graph_json_penalty(r.predicted_term);
    j["retrieved_article_ids"] = std::vector<std::string>(r.retrieved_article_ids.begin(),
                                                          r.retrieved_article_ids.end());
    nlohmann::ordered_json contexts = nlohmann::ordered_json::array();
    for (const auto& c : r.retrieved_contexts) {
        nlohmann::ordered_json cj;
        cj["node_id"] = c.node_id;
        cj["kind"] = to_string(c.kind);
        cj["cited_article_ids"] =
            std::vector<std::string>(c.cited_article_ids.begin(), c.cited_article_ids.end());
        contexts.push_back(cj);
    }
    j["retrieved_contexts"] = contexts;
    j["retrieved_context_size"] = r.retrieved_context_size;
    j["structured_failed"] = r.structured_failed;
    return j;
}

inline std::string dump_predictions(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += prediction_to_json(r).dump();
        out += '\n';
    }
    return out;
}

inline PredictionRecord prediction_from_json(const nlohmann::json& j) {
    PredictionRecord r;
    r.case_id = j.at("case_id").get<std::string>();
    for (const auto& s : j.at("gold_charges")) r.gold_charges.insert(s.get<std::string>());
    for (const auto& s : j.at("gold_articles")) r.gold_articles.insert(s.get<std::string>());
    auto penalty = [](const nlohmann::json& pj) {
        PenaltyTerm t;
        if (pj.contains("months")) t.months = pj["months"].get<int>();
        t.life_imprisonment = pj.at("life_imprisonment").get<bool>();
        t.death_penalty = pj.at("death_penalty").get<bool>();
        return t;
    };
    r.gold_term = penalty(j.at("gold_term"));
    for (const auto& s : j.at("predicted_charges"))
        r.predicted_charges.insert(s.get<std::string>());
    for (const auto& s : j.at("predicted_articles"))
        r.predicted_articles.insert(s.get<std::string>());
    r.predicted_term = penalty(j.at("predicted_term"));
    for (const auto& s : j.at("retrieved_article_ids"))
        r.retrieved_article_ids.insert(s.get<std::string>());
    for (const auto& cj : j.at("retrieved_contexts")) {
        RetrievedContext c;
        c.node_id = cj.at("node_id").get<std::string>();
        const std::string kind = cj.at("kind").get<std::string>();
        if (kind == "case") c.kind = NodeKind::case_node;
        else if (kind == "article") c.kind = NodeKind::article_node;
        else if (kind == "offense") c.kind = NodeKind::offense_node;
        else if (kind == "interpretation") c.kind = NodeKind::interpretation_node;
        else c.kind = NodeKind::community_node;
        for (const auto& s : cj.at("cited_article_ids"))
            c.cited_article_ids.insert(s.get<std::string>());
        r.retrieved_contexts.push_back(std::move(c));
    }
    r.retrieved_context_size = j.at("retrieved_context_size").get<std::size_t>();
    r.structured_failed = j.at("structured_failed").get<bool>();
    return r;
}

inline std::vector<PredictionRecord> load_predictions(const std::string& jsonl) {
    std::vector<PredictionRecord> records;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        records.push_back(prediction_from_json(nlohmann::json::parse(line)));
    }
    return records;
}

// --- k sweep -------------------------------------------------------------------

struct SweepRow {
    int k = 0;
    double charge_accuracy = 0.0;
    double charge_micro_f1 = 0.0;
};

inline std::vector<SweepRow> sweep_k(Gateway& gateway, EmbeddingProvider& provider,
                                     const HierarGraph& graph,
                                     const std::vector<CaseDocument>& test_cases,
                                     const std::vector<int>& ks,
                                     const PipelineConfig& base_config = {}) {
    std::vector<SweepRow> rows;
    for (int k : ks) {
        PipelineConfig config = base_config;
        config.research.k = k;
        const EvaluationRun run =
            evaluate_corpus(gateway, provider, graph, test_cases, config);
        rows.push_back({k, run.metrics.charge_accuracy, run.metrics.charge_micro_f1});
    }
    return rows;
}

inline std::string render_sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "  k   charge_acc   charge_micro_f1\n";
    for (const auto& row : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-3d %.4f       %.4f\n", row.k,
                      row.charge_accuracy, row.charge_micro_f1);
        os << buf;
    }
    return os.str();
}

}  // namespace lexgraph
