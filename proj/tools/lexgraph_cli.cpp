// Command-line surface for the legal knowledge-graph reasoning engine:
// ingest, build-graph, query, evaluate, sweep, inspect.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 backend
// error. Failures print a single structured JSON error line to stderr.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "lexgraph/config.hpp"
#include "lexgraph/corpus.hpp"
#include "lexgraph/graph_build.hpp"
#include "lexgraph/graph_io.hpp"
#include "lexgraph/pipeline.hpp"

namespace {

using namespace lexgraph;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write output file: " + path);
    out << content;
}

CorpusBundle load_bundle(const RunConfig& config) {
    IngestOptions options;
    options.strict_references = config.strict_references;
    IngestResult result = ingest_corpus_files(config.cases_path, config.articles_path,
                                              config.interpretations_path, options);
    if (!result.errors.empty()) {
        std::string message = "corpus has " + std::to_string(result.errors.size()) +
                              " validation error(s); first: " + result.errors[0].to_string();
        throw ValidationError(message);
    }
    return std::move(result.bundle);
}

std::vector<CaseDocument> load_test_cases(const std::string& path) {
    IngestResult result = ingest_corpus({read_source(path, DocKind::cases)});
    if (!result.errors.empty())
        throw ValidationError("test corpus has validation errors; first: " +
                              result.errors[0].to_string());
    return std::move(result.bundle.cases);
}

int cmd_ingest(const RunConfig& config) {
    IngestOptions options;
    options.strict_references = config.strict_references;
    IngestResult result = ingest_corpus_files(config.cases_path, config.articles_path,
                                              config.interpretations_path, options);
    const ReferenceReport refs = validate_references(result.bundle);

    nlohmann::ordered_json report;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : result.files) {
        nlohmann::ordered_json fj;
        fj["path"] = f.path;
        fj["record_lines"] = f.record_lines;
        fj["accepted"] = f.accepted;
        fj["rejected"] = f.rejected;
        files.push_back(fj);
    }
    report["files"] = files;
    auto issues = [](const std::vector<IngestIssue>& list) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& issue : list) arr.push_back(issue.to_string());
        return arr;
    };
    report["errors"] = issues(result.errors);
    report["warnings"] = issues(result.warnings);
    nlohmann::ordered_json dangling = nlohmann::ordered_json::array();
    for (const auto& d : refs.dangling)
        dangling.push_back(d.source_kind + " " + d.source_id + " -> " + d.target_id + " (" +
                           d.field + ")");
    report["dangling_references"] = dangling;
    report["orphan_articles"] = refs.orphan_articles;
    report["config"] = config.to_json();
    std::cout << report.dump(2) << "\n";
    return result.errors.empty() ? 0 : 2;
}

int cmd_build(const RunConfig& config) {
    if (config.graph_path.empty()) throw ValidationError("build-graph requires --graph");
    const CorpusBundle bundle = load_bundle(config);
    auto backend = make_chat_backend(config);
    auto provider = make_embedding_provider(config);
    Gateway gateway(*backend, {}, config.max_in_flight);
    const HierarGraph graph =
        build_hierargraph(bundle, gateway, *provider, config.build_options());
    persist(graph, config.graph_path);

    nlohmann::ordered_json summary;
    summary["graph_path"] = config.graph_path;
    summary["cases"] = graph.fact.case_nodes.size();
    summary["articles"] = graph.fact.article_nodes.size();
    summary["interpretations"] = graph.rule.interpretation_nodes.size();
    summary["offenses"] = graph.fact.offense_nodes.size();
    summary["knn_edges"] = graph.ontology.knn_edges.size();
    summary["communities"] = graph.ontology.communities.size();
    summary["build_warnings"] = graph.build_warnings.size();
    summary["corpus_fingerprint"] = graph.manifest.corpus_fingerprint;
    summary["llm_usage"] = gateway.ledger().to_json();
    std::cout << summary.dump(2) << "\n";
    return 0;
}

nlohmann::ordered_json judgment_to_json(const QueryOutcome& outcome) {
    nlohmann::ordered_json j;
    j["charges"] = outcome.judgment.charges;
    j["articles"] = outcome.judgment.articles;
    j["term"] = graph_json_penalty(outcome.judgment.term);
    j["citations"] = outcome.judgment.citations;
    nlohmann::ordered_json traceability;
    for (const auto& [article_id, block] : outcome.judgment.traceable_articles)
        traceability[article_id] = block;
    for (const auto& article_id : outcome.judgment.uncited_articles)
        traceability[article_id] = "uncited";
    j["traceability"] = traceability;
    j["structured_failed"] = outcome.judgment.structured_failed;
    j["context_free"] = outcome.judgment.context_free;
    nlohmann::ordered_json retrieval;
    retrieval["candidates"] = outcome.retrieval.candidates.size();
    retrieval["articles"] = outcome.retrieval.article_ids;
    retrieval["predicted_charges"] = outcome.retrieval.predicted_charges;
    retrieval["warnings"] = outcome.retrieval.warnings;
    j["retrieval"] = retrieval;
    nlohmann::ordered_json audit;
    audit["verified_articles"] = outcome.verified.articles;
    audit["pruned_articles"] = outcome.verified.pruned;
    audit["verified_cases"] = outcome.verified.cases;
    audit["pruned_cases"] = outcome.verified.pruned_cases;
    audit["retained_cases"] = outcome.verified.retained_cases;
    audit["verified_offenses"] = outcome.verified.offenses;
    j["audit"] = audit;
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (const auto& block : outcome.context.blocks)
        blocks.push_back("[" + std::to_string(block.number) + "] " + to_string(block.kind) +
                         " " + block.node_id);
    j["context_blocks"] = blocks;
    return j;
}

int cmd_query(const RunConfig& config, const std::string& fact_text,
              const std::vector<std::string>& defendants) {
    if (config.graph_path.empty()) throw ValidationError("query requires --graph");
    if (fact_text.empty()) throw ValidationError("query requires --fact");
    const HierarGraph graph = load(config.graph_path);
    auto backend = make_chat_backend(config);
    auto provider = make_embedding_provider(config);
    Gateway gateway(*backend, {}, config.max_in_flight);
    const QueryOutcome outcome =
        run_query(gateway, *provider, graph, fact_text, defendants, config.pipeline());

    nlohmann::ordered_json out;
    out["judgment"] = judgment_to_json(outcome);
    out["verdict_text"] = outcome.judgment.verdict_text;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config) {
    if (config.graph_path.empty()) throw ValidationError("evaluate requires --graph");
    if (config.test_cases_path.empty()) throw ValidationError("evaluate requires --test-cases");
    const HierarGraph graph = load(config.graph_path);
    const std::vector<CaseDocument> test_cases = load_test_cases(config.test_cases_path);
    auto backend = make_chat_backend(config);
    auto provider = make_embedding_provider(config);
    Gateway gateway(*backend, {}, config.max_in_flight);
    const EvaluationRun run =
        evaluate_corpus(gateway, *provider, graph, test_cases, config.pipeline());

    nlohmann::ordered_json report;
    report["metrics"] = run.metrics.to_json();
    report["config"] = config.to_json();
    nlohmann::ordered_json manifest;
    manifest["embedding_provider"] = graph.manifest.embedding_provider;
    manifest["embedding_dimension"] = graph.manifest.embedding_dimension;
    manifest["llm_backend"] = graph.manifest.llm_backend;
    manifest["knn_k"] = graph.manifest.knn_k;
    manifest["corpus_fingerprint"] = graph.manifest.corpus_fingerprint;
    report["graph_manifest"] = manifest;
    report["llm_usage"] = gateway.ledger().to_json();

    if (!config.report_path.empty()) write_file(config.report_path, report.dump(2) + "\n");
    if (!config.predictions_path.empty())
        write_file(config.predictions_path, dump_predictions(run.records));
    std::cout << run.metrics.render_text();
    return 0;
}

int cmd_sweep(const RunConfig& config, const std::vector<int>& ks, const std::string& out_path) {
    if (config.graph_path.empty()) throw ValidationError("sweep requires --graph");
    if (config.test_cases_path.empty()) throw ValidationError("sweep requires --test-cases");
    const HierarGraph graph = load(config.graph_path);
    const std::vector<CaseDocument> test_cases = load_test_cases(config.test_cases_path);
    auto backend = make_chat_backend(config);
    auto provider = make_embedding_provider(config);
    Gateway gateway(*backend, {}, config.max_in_flight);
    const std::vector<SweepRow> rows =
        sweep_k(gateway, *provider, graph, test_cases, ks, config.pipeline());
    std::cout << render_sweep_table(rows);
    if (!out_path.empty()) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json rj;
            rj["k"] = row.k;
            rj["charge_accuracy"] = row.charge_accuracy;
            rj["charge_micro_f1"] = row.charge_micro_f1;
            arr.push_back(rj);
        }
        nlohmann::ordered_json out;
        out["rows"] = arr;
        out["config"] = config.to_json();
        write_file(out_path, out.dump(2) + "\n");
    }
    return 0;
}

int cmd_inspect(const RunConfig& config, const std::string& node_id) {
    if (config.graph_path.empty()) throw ValidationError("inspect requires --graph");
    const HierarGraph graph = load(config.graph_path);
    nlohmann::ordered_json out;
    out["node_id"] = node_id;
    bool found = false;

    if (graph.fact.case_nodes.count(node_id)) {
        found = true;
        const CaseDocument& doc = graph.fact.case_nodes.at(node_id);
        out["kind"] = "case";
        out["fact_text"] = doc.fact_text;
        out["charges"] = doc.charge_labels;
        out["cited_articles"] = doc.cited_article_ids;
        if (graph.ontology.feature_index.count(node_id)) {
            const OntologyFeatures& f = graph.ontology.feature_index.at(node_id);
            nlohmann::ordered_json fj;
            fj["defendant_attributes"] = f.defendant_attributes;
            fj["criminal_behaviors"] = f.criminal_behaviors;
            fj["victim_characteristics"] = f.victim_characteristics;
            fj["subjective_mental_states"] = f.subjective_mental_states;
            out["features"] = fj;
        }
        if (graph.ontology.membership.count(node_id))
            out["community"] = graph.ontology.membership.at(node_id);
        nlohmann::ordered_json neighbors = nlohmann::ordered_json::array();
        for (const auto& [a, b] : graph.ontology.knn_edges) {
            if (a == node_id) neighbors.push_back(b);
            if (b == node_id) neighbors.push_back(a);
        }
        out["knn_neighbors"] = neighbors;
    } else if (graph.rule.article_nodes.count(node_id)) {
        found = true;
        const ArticleDocument& doc = graph.rule.article_nodes.at(node_id);
        out["kind"] = "article";
        out["article_number"] = doc.article_number;
        out["body_text"] = doc.body_text;
        out["interpretations"] = graph.rule.interpretations_for(node_id);
        if (graph.rule.checklists.count(node_id)) {
            const DiagnosticChecklist& checklist = graph.rule.checklists.at(node_id);
            out["checklist"] = checklist.items;
            out["checklist_fallback"] = checklist.fallback;
        }
        nlohmann::ordered_json citing = nlohmann::ordered_json::array();
        for (const auto& [case_id, article_id] : graph.fact.edges_case_article)
            if (article_id == node_id) citing.push_back(case_id);
        out["cited_by_cases"] = citing;
    } else if (graph.fact.offense_nodes.count(node_id)) {
        found = true;
        out["kind"] = "offense";
        out["member_cases"] = graph.fact.offense_nodes.at(node_id).member_case_ids;
    } else if (graph.ontology.communities.count(node_id)) {
        found = true;
        const CommunityNode& node = graph.ontology.communities.at(node_id);
        out["kind"] = "community";
        out["members"] = node.member_case_ids;
        out["summary_text"] = node.summary_text;
        out["summary_fallback"] = node.summary_fallback;
    } else if (graph.rule.interpretation_nodes.count(node_id)) {
        found = true;
        const InterpretationDocument& doc = graph.rule.interpretation_nodes.at(node_id);
        out["kind"] = "interpretation";
        out["body_text"] = doc.body_text;
        out["target_articles"] = doc.target_article_ids;
    }

    if (!found) throw ValidationError("node '" + node_id + "' not found in graph");
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical legal knowledge-graph reasoning engine"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file supplying defaults");

    RunConfig config;

    // Flag values overlay the config file after parsing.
    struct FlagValues {
        std::optional<std::string> cases, articles, interpretations, test_cases, graph;
        std::optional<std::string> backend, script, chat_url, chat_model;
        std::optional<std::string> embedding;
        std::optional<std::size_t> dimension;
        std::optional<int> k, knn_k, charge_cap, top_m, max_in_flight;
        std::optional<std::size_t> context_cap;
        std::optional<double> resolution;
        std::optional<std::uint64_t> seed;
        bool strict = false;
        std::optional<std::string> report, predictions;
    } flags;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--cases", flags.cases, "cases JSONL file");
        cmd->add_option("--articles", flags.articles, "articles JSONL file");
        cmd->add_option("--interpretations", flags.interpretations,
                        "interpretations JSONL file");
        cmd->add_option("--test-cases", flags.test_cases, "test cases JSONL file");
        cmd->add_option("--graph", flags.graph, "persisted graph file");
        cmd->add_option("--backend", flags.backend, "chat backend: scripted|http");
        cmd->add_option("--script", flags.script, "scripted backend recording file");
        cmd->add_option("--chat-url", flags.chat_url, "chat endpoint base url");
        cmd->add_option("--chat-model", flags.chat_model, "chat model name");
        cmd->add_option("--embedding", flags.embedding,
                        "embedding provider: deterministic|http");
        cmd->add_option("--dimension", flags.dimension, "deterministic embedder dimension");
        cmd->add_option("--k", flags.k, "retrieval k");
        cmd->add_option("--knn-k", flags.knn_k, "ontology k-NN degree");
        cmd->add_option("--charge-cap", flags.charge_cap, "charge-anchored per-charge cap");
        cmd->add_option("--community-top-m", flags.top_m, "communities expanded per query");
        cmd->add_option("--context-cap", flags.context_cap, "max adjudicator context blocks");
        cmd->add_option("--resolution", flags.resolution, "Leiden resolution");
        cmd->add_option("--seed", flags.seed, "rng seed");
        cmd->add_option("--max-in-flight", flags.max_in_flight, "LLM call concurrency cap");
        cmd->add_flag("--strict", flags.strict, "dangling references are errors");
        cmd->add_option("--report", flags.report, "metric report output path");
        cmd->add_option("--predictions", flags.predictions, "prediction dump output path");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "validate the corpus files");
    add_common(ingest);
    CLI::App* build = app.add_subcommand("build-graph", "build and persist the graph");
    add_common(build);
    CLI::App* query = app.add_subcommand("query", "adjudicate one fact description");
    add_common(query);
    std::string fact_text;
    std::string fact_file;
    std::vector<std::string> defendants;
    query->add_option("--fact", fact_text, "fact description text");
    query->add_option("--fact-file", fact_file, "file holding the fact description");
    query->add_option("--defendant", defendants, "defendant label (repeatable)");
    CLI::App* evaluate = app.add_subcommand("evaluate", "run the evaluation harness");
    add_common(evaluate);
    CLI::App* sweep = app.add_subcommand("sweep", "evaluate across retrieval k values");
    add_common(sweep);
    std::vector<int> ks{3, 4, 5, 6};
    std::string sweep_out;
    sweep->add_option("--ks", ks, "k values to sweep");
    sweep->add_option("--out", sweep_out, "sweep table output path");
    CLI::App* inspect = app.add_subcommand("inspect", "dump one graph node");
    add_common(inspect);
    std::string node_id;
    inspect->add_option("--node", node_id, "node id to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << nlohmann::ordered_json{{"error", "usage"}, {"message", e.what()}}.dump()
                  << "\n";
        return 1;
    }

    auto overlay = [&] {
        if (flags.cases) config.cases_path = *flags.cases;
        if (flags.articles) config.articles_path = *flags.articles;
        if (flags.interpretations) config.interpretations_path = *flags.interpretations;
        if (flags.test_cases) config.test_cases_path = *flags.test_cases;
        if (flags.graph) config.graph_path = *flags.graph;
        if (flags.backend) config.backend = *flags.backend;
        if (flags.script) config.script_path = *flags.script;
        if (flags.chat_url) config.chat_base_url = *flags.chat_url;
        if (flags.chat_model) config.chat_model = *flags.chat_model;
        if (flags.embedding) config.embedding = *flags.embedding;
        if (flags.dimension) config.embedding_dimension = *flags.dimension;
        if (flags.k) config.k = *flags.k;
        if (flags.knn_k) config.knn_k = *flags.knn_k;
        if (flags.charge_cap) config.charge_case_cap = *flags.charge_cap;
        if (flags.top_m) config.community_top_m = *flags.top_m;
        if (flags.context_cap) config.context_cap = *flags.context_cap;
        if (flags.resolution) config.leiden_resolution = *flags.resolution;
        if (flags.seed) config.rng_seed = *flags.seed;
        if (flags.max_in_flight) config.max_in_flight = *flags.max_in_flight;
        if (flags.strict) config.strict_references = true;
        if (flags.report) config.report_path = *flags.report;
        if (flags.predictions) config.predictions_path = *flags.predictions;
    };

    try {
        if (!config_path.empty()) config = RunConfig::from_file(config_path);
        overlay();
        if (ingest->parsed()) return cmd_ingest(config);
        if (build->parsed()) return cmd_build(config);
        if (query->parsed()) {
            if (!fact_file.empty()) {
                std::ifstream in(fact_file);
                if (!in) throw ValidationError("cannot open fact file: " + fact_file);
                std::ostringstream body;
                body << in.rdbuf();
                fact_text = trim(body.str());
            }
            return cmd_query(config, fact_text, defendants);
        }
        if (evaluate->parsed()) return cmd_evaluate(config);
        if (sweep->parsed()) return cmd_sweep(config, ks, sweep_out);
        if (inspect->parsed()) return cmd_inspect(config, node_id);
    } catch (const TransportError& e) {
        std::cerr << nlohmann::ordered_json{{"error", "backend"}, {"message", e.what()}}.dump()
                  << "\n";
        return 3;
    } catch (const BackendError& e) {
        std::cerr << nlohmann::ordered_json{{"error", "backend"}, {"message", e.what()}}.dump()
                  << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << nlohmann::ordered_json{{"error", "data"}, {"message", e.what()}}.dump()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::ordered_json{{"error", "internal"}, {"message", e.what()}}.dump()
                  << "\n";
        return 2;
    }
    return 0;
}
