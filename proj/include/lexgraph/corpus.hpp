#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"

namespace lexgraph {

// A precedent case: fact description, defendants, ground-truth charges,
// cited statute articles, and the decided penalty.
struct CaseDocument {
    std::string case_id;
    std::string fact_text;
    std::vector<std::string> defendants;
    std::vector<std::string> charge_labels;
    std::vector<std::string> cited_article_ids;
    PenaltyTerm penalty;

    bool operator==(const CaseDocument&) const = default;
};

struct ArticleDocument {
    std::string article_id;
    std::string article_number;
    std::string body_text;
    std::vector<std::string> interpretation_ids;

    bool operator==(const ArticleDocument&) const = default;
};

struct InterpretationDocument {
    std::string interpretation_id;
    std::string body_text;
    std::vector<std::string> target_article_ids;

    bool operator==(const InterpretationDocument&) const = default;
};

enum class DocKind { cases, articles, interpretations };

inline const char* to_string(DocKind kind) {
    switch (kind) {
        case DocKind::cases: return "cases";
        case DocKind::articles: return "articles";
        case DocKind::interpretations: return "interpretations";
    }
    return "?";
}

struct IngestIssue {
    std::string file;
    std::size_t line = 0;      // 1-based; 0 when not line-addressed
    std::string field;
    std::string message;

    std::string to_string() const {
        std::ostringstream os;
        os << file << ":" << line;
        if (!field.empty()) os << " [" << field << "]";
        os << " " << message;
        return os.str();
    }
};

struct FileStats {
    std::string path;
    std::size_t record_lines = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Validated, immutable collections of the three document kinds. Document
// order within each collection is corpus (file) order.
struct CorpusBundle {
    std::vector<CaseDocument> cases;
    std::vector<ArticleDocument> articles;
    std::vector<InterpretationDocument> interpretations;

    bool operator==(const CorpusBundle&) const = default;

    const CaseDocument* find_case(const std::string& id) const {
        for (const auto& c : cases)
            if (c.case_id == id) return &c;
        return nullptr;
    }
    const ArticleDocument* find_article(const std::string& id) const {
        for (const auto& a : articles)
            if (a.article_id == id) return &a;
        return nullptr;
    }
    const InterpretationDocument* find_interpretation(const std::string& id) const {
        for (const auto& j : interpretations)
            if (j.interpretation_id == id) return &j;
        return nullptr;
    }
};

struct IngestResult {
    CorpusBundle bundle;
    std::vector<IngestIssue> errors;      // records rejected
    std::vector<IngestIssue> warnings;    // records accepted with caveats
    std::vector<FileStats> files;
};

struct IngestOptions {
    // With strict references, dangling cross-references reject the record;
    // otherwise they are reported as warnings and the record is kept.
    bool strict_references = false;
};

namespace detail {

inline std::string get_string(const nlohmann::json& rec, const char* key, bool required,
                              std::size_t line) {
    if (!rec.contains(key)) {
        if (required)
            throw ValidationError("missing field '" + std::string(key) + "' at line " +
                                  std::to_string(line));
        return {};
    }
    if (!rec[key].is_string())
        throw ValidationError("field '" + std::string(key) + "' must be a string at line " +
                              std::to_string(line));
    return rec[key].get<std::string>();
}

inline std::vector<std::string> get_string_list(const nlohmann::json& rec, const char* key,
                                                std::size_t line) {
    if (!rec.contains(key)) return {};
    if (!rec[key].is_array())
        throw ValidationError("field '" + std::string(key) + "' must be an array at line " +
                              std::to_string(line));
    std::vector<std::string> out;
    for (const auto& item : rec[key]) {
        if (!item.is_string())
            throw ValidationError("field '" + std::string(key) +
                                  "' must contain only strings at line " + std::to_string(line));
        out.push_back(item.get<std::string>());
    }
    return out;
}

inline nlohmann::json parse_record(const std::string& text, std::size_t line) {
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("invalid JSON record at line " + std::to_string(line) + ": " +
                              e.what());
    }
    if (!rec.is_object())
        throw ValidationError("record must be a JSON object at line " + std::to_string(line));
    return rec;
}

}  // namespace detail

inline CaseDocument parse_case_line(const std::string& text, std::size_t line = 0) {
    const nlohmann::json rec = detail::parse_record(text, line);
    CaseDocument doc;
    doc.case_id = detail::get_string(rec, "case_id", true, line);
    if (doc.case_id.empty()) throw ValidationError("case_id must be non-empty at line " +
                                                   std::to_string(line));
    doc.fact_text = detail::get_string(rec, "fact_text", true, line);
    if (doc.fact_text.empty())
        throw ValidationError("fact_text must be non-empty at line " + std::to_string(line));
    doc.defendants = detail::get_string_list(rec, "defendants", line);
    doc.charge_labels = detail::get_string_list(rec, "charge_labels", line);
    doc.cited_article_ids = detail::get_string_list(rec, "cited_article_ids", line);
    if (rec.contains("penalty_months")) {
        if (!rec["penalty_months"].is_number_integer())
            throw ValidationError("field 'penalty_months' must be an integer at line " +
                                  std::to_string(line));
        const auto months = rec["penalty_months"].get<long long>();
        if (months < 0)
            throw ValidationError("field 'penalty_months' must be non-negative at line " +
                                  std::to_string(line));
        doc.penalty.months = static_cast<int>(months);
    }
    if (rec.contains("life_imprisonment")) {
        if (!rec["life_imprisonment"].is_boolean())
            throw ValidationError("field 'life_imprisonment' must be a boolean at line " +
                                  std::to_string(line));
        doc.penalty.life_imprisonment = rec["life_imprisonment"].get<bool>();
    }
    if (rec.contains("death_penalty")) {
        if (!rec["death_penalty"].is_boolean())
            throw ValidationError("field 'death_penalty' must be a boolean at line " +
                                  std::to_string(line));
        doc.penalty.death_penalty = rec["death_penalty"].get<bool>();
    }
    if (!doc.penalty.single_active_form())
        throw ValidationError("fields 'penalty_months'/'life_imprisonment'/'death_penalty': at "
                              "most one penalty form may be active at line " +
                              std::to_string(line));
    return doc;
}

inline ArticleDocument parse_article_line(const std::string& text, std::size_t line = 0) {
    const nlohmann::json rec = detail::parse_record(text, line);
    ArticleDocument doc;
    doc.article_id = detail::get_string(rec, "article_id", true, line);
    if (doc.article_id.empty())
        throw ValidationError("article_id must be non-empty at line " + std::to_string(line));
    doc.article_number = detail::get_string(rec, "article_number", false, line);
    doc.body_text = detail::get_string(rec, "body_text", true, line);
    if (doc.body_text.empty())
        throw ValidationError("body_text must be non-empty at line " + std::to_string(line));
    doc.interpretation_ids = detail::get_string_list(rec, "interpretation_ids", line);
    return doc;
}

inline InterpretationDocument parse_interpretation_line(const std::string& text,
                                                        std::size_t line = 0) {
    const nlohmann::json rec = detail::parse_record(text, line);
    InterpretationDocument doc;
    doc.interpretation_id = detail::get_string(rec, "interpretation_id", true, line);
    if (doc.interpretation_id.empty())
        throw ValidationError("interpretation_id must be non-empty at line " +
                              std::to_string(line));
    doc.body_text = detail::get_string(rec, "body_text", true, line);
    if (doc.body_text.empty())
        throw ValidationError("body_text must be non-empty at line " + std::to_string(line));
    doc.target_article_ids = detail::get_string_list(rec, "target_article_ids", line);
    return doc;
}

// Canonical JSONL rendering. Field order is fixed, absent optionals are
// omitted, so identical bundles serialize to identical bytes.
inline std::string to_jsonl_line(const CaseDocument& doc) {
    nlohmann::ordered_json rec;
    rec["case_id"] = doc.case_id;
    rec["fact_text"] = doc.fact_text;
    rec["defendants"] = doc.defendants;
    rec["charge_labels"] = doc.charge_labels;
    rec["cited_article_ids"] = doc.cited_article_ids;
    if (doc.penalty.months.has_value()) rec["penalty_months"] = *doc.penalty.months;
    rec["life_imprisonment"] = doc.penalty.life_imprisonment;
    rec["death_penalty"] = doc.penalty.death_penalty;
    return rec.dump();
}

inline std::string to_jsonl_line(const ArticleDocument& doc) {
    nlohmann::ordered_json rec;
    rec["article_id"] = doc.article_id;
    rec["article_number"] = doc.article_number;
    rec["body_text"] = doc.body_text;
    rec["interpretation_ids"] = doc.interpretation_ids;
    return rec.dump();
}

inline std::string to_jsonl_line(const InterpretationDocument& doc) {
    nlohmann::ordered_json rec;
    rec["interpretation_id"] = doc.interpretation_id;
    rec["body_text"] = doc.body_text;
    rec["target_article_ids"] = doc.target_article_ids;
    return rec.dump();
}

template <typename Doc>
std::string to_jsonl(const std::vector<Doc>& docs) {
    std::string out;
    for (const auto& d : docs) {
        out += to_jsonl_line(d);
        out += '\n';
    }
    return out;
}

inline std::string serialize_bundle(const CorpusBundle& bundle) {
    return to_jsonl(bundle.cases) + to_jsonl(bundle.articles) + to_jsonl(bundle.interpretations);
}

struct IngestSource {
    std::string path;   // label used in issue reports
    DocKind kind;
    std::string content;  // line-delimited records
};

inline IngestSource read_source(const std::filesystem::path& path, DocKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open corpus file: " + path.string());
    std::ostringstream body;
    body << in.rdbuf();
    return IngestSource{path.string(), kind, body.str()};
}

// Parse and validate line-delimited sources into a typed bundle. Every
// non-blank line either becomes a document or produces a line-addressed
// error; per-file accepted + rejected counts always equal the record-line
// count. Cross-references are then checked bundle-wide.
inline IngestResult ingest_corpus(const std::vector<IngestSource>& sources,
                                  const IngestOptions& options = {}) {
    IngestResult result;
    std::set<std::string> case_ids, article_ids, interp_ids;
    // Line provenance for documents, for cross-reference reporting.
    std::map<std::string, std::pair<std::string, std::size_t>> case_at, article_at, interp_at;

    for (const auto& source : sources) {
        FileStats stats;
        stats.path = source.path;
        std::istringstream lines(source.content);
        std::string text;
        std::size_t line_no = 0;
        while (std::getline(lines, text)) {
            ++line_no;
            if (trim(text).empty()) continue;  // blank lines are not records
            ++stats.record_lines;
            try {
                switch (source.kind) {
                    case DocKind::cases: {
                        auto doc = parse_case_line(text, line_no);
                        if (!case_ids.insert(doc.case_id).second)
                            throw ValidationError("duplicate case_id '" + doc.case_id +
                                                  "' at line " + std::to_string(line_no));
                        case_at[doc.case_id] = {source.path, line_no};
                        result.bundle.cases.push_back(std::move(doc));
                        break;
                    }
                    case DocKind::articles: {
                        auto doc = parse_article_line(text, line_no);
                        if (!article_ids.insert(doc.article_id).second)
                            throw ValidationError("duplicate article_id '" + doc.article_id +
                                                  "' at line " + std::to_string(line_no));
                        article_at[doc.article_id] = {source.path, line_no};
                        result.bundle.articles.push_back(std::move(doc));
                        break;
                    }
                    case DocKind::interpretations: {
                        auto doc = parse_interpretation_line(text, line_no);
                        if (!interp_ids.insert(doc.interpretation_id).second)
                            throw ValidationError("duplicate interpretation_id '" +
                                                  doc.interpretation_id + "' at line " +
                                                  std::to_string(line_no));
                        interp_at[doc.interpretation_id] = {source.path, line_no};
                        result.bundle.interpretations.push_back(std::move(doc));
                        break;
                    }
                }
                ++stats.accepted;
            } catch (const ValidationError& e) {
                ++stats.rejected;
                result.errors.push_back({source.path, line_no, "", e.what()});
            }
        }
        result.files.push_back(stats);
    }

    // Cross-reference pass. Dangling references are warnings by default and
    // errors under strict mode; strict rejections drop the citing document.
    std::set<std::string> strict_drop_cases, strict_drop_articles, strict_drop_interps;
    auto report = [&](const std::string& owner_kind, const std::string& owner_id,
                      const std::pair<std::string, std::size_t>& at, const std::string& field,
                      const std::string& target) {
        IngestIssue issue{at.first, at.second, field,
                          owner_kind + " '" + owner_id + "' references unknown id '" + target +
                              "'"};
        if (options.strict_references) {
            result.errors.push_back(issue);
        } else {
            result.warnings.push_back(issue);
        }
    };
    for (const auto& c : result.bundle.cases)
        for (const auto& a : c.cited_article_ids)
            if (!article_ids.count(a)) {
                report("case", c.case_id, case_at[c.case_id], "cited_article_ids", a);
                if (options.strict_references) strict_drop_cases.insert(c.case_id);
            }
    for (const auto& a : result.bundle.articles)
        for (const auto& j : a.interpretation_ids)
            if (!interp_ids.count(j)) {
                report("article", a.article_id, article_at[a.article_id], "interpretation_ids", j);
                if (options.strict_references) strict_drop_articles.insert(a.article_id);
            }
    for (const auto& j : result.bundle.interpretations)
        for (const auto& a : j.target_article_ids)
            if (!article_ids.count(a)) {
                report("interpretation", j.interpretation_id, interp_at[j.interpretation_id],
                       "target_article_ids", a);
                if (options.strict_references) strict_drop_interps.insert(j.interpretation_id);
            }

    if (options.strict_references &&
        (!strict_drop_cases.empty() || !strict_drop_articles.empty() ||
         !strict_drop_interps.empty())) {
        auto adjust = [&](const std::string& path, std::size_t drops) {
            for (auto& f : result.files)
                if (f.path == path) {
                    f.accepted -= drops;
                    f.rejected += drops;
                }
        };
        std::map<std::string, std::size_t> drops_per_file;
        auto erase_docs = [&](auto& docs, const auto& ids, auto id_of, auto& at) {
            std::erase_if(docs, [&](const auto& d) {
                if (!ids.count(id_of(d))) return false;
                drops_per_file[at[id_of(d)].first] += 1;
                return true;
            });
        };
        erase_docs(result.bundle.cases, strict_drop_cases,
                   [](const CaseDocument& d) { return d.case_id; }, case_at);
        erase_docs(result.bundle.articles, strict_drop_articles,
                   [](const ArticleDocument& d) { return d.article_id; }, article_at);
        erase_docs(result.bundle.interpretations, strict_drop_interps,
                   [](const InterpretationDocument& d) { return d.interpretation_id; },
                   interp_at);
        for (const auto& [path, n] : drops_per_file) adjust(path, n);
    }
    return result;
}

inline IngestResult ingest_corpus_files(const std::filesystem::path& cases_path,
                                        const std::filesystem::path& articles_path,
                                        const std::filesystem::path& interpretations_path,
                                        const IngestOptions& options = {}) {
    std::vector<IngestSource> sources;
    sources.push_back(read_source(cases_path, DocKind::cases));
    sources.push_back(read_source(articles_path, DocKind::articles));
    sources.push_back(read_source(interpretations_path, DocKind::interpretations));
    return ingest_corpus(sources, options);
}

// --- reference report --------------------------------------------------------

struct DanglingReference {
    std::string source_kind;
    std::string source_id;
    std::string field;
    std::string target_id;

    bool operator==(const DanglingReference&) const = default;
};

struct ReferenceReport {
    std::vector<DanglingReference> dangling;
    // Articles never cited by any case: informational, not an error.
    std::vector<std::string> orphan_articles;

    bool clean() const { return dangling.empty(); }
};

inline ReferenceReport validate_references(const CorpusBundle& bundle) {
    ReferenceReport report;
    std::set<std::string> article_ids, interp_ids, cited;
    for (const auto& a : bundle.articles) article_ids.insert(a.article_id);
    for (const auto& j : bundle.interpretations) interp_ids.insert(j.interpretation_id);
    for (const auto& c : bundle.cases)
        for (const auto& a : c.cited_article_ids) {
            cited.insert(a);
            if (!article_ids.count(a))
                report.dangling.push_back({"case", c.case_id, "cited_article_ids", a});
        }
    for (const auto& a : bundle.articles)
        for (const auto& j : a.interpretation_ids)
            if (!interp_ids.count(j))
                report.dangling.push_back({"article", a.article_id, "interpretation_ids", j});
    for (const auto& j : bundle.interpretations)
        for (const auto& a : j.target_article_ids)
            if (!article_ids.count(a))
                report.dangling.push_back(
                    {"interpretation", j.interpretation_id, "target_article_ids", a});
    for (const auto& a : bundle.articles)
        if (!cited.count(a.article_id)) report.orphan_articles.push_back(a.article_id);
    return report;
}

inline std::string corpus_fingerprint(const CorpusBundle& bundle) {
    return to_hex(fnv1a64(serialize_bundle(bundle)));
}

}  // namespace lexgraph
