// Generates the golden test fixture: a synthetic legal corpus plus the
// scripted-backend recording that makes full pipeline runs deterministic.
//
// The corpus is synthesized from a fixed offense/article vocabulary. LLM
// responses come from a rule-based policy that derives every reply from the
// prompt text alone, so re-running this tool reproduces the fixture
// byte-for-byte. The policy's exchanges are recorded as a fingerprint ->
// response script which the scripted backend replays in tests and CLI runs.
//
// Usage: lexgraph_fixturegen <output-dir>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexgraph/corpus.hpp"
#include "lexgraph/graph_build.hpp"
#include "lexgraph/llm.hpp"
#include "lexgraph/pipeline.hpp"

namespace {

using namespace lexgraph;

struct ChecklistEntry {
    std::string question;
    std::string marker;  // substring of the facts that makes the answer true
};

struct OffenseSpec {
    std::string name;
    std::string article_id;
    std::string article_number;
    int base_months;
    std::string fact_marker;      // verb phrase planted in fact texts
    std::string behavior_keyword;
    std::string victim_keyword;
    std::string mental_keyword;
    std::string body_text;
    std::vector<ChecklistEntry> checklist;
};

const std::vector<OffenseSpec>& offense_table() {
    static const std::vector<OffenseSpec> table = {
        {"Theft", "A264", "Article 264", 9, "stole",
         "Theft", "Household Property", "Direct Intent",
         "Whoever secretly steals property belonging to another person shall be sentenced "
         "to fixed-term imprisonment graded by the amount involved.",
         {{"Did the defendant take property belonging to another?", "stole"},
          {"Was the taking done secretly or without the owner's knowledge?", "unnoticed"}}},
        {"Fraud", "A266", "Article 266", 24, "fabricated investment returns",
         "Fraud", "Investor Funds", "Intent To Defraud",
         "Whoever obtains property by fabricating facts or concealing the truth shall be "
         "sentenced to fixed-term imprisonment graded by the amount defrauded.",
         {{"Did the defendant fabricate facts or conceal the truth?",
           "fabricated investment returns"},
          {"Did the victim fall into a mistake due to this act?", "relying on the promises"},
          {"Did the victim dispose of property based on this mistake?",
           "transferred their savings"}}},
        {"Robbery", "A263", "Article 263", 60, "seized valuables by force",
         "Robbery", "Personal Property", "Violent Intent",
         "Whoever seizes property by violence, coercion or other forcible means shall be "
         "sentenced to fixed-term imprisonment of not less than three years.",
         {{"Did the defendant use violence or coercion against the victim?",
           "seized valuables by force"},
          {"Was property taken during or immediately after the coercion?",
           "carried away"}}},
        {"Intentional Injury", "A234", "Article 234", 30, "struck and injured",
         "Intentional Injury", "Bodily Integrity", "Harmful Intent",
         "Whoever intentionally injures the person of another shall be sentenced to "
         "fixed-term imprisonment graded by the severity of the injury.",
         {{"Did the defendant intentionally inflict bodily harm?", "struck and injured"}}},
        {"Dangerous Driving", "A133", "Article 133", 4, "drove while heavily intoxicated",
         "Dangerous Driving", "Road Safety", "Conscious Disregard",
         "Whoever drives a motor vehicle on a road while intoxicated or races recklessly "
         "shall be sentenced to short-term detention and fined.",
         {{"Did the defendant operate a motor vehicle on a public road?",
           "on the ring road"},
          {"Was the defendant intoxicated or racing at the time?",
           "drove while heavily intoxicated"}}},
        {"Drug Trafficking", "A347", "Article 347", 84, "sold narcotics",
         "Drug Trafficking", "Public Health", "Profit Motive",
         "Whoever smuggles, traffics in, transports or manufactures narcotic drugs shall "
         "be punished regardless of quantity, graded up to life imprisonment.",
         {{"Did the defendant sell, transport or manufacture narcotics?", "sold narcotics"}}},
        {"Embezzlement", "A271", "Article 271", 36, "diverted company funds",
         "Embezzlement", "Employer Assets", "Breach Of Trust",
         "Whoever, taking advantage of an occupational position, unlawfully takes the "
         "property of their employing entity shall be sentenced to fixed-term imprisonment.",
         {{"Did the defendant occupy a position of trust in the entity?",
           "as its accountant"},
          {"Did the defendant take the entity's property using that position?",
           "diverted company funds"}}},
        {"Arson", "A114", "Article 114", 72, "set fire to a warehouse",
         "Arson", "Public Safety", "Reckless Endangerment",
         "Whoever commits arson or spreads hazards endangering public security shall be "
         "sentenced to fixed-term imprisonment of not less than three years.",
         {{"Did the defendant start a fire endangering public safety?",
           "set fire to a warehouse"}}},
        {"Kidnapping", "A239", "Article 239", 96, "abducted the victim for ransom",
         "Kidnapping", "Personal Liberty", "Coercive Intent",
         "Whoever kidnaps another person for ransom or holds a person hostage shall be "
         "sentenced to fixed-term imprisonment of not less than five years.",
         {{"Did the defendant deprive the victim of liberty?",
           "abducted the victim for ransom"},
          {"Was the deprivation aimed at ransom or another demand?", "demanded payment"}}},
        {"Unlawful Vehicle Taking", "A267", "Article 267", 6, "hotwired a parked sedan",
         "Unlawful Vehicle Taking", "Motor Conveyance", "Intent To Temporarily Use",
         "Whoever commits unauthorized appropriation of a motor conveyance without intent "
         "to permanently keep it shall be sentenced to short-term imprisonment.",
         {{"Did the defendant take a motor conveyance without authorization?",
           "hotwired a parked sedan"}}},
    };
    return table;
}

// Orphan statutes: never cited by any case. They populate the distractor
// store and make selected query golds unreachable through retrieval.
std::vector<ArticleDocument> orphan_statutes() {
    std::vector<ArticleDocument> out;
    const std::vector<std::pair<std::string, std::string>> bodies = {
        {"A801", "Whoever forges official seals of state organs shall be sentenced to "
                 "fixed-term imprisonment or short-term detention."},
        {"A802", "Whoever illegally detains another person or deprives personal freedom by "
                 "other means shall be sentenced to fixed-term imprisonment."},
        {"A803", "Whoever covers up or conceals proceeds of crime knowing their origin "
                 "shall be sentenced to fixed-term imprisonment."},
        {"A804", "Whoever refuses to execute binding judgments of the courts despite "
                 "ability to do so shall be sentenced to short-term imprisonment."},
        {"A805", "Whoever organizes gambling houses for profit shall be sentenced to "
                 "fixed-term imprisonment and fined."},
        {"A806", "Whoever interferes with public service by violence or threat shall be "
                 "sentenced to short-term imprisonment or public surveillance."},
    };
    int number = 801;
    for (const auto& [id, body] : bodies) {
        ArticleDocument doc;
        doc.article_id = id;
        doc.article_number = "Article " + std::to_string(number++);
        doc.body_text = body;
        out.push_back(doc);
    }
    return out;
}

const OffenseSpec* find_by_question(const std::string& question) {
    for (const auto& offense : offense_table())
        for (const auto& entry : offense.checklist)
            if (entry.question == question) return &offense;
    return nullptr;
}

std::string section(const std::string& text, const std::string& begin,
                    const std::string& end) {
    const std::size_t from = text.find(begin);
    if (from == std::string::npos) return {};
    const std::size_t start = from + begin.size();
    const std::size_t stop = end.empty() ? std::string::npos : text.find(end, start);
    return text.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
}

// Offenses whose fact marker occurs in the text, ordered by first occurrence.
std::vector<const OffenseSpec*> detect_offenses(const std::string& facts) {
    std::vector<std::pair<std::size_t, const OffenseSpec*>> hits;
    for (const auto& offense : offense_table()) {
        const std::size_t at = facts.find(offense.fact_marker);
        if (at != std::string::npos) hits.push_back({at, &offense});
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<const OffenseSpec*> out;
    for (const auto& [_, offense] : hits) out.push_back(offense);
    return out;
}

int predicted_months(const std::string& facts) {
    int total = 0;
    for (const auto* offense : detect_offenses(facts)) total += offense->base_months;
    if (facts.find("repeat offender") != std::string::npos) total += 6;
    if (facts.find("surrendered voluntarily") != std::string::npos) total -= 2;
    return std::max(total, 0);
}

// The rule-based response policy: every reply is a pure function of the
// rendered prompt.
std::string policy(const RenderedPrompt& prompt) {
    switch (prompt.id) {
        case TemplateId::keyword_extraction: {
            const std::string facts = section(prompt.user, "case: ", "");
            nlohmann::ordered_json j;
            std::vector<std::string> attrs = {"Adult"};
            if (facts.find("repeat offender") != std::string::npos)
                attrs.push_back("Prior Criminal Record");
            std::vector<std::string> behaviors, victims, states;
            for (const auto* offense : detect_offenses(facts)) {
                behaviors.push_back(offense->behavior_keyword);
                victims.push_back(offense->victim_keyword);
                states.push_back(offense->mental_keyword);
            }
            if (facts.find("substantial sum") != std::string::npos)
                victims.push_back("Large Amount");
            if (facts.find("surrendered voluntarily") != std::string::npos)
                states.push_back("Voluntary Surrender");
            j["Defendant_Attribute"] = attrs;
            j["Criminal_Behaviors"] = behaviors;
            j["Victim_Characteristics"] = victims;
            j["Subjective_Mental_States"] = states;
            return j.dump();
        }
        case TemplateId::charge_prejudge: {
            const std::string facts = section(prompt.user, "case: ", "");
            const auto offenses = detect_offenses(facts);
            if (offenses.empty()) return "[]";
            std::string out = "[";
            for (std::size_t i = 0; i < offenses.size(); ++i) {
                if (i) out += ", ";
                out += "'" + offenses[i]->name + "'";
            }
            return out + "]";
        }
        case TemplateId::community_summary: {
            std::set<std::string> behaviors;
            for (const auto& offense : offense_table())
                if (prompt.user.find(offense.behavior_keyword) != std::string::npos)
                    behaviors.insert(offense.behavior_keyword);
            if (behaviors.empty())
                return "Cluster of precedents with mixed factual patterns.";
            return "Cluster of precedents involving " +
                   join({behaviors.begin(), behaviors.end()}, ", ") +
                   ", tried before the municipal courts.";
        }
        case TemplateId::checklist_generation: {
            for (const auto& offense : offense_table()) {
                if (prompt.user.find(offense.body_text) == std::string::npos) continue;
                nlohmann::ordered_json items = nlohmann::ordered_json::array();
                for (const auto& entry : offense.checklist) items.push_back(entry.question);
                return items.dump();
            }
            // Orphan statutes get one generic condition.
            return R"(["Do the case facts satisfy the conduct this article describes?"])";
        }
        case TemplateId::auditor_item: {
            const std::string element = section(prompt.user, "element: ", ", case: ");
            const std::string facts = section(prompt.user, ", case: ", "");
            const OffenseSpec* offense = find_by_question(element);
            bool satisfied = false;
            if (offense) {
                for (const auto& entry : offense->checklist)
                    if (entry.question == element)
                        satisfied = facts.find(entry.marker) != std::string::npos;
            } else {
                satisfied = !detect_offenses(facts).empty();
            }
            return satisfied
                       ? "The facts establish this element. <answer>true</answer>"
                       : "The facts do not establish this element. <answer>false</answer>";
        }
        case TemplateId::auditor_final: {
            const std::string false_list = section(prompt.user, "false_list: ", "");
            const bool applicable = trim(false_list) == "[]";
            return applicable
                       ? "Every verified element holds. <answer>true</answer>"
                       : "At least one constituent element fails. <answer>false</answer>";
        }
        case TemplateId::sentencing_json: {
            const std::string facts = section(prompt.user, "\nCase: ", "\nDefendants: ");
            const auto offenses = detect_offenses(facts);
            nlohmann::ordered_json j;
            std::vector<std::string> charges, articles;
            for (const auto* offense : offenses) {
                charges.push_back(offense->name);
                articles.push_back(offense->article_id);
            }
            j["charge_name"] = charges;
            j["law_article"] = articles;
            j["term_of_imprisonment"] = {{"death_penalty", false},
                                         {"imprisonment", predicted_months(facts)},
                                         {"life_imprisonment", false}};
            return j.dump();
        }
        case TemplateId::verdict: {
            const std::string context = section(prompt.user, "Context: ", ", Case: ");
            std::size_t blocks = 0;
            for (const char* tag : {"(article ", "(case ", "(offense "}) {
                std::size_t at = 0;
                while ((at = context.find(tag, at)) != std::string::npos) {
                    ++blocks;
                    at += 1;
                }
            }
            const std::string facts = section(prompt.user, ", Case: ", "");
            std::vector<std::string> charges;
            for (const auto* offense : detect_offenses(facts))
                charges.push_back(offense->name);
            std::string citations;
            for (std::size_t i = 1; i <= std::min<std::size_t>(blocks, 3); ++i)
                citations += "[" + std::to_string(i) + "]";
            if (citations.empty())
                return "Legal Analysis: no verified evidence was available, so the "
                       "assessment rests on the facts alone. Final Verdict: the defendant "
                       "is found guilty of " +
                       (charges.empty() ? std::string("no chargeable offense")
                                        : join(charges, " and ")) +
                       ".";
            return "Legal Analysis: the established acts correspond to the cited statutes "
                   "and precedents " +
                   citations +
                   ". The constituent elements verified against the checklist support "
                   "conviction. Final Verdict: the defendant is found guilty of " +
                   (charges.empty() ? std::string("no chargeable offense")
                                    : join(charges, " and ")) +
                   ".";
        }
    }
    throw BackendError("policy: unexpected template");
}

// ---- corpus synthesis ---------------------------------------------------------

std::string make_fact_text(const OffenseSpec& offense, int variant, bool repeat,
                           bool surrender, const OffenseSpec* second) {
    static const std::vector<std::string> places = {
        "near the central station", "in the western suburb", "at the riverside market",
        "inside an office tower", "close to the old harbor"};
    static const std::vector<std::string> lead = {
        "On an autumn evening", "Early one morning", "During the holiday season",
        "Late at night", "Around noon"};
    std::string text = lead[static_cast<std::size_t>(variant) % lead.size()] + " " +
                       places[static_cast<std::size_t>(variant) % places.size()] +
                       ", the defendant " + offense.fact_marker;
    // Secondary clauses feed the per-element markers of the checklists.
    for (const auto& entry : offense.checklist)
        if (entry.marker != offense.fact_marker)
            text += ", " + entry.marker;
    text += ", affecting " + to_lower(offense.victim_keyword) +
            " valued as a substantial sum";
    if (second) {
        text += ". In the same period the defendant also " + second->fact_marker;
        for (const auto& entry : second->checklist)
            if (entry.marker != second->fact_marker) text += ", " + entry.marker;
    }
    text += ". The defendant acted with " + to_lower(offense.mental_keyword);
    if (repeat) text += " and is a repeat offender";
    if (surrender) text += " but surrendered voluntarily";
    text += ".";
    return text;
}

std::vector<CaseDocument> make_cases() {
    const auto& table = offense_table();
    std::vector<CaseDocument> cases;
    for (int i = 0; i < 50; ++i) {
        const OffenseSpec& offense = table[static_cast<std::size_t>(i) % table.size()];
        const int variant = i / 10;
        const bool repeat = i % 4 == 0;
        const bool surrender = i % 5 == 0;
        const OffenseSpec* second =
            i % 7 == 0 ? &table[static_cast<std::size_t>(i + 3) % table.size()] : nullptr;

        CaseDocument doc;
        char id[8];
        std::snprintf(id, sizeof id, "C%03d", i + 1);
        doc.case_id = id;
        doc.fact_text = make_fact_text(offense, variant, repeat, surrender, second);
        doc.defendants = {std::string("Defendant-") +
                          static_cast<char>('A' + i % 26)};
        doc.charge_labels = {offense.name};
        doc.cited_article_ids = {offense.article_id};
        if (second) {
            doc.charge_labels.push_back(second->name);
            doc.cited_article_ids.push_back(second->article_id);
        }
        if (i == 25) {
            doc.penalty.life_imprisonment = true;
        } else if (i == 48) {
            doc.penalty.death_penalty = true;
        } else {
            int months = offense.base_months + 2 * variant + (repeat ? 6 : 0) -
                         (surrender ? 2 : 0);
            if (second) months += second->base_months / 2;
            doc.penalty.months = std::max(months, 1);
        }
        cases.push_back(std::move(doc));
    }
    return cases;
}

std::vector<ArticleDocument> make_articles() {
    std::vector<ArticleDocument> articles;
    for (const auto& offense : offense_table()) {
        ArticleDocument doc;
        doc.article_id = offense.article_id;
        doc.article_number = offense.article_number;
        doc.body_text = offense.body_text;
        articles.push_back(doc);
    }
    for (auto& doc : orphan_statutes()) articles.push_back(doc);
    return articles;
}

std::vector<InterpretationDocument> make_interpretations(
    std::vector<ArticleDocument>& articles) {
    const std::vector<std::pair<std::string, std::string>> glosses = {
        {"A264", "Secret theft includes taking property while the owner is present but "
                 "unaware; repeated pickpocketing is treated as aggravated."},
        {"A266", "Fraud requires a causal chain from deception to the victim's mistaken "
                 "disposition of property; civil exaggeration alone does not qualify."},
        {"A263", "Violence under this article includes threats that suppress resistance "
                 "even without physical injury."},
        {"A133", "Intoxication is established at a blood alcohol concentration of the "
                 "statutory threshold; refusal to test supports an inference."},
        {"A347", "Trafficking is complete upon transport with knowledge of the narcotic "
                 "character, regardless of the quantity actually delivered."},
        {"A271", "Occupational advantage means duties of managing or handling the entity's "
                 "property, not mere workplace access."},
    };
    std::vector<InterpretationDocument> interpretations;
    int number = 1;
    for (const auto& [article_id, body] : glosses) {
        InterpretationDocument doc;
        doc.interpretation_id = "J" + std::to_string(number++);
        doc.body_text = body;
        doc.target_article_ids = {article_id};
        for (auto& article : articles)
            if (article.article_id == article_id)
                article.interpretation_ids.push_back(doc.interpretation_id);
        interpretations.push_back(doc);
    }
    return interpretations;
}

// The evaluation queries, with authored gold labels. Fact texts reuse the
// offense vocabulary so the policy behaves like a competent model: mostly
// right, wrong in controlled places.
std::vector<CaseDocument> make_queries() {
    const auto& table = offense_table();
    auto offense = [&](const std::string& name) -> const OffenseSpec& {
        for (const auto& o : table)
            if (o.name == name) return o;
        throw ValidationError("unknown offense " + name);
    };
    std::vector<CaseDocument> queries;
    auto add = [&](const std::string& id, const std::string& text,
                   std::vector<std::string> charges, std::vector<std::string> articles,
                   PenaltyTerm term) {
        CaseDocument doc;
        doc.case_id = id;
        doc.fact_text = text;
        doc.defendants = {"Defendant-Q"};
        doc.charge_labels = std::move(charges);
        doc.cited_article_ids = std::move(articles);
        doc.penalty = term;
        queries.push_back(std::move(doc));
    };
    auto months = [](int m) {
        PenaltyTerm t;
        t.months = m;
        return t;
    };

    // Clean single-offense queries; gold articles reachable via anchoring.
    add("Q001", make_fact_text(offense("Theft"), 0, false, false, nullptr), {"Theft"},
        {"A264"}, months(9));
    add("Q002", make_fact_text(offense("Fraud"), 1, false, false, nullptr), {"Fraud"},
        {"A266"}, months(30));
    add("Q003", make_fact_text(offense("Robbery"), 2, true, false, nullptr), {"Robbery"},
        {"A263"}, months(66));
    add("Q004", make_fact_text(offense("Dangerous Driving"), 3, false, false, nullptr),
        {"Dangerous Driving"}, {"A133"}, months(4));
    // Charge right, but one gold article is an orphan statute no case cites:
    // retrieval cannot reach it.
    add("Q005", make_fact_text(offense("Embezzlement"), 4, false, false, nullptr),
        {"Embezzlement"}, {"A271", "A801"}, months(36));
    add("Q006", make_fact_text(offense("Kidnapping"), 0, false, false, nullptr),
        {"Kidnapping"}, {"A239", "A802"}, months(120));
    // Distractor second offense in the narrative: the model over-predicts.
    add("Q007",
        make_fact_text(offense("Theft"), 1, false, false, &offense("Fraud")), {"Theft"},
        {"A264"}, months(11));
    // Facts narrated as force: the model calls it robbery, gold says injury.
    add("Q008", make_fact_text(offense("Robbery"), 3, false, false, nullptr),
        {"Intentional Injury"}, {"A234"}, months(36));
    add("Q009", make_fact_text(offense("Arson"), 2, false, true, nullptr), {"Arson"},
        {"A114"}, months(70));
    // Gold term is life imprisonment: excluded from MAE.
    PenaltyTerm life;
    life.life_imprisonment = true;
    add("Q010", make_fact_text(offense("Drug Trafficking"), 4, true, false, nullptr),
        {"Drug Trafficking"}, {"A347"}, life);
    return queries;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: lexgraph_fixturegen <output-dir>\n";
        return 1;
    }
    const std::filesystem::path out_dir = argv[1];
    std::filesystem::create_directories(out_dir);

    std::vector<ArticleDocument> articles = make_articles();
    const std::vector<InterpretationDocument> interpretations =
        make_interpretations(articles);
    const std::vector<CaseDocument> cases = make_cases();
    const std::vector<CaseDocument> queries = make_queries();

    write_file(out_dir / "cases.jsonl", to_jsonl(cases));
    write_file(out_dir / "articles.jsonl", to_jsonl(articles));
    write_file(out_dir / "interpretations.jsonl", to_jsonl(interpretations));
    write_file(out_dir / "queries.jsonl", to_jsonl(queries));

    // Re-ingest from the written bytes so recorded prompts match what the
    // CLI will later read.
    const IngestResult ingest = ingest_corpus_files(out_dir / "cases.jsonl",
                                                    out_dir / "articles.jsonl",
                                                    out_dir / "interpretations.jsonl");
    if (!ingest.errors.empty()) {
        std::cerr << "fixture corpus failed validation: "
                  << ingest.errors[0].to_string() << "\n";
        return 1;
    }
    const ReferenceReport refs = validate_references(ingest.bundle);
    if (!refs.clean()) {
        std::cerr << "fixture corpus has dangling references\n";
        return 1;
    }

    CallbackBackend policy_backend(policy, "fixture-policy");
    RecordingBackend recorder(policy_backend);
    Gateway gateway(recorder);
    HashedTokenEmbedder provider(256);

    const HierarGraph graph = build_hierargraph(ingest.bundle, gateway, provider);

    // Record the evaluation traffic for every swept k (audit and adjudication
    // prompts depend on the retrieved set, hence on k).
    for (int k : {3, 4, 5, 6}) {
        PipelineConfig config;
        config.research.k = k;
        evaluate_corpus(gateway, provider, graph, queries, config);
    }
    recorder.save(out_dir / "script.jsonl");

    std::cout << "fixture written to " << out_dir.string() << "\n"
              << "  cases: " << cases.size() << ", articles: " << articles.size()
              << ", interpretations: " << interpretations.size()
              << ", queries: " << queries.size() << "\n"
              << "  script entries: " << recorder.script().size() << "\n"
              << "  communities: " << graph.ontology.communities.size() << "\n"
              << "  build warnings: " << graph.build_warnings.size() << "\n";
    return 0;
}
