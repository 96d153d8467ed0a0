#include "lexgraph/corpus.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using namespace lexgraph;

const char* kThreeCases = R"({"case_id":"C001","fact_text":"stole a bicycle","defendants":["D1"],"charge_labels":["Theft"],"cited_article_ids":["A264"],"penalty_months":8}
{"case_id":"C002","fact_text":"defrauded an investor","defendants":["D2"],"charge_labels":["Fraud"],"cited_article_ids":["A266"],"penalty_months":24}
{"case_id":"C003","fact_text":"robbed a store at knifepoint","defendants":["D3"],"charge_labels":["Robbery"],"cited_article_ids":["A263"],"life_imprisonment":true}
)";

const char* kTwoArticles = R"({"article_id":"A264","article_number":"Article 264","body_text":"Whoever steals property shall be sentenced.","interpretation_ids":["J1"]}
{"article_id":"A266","article_number":"Article 266","body_text":"Whoever defrauds property by fabricating facts shall be sentenced.","interpretation_ids":[]}
)";

const char* kOneInterpretation =
    R"({"interpretation_id":"J1","body_text":"Theft includes taking by stealth.","target_article_ids":["A264"]}
)";

IngestResult ingest_default(const char* cases = kThreeCases, const char* articles = kTwoArticles,
                            const char* interps = kOneInterpretation,
                            IngestOptions options = {}) {
    return ingest_corpus({{"cases.jsonl", DocKind::cases, cases},
                          {"articles.jsonl", DocKind::articles, articles},
                          {"interps.jsonl", DocKind::interpretations, interps}},
                         options);
}

TEST(Ingest, WellFormedLinesParse) {
    const IngestResult result = ingest_default();
    EXPECT_EQ(result.bundle.cases.size(), 3u);
    EXPECT_EQ(result.bundle.articles.size(), 2u);
    EXPECT_EQ(result.bundle.interpretations.size(), 1u);
    EXPECT_TRUE(result.errors.empty());
    // A263 is referenced by C003 but not defined: warning, not error.
    ASSERT_EQ(result.warnings.size(), 1u);
    EXPECT_NE(result.warnings[0].message.find("A263"), std::string::npos);
    EXPECT_EQ(result.bundle.cases[0].penalty.months, 8);
    EXPECT_TRUE(result.bundle.cases[2].penalty.life_imprisonment);
}

TEST(Ingest, EmptyFilesYieldEmptyBundle) {
    const IngestResult result = ingest_default("", "", "");
    EXPECT_TRUE(result.bundle.cases.empty());
    EXPECT_TRUE(result.errors.empty());
    for (const auto& f : result.files) {
        EXPECT_EQ(f.record_lines, 0u);
        EXPECT_EQ(f.accepted, 0u);
    }
}

TEST(Ingest, StrictModeRejectsDanglingReferenceWithAddressedError) {
    const char* cases =
        R"({"case_id":"C9","fact_text":"cited a ghost article","charge_labels":["Theft"],"cited_article_ids":["A999"]}
)";
    IngestOptions options;
    options.strict_references = true;
    const IngestResult result = ingest_default(cases, kTwoArticles, kOneInterpretation, options);
    ASSERT_EQ(result.errors.size(), 1u);
    EXPECT_EQ(result.errors[0].file, "cases.jsonl");
    EXPECT_EQ(result.errors[0].line, 1u);
    EXPECT_EQ(result.errors[0].field, "cited_article_ids");
    EXPECT_NE(result.errors[0].message.find("A999"), std::string::npos);
    EXPECT_TRUE(result.bundle.cases.empty());
    EXPECT_EQ(result.files[0].accepted, 0u);
    EXPECT_EQ(result.files[0].rejected, 1u);
}

TEST(Ingest, MalformedRecordsAreLineAddressed) {
    const char* cases = "{\"case_id\":\"C1\",\"fact_text\":\"ok\"}\nnot json at all\n"
                        "{\"case_id\":\"C1\",\"fact_text\":\"duplicate id\"}\n"
                        "{\"fact_text\":\"missing id\"}\n"
                        "{\"case_id\":\"C2\",\"fact_text\":\"\"}\n"
                        "{\"case_id\":\"C3\",\"fact_text\":\"two penalties\",\"penalty_months\":4,"
                        "\"death_penalty\":true}\n";
    const IngestResult result = ingest_default(cases, "", "");
    EXPECT_EQ(result.bundle.cases.size(), 1u);
    ASSERT_EQ(result.errors.size(), 5u);
    EXPECT_EQ(result.errors[0].line, 2u);
    EXPECT_NE(result.errors[1].message.find("duplicate"), std::string::npos);
    EXPECT_NE(result.errors[2].message.find("case_id"), std::string::npos);
    EXPECT_NE(result.errors[3].message.find("fact_text"), std::string::npos);
    EXPECT_NE(result.errors[4].message.find("penalty"), std::string::npos);
}

// Error count + accepted count == record line count, per file.
TEST(Ingest, PropertyCountsReconcilePerFile) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::string content;
        std::size_t lines = 0;
        for (int i = 0; i < 12; ++i) {
            switch (rng() % 3) {
                case 0:
                    content += "{\"case_id\":\"C" + std::to_string(i) +
                               "\",\"fact_text\":\"t\"}\n";
                    ++lines;
                    break;
                case 1:
                    content += "broken " + std::to_string(i) + "\n";
                    ++lines;
                    break;
                case 2:
                    content += "\n";  // blank lines are not records
                    break;
            }
        }
        const IngestResult result =
            ingest_corpus({{"cases.jsonl", DocKind::cases, content}});
        ASSERT_EQ(result.files.size(), 1u);
        EXPECT_EQ(result.files[0].record_lines, lines);
        EXPECT_EQ(result.files[0].accepted + result.files[0].rejected, lines);
        EXPECT_EQ(result.files[0].accepted, result.bundle.cases.size());
        EXPECT_EQ(result.files[0].rejected, result.errors.size());
    }
}

TEST(Ingest, DeterministicSerialization) {
    const IngestResult a = ingest_default();
    const IngestResult b = ingest_default();
    EXPECT_EQ(serialize_bundle(a.bundle), serialize_bundle(b.bundle));
    EXPECT_EQ(corpus_fingerprint(a.bundle), corpus_fingerprint(b.bundle));
}

// serialize(ingest(x)) re-ingests to an equal bundle.
TEST(Ingest, RoundTripThroughSerialization) {
    const IngestResult first = ingest_default();
    const IngestResult second = ingest_corpus(
        {{"cases.jsonl", DocKind::cases, to_jsonl(first.bundle.cases)},
         {"articles.jsonl", DocKind::articles, to_jsonl(first.bundle.articles)},
         {"interps.jsonl", DocKind::interpretations,
          to_jsonl(first.bundle.interpretations)}});
    EXPECT_EQ(first.bundle, second.bundle);
    EXPECT_EQ(serialize_bundle(first.bundle), serialize_bundle(second.bundle));
}

TEST(ValidateReferences, FullyConsistentFixtureIsClean) {
    const char* cases =
        R"({"case_id":"C1","fact_text":"t","charge_labels":["Theft"],"cited_article_ids":["A264"]}
{"case_id":"C2","fact_text":"t","charge_labels":["Fraud"],"cited_article_ids":["A266"]}
)";
    const IngestResult result = ingest_default(cases);
    const ReferenceReport report = validate_references(result.bundle);
    EXPECT_TRUE(report.clean());
    EXPECT_TRUE(report.orphan_articles.empty());
}

TEST(ValidateReferences, SingleDanglingInterpretationTarget) {
    const char* interps =
        R"({"interpretation_id":"J1","body_text":"t","target_article_ids":["A264","A404"]}
)";
    const IngestResult result = ingest_default(kThreeCases, kTwoArticles, interps);
    const ReferenceReport report = validate_references(result.bundle);
    // C003 -> A263 and J1 -> A404 dangle.
    ASSERT_EQ(report.dangling.size(), 2u);
    EXPECT_EQ(report.dangling[1].source_kind, "interpretation");
    EXPECT_EQ(report.dangling[1].target_id, "A404");
}

TEST(ValidateReferences, UncitedArticleIsOrphanNotError) {
    const char* cases =
        R"({"case_id":"C1","fact_text":"t","cited_article_ids":["A264"]}
)";
    const IngestResult result = ingest_default(cases);
    const ReferenceReport report = validate_references(result.bundle);
    EXPECT_TRUE(report.dangling.empty());
    ASSERT_EQ(report.orphan_articles.size(), 1u);
    EXPECT_EQ(report.orphan_articles[0], "A266");
}

}  // namespace
