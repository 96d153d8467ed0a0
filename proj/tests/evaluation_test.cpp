#include "lexgraph/evaluation.hpp"

#include <gtest/gtest.h>

#include <random>

#include "lexgraph/pipeline.hpp"
#include "test_support.hpp"

namespace {

using namespace lexgraph;

PredictionRecord record(const std::string& id, std::set<std::string> gold_charges,
                        std::set<std::string> pred_charges) {
    PredictionRecord r;
    r.case_id = id;
    r.gold_charges = std::move(gold_charges);
    r.predicted_charges = std::move(pred_charges);
    return r;
}

PenaltyTerm months(int m) {
    PenaltyTerm t;
    t.months = m;
    return t;
}

PenaltyTerm life() {
    PenaltyTerm t;
    t.life_imprisonment = true;
    return t;
}

PenaltyTerm death() {
    PenaltyTerm t;
    t.death_penalty = true;
    return t;
}

RetrievedContext article_ctx(const std::string& id) {
    return {id, NodeKind::article_node, {}};
}

RetrievedContext case_ctx(const std::string& id, std::set<std::string> cites) {
    return {id, NodeKind::case_node, std::move(cites)};
}

TEST(Accuracy, AllMatchesAndStrictSetEquality) {
    std::vector<PredictionRecord> perfect = {record("a", {"X"}, {"X"}),
                                             record("b", {"Y", "Z"}, {"Y", "Z"})};
    EXPECT_DOUBLE_EQ(accuracy(perfect), 1.0);
    // Subset is not equality.
    std::vector<PredictionRecord> subset = {record("a", {"A", "B"}, {"A"})};
    EXPECT_DOUBLE_EQ(accuracy(subset), 0.0);
    // 2 of 4 exact.
    std::vector<PredictionRecord> mixed = {
        record("a", {"X"}, {"X"}), record("b", {"Y"}, {"Z"}),
        record("c", {"W"}, {"W"}), record("d", {"V"}, {})};
    EXPECT_DOUBLE_EQ(accuracy(mixed), 0.5);
    EXPECT_THROW(accuracy({}), ValidationError);
}

TEST(MicroF1, HandComputedConfusionCounts) {
    // Single record pred {a,b} vs gold {b,c}: TP=1, FP=1, FN=1 -> F1 = 0.5.
    std::vector<PredictionRecord> one = {record("r", {"b", "c"}, {"a", "b"})};
    EXPECT_NEAR(micro_f1(one), 0.5, 1e-12);

    std::vector<PredictionRecord> perfect = {record("a", {"X", "Y"}, {"X", "Y"})};
    EXPECT_DOUBLE_EQ(micro_f1(perfect), 1.0);

    std::vector<PredictionRecord> empty_preds = {record("a", {"X"}, {}),
                                                 record("b", {"Y"}, {})};
    EXPECT_DOUBLE_EQ(micro_f1(empty_preds), 0.0);
    EXPECT_THROW(micro_f1({}), ValidationError);
}

TEST(MaeMonths, HandArithmeticAndExclusions) {
    PredictionRecord a = record("a", {}, {});
    a.gold_term = months(24);
    a.predicted_term = months(12);
    PredictionRecord b = record("b", {}, {});
    b.gold_term = months(30);
    b.predicted_term = months(36);
    const MaeResult result = mae_months({a, b});
    EXPECT_DOUBLE_EQ(result.mae, 9.0);
    EXPECT_EQ(result.included, 2u);
    EXPECT_EQ(result.excluded, 0u);

    PredictionRecord c = record("c", {}, {});
    c.gold_term = life();
    c.predicted_term = months(100);
    const MaeResult with_life = mae_months({a, b, c});
    EXPECT_DOUBLE_EQ(with_life.mae, 9.0);
    EXPECT_EQ(with_life.excluded, 1u);

    EXPECT_THROW(mae_months({c}), ValidationError);
}

TEST(MaeMonths, IdenticalTermsGiveZero) {
    PredictionRecord a = record("a", {}, {});
    a.gold_term = months(17);
    a.predicted_term = months(17);
    EXPECT_DOUBLE_EQ(mae_months({a}).mae, 0.0);
}

TEST(RetrievalEffectiveness, HandCountsAndEmptyFlag) {
    PredictionRecord r = record("r", {}, {});
    r.gold_articles = {"A1"};
    r.retrieved_contexts = {article_ctx("A1"), article_ctx("A2"), case_ctx("C1", {"A1"}),
                            case_ctx("C2", {"A9"}), case_ctx("C3", {})};
    // 2 relevant of 5.
    EXPECT_NEAR(retrieval_effectiveness({r}).value, 0.4, 1e-12);
    EXPECT_FALSE(retrieval_effectiveness({r}).empty_retrieval);

    PredictionRecord all = record("a", {}, {});
    all.gold_articles = {"A1"};
    all.retrieved_contexts = {article_ctx("A1"), case_ctx("C1", {"A1"})};
    EXPECT_DOUBLE_EQ(retrieval_effectiveness({all}).value, 1.0);

    PredictionRecord empty = record("e", {}, {});
    const EffectivenessResult flagged = retrieval_effectiveness({empty});
    EXPECT_DOUBLE_EQ(flagged.value, 0.0);
    EXPECT_TRUE(flagged.empty_retrieval);
}

TEST(ErrorRate, HandCounts) {
    PredictionRecord all = record("a", {}, {});
    all.gold_articles = {"A1", "A2"};
    all.retrieved_article_ids = {"A1", "A2", "A3"};
    EXPECT_DOUBLE_EQ(error_rate({all}), 0.0);

    PredictionRecord miss = record("m", {}, {});
    miss.gold_articles = {"A1", "A2", "A3", "A4"};
    miss.retrieved_article_ids = {"A1", "A2", "A3"};
    EXPECT_NEAR(error_rate({miss}), 0.25, 1e-12);

    PredictionRecord none = record("n", {}, {});
    none.gold_articles = {"A1"};
    EXPECT_DOUBLE_EQ(error_rate({none}), 1.0);

    PredictionRecord no_claims = record("z", {}, {});
    EXPECT_THROW(error_rate({no_claims}), ValidationError);
}

TEST(MetricOracles, TenRecordFixtureMatchesHandValues) {
    const std::vector<PredictionRecord> records = lexgraph::testing::ten_record_metric_fixture();
    EXPECT_NEAR(accuracy(records), 0.5, 1e-9);
    EXPECT_NEAR(micro_f1(records), 2.0 / 3.0, 1e-9);
    const MaeResult mae = mae_months(records);
    EXPECT_NEAR(mae.mae, 63.0 / 8.0, 1e-9);
    EXPECT_EQ(mae.included, 8u);
    EXPECT_EQ(mae.excluded, 2u);
    EXPECT_NEAR(retrieval_effectiveness(records).value, 0.6, 1e-9);
    EXPECT_NEAR(error_rate(records), 2.0 / 11.0, 1e-9);
}

TEST(Metrics, PropertyPermutationInvariant) {
    std::vector<PredictionRecord> records = lexgraph::testing::ten_record_metric_fixture();
    const double acc = accuracy(records);
    const double f1 = micro_f1(records);
    const double eff = retrieval_effectiveness(records).value;
    const double err = error_rate(records);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(records.begin(), records.end(), rng);
        EXPECT_DOUBLE_EQ(accuracy(records), acc);
        EXPECT_DOUBLE_EQ(micro_f1(records), f1);
        EXPECT_DOUBLE_EQ(retrieval_effectiveness(records).value, eff);
        EXPECT_DOUBLE_EQ(error_rate(records), err);
    }
}

TEST(Reliability, ReproducesDefinitionsOnHandLabeledSet) {
    // 2 traceable correct, 2 untraceable correct, 2 incorrect.
    std::vector<PredictionRecord> records;
    PredictionRecord t1 = record("t1", {"Theft"}, {"Theft"});
    t1.gold_articles = {"A264"};
    t1.retrieved_article_ids = {"A264", "A266"};
    PredictionRecord t2 = record("t2", {"Fraud", "Theft"}, {"Fraud", "Theft"});
    t2.gold_articles = {"A264", "A266"};
    t2.retrieved_article_ids = {"A264", "A266"};
    PredictionRecord u1 = record("u1", {"Theft"}, {"Theft"});
    u1.gold_articles = {"A264"};
    u1.retrieved_article_ids = {"A266"};
    PredictionRecord u2 = record("u2", {"Arson"}, {"Arson"});
    u2.gold_articles = {"A114", "A115"};
    u2.retrieved_article_ids = {"A114"};  // one of two gold articles missing
    PredictionRecord i1 = record("i1", {"Theft"}, {"Robbery"});
    i1.gold_articles = {"A264"};
    i1.retrieved_article_ids = {"A264"};
    PredictionRecord i2 = record("i2", {"Theft"}, {});
    i2.gold_articles = {"A264"};
    i2.retrieved_article_ids = {"A264"};

    EXPECT_EQ(classify_reliability(t1), Reliability::traceable_correct);
    EXPECT_EQ(classify_reliability(t2), Reliability::traceable_correct);
    EXPECT_EQ(classify_reliability(u1), Reliability::untraceable_correct);
    EXPECT_EQ(classify_reliability(u2), Reliability::untraceable_correct);
    EXPECT_EQ(classify_reliability(i1), Reliability::incorrect);
    EXPECT_EQ(classify_reliability(i2), Reliability::incorrect);

    records = {t1, t2, u1, u2, i1, i2};
    const ReliabilityCounts counts = count_reliability(records);
    EXPECT_EQ(counts.traceable_correct, 2u);
    EXPECT_EQ(counts.untraceable_correct, 2u);
    EXPECT_EQ(counts.incorrect, 2u);
    EXPECT_EQ(counts.total(), records.size());
}

// ---- distractor injection -----------------------------------------------------

VectorStore article_store(std::size_t n, std::mt19937_64& rng) {
    HashedTokenEmbedder embedder(64);
    VectorStore store;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text = "statute about";
        for (int t = 0; t < 4; ++t) text += " " + lexgraph::testing::keyword(rng);
        store.add("A" + std::to_string(100 + i), embedder.embed(text));
    }
    return store;
}

TEST(Distractors, KPerGoldZeroReturnsGoldExactly) {
    std::mt19937_64 rng(61);
    const VectorStore store = article_store(10, rng);
    const std::set<std::string> gold = {"A100", "A105"};
    EXPECT_EQ(inject_distractors(gold, store, 0), gold);
}

TEST(Distractors, SingleGoldGainsExactlyKDistractors) {
    std::mt19937_64 rng(62);
    const VectorStore store = article_store(10, rng);
    const std::set<std::string> gold = {"A103"};
    const auto augmented = inject_distractors(gold, store, 2);
    EXPECT_EQ(augmented.size(), 3u);
    EXPECT_TRUE(augmented.count("A103"));
    // Distractors are the 2 most similar non-gold articles, by brute force.
    std::map<std::string, EmbeddingVector> non_gold;
    for (const auto& [id, vec] : store.entries())
        if (!gold.count(id)) non_gold.emplace(id, vec);
    const auto oracle = top_k(store.get("A103"), non_gold, 2);
    for (const auto& scored : oracle) EXPECT_TRUE(augmented.count(scored.id));
}

TEST(Distractors, StoreTooSmallIsAnError) {
    std::mt19937_64 rng(63);
    const VectorStore store = article_store(5, rng);
    const std::set<std::string> gold = {"A100", "A101"};
    EXPECT_THROW(inject_distractors(gold, store, 2), ValidationError);
}

// Distractor sets are always disjoint from gold; sizes follow the dedup
// union formula.
TEST(Distractors, PropertyDisjointAndDedupSized) {
    std::mt19937_64 rng(64);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 8 + rng() % 8;
        const VectorStore store = article_store(n, rng);
        std::set<std::string> gold;
        for (const auto& [id, _] : store.entries())
            if (rng() % 4 == 0) gold.insert(id);
        if (gold.empty()) gold.insert(store.entries().begin()->first);
        const std::size_t k = rng() % 3;
        if ((n - gold.size()) < gold.size() * k) continue;

        const auto augmented = inject_distractors(gold, store, k);
        // Brute-force union oracle.
        std::map<std::string, EmbeddingVector> non_gold;
        for (const auto& [id, vec] : store.entries())
            if (!gold.count(id)) non_gold.emplace(id, vec);
        std::set<std::string> expected = gold;
        for (const auto& g : gold)
            for (const auto& scored : top_k(store.get(g), non_gold, k))
                expected.insert(scored.id);
        EXPECT_EQ(augmented, expected);
        for (const auto& id : expected)
            EXPECT_TRUE(augmented.count(id));
        EXPECT_GE(augmented.size(), gold.size());
        EXPECT_LE(augmented.size(), gold.size() * (1 + k));
    }
}

// Distractor injection strictly degrades effectiveness: the augmented context
// contains irrelevant articles by construction.
TEST(Distractors, EffectivenessStrictlyDegrades) {
    std::mt19937_64 rng(65);
    const VectorStore store = article_store(12, rng);
    const std::set<std::string> gold = {"A100", "A106"};
    for (std::size_t k : {2u, 4u}) {
        const auto augmented = inject_distractors(gold, store, k);
        PredictionRecord pure = record("p", {}, {});
        pure.gold_articles = gold;
        for (const auto& id : gold) pure.retrieved_contexts.push_back(article_ctx(id));
        PredictionRecord noisy = record("n", {}, {});
        noisy.gold_articles = gold;
        for (const auto& id : augmented) noisy.retrieved_contexts.push_back(article_ctx(id));
        const double pure_eff = retrieval_effectiveness({pure}).value;
        const double noisy_eff = retrieval_effectiveness({noisy}).value;
        EXPECT_DOUBLE_EQ(pure_eff, 1.0);
        EXPECT_LT(noisy_eff, pure_eff);
    }
}

// ---- flat baseline -------------------------------------------------------------

TEST(FlatBaseline, MixedKindTopK) {
    CorpusBundle bundle;
    for (int i = 0; i < 4; ++i) {
        CaseDocument c;
        c.case_id = "C" + std::to_string(i);
        c.fact_text = "case about theft number " + std::to_string(i);
        bundle.cases.push_back(c);
    }
    for (int i = 0; i < 3; ++i) {
        ArticleDocument a;
        a.article_id = "A" + std::to_string(i);
        a.body_text = "statute about theft number " + std::to_string(i);
        bundle.articles.push_back(a);
    }
    InterpretationDocument j;
    j.interpretation_id = "J0";
    j.body_text = "interpretation about theft";
    bundle.interpretations.push_back(j);

    HashedTokenEmbedder provider(64);
    const FlatIndex index = build_flat_index(bundle, provider);
    EXPECT_EQ(index.store.size(), 8u);
    const auto results = run_flat_baseline(index, provider, "theft of property", 5);
    EXPECT_EQ(results.size(), 5u);
}

TEST(FlatBaseline, DegenerateSingleKindEqualsPlainTopK) {
    CorpusBundle bundle;
    std::mt19937_64 rng(71);
    HashedTokenEmbedder provider(64);
    std::map<std::string, EmbeddingVector> raw;
    for (int i = 0; i < 8; ++i) {
        CaseDocument c;
        c.case_id = "C" + std::to_string(i);
        c.fact_text = "narrative " + lexgraph::testing::keyword(rng) + " " +
                      lexgraph::testing::keyword(rng);
        bundle.cases.push_back(c);
        raw.emplace(c.case_id, provider.embed(c.fact_text));
    }
    const FlatIndex index = build_flat_index(bundle, provider);
    const std::string query = "narrative Theft";
    const auto flat = run_flat_baseline(index, provider, query, 3);
    const auto direct = top_k(provider.embed(query), raw, 3);
    ASSERT_EQ(flat.size(), direct.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        EXPECT_EQ(flat[i].id, direct[i].id);
        EXPECT_DOUBLE_EQ(flat[i].score, direct[i].score);
    }
}

// Gold articles are phrased in statutory language lexically far from the
// query; matching slang case narratives exist, so flat retrieval fills its
// budget with them and misses the statute. Charge anchoring reaches it
// through the fact graph.
TEST(FlatBaseline, HierarchicalBeatsFlatOnLexicalGapFixture) {
    CorpusBundle bundle;
    ArticleDocument gold;
    gold.article_id = "A-VT";
    gold.article_number = "Article 900";
    gold.body_text =
        "Whoever commits unauthorized appropriation of a motor conveyance shall be "
        "sentenced to fixed-term imprisonment.";
    bundle.articles.push_back(gold);
    for (int i = 0; i < 4; ++i) {
        ArticleDocument filler;
        filler.article_id = "A-F" + std::to_string(i);
        filler.body_text = "Whoever disturbs market order through deceptive commerce " +
                           std::to_string(i) + " shall be sentenced.";
        bundle.articles.push_back(filler);
    }
    // Slang-flavored precedents convicted of the vehicle offense.
    for (int i = 0; i < 6; ++i) {
        CaseDocument c;
        c.case_id = "CV" + std::to_string(i);
        c.fact_text = "the defendant hotwired a parked sedan at night and joyrode around "
                      "the district block " +
                      std::to_string(i);
        c.charge_labels = {"Unlawful Vehicle Taking"};
        c.cited_article_ids = {"A-VT"};
        bundle.cases.push_back(c);
    }

    HashedTokenEmbedder provider(128);
    const FlatIndex index = build_flat_index(bundle, provider);
    const std::string query =
        "the defendant hotwired a parked sedan at night and joyrode around town";

    // Flat: top-5 by raw-text similarity, no type awareness.
    const auto flat = run_flat_baseline(index, provider, query, 5);
    std::set<std::string> flat_ids;
    for (const auto& scored : flat) flat_ids.insert(scored.id);

    PredictionRecord flat_record = record("q", {}, {});
    flat_record.gold_articles = {"A-VT"};
    flat_record.retrieved_article_ids.clear();
    for (const auto& id : flat_ids)
        if (index.kinds.at(id) == NodeKind::article_node)
            flat_record.retrieved_article_ids.insert(id);

    // Hierarchical: charge anchoring pulls the convicted precedents, whose
    // citation edges derive the gold article.
    HierarGraph graph;
    graph.fact = build_fact_graph(bundle);
    const auto anchored = retrieve_charge_anchored({"Unlawful Vehicle Taking"}, graph, 10);
    PredictionRecord hier_record = record("q", {}, {});
    hier_record.gold_articles = {"A-VT"};
    for (const auto& candidate : anchored)
        for (const auto& a : graph.fact.articles_cited_by(candidate.node_id))
            hier_record.retrieved_article_ids.insert(a);

    const double flat_error = error_rate({flat_record});
    const double hier_error = error_rate({hier_record});
    EXPECT_LT(hier_error, flat_error);
    EXPECT_DOUBLE_EQ(hier_error, 0.0);
    EXPECT_DOUBLE_EQ(flat_error, 1.0);  // flat's top-5 is all slang precedents
}

// ---- prediction dump round trip ------------------------------------------------

TEST(PredictionDump, JsonlRoundTripPreservesRecords) {
    const std::vector<PredictionRecord> records = lexgraph::testing::ten_record_metric_fixture();
    const std::string dumped = dump_predictions(records);
    const std::vector<PredictionRecord> loaded = load_predictions(dumped);
    ASSERT_EQ(loaded.size(), records.size());
    EXPECT_EQ(loaded, records);
    // Metrics recomputable from the dump alone.
    EXPECT_DOUBLE_EQ(accuracy(loaded), accuracy(records));
    EXPECT_DOUBLE_EQ(micro_f1(loaded), micro_f1(records));
    EXPECT_DOUBLE_EQ(error_rate(loaded), error_rate(records));
}

TEST(MetricReportRender, TextTableIsStable) {
    const MetricReport report = compute_metrics(lexgraph::testing::ten_record_metric_fixture());
    const std::string text = report.render_text();
    EXPECT_NE(text.find("charge accuracy"), std::string::npos);
    EXPECT_NE(text.find("0.5000"), std::string::npos);
    EXPECT_EQ(report.to_json()["records"], 10u);
}

}  // namespace
