#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"
#include "lexgraph/corpus.hpp"
#include "lexgraph/embedding.hpp"
#include "lexgraph/graph.hpp"

namespace lexgraph {

// One retrieved context node, with enough structure for the deterministic
// relevance proxy: an article is relevant iff it is gold; a case is relevant
// iff it shares at least one gold article.
struct RetrievedContext {
    std::string node_id;
    NodeKind kind = NodeKind::article_node;
    std::set<std::string> cited_article_ids;  // for case nodes

    bool operator==(const RetrievedContext&) const = default;
};

struct PredictionRecord {
    std::string case_id;
    std::set<std::string> gold_charges;
    std::set<std::string> gold_articles;
    PenaltyTerm gold_term;
    std::set<std::string> predicted_charges;
    std::set<std::string> predicted_articles;
    PenaltyTerm predicted_term;
    // Articles reachable at retrieval time (direct + derived via case edges).
    std::set<std::string> retrieved_article_ids;
    std::vector<RetrievedContext> retrieved_contexts;
    std::size_t retrieved_context_size = 0;
    bool structured_failed = false;

    bool operator==(const PredictionRecord&) const = default;
};

// Exact-match ratio over predicted vs gold charge label sets:
//   ACC = (1/N) * sum_i I(O_i == O'_i)
inline double accuracy(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw ValidationError("accuracy requires at least one record");
    std::size_t hits = 0;
    for (const auto& r : records)
        if (r.predicted_charges == r.gold_charges) ++hits;
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

inline double accuracy_articles(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw ValidationError("accuracy requires at least one record");
    std::size_t hits = 0;
    for (const auto& r : records)
        if (r.predicted_articles == r.gold_articles) ++hits;
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace detail {

inline double micro_f1_over(const std::vector<PredictionRecord>& records,
                            const std::set<std::string> PredictionRecord::* predicted,
                            const std::set<std::string> PredictionRecord::* gold) {
    if (records.empty()) throw ValidationError("micro_f1 requires at least one record");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& r : records) {
        for (const auto& label : r.*predicted)
            (r.*gold).count(label) ? ++tp : ++fp;
        for (const auto& label : r.*gold)
            if (!(r.*predicted).count(label)) ++fn;
    }
    const double precision_den = static_cast<double>(tp + fp);
    const double recall_den = static_cast<double>(tp + fn);
    if (precision_den == 0.0 && recall_den == 0.0) return 0.0;
    const double p = precision_den == 0.0 ? 0.0 : tp / precision_den;
    const double r = recall_den == 0.0 ? 0.0 : tp / recall_den;
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

}  // namespace detail

// Micro-averaged F1 over pooled charge labels:
//   F1 = 2PR / (P + R), with P, R from pooled TP/FP/FN counts. 0 when P+R=0.
inline double micro_f1(const std::vector<PredictionRecord>& records) {
    return detail::micro_f1_over(records, &PredictionRecord::predicted_charges,
                                 &PredictionRecord::gold_charges);
}

inline double micro_f1_articles(const std::vector<PredictionRecord>& records) {
    return detail::micro_f1_over(records, &PredictionRecord::predicted_articles,
                                 &PredictionRecord::gold_articles);
}

struct MaeResult {
    double mae = 0.0;
    std::size_t included = 0;
    // Records where either term is life/death or missing; reported, not averaged.
    std::size_t excluded = 0;
};

// Mean absolute error of the predicted penalty term in months:
//   MAE = (1/N) * sum_i |T_i - T'_i|
// over records where both terms are finite month counts.
inline MaeResult mae_months(const std::vector<PredictionRecord>& records) {
    MaeResult result;
    double total = 0.0;
    for (const auto& r : records) {
        const bool usable = r.gold_term.is_finite() && r.gold_term.months.has_value() &&
                            r.predicted_term.is_finite() && r.predicted_term.months.has_value();
        if (!usable) {
            ++result.excluded;
            continue;
        }
        total += std::abs(static_cast<double>(*r.gold_term.months - *r.predicted_term.months));
        ++result.included;
    }
    if (result.included == 0)
        throw ValidationError("mae_months: no records with finite terms on both sides");
    result.mae = total / static_cast<double>(result.included);
    return result;
}

struct EffectivenessResult {
    double value = 0.0;
    bool empty_retrieval = false;  // defined as 0 with this flag
};

inline bool context_is_relevant(const RetrievedContext& context,
                                const std::set<std::string>& gold_articles) {
    if (context.kind == NodeKind::article_node) return gold_articles.count(context.node_id) > 0;
    if (context.kind == NodeKind::case_node) {
        for (const auto& article_id : context.cited_article_ids)
            if (gold_articles.count(article_id)) return true;
        return false;
    }
    return false;
}

// Fraction of retrieved contexts that are gold-relevant, pooled over records:
//   (1/|C|) * sum_{c in C} R(c, Q, E)
// R(.) is the deterministic proxy in context_is_relevant.
inline EffectivenessResult retrieval_effectiveness(
    const std::vector<PredictionRecord>& records) {
    std::size_t total = 0, relevant = 0;
    for (const auto& r : records) {
        for (const auto& context : r.retrieved_contexts) {
            ++total;
            if (context_is_relevant(context, r.gold_articles)) ++relevant;
        }
    }
    if (total == 0) return {0.0, true};
    return {static_cast<double>(relevant) / static_cast<double>(total), false};
}

// Fraction of gold claims (gold article ids) unsupported by the retrieved
// context:  1 - (1/|R|) * sum_{c in R} I(S(c, C)),  S = membership in the
// retrieved article set.
inline double error_rate(const std::vector<PredictionRecord>& records) {
    std::size_t claims = 0, supported = 0;
    for (const auto& r : records) {
        for (const auto& article_id : r.gold_articles) {
            ++claims;
            if (r.retrieved_article_ids.count(article_id)) ++supported;
        }
    }
    if (claims == 0) throw ValidationError("error_rate: no gold claims");
    return 1.0 - static_cast<double>(supported) / static_cast<double>(claims);
}

enum class Reliability { traceable_correct, untraceable_correct, incorrect };

inline const char* to_string(Reliability r) {
    switch (r) {
        case Reliability::traceable_correct: return "traceable_correct";
        case Reliability::untraceable_correct: return "untraceable_correct";
        case Reliability::incorrect: return "incorrect";
    }
    return "?";
}

// A prediction is traceable-correct when the charge set is exactly right and
// every ground-truth article was retrieved; untraceable-correct when the
// charge is right but some gold article is missing from the retrieved set.
inline Reliability classify_reliability(const PredictionRecord& record) {
    if (record.predicted_charges != record.gold_charges) return Reliability::incorrect;
    for (const auto& article_id : record.gold_articles)
        if (!record.retrieved_article_ids.count(article_id))
            return Reliability::untraceable_correct;
    return Reliability::traceable_correct;
}

struct ReliabilityCounts {
    std::size_t traceable_correct = 0;
    std::size_t untraceable_correct = 0;
    std::size_t incorrect = 0;

    std::size_t total() const { return traceable_correct + untraceable_correct + incorrect; }
};

inline ReliabilityCounts count_reliability(const std::vector<PredictionRecord>& records) {
    ReliabilityCounts counts;
    for (const auto& r : records) {
        switch (classify_reliability(r)) {
            case Reliability::traceable_correct: ++counts.traceable_correct; break;
            case Reliability::untraceable_correct: ++counts.untraceable_correct; break;
            case Reliability::incorrect: ++counts.incorrect; break;
        }
    }
    return counts;
}

// For each gold article, its k_per_gold most similar non-gold articles from
// the store join the context. The distractor set is always disjoint from the
// gold set; overlapping distractors across gold articles deduplicate.
inline std::set<std::string> inject_distractors(const std::set<std::string>& gold_articles,
                                                const VectorStore& article_store,
                                                std::size_t k_per_gold) {
    std::size_t non_gold = 0;
    for (const auto& [id, _] : article_store.entries())
        if (!gold_articles.count(id)) ++non_gold;
    if (non_gold < gold_articles.size() * k_per_gold)
        throw ValidationError("article store too small: need " +
                              std::to_string(gold_articles.size() * k_per_gold) +
                              " non-gold articles, have " + std::to_string(non_gold));

    std::set<std::string> augmented = gold_articles;
    if (k_per_gold == 0) return augmented;
    std::map<std::string, EmbeddingVector> non_gold_entries;
    for (const auto& [id, vec] : article_store.entries())
        if (!gold_articles.count(id)) non_gold_entries.emplace(id, vec);
    for (const auto& gold_id : gold_articles) {
        for (const auto& scored :
             top_k(article_store.get(gold_id), non_gold_entries, k_per_gold))
            augmented.insert(scored.id);
    }
    return augmented;
}

// Unified flat index over the raw text of all three document kinds, with no
// type awareness: the baseline retrieval strategy.
struct FlatIndex {
    VectorStore store;
    std::map<std::string, NodeKind> kinds;
    std::map<std::string, std::set<std::string>> case_citations;
};

inline FlatIndex build_flat_index(const CorpusBundle& bundle, EmbeddingProvider& provider) {
    FlatIndex index;
    for (const auto& c : bundle.cases) {
        index.store.add(c.case_id, provider.embed(c.fact_text));
        index.kinds.emplace(c.case_id, NodeKind::case_node);
        index.case_citations.emplace(
            c.case_id,
            std::set<std::string>(c.cited_article_ids.begin(), c.cited_article_ids.end()));
    }
    for (const auto& a : bundle.articles) {
        index.store.add(a.article_id, provider.embed(a.body_text));
        index.kinds.emplace(a.article_id, NodeKind::article_node);
    }
    for (const auto& j : bundle.interpretations) {
        index.store.add(j.interpretation_id, provider.embed(j.body_text));
        index.kinds.emplace(j.interpretation_id, NodeKind::interpretation_node);
    }
    return index;
}

// Single top-k over the unified store against the raw query text.
inline std::vector<ScoredId> run_flat_baseline(const FlatIndex& index,
                                               EmbeddingProvider& provider,
                                               const std::string& query_text, std::size_t k) {
    return index.store.top_k(provider.embed(query_text), k);
}

}  // namespace lexgraph
