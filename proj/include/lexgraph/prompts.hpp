#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "lexgraph/common.hpp"

namespace lexgraph {

enum class TemplateId {
    keyword_extraction,
    charge_prejudge,
    auditor_item,
    auditor_final,
    sentencing_json,
    verdict,
    community_summary,
    checklist_generation,
};

inline const char* to_string(TemplateId id) {
    switch (id) {
        case TemplateId::keyword_extraction: return "keyword_extraction";
        case TemplateId::charge_prejudge: return "charge_prejudge";
        case TemplateId::auditor_item: return "auditor_item";
        case TemplateId::auditor_final: return "auditor_final";
        case TemplateId::sentencing_json: return "sentencing_json";
        case TemplateId::verdict: return "verdict";
        case TemplateId::community_summary: return "community_summary";
        case TemplateId::checklist_generation: return "checklist_generation";
    }
    return "?";
}

inline TemplateId template_from_string(std::string_view name) {
    for (TemplateId id : {TemplateId::keyword_extraction, TemplateId::charge_prejudge,
                          TemplateId::auditor_item, TemplateId::auditor_final,
                          TemplateId::sentencing_json, TemplateId::verdict,
                          TemplateId::community_summary, TemplateId::checklist_generation})
        if (name == to_string(id)) return id;
    throw ValidationError("unknown template id: " + std::string(name));
}

struct PromptTemplate {
    TemplateId id;
    std::string_view system;
    std::string_view user_pattern;  // contains {slot} placeholders
};

namespace prompt_text {

inline constexpr std::string_view kKeywordExtractionSystem =
    "Extract legal keywords from a criminal case description and classify them into four "
    "categories: Defendant Attributes, Criminal Behaviors, Victim Characteristics, and "
    "Subjective Mental States. The output must be a strictly valid JSON object without "
    "additional text.\n"
    "Keyword definitions:\n"
    "- Defendant_Attribute: legal traits (e.g., age group, criminal history, occupation). "
    "Avoid specific names or numbers.\n"
    "- Criminal_Behaviors: legal types of acts and significant methods. Exclude specific "
    "time/location details.\n"
    "- Victim_Characteristics: nature of the property or location. Generalize specific "
    "amounts (e.g., \"large amount\").\n"
    "- Subjective_Mental_States: legal descriptions of intent and remorse.\n"
    "Output example:\n"
    "{\"Defendant_Attribute\": [\"Adult\", \"Prior Criminal Record\"], "
    "\"Criminal_Behaviors\": [\"Theft\", \"Burglary\"], "
    "\"Victim_Characteristics\": [\"Private Residence\", \"Large Amount\"], "
    "\"Subjective_Mental_States\": [\"Direct Intent\", \"Voluntary Surrender\"]}";

inline constexpr std::string_view kChargePrejudgeSystem =
    "Act as a criminal law expert to analyze the provided case. Output reasonably possible "
    "charges (confidence > 30%) sorted by probability (descending). If a dominant charge "
    "exists (confidence > 70%), prioritize it; if it is the only certain charge, output it "
    "exclusively. Exclude charges with probability < 10%.\n"
    "Format: output strictly as a Python list: ['Charge 1', 'Charge 2', ...]. The output "
    "must start with [. Return an empty list [] if no charge matches. No additional "
    "explanations or text allowed.";

inline constexpr std::string_view kAuditorItemSystem =
    "Act as a legal AI assistant to assess if the case facts strictly satisfy a specific "
    "constituent element of the law. Analyze the law_item and case facts. Focus exclusively "
    "on the target element, using related materials (if provided) for interpretation. "
    "Determine applicability based on facts and logic.\n"
    "Output: provide reasoning first, then enclose the final result strictly within tags: "
    "<answer>true</answer> or <answer>false</answer>.";

inline constexpr std::string_view kAuditorFinalSystem =
    "Act as a legal analysis assistant to determine if the provided law article applies to "
    "the specific case (i.e., verify violation or crime). Identify all relevant constituent "
    "elements from the law text. Verify critical elements independently; note that the "
    "provided true_list and false_list may be incomplete.\n"
    "Output: provide reasoning first, then enclose the final result strictly within tags: "
    "<answer>true</answer> or <answer>false</answer>.";

inline constexpr std::string_view kSentencingJsonSystem =
    "Act as a legal expert to adjudge the defendant based on candidate charges.\n"
    "1. Final charge application: for concurrence, apply the heavier-penalty rule; for "
    "multiple independent acts, apply combined punishment.\n"
    "2. Sentencing: predict the specific law article and a reasonable sentencing range "
    "based on facts and judicial practice.\n"
    "Output strictly one JSON object, no additional text:\n"
    "{\"charge_name\": [\"Charge A\", ...], \"law_article\": [\"Art. X\", ...], "
    "\"term_of_imprisonment\": {\"death_penalty\": boolean, \"imprisonment\": integer "
    "(months), \"life_imprisonment\": boolean}}";

inline constexpr std::string_view kVerdictSystem =
    "Act as a legal consultant to analyze the case using the provided Context documents.\n"
    "Step 1: Fact & act analysis: analyze how many independent criminal acts exist. "
    "Explicitly cite the supporting evidence from the context using [1][2]...\n"
    "Step 2: Law application: resolve any legal concurrence (e.g., imaginative concurrence "
    "vs. combined punishment). Explain why specific articles apply over others.\n"
    "Step 3: Sentencing prediction: comprehensive assessment of sentencing based on "
    "statutory rules.\n"
    "Output in two clear sections: Legal Analysis (reasoning with citations) and Final "
    "Verdict (conclusion). You must mark the source of your facts or laws using brackets "
    "like [1].";

inline constexpr std::string_view kCommunitySummarySystem =
    "Summarize the shared legal essence of the following precedent cases in two or three "
    "sentences: the typical offense pattern, defendant profile, and sentencing tendency. "
    "Output plain text only.";

inline constexpr std::string_view kChecklistGenerationSystem =
    "Decompose the following statute article into its constitutive elements as a checklist "
    "of atomic yes/no condition questions, each answerable from case facts alone (for "
    "example: \"Did the defendant fabricate facts or conceal the truth?\"). Cover every "
    "element required for the article to apply, one condition per question, at most 8 "
    "questions. Output strictly a JSON array of strings, no additional text.";

}  // namespace prompt_text

inline const PromptTemplate& prompt_template(TemplateId id) {
    static const std::array<PromptTemplate, 8> kTemplates = {{
        {TemplateId::keyword_extraction, prompt_text::kKeywordExtractionSystem,
         "case: {case}"},
        {TemplateId::charge_prejudge, prompt_text::kChargePrejudgeSystem, "case: {case}"},
        {TemplateId::auditor_item, prompt_text::kAuditorItemSystem,
         "law: {law_item}, related: {related}\nelement: {element}, case: {case}"},
        {TemplateId::auditor_final, prompt_text::kAuditorFinalSystem,
         "case: {case}, law: {law}\ntrue_list: {true_list}, false_list: {false_list}"},
        {TemplateId::sentencing_json, prompt_text::kSentencingJsonSystem,
         "Context: {context}\nCase: {case}\nDefendants: {defendants}"},
        {TemplateId::verdict, prompt_text::kVerdictSystem,
         "Context: {context_list}, Case: {case_description}"},
        {TemplateId::community_summary, prompt_text::kCommunitySummarySystem,
         "cases:\n{member_snippets}"},
        {TemplateId::checklist_generation, prompt_text::kChecklistGenerationSystem,
         "article: {article}"},
    }};
    for (const auto& t : kTemplates)
        if (t.id == id) return t;
    throw ValidationError("unknown template id");
}

struct RenderedPrompt {
    TemplateId id;
    std::string system;
    std::string user;
};

// Substitute {slot} placeholders. Every placeholder must be bound and every
// provided slot must be used; both directions catch caller typos.
inline RenderedPrompt render_prompt(TemplateId id,
                                    const std::map<std::string, std::string>& slots) {
    const PromptTemplate& tpl = prompt_template(id);
    std::string user;
    std::set<std::string> used;
    const std::string_view pattern = tpl.user_pattern;
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        const std::size_t open = pattern.find('{', pos);
        if (open == std::string_view::npos) {
            user.append(pattern.substr(pos));
            break;
        }
        user.append(pattern.substr(pos, open - pos));
        const std::size_t close = pattern.find('}', open);
        if (close == std::string_view::npos)
            throw ValidationError("malformed template pattern for " +
                                  std::string(to_string(id)));
        const std::string slot(pattern.substr(open + 1, close - open - 1));
        const auto it = slots.find(slot);
        if (it == slots.end())
            throw ValidationError("unbound slot '" + slot + "' for template " +
                                  std::string(to_string(id)));
        user.append(it->second);
        used.insert(slot);
        pos = close + 1;
    }
    for (const auto& [name, _] : slots)
        if (!used.count(name))
            throw ValidationError("unknown slot '" + name + "' for template " +
                                  std::string(to_string(id)));
    return RenderedPrompt{id, std::string(tpl.system), std::move(user)};
}

// Stable fingerprint of a rendered prompt: hash of the template id and the
// rendered texts with field separators, rendered as 16 hex digits. Scripted
// backends key their recordings on this.
inline std::string prompt_fingerprint(const RenderedPrompt& prompt) {
    std::uint64_t h = fnv1a64(to_string(prompt.id));
    h = fnv1a64("\x1f", h);
    h = fnv1a64(prompt.system, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(prompt.user, h);
    return to_hex(h);
}

}  // namespace lexgraph
