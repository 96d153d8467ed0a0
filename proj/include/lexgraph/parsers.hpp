#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"

namespace lexgraph {

// Extracts the last <answer>true</answer> / <answer>false</answer> span.
// Tag and content are matched case-insensitively.
inline bool parse_tagged_answer(std::string_view text) {
    const std::string lowered = to_lower(text);
    const std::string open = "<answer>";
    const std::string close = "</answer>";
    const std::size_t open_pos = lowered.rfind(open);
    if (open_pos == std::string::npos)
        throw ParseError("no <answer> tag found in reply");
    const std::size_t body_pos = open_pos + open.size();
    const std::size_t close_pos = lowered.find(close, body_pos);
    if (close_pos == std::string::npos)
        throw ParseError("unterminated <answer> tag in reply");
    const std::string body = trim(lowered.substr(body_pos, close_pos - body_pos));
    if (body == "true") return true;
    if (body == "false") return false;
    throw ParseError("answer tag content must be true or false, got '" + body + "'");
}

// Parses the bracketed quoted-string list the charge pre-judge prompt demands,
// e.g. ['Theft', 'Robbery']. Order is preserved; [] is a valid empty result.
inline std::vector<std::string> parse_charge_list(std::string_view text) {
    const std::size_t open = text.find('[');
    if (open == std::string_view::npos) throw ParseError("charge list: no '[' found");
    std::vector<std::string> charges;
    std::size_t i = open + 1;
    bool closed = false;
    while (i < text.size()) {
        const char c = text[i];
        if (c == ']') {
            closed = true;
            break;
        }
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            ++i;
            continue;
        }
        if (c == '\'' || c == '"') {
            const std::size_t end = text.find(c, i + 1);
            if (end == std::string_view::npos)
                throw ParseError("charge list: unterminated string");
            charges.emplace_back(text.substr(i + 1, end - i - 1));
            i = end + 1;
            continue;
        }
        throw ParseError(std::string("charge list: unexpected character '") + c + "'");
    }
    if (!closed) throw ParseError("charge list: unbalanced brackets");
    return charges;
}

struct SentencingOutcome {
    std::vector<std::string> charges;
    std::vector<std::string> articles;
    PenaltyTerm term;

    bool operator==(const SentencingOutcome&) const = default;
};

// Parses the adjudicator's structured reply:
//   {charge_name: [...], law_article: [...],
//    term_of_imprisonment: {death_penalty, imprisonment, life_imprisonment}}
// The JSON object may be embedded in surrounding prose.
inline SentencingOutcome parse_sentencing_json(std::string_view text) {
    const std::size_t open = text.find('{');
    const std::size_t close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ParseError("sentencing reply contains no JSON object");
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(text.substr(open, close - open + 1));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("sentencing reply is not valid JSON: ") + e.what());
    }

    auto string_list = [](const nlohmann::json& rec_, const char* key) {
        if (!rec_.contains(key))
            throw ParseError("sentencing JSON missing key '" + std::string(key) + "'");
        if (!rec_[key].is_array())
            throw ParseError("sentencing JSON key '" + std::string(key) +
                             "' must be an array");
        std::vector<std::string> out;
        for (const auto& item : rec_[key]) {
            if (!item.is_string())
                throw ParseError("sentencing JSON key '" + std::string(key) +
                                 "' must contain only strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    };

    SentencingOutcome outcome;
    outcome.charges = string_list(rec, "charge_name");
    outcome.articles = string_list(rec, "law_article");

    if (!rec.contains("term_of_imprisonment"))
        throw ParseError("sentencing JSON missing key 'term_of_imprisonment'");
    const auto& term = rec["term_of_imprisonment"];
    if (!term.is_object())
        throw ParseError("sentencing JSON key 'term_of_imprisonment' must be an object");
    for (const char* key : {"death_penalty", "life_imprisonment"}) {
        if (!term.contains(key))
            throw ParseError("sentencing JSON missing key 'term_of_imprisonment." +
                             std::string(key) + "'");
        if (!term[key].is_boolean())
            throw ParseError("sentencing JSON key 'term_of_imprisonment." + std::string(key) +
                             "' must be a boolean");
    }
    if (!term.contains("imprisonment"))
        throw ParseError("sentencing JSON missing key 'term_of_imprisonment.imprisonment'");
    if (!term["imprisonment"].is_number_integer())
        throw ParseError(
            "sentencing JSON key 'term_of_imprisonment.imprisonment' must be an integer");

    const bool death = term["death_penalty"].get<bool>();
    const bool life = term["life_imprisonment"].get<bool>();
    const auto months = term["imprisonment"].get<long long>();
    if (death && life)
        throw ParseError("sentencing JSON: death_penalty and life_imprisonment both set");
    if (months < 0)
        throw ParseError("sentencing JSON: imprisonment months must be non-negative");
    if ((death || life) && months > 0)
        throw ParseError("sentencing JSON: imprisonment months set alongside life/death flag");
    outcome.term.death_penalty = death;
    outcome.term.life_imprisonment = life;
    if (!death && !life) outcome.term.months = static_cast<int>(months);
    return outcome;
}

// Collects every bracketed integer citation marker "[n]", deduplicated.
// Absence of markers is an empty set, not an error.
inline std::set<int> parse_citations(std::string_view text) {
    std::set<int> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '[') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        // At most 9 digits: anything longer is not a plausible citation marker.
        if (j > i + 1 && j - i - 1 <= 9 && j < text.size() && text[j] == ']') {
            out.insert(std::stoi(std::string(text.substr(i + 1, j - i - 1))));
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

// Parses the keyword-extraction reply into the four ontology keyword lists.
// Missing keys yield empty lists; a non-object or unparsable reply throws.
struct KeywordLists {
    std::vector<std::string> defendant_attributes;
    std::vector<std::string> criminal_behaviors;
    std::vector<std::string> victim_characteristics;
    std::vector<std::string> subjective_mental_states;
};

inline KeywordLists parse_keyword_json(std::string_view text) {
    const std::size_t open = text.find('{');
    const std::size_t close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ParseError("keyword reply contains no JSON object");
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(text.substr(open, close - open + 1));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("keyword reply is not valid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError("keyword reply must be a JSON object");
    auto list = [&](const char* key) {
        std::vector<std::string> out;
        if (!rec.contains(key)) return out;
        if (!rec[key].is_array())
            throw ParseError("keyword key '" + std::string(key) + "' must be an array");
        for (const auto& item : rec[key]) {
            if (!item.is_string())
                throw ParseError("keyword key '" + std::string(key) +
                                 "' must contain only strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    };
    KeywordLists lists;
    lists.defendant_attributes = list("Defendant_Attribute");
    lists.criminal_behaviors = list("Criminal_Behaviors");
    lists.victim_characteristics = list("Victim_Characteristics");
    lists.subjective_mental_states = list("Subjective_Mental_States");
    return lists;
}

// Parses the checklist-generation reply: a JSON array of condition strings.
inline std::vector<std::string> parse_checklist_json(std::string_view text) {
    const std::size_t open = text.find('[');
    const std::size_t close = text.rfind(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ParseError("checklist reply contains no JSON array");
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(text.substr(open, close - open + 1));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checklist reply is not valid JSON: ") + e.what());
    }
    if (!rec.is_array()) throw ParseError("checklist reply must be a JSON array");
    std::vector<std::string> items;
    for (const auto& item : rec) {
        if (!item.is_string()) throw ParseError("checklist items must be strings");
        const std::string s = trim(item.get<std::string>());
        if (!s.empty()) items.push_back(s);
    }
    if (items.empty()) throw ParseError("checklist reply contains no items");
    return items;
}

}  // namespace lexgraph
