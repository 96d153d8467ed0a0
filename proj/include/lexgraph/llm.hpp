#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lexgraph/common.hpp"
#include "lexgraph/prompts.hpp"

namespace lexgraph {

// One chat completion contract behind every LLM interaction. Implementations
// throw TransportError for retryable failures and BackendError for fatal ones.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const RenderedPrompt& prompt) = 0;
};

// Replays a recorded fingerprint -> response map and fails loudly on unknown
// fingerprints. Makes the whole pipeline a pure function of (corpus, script,
// config).
class ScriptedBackend final : public ChatBackend {
public:
    ScriptedBackend() = default;

    static ScriptedBackend from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open script file: " + path.string());
        ScriptedBackend backend;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            nlohmann::json rec;
            try {
                rec = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError("invalid script entry at " + path.string() + ":" +
                                      std::to_string(line_no) + ": " + e.what());
            }
            if (!rec.contains("fingerprint") || !rec.contains("response"))
                throw ValidationError("script entry missing fingerprint/response at " +
                                      path.string() + ":" + std::to_string(line_no));
            backend.entries_[rec["fingerprint"].get<std::string>()] = {
                rec.value("template", std::string{}), rec["response"].get<std::string>()};
        }
        return backend;
    }

    void add(const RenderedPrompt& prompt, std::string response) {
        entries_[prompt_fingerprint(prompt)] = {to_string(prompt.id), std::move(response)};
    }

    void add_raw(std::string fingerprint, std::string template_name, std::string response) {
        entries_[std::move(fingerprint)] = {std::move(template_name), std::move(response)};
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write script file: " + path.string());
        for (const auto& [fp, entry] : entries_) {
            nlohmann::ordered_json rec;
            rec["fingerprint"] = fp;
            rec["template"] = entry.first;
            rec["response"] = entry.second;
            out << rec.dump() << '\n';
        }
    }

    std::size_t size() const { return entries_.size(); }

    std::string name() const override { return "scripted"; }

    std::string complete(const RenderedPrompt& prompt) override {
        const std::string fp = prompt_fingerprint(prompt);
        const auto it = entries_.find(fp);
        if (it == entries_.end())
            throw BackendError("scripted backend has no entry for fingerprint " + fp +
                               " (template " + to_string(prompt.id) + ")");
        return it->second.second;
    }

private:
    // fingerprint -> (template name, response)
    std::map<std::string, std::pair<std::string, std::string>> entries_;
};

// Computes responses through a caller-supplied function. Test utility and the
// base of script recording.
class CallbackBackend final : public ChatBackend {
public:
    using Fn = std::function<std::string(const RenderedPrompt&)>;

    explicit CallbackBackend(Fn fn, std::string name = "callback")
        : fn_(std::move(fn)), name_(std::move(name)) {}

    std::string name() const override { return name_; }
    std::string complete(const RenderedPrompt& prompt) override { return fn_(prompt); }

private:
    Fn fn_;
    std::string name_;
};

// Decorates another backend and records every (fingerprint -> response) pair
// into a script for later replay.
class RecordingBackend final : public ChatBackend {
public:
    explicit RecordingBackend(ChatBackend& inner) : inner_(inner) {}

    std::string name() const override { return "recording(" + inner_.name() + ")"; }

    std::string complete(const RenderedPrompt& prompt) override {
        std::string response = inner_.complete(prompt);
        script_.add(prompt, response);
        return response;
    }

    const ScriptedBackend& script() const { return script_; }
    void save(const std::filesystem::path& path) const { script_.save(path); }

private:
    ChatBackend& inner_;
    ScriptedBackend script_;
};

// OpenAI-compatible chat endpoint:
//   POST {model, messages: [{role, content}...], temperature}
// Temperature is fixed to 0.
class HttpChatBackend final : public ChatBackend {
public:
    struct Options {
        std::string base_url;
        std::string path = "/v1/chat/completions";
        std::string model;
        std::string api_key;  // empty -> no Authorization header
        int timeout_seconds = 120;
    };

    explicit HttpChatBackend(Options opts) : opts_(std::move(opts)) {
        if (opts_.base_url.empty()) throw ValidationError("chat backend requires a base url");
    }

    std::string name() const override { return "http:" + opts_.model; }

    std::string complete(const RenderedPrompt& prompt) override {
        nlohmann::json body = {
            {"model", opts_.model},
            {"messages",
             {{{"role", "system"}, {"content", prompt.system}},
              {{"role", "user"}, {"content", prompt.user}}}},
            {"temperature", 0},
        };
        httplib::Client client(opts_.base_url);
        client.set_read_timeout(opts_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);
        auto res = client.Post(opts_.path, headers, body.dump(), "application/json");
        if (!res) throw TransportError("chat request failed: " + httplib::to_string(res.error()));
        if (res->status >= 500)
            throw TransportError("chat endpoint returned status " + std::to_string(res->status));
        if (res->status != 200)
            throw BackendError("chat endpoint returned status " + std::to_string(res->status));
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("chat response is not valid JSON: ") + e.what());
        }
        try {
            return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw BackendError("chat response missing choices[0].message.content");
        }
    }

private:
    Options opts_;
};

// --- usage accounting --------------------------------------------------------

struct UsageRecord {
    std::string template_name;
    std::string stage;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double wall_ms = 0.0;
    int retry_count = 0;
};

struct UsageTotals {
    std::size_t calls = 0;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double wall_ms = 0.0;

    void absorb(const UsageRecord& r) {
        ++calls;
        prompt_tokens += r.prompt_tokens;
        completion_tokens += r.completion_tokens;
        wall_ms += r.wall_ms;
    }
};

// Thread-safe append-only record of every gateway call, with per-template and
// per-stage aggregation for cost accounting.
class UsageLedger {
public:
    void append(UsageRecord record) {
        std::lock_guard<std::mutex> lock(mutex_);
        calls_.push_back(std::move(record));
    }

    std::vector<UsageRecord> calls() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return calls_;
    }

    UsageTotals totals() const {
        std::lock_guard<std::mutex> lock(mutex_);
        UsageTotals t;
        for (const auto& r : calls_) t.absorb(r);
        return t;
    }

    std::map<std::string, UsageTotals> by_template() const {
        std::lock_guard<std::mutex> lock(mutex_);
        std::map<std::string, UsageTotals> out;
        for (const auto& r : calls_) out[r.template_name].absorb(r);
        return out;
    }

    std::map<std::string, UsageTotals> by_stage() const {
        std::lock_guard<std::mutex> lock(mutex_);
        std::map<std::string, UsageTotals> out;
        for (const auto& r : calls_) out[r.stage].absorb(r);
        return out;
    }

    // Token counts only by default: wall times vary run to run and would
    // break byte-identical reports.
    nlohmann::ordered_json to_json(bool include_timing = false) const {
        nlohmann::ordered_json out;
        const auto t = totals();
        out["calls"] = t.calls;
        out["prompt_tokens"] = t.prompt_tokens;
        out["completion_tokens"] = t.completion_tokens;
        if (include_timing) out["wall_ms"] = t.wall_ms;
        nlohmann::ordered_json per_template;
        for (const auto& [name, tt] : by_template()) {
            nlohmann::ordered_json row;
            row["calls"] = tt.calls;
            row["prompt_tokens"] = tt.prompt_tokens;
            row["completion_tokens"] = tt.completion_tokens;
            if (include_timing) row["wall_ms"] = tt.wall_ms;
            per_template[name] = row;
        }
        out["per_template"] = per_template;
        nlohmann::ordered_json per_stage;
        for (const auto& [name, tt] : by_stage()) {
            nlohmann::ordered_json row;
            row["calls"] = tt.calls;
            row["prompt_tokens"] = tt.prompt_tokens;
            row["completion_tokens"] = tt.completion_tokens;
            if (include_timing) row["wall_ms"] = tt.wall_ms;
            per_stage[name] = row;
        }
        out["per_stage"] = per_stage;
        return out;
    }

private:
    mutable std::mutex mutex_;
    std::vector<UsageRecord> calls_;
};

// --- gateway ------------------------------------------------------------------

struct RetryPolicy {
    int max_transport_retries = 2;
    std::chrono::milliseconds base_delay{100};
};

// Single point of LLM interaction: owns retries, the usage ledger, and the
// one-shot structured re-ask used when an output fails to parse.
class Gateway {
public:
    explicit Gateway(ChatBackend& backend, RetryPolicy retry = {}, int max_in_flight = 4)
        : backend_(backend), retry_(retry), slots_(max_in_flight > 0 ? max_in_flight : 1) {}

    ChatBackend& backend() { return backend_; }
    UsageLedger& ledger() { return ledger_; }
    const UsageLedger& ledger() const { return ledger_; }

    std::string complete(const RenderedPrompt& prompt, std::string_view stage) {
        SlotGuard guard(*this);
        const auto start = std::chrono::steady_clock::now();
        std::string text;
        int retries = 0;
        for (;;) {
            try {
                text = backend_.complete(prompt);
                break;
            } catch (const TransportError& e) {
                if (retries >= retry_.max_transport_retries)
                    throw BackendError("retries exhausted for template " +
                                       std::string(to_string(prompt.id)) + ": " + e.what());
                std::this_thread::sleep_for(retry_.base_delay * (1 << retries));
                ++retries;
            }
        }
        const auto end = std::chrono::steady_clock::now();
        UsageRecord record;
        record.template_name = to_string(prompt.id);
        record.stage = std::string(stage);
        record.prompt_tokens =
            approx_token_count(prompt.system) + approx_token_count(prompt.user);
        record.completion_tokens = approx_token_count(text);
        record.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
        record.retry_count = retries;
        ledger_.append(record);
        return text;
    }

    // Complete, parse, and on ParseError re-ask exactly once with a format
    // reminder appended to the user prompt. Throws the second ParseError.
    template <typename Parser>
    auto complete_parsed(const RenderedPrompt& prompt, std::string_view stage, Parser parse,
                         std::string_view format_reminder) {
        const std::string first = complete(prompt, stage);
        try {
            return parse(first);
        } catch (const ParseError&) {
            RenderedPrompt retry = prompt;
            retry.user += "\n\nYour previous reply did not match the required format. ";
            retry.user += format_reminder;
            const std::string second = complete(retry, stage);
            return parse(second);
        }
    }

private:
    class SlotGuard {
    public:
        explicit SlotGuard(Gateway& g) : g_(g) {
            std::unique_lock<std::mutex> lock(g_.slot_mutex_);
            g_.slot_cv_.wait(lock, [&] { return g_.slots_ > 0; });
            --g_.slots_;
        }
        ~SlotGuard() {
            {
                std::lock_guard<std::mutex> lock(g_.slot_mutex_);
                ++g_.slots_;
            }
            g_.slot_cv_.notify_one();
        }

    private:
        Gateway& g_;
    };

    ChatBackend& backend_;
    RetryPolicy retry_;
    UsageLedger ledger_;
    int slots_;
    std::mutex slot_mutex_;
    std::condition_variable slot_cv_;
};

}  // namespace lexgraph
