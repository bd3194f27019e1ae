#pragma once
// Language-model gateway. Every prompt the simulator sends goes through a
// Provider; nothing else in the library touches the network.
//
// Backends:
//   http      OpenAI-style chat-completions endpoint
//   scripted  replays canned responses selected by cue (offline tests)
//   echo      deterministic digest of the prompt (smoke runs)

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace simlearner {

enum class Role { system, user, assistant };

std::string_view to_string(Role role) noexcept;

struct ChatMessage {
    Role role = Role::user;
    std::string text;

    bool operator==(const ChatMessage&) const = default;
};

enum class Backend { http, scripted, echo };

std::string_view to_string(Backend backend) noexcept;
std::optional<Backend> parse_backend(std::string_view text) noexcept;

// One canned response. An entry is eligible when `cue` is a substring of the
// last user message (an empty cue always matches). Entries are consumed in
// order unless `repeat` is set.
struct ScriptEntry {
    std::string cue;
    std::string response;
    bool repeat = false;
};

struct ProviderConfig {
    Backend backend = Backend::echo;
    std::string endpoint;  // http only, e.g. https://api.example.com/v1/chat/completions
    std::string api_key;   // http only; read from SIMLEARNER_API_KEY when empty
    std::string model_name;
    double temperature = 0.0;
    int max_retries = 2;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds retry_backoff{500};
    std::uint64_t seed = 0;
    std::vector<ScriptEntry> script;  // scripted only
};

// Throws ValidationError when the config is inconsistent.
void check_config(const ProviderConfig& cfg);

// Reads a script file: a JSON array of {cue, response[, repeat]} objects.
std::vector<ScriptEntry> load_script(const std::string& path);
std::vector<ScriptEntry> parse_script(std::string_view text);

enum class FieldKind { string, real, integer, string_list, map };

struct FieldSpec {
    std::string name;
    FieldKind kind = FieldKind::string;
    // Numeric bounds; for maps they bound each value.
    std::optional<double> min;
    std::optional<double> max;
    // Allowed values for string fields (matched case-insensitively).
    std::vector<std::string> allowed;
};

struct StructuredRequest {
    std::vector<ChatMessage> messages;
    std::vector<FieldSpec> schema;
};

struct ExtractResult {
    nlohmann::json fields;  // object holding exactly the schema fields, normalized
    std::string raw;        // backend text the fields were parsed from
    int attempts = 0;
};

class Provider {
public:
    explicit Provider(int max_retries) : max_retries_(max_retries) {}
    virtual ~Provider() = default;
    Provider(const Provider&) = delete;
    Provider& operator=(const Provider&) = delete;

    std::string generate(std::span<const ChatMessage> messages);

    // Asks for a JSON object and validates it against `req.schema`. Invalid
    // output is re-prompted with the validation message, up to max_retries
    // times, before ExtractionError is thrown.
    ExtractResult extract(const StructuredRequest& req);

    int max_retries() const noexcept { return max_retries_; }
    // Number of generate() calls that reached the backend.
    std::size_t calls() const noexcept { return calls_.load(); }

protected:
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;

private:
    int max_retries_;
    std::atomic<std::size_t> calls_{0};
};

class EchoProvider final : public Provider {
public:
    explicit EchoProvider(std::uint64_t seed, int max_retries = 2)
        : Provider(max_retries), seed_(seed) {}

protected:
    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    std::uint64_t seed_;
};

class ScriptedProvider final : public Provider {
public:
    explicit ScriptedProvider(std::vector<ScriptEntry> script, int max_retries = 2);

    std::size_t remaining() const;

protected:
    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    mutable std::mutex mutex_;
    std::vector<ScriptEntry> script_;
    std::vector<bool> consumed_;
};

class HttpProvider final : public Provider {
public:
    explicit HttpProvider(ProviderConfig cfg);
    ~HttpProvider() override;

    // Wire attempts, including transport retries.
    std::size_t attempts() const noexcept { return attempts_.load(); }

    static nlohmann::json request_body(const ProviderConfig& cfg,
                                       const std::vector<ChatMessage>& messages);
    // Pulls choices[0].message.content out of a chat-completions response.
    static std::string parse_response(std::string_view body);

protected:
    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    ProviderConfig cfg_;
    std::atomic<std::size_t> attempts_{0};
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg);

// Exposed for tests: locate and parse the JSON object inside free-form model
// output (code fences, surrounding prose and trailing commas are tolerated).
nlohmann::json parse_json_object(std::string_view text);
// Throws ValidationError describing the first schema violation.
nlohmann::json validate_fields(const nlohmann::json& object, const std::vector<FieldSpec>& schema);

}  // namespace simlearner
