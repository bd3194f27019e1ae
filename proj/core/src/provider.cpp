#include "simlearner/provider.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "simlearner/checksum.hpp"
#include "simlearner/errors.hpp"

namespace simlearner {

using nlohmann::json;

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(Backend backend) noexcept {
    switch (backend) {
        case Backend::http: return "http";
        case Backend::scripted: return "scripted";
        case Backend::echo: return "echo";
    }
    return "echo";
}

std::optional<Backend> parse_backend(std::string_view text) noexcept {
    if (text == "http") return Backend::http;
    if (text == "scripted") return Backend::scripted;
    if (text == "echo") return Backend::echo;
    return std::nullopt;
}

void check_config(const ProviderConfig& cfg) {
    if (cfg.backend == Backend::http && cfg.endpoint.empty())
        throw ValidationError("http backend requires an endpoint");
    if (cfg.backend != Backend::http && !cfg.endpoint.empty())
        throw ValidationError("endpoint is only valid for the http backend");
    if (!(cfg.temperature >= 0.0) || !std::isfinite(cfg.temperature))
        throw ValidationError("temperature must be >= 0");
    if (cfg.max_retries < 0) throw ValidationError("max_retries must be >= 0");
    if (cfg.timeout.count() <= 0) throw ValidationError("timeout must be positive");
}

std::vector<ScriptEntry> parse_script(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SchemaError("script", e.what());
    }
    if (!doc.is_array()) throw SchemaError("script", "expected a JSON array");
    std::vector<ScriptEntry> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& j = doc[i];
        const std::string path = "script/" + std::to_string(i);
        if (!j.is_object() || !j.contains("response") || !j["response"].is_string())
            throw SchemaError(path, "expected {cue, response} object");
        for (const auto& [key, _] : j.items()) {
            if (key != "cue" && key != "response" && key != "repeat")
                throw SchemaError(path, "unknown key '" + key + "'");
        }
        ScriptEntry e;
        e.cue = j.value("cue", std::string());
        e.response = j["response"].get<std::string>();
        e.repeat = j.value("repeat", false);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ScriptEntry> load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path, "cannot open script file");
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_script(text);
}

// ---------------------------------------------------------------------------
// Structured output parsing

namespace {

// Drops commas that directly precede a closing brace/bracket, outside strings.
std::string strip_trailing_commas(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            out.push_back(c);
            if (c == '\\' && i + 1 < s.size()) out.push_back(s[++i]);
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> as_number(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        std::istringstream in(s);
        double d;
        if (in >> d) {
            in >> std::ws;
            if (in.eof()) return d;
        }
    }
    return std::nullopt;
}

std::string describe_range(const FieldSpec& spec) {
    std::ostringstream os;
    if (spec.min && spec.max) os << " in [" << *spec.min << ", " << *spec.max << "]";
    else if (spec.min) os << " >= " << *spec.min;
    else if (spec.max) os << " <= " << *spec.max;
    return os.str();
}

double checked_number(const json& v, const FieldSpec& spec, const std::string& where, bool integral) {
    auto d = as_number(v);
    if (!d || !std::isfinite(*d))
        throw ValidationError("'" + where + "' must be a number");
    if (integral && std::floor(*d) != *d)
        throw ValidationError("'" + where + "' must be an integer");
    if ((spec.min && *d < *spec.min) || (spec.max && *d > *spec.max))
        throw ValidationError("'" + where + "' must be" + describe_range(spec));
    return *d;
}

std::string schema_hint(const std::vector<FieldSpec>& schema) {
    std::string keys;
    for (const auto& f : schema) {
        if (!keys.empty()) keys += ", ";
        keys += f.name;
    }
    return keys;
}

}  // namespace

json parse_json_object(std::string_view text) {
    auto open = text.find('{');
    auto close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ValidationError("no JSON object found in the reply");
    auto body = strip_trailing_commas(text.substr(open, close - open + 1));
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw ValidationError("reply is not a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("reply is not valid JSON: ") + e.what());
    }
}

json validate_fields(const json& object, const std::vector<FieldSpec>& schema) {
    json out = json::object();
    for (const auto& spec : schema) {
        if (!object.contains(spec.name)) throw ValidationError("missing key '" + spec.name + "'");
        const auto& v = object.at(spec.name);
        switch (spec.kind) {
            case FieldKind::string: {
                if (!v.is_string()) throw ValidationError("'" + spec.name + "' must be a string");
                std::string s = v.get<std::string>();
                if (!spec.allowed.empty()) {
                    auto it = std::find_if(spec.allowed.begin(), spec.allowed.end(),
                                           [&](const std::string& a) { return lower(a) == lower(s); });
                    if (it == spec.allowed.end()) {
                        std::string options;
                        for (const auto& a : spec.allowed) options += (options.empty() ? "" : ", ") + a;
                        throw ValidationError("'" + spec.name + "' must be one of: " + options +
                                              " (got '" + s + "')");
                    }
                    s = *it;
                }
                out[spec.name] = s;
                break;
            }
            case FieldKind::real:
                out[spec.name] = checked_number(v, spec, spec.name, false);
                break;
            case FieldKind::integer:
                out[spec.name] = static_cast<long long>(checked_number(v, spec, spec.name, true));
                break;
            case FieldKind::string_list: {
                json list = json::array();
                if (v.is_string()) {
                    list.push_back(v);
                } else if (v.is_array()) {
                    for (const auto& item : v) {
                        if (!item.is_string())
                            throw ValidationError("'" + spec.name + "' must be a list of strings");
                        list.push_back(item);
                    }
                } else {
                    throw ValidationError("'" + spec.name + "' must be a list of strings");
                }
                out[spec.name] = std::move(list);
                break;
            }
            case FieldKind::map: {
                if (!v.is_object()) throw ValidationError("'" + spec.name + "' must be an object");
                json m = json::object();
                for (const auto& [key, value] : v.items()) {
                    m[key] = static_cast<long long>(
                        checked_number(value, spec, spec.name + "." + key, true));
                }
                out[spec.name] = std::move(m);
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Provider

std::string Provider::generate(std::span<const ChatMessage> messages) {
    if (messages.empty()) throw ValidationError("generate requires at least one message");
    for (const auto& m : messages) {
        if (m.role != Role::system && m.text.empty())
            throw ValidationError("user/assistant messages must be non-empty");
    }
    ++calls_;
    return complete(std::vector<ChatMessage>(messages.begin(), messages.end()));
}

ExtractResult Provider::extract(const StructuredRequest& req) {
    if (req.schema.empty()) throw ValidationError("structured request needs a non-empty schema");
    std::vector<ChatMessage> messages = req.messages;
    std::string last_raw;
    std::string last_problem;
    for (int attempt = 1; attempt <= max_retries_ + 1; ++attempt) {
        last_raw = generate(messages);
        try {
            auto fields = validate_fields(parse_json_object(last_raw), req.schema);
            return {std::move(fields), last_raw, attempt};
        } catch (const ValidationError& e) {
            last_problem = e.what();
        }
        messages.push_back({Role::assistant, last_raw.empty() ? std::string("(empty reply)") : last_raw});
        messages.push_back({Role::user, "Your previous reply was invalid: " + last_problem +
                                            ". Respond with ONLY a JSON object with keys: " +
                                            schema_hint(req.schema) + "."});
    }
    throw ExtractionError("structured extraction failed after " + std::to_string(max_retries_ + 1) +
                              " attempts: " + last_problem,
                          last_raw);
}

std::string EchoProvider::complete(const std::vector<ChatMessage>& messages) {
    std::string material = std::to_string(seed_);
    std::string last_user;
    for (const auto& m : messages) {
        material += '\x1f';
        material += to_string(m.role);
        material += '\x1e';
        material += m.text;
        if (m.role == Role::user) last_user = m.text;
    }
    if (last_user.size() > 160) last_user = last_user.substr(0, 160) + "...";
    return "echo-" + checksum_hex(material) + ": " + last_user;
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptEntry> script, int max_retries)
    : Provider(max_retries), script_(std::move(script)), consumed_(script_.size(), false) {}

std::size_t ScriptedProvider::remaining() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (std::size_t i = 0; i < script_.size(); ++i)
        if (!consumed_[i] && !script_[i].repeat) ++n;
    return n;
}

std::string ScriptedProvider::complete(const std::vector<ChatMessage>& messages) {
    std::string last_user;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) {
            last_user = it->text;
            break;
        }
    }

    std::lock_guard lock(mutex_);
    bool any_left = false;
    for (std::size_t i = 0; i < script_.size(); ++i) {
        if (consumed_[i]) continue;
        any_left = true;
        if (last_user.find(script_[i].cue) == std::string::npos) continue;
        if (!script_[i].repeat) consumed_[i] = true;
        return script_[i].response;
    }
    if (!any_left) throw ScriptExhausted("scripted provider has no responses left");
    std::string preview = last_user.substr(0, 120);
    throw ScriptMismatch("no remaining script entry matches the prompt: \"" + preview + "\"");
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg) {
    check_config(cfg);
    switch (cfg.backend) {
        case Backend::echo: return std::make_unique<EchoProvider>(cfg.seed, cfg.max_retries);
        case Backend::scripted: return std::make_unique<ScriptedProvider>(cfg.script, cfg.max_retries);
        case Backend::http: return std::make_unique<HttpProvider>(cfg);
    }
    throw ValidationError("unknown backend");
}

}  // namespace simlearner
