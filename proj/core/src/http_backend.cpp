#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "simlearner/errors.hpp"
#include "simlearner/provider.hpp"

namespace simlearner {

using nlohmann::json;

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ValidationError("malformed endpoint URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/v1/chat/completions")};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpProvider::HttpProvider(ProviderConfig cfg) : Provider(cfg.max_retries), cfg_(std::move(cfg)) {
    check_config(cfg_);
    split_endpoint(cfg_.endpoint);
    if (cfg_.api_key.empty()) {
        if (const char* key = std::getenv("SIMLEARNER_API_KEY")) cfg_.api_key = key;
    }
}

HttpProvider::~HttpProvider() = default;

json HttpProvider::request_body(const ProviderConfig& cfg, const std::vector<ChatMessage>& messages) {
    json body;
    body["model"] = cfg.model_name;
    body["temperature"] = cfg.temperature;
    body["messages"] = json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.text}});
    return body;
}

std::string HttpProvider::parse_response(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body.begin(), body.end());
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("response is not JSON: ") + e.what());
    }
    try {
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("response lacks choices[0].message.content");
    }
}

std::string HttpProvider::complete(const std::vector<ChatMessage>& messages) {
    const auto endpoint = split_endpoint(cfg_.endpoint);
    const std::string payload = request_body(cfg_, messages).dump();

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0 && cfg_.retry_backoff.count() > 0)
            std::this_thread::sleep_for(cfg_.retry_backoff * attempt);
        ++attempts_;

        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        auto res = client.Post(endpoint.path, headers, payload, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return parse_response(res->body);
        last_error = "HTTP " + std::to_string(res->status);
        if (!retryable_status(res->status)) break;
    }
    throw TransportError(cfg_.endpoint + ": " + last_error);
}

}  // namespace simlearner
