#pragma once
// Shared helpers for the unit tests.

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "simlearner/curriculum.hpp"
#include "simlearner/memory.hpp"
#include "simlearner/provider.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(SIMLEARNER_FIXTURES) / name; }

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline simlearner::Curriculum mini_curriculum() {
    return simlearner::load_curriculum_file(fixture("mini_curriculum.json").string());
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("simlearner-" + tag + "-" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// Provider whose replies come from a callback; records every prompt.
class FnProvider final : public simlearner::Provider {
public:
    using Fn = std::function<std::string(const std::vector<simlearner::ChatMessage>&)>;
    explicit FnProvider(Fn fn, int max_retries = 2) : Provider(max_retries), fn_(std::move(fn)) {}

    std::vector<std::vector<simlearner::ChatMessage>> prompts;

protected:
    std::string complete(const std::vector<simlearner::ChatMessage>& messages) override {
        prompts.push_back(messages);
        return fn_(messages);
    }

private:
    Fn fn_;
};

inline std::string episode_json(const std::string& summary, const std::map<std::string, int>& scores,
                                double emotion = 0.8) {
    nlohmann::json j;
    j["summary"] = summary;
    j["insights"] = {"noticed a pattern"};
    j["emotion"] = emotion;
    j["concepts"] = nlohmann::json::array();
    j["mastery_of_concepts"] = nlohmann::json::object();
    for (const auto& [id, s] : scores) {
        j["concepts"].push_back("Type " + id);
        j["mastery_of_concepts"]["Type " + id] = s;
    }
    return j.dump();
}

// Store whose concept masteries are set directly through the snapshot format.
inline simlearner::MemoryStore store_with(const std::map<std::string, double>& mastery,
                                          simlearner::DynamicsParams params = {}) {
    auto doc = nlohmann::json::parse(simlearner::snapshot(simlearner::MemoryStore(params)));
    for (const auto& [id, mu] : mastery) {
        doc["concepts"][id] = {{"id", id},       {"desc", id + " description"}, {"understanding", ""},
                               {"mastery", mu},  {"evidence", nlohmann::json::array()},
                               {"grade", 1}};
    }
    return simlearner::restore(doc.dump());
}

// Text between the learned header and the unknown header of a student prompt.
inline std::string learned_block(const std::string& system_prompt) {
    const std::string open = "Concepts you have learned:\n";
    const std::string close = "Concepts you have NOT learned yet";
    auto b = system_prompt.find(open);
    auto e = system_prompt.find(close);
    if (b == std::string::npos || e == std::string::npos || e < b) return {};
    return system_prompt.substr(b + open.size(), e - b - open.size());
}

}  // namespace testing_support
