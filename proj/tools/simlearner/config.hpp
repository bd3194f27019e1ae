#pragma once
// Experiment configuration file: a JSON object, unknown keys rejected.
// Relative paths resolve against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simlearner/errors.hpp"
#include "simlearner/memory.hpp"
#include "simlearner/profile.hpp"
#include "simlearner/provider.hpp"

namespace simlearner::cli {

namespace fs = std::filesystem;

class ConfigError : public Error {
public:
    using Error::Error;
};

struct StudentSpec {
    StudentProfile profile;
    std::optional<fs::path> snapshot;  // initial memory; fresh store when absent
};

struct SessionDefaults {
    int max_turns = 12;
    int per_unit_sessions = 1;
    std::size_t recent_k = 3;
    std::size_t metacog_window = 5;
};

struct ExperimentConfig {
    fs::path base_dir;
    std::optional<fs::path> curriculum;  // bundled curriculum when absent
    std::optional<fs::path> templates_dir;
    // simulator, teacher, judge, consolidator (defaults to simulator)
    std::map<std::string, ProviderConfig> providers;
    std::vector<StudentSpec> students;
    DynamicsParams dynamics;
    SessionDefaults session;
    int first_grade = kMinGrade;
    int last_grade = kMaxGrade;
    fs::path output_dir;
    std::uint64_t seed = 0;
    double coverage_threshold = 0.5;
    std::vector<int> probe_grades{1, 2, 3, 4, 5};
    nlohmann::json document;  // as parsed, for the run directory copy

    const ProviderConfig& provider(const std::string& role) const;
    const StudentSpec& student(const std::string& id) const;
};

ExperimentConfig parse_config(const nlohmann::json& doc, const fs::path& base_dir);
ExperimentConfig load_config(const fs::path& path);

// Stable digest of the effective configuration.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace simlearner::cli
