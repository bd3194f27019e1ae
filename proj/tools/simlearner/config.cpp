#include "simlearner/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "simlearner/checksum.hpp"

namespace simlearner::cli {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& j, const std::string& where, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "/" + key + ": wrong type");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

ProviderConfig parse_provider(const json& j, const std::string& where, const fs::path& base) {
    expect_keys(j, where, {"backend", "script", "endpoint", "model", "temperature", "max_retries",
                           "timeout_ms", "retry_backoff_ms"});
    ProviderConfig p;
    const auto backend = get<std::string>(j, where, "backend", "");
    auto parsed = parse_backend(backend);
    if (!parsed) throw ConfigError(where + "/backend: expected http, scripted or echo");
    p.backend = *parsed;
    p.endpoint = get<std::string>(j, where, "endpoint", "");
    p.model_name = get<std::string>(j, where, "model", "");
    p.temperature = get<double>(j, where, "temperature", 0.0);
    p.max_retries = get<int>(j, where, "max_retries", 2);
    p.timeout = std::chrono::milliseconds(get<long>(j, where, "timeout_ms", 60000));
    p.retry_backoff = std::chrono::milliseconds(get<long>(j, where, "retry_backoff_ms", 500));

    if (j.contains("script")) {
        if (p.backend != Backend::scripted) throw ConfigError(where + "/script: only valid for the scripted backend");
        const auto& s = j["script"];
        try {
            if (s.is_string()) p.script = load_script(resolve(base, s.get<std::string>()).string());
            else p.script = parse_script(s.dump());
        } catch (const SchemaError& e) {
            throw ConfigError(where + "/script: " + e.what());
        }
    } else if (p.backend == Backend::scripted) {
        throw ConfigError(where + ": scripted backend needs a script");
    }
    if (p.backend == Backend::http) {
        if (p.model_name.empty()) throw ConfigError(where + ": http backend needs a model");
        const char* key = std::getenv("SIMLEARNER_API_KEY");
        if (!key || !*key) throw ConfigError(where + ": http backend needs SIMLEARNER_API_KEY in the environment");
    }
    try {
        check_config(p);
    } catch (const ValidationError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

TraitLevel trait_level(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected \"high\" or \"low\"");
    auto level = parse_trait_level(j.get<std::string>());
    if (!level) throw ConfigError(where + ": expected \"high\" or \"low\"");
    return *level;
}

StudentSpec parse_student(const json& j, const std::string& where, const fs::path& base) {
    expect_keys(j, where, {"id", "preset", "gender", "personality", "grade", "skill_level", "snapshot"});
    StudentSpec spec;
    auto& p = spec.profile;
    if (j.contains("preset")) {
        const auto name = get<std::string>(j, where, "preset", "");
        bool found = false;
        for (const auto& preset : preset_profiles()) {
            if (preset.id == name) {
                p = preset;
                found = true;
            }
        }
        if (!found) throw ConfigError(where + "/preset: unknown preset '" + name + "'");
    }
    p.id = get<std::string>(j, where, "id", p.id);
    if (p.id.empty()) throw ConfigError(where + ": student needs an id or a preset");
    if (j.contains("gender")) p.gender = get<std::string>(j, where, "gender", "");
    if (j.contains("personality")) {
        const auto& pj = j["personality"];
        expect_keys(pj, where + "/personality",
                    {"openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"});
        for (auto trait : kAllTraits) {
            const std::string name(to_string(trait));
            if (pj.contains(name)) p.personality[trait] = trait_level(pj[name], where + "/personality/" + name);
            else if (!j.contains("preset")) throw ConfigError(where + "/personality: missing '" + name + "'");
        }
    } else if (!j.contains("preset")) {
        throw ConfigError(where + ": student needs a personality or a preset");
    }
    try {
        p.constraints = constraints_for_grade(get<int>(j, where, "grade", p.constraints.grade));
    } catch (const DomainError& e) {
        throw ConfigError(where + "/grade: " + e.what());
    }
    if (j.contains("skill_level")) {
        auto level = parse_skill_level(get<std::string>(j, where, "skill_level", ""));
        if (!level) throw ConfigError(where + "/skill_level: expected beginner, developing or expert");
        p.initial_skill_level = *level;
    }
    if (j.contains("snapshot")) spec.snapshot = resolve(base, get<std::string>(j, where, "snapshot", ""));
    return spec;
}

DynamicsParams parse_dynamics(const json& j) {
    const std::string where = "/dynamics";
    expect_keys(j, where, {"alpha", "beta", "sigma_decay", "sigma_floor", "mastery_threshold",
                           "above_grade_decay_multiplier", "mastered_decay_multiplier", "forgetting"});
    DynamicsParams d;
    d.alpha = get<double>(j, where, "alpha", d.alpha);
    d.beta = get<double>(j, where, "beta", d.beta);
    d.sigma_decay = get<double>(j, where, "sigma_decay", d.sigma_decay);
    d.sigma_floor = get<double>(j, where, "sigma_floor", d.sigma_floor);
    d.mastery_threshold = get<double>(j, where, "mastery_threshold", d.mastery_threshold);
    d.above_grade_decay_multiplier = get<double>(j, where, "above_grade_decay_multiplier", 1.0);
    d.mastered_decay_multiplier = get<double>(j, where, "mastered_decay_multiplier", 1.0);
    if (j.contains("forgetting")) {
        auto model = parse_forgetting_model(get<std::string>(j, where, "forgetting", ""));
        if (!model) throw ConfigError(where + "/forgetting: expected exponential or ebbinghaus");
        d.forgetting = *model;
    }
    try {
        check_params(d);
    } catch (const ValidationError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return d;
}

int checked_grade(int g, const std::string& where) {
    if (g < kMinGrade || g > kMaxGrade) throw ConfigError(where + ": grade must be in 1..5");
    return g;
}

}  // namespace

const ProviderConfig& ExperimentConfig::provider(const std::string& role) const {
    auto it = providers.find(role);
    if (it == providers.end()) {
        if (role == "consolidator") return provider("simulator");
        throw ConfigError("/providers: missing '" + role + "' provider");
    }
    return it->second;
}

const StudentSpec& ExperimentConfig::student(const std::string& id) const {
    for (const auto& s : students)
        if (s.profile.id == id) return s;
    throw ConfigError("no student with id '" + id + "'");
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
    expect_keys(doc, "config", {"curriculum", "templates_dir", "providers", "students", "dynamics", "session",
                                "grades", "output_dir", "seed", "coverage_threshold", "probe"});
    ExperimentConfig cfg;
    cfg.base_dir = base_dir;
    cfg.document = doc;

    if (doc.contains("curriculum")) cfg.curriculum = resolve(base_dir, get<std::string>(doc, "", "curriculum", ""));
    if (doc.contains("templates_dir"))
        cfg.templates_dir = resolve(base_dir, get<std::string>(doc, "", "templates_dir", ""));

    if (!doc.contains("providers")) throw ConfigError("/providers: required");
    const auto& pj = doc["providers"];
    expect_keys(pj, "/providers", {"simulator", "teacher", "judge", "consolidator"});
    for (const auto& [role, value] : pj.items())
        cfg.providers[role] = parse_provider(value, "/providers/" + role, base_dir);

    if (!doc.contains("students") || !doc["students"].is_array() || doc["students"].empty())
        throw ConfigError("/students: expected a non-empty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc["students"].size(); ++i) {
        auto spec = parse_student(doc["students"][i], "/students/" + std::to_string(i), base_dir);
        if (!ids.insert(spec.profile.id).second)
            throw ConfigError("/students/" + std::to_string(i) + ": duplicate id '" + spec.profile.id + "'");
        cfg.students.push_back(std::move(spec));
    }

    if (doc.contains("dynamics")) cfg.dynamics = parse_dynamics(doc["dynamics"]);

    if (doc.contains("session")) {
        const auto& sj = doc["session"];
        expect_keys(sj, "/session", {"max_turns", "per_unit_sessions", "recent_k", "metacog_window"});
        auto& s = cfg.session;
        s.max_turns = get<int>(sj, "/session", "max_turns", s.max_turns);
        s.per_unit_sessions = get<int>(sj, "/session", "per_unit_sessions", s.per_unit_sessions);
        s.recent_k = get<std::size_t>(sj, "/session", "recent_k", s.recent_k);
        s.metacog_window = get<std::size_t>(sj, "/session", "metacog_window", s.metacog_window);
        if (s.max_turns < 2) throw ConfigError("/session/max_turns: must be >= 2");
        if (s.per_unit_sessions < 1) throw ConfigError("/session/per_unit_sessions: must be >= 1");
        if (s.metacog_window < 1) throw ConfigError("/session/metacog_window: must be >= 1");
    }

    if (doc.contains("grades")) {
        const auto& gj = doc["grades"];
        expect_keys(gj, "/grades", {"first", "last"});
        cfg.first_grade = checked_grade(get<int>(gj, "/grades", "first", kMinGrade), "/grades/first");
        cfg.last_grade = checked_grade(get<int>(gj, "/grades", "last", kMaxGrade), "/grades/last");
        if (cfg.first_grade > cfg.last_grade) throw ConfigError("/grades: first > last");
    }

    cfg.output_dir = resolve(base_dir, get<std::string>(doc, "", "output_dir", "runs"));
    cfg.seed = get<std::uint64_t>(doc, "", "seed", 0);
    cfg.coverage_threshold = get<double>(doc, "", "coverage_threshold", 0.5);
    if (!(cfg.coverage_threshold >= 0.0 && cfg.coverage_threshold <= 1.0))
        throw ConfigError("/coverage_threshold: must be in [0, 1]");

    if (doc.contains("probe")) {
        const auto& pr = doc["probe"];
        expect_keys(pr, "/probe", {"grades"});
        cfg.probe_grades = get<std::vector<int>>(pr, "/probe", "grades", cfg.probe_grades);
        for (int g : cfg.probe_grades) checked_grade(g, "/probe/grades");
    }

    for (auto& [role, p] : cfg.providers) p.seed = cfg.seed;
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc, fs::absolute(path).parent_path());
}

std::string config_hash(const ExperimentConfig& cfg) {
    json effective = cfg.document;
    effective["seed"] = cfg.seed;
    return checksum_hex(effective.dump());
}

}  // namespace simlearner::cli
