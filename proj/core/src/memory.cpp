#include "simlearner/memory.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "simlearner/errors.hpp"

namespace simlearner {

using nlohmann::json;

namespace {

constexpr int kSnapshotVersion = 1;

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }
bool in_open_unit(double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; }

void check_range(bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("dynamics parameter out of range: ") + what);
}

}  // namespace

std::string_view to_string(SkillLevel level) noexcept {
    switch (level) {
        case SkillLevel::beginner: return "beginner";
        case SkillLevel::developing: return "developing";
        case SkillLevel::expert: return "expert";
    }
    return "beginner";
}

std::optional<SkillLevel> parse_skill_level(std::string_view text) noexcept {
    if (text == "beginner") return SkillLevel::beginner;
    if (text == "developing") return SkillLevel::developing;
    if (text == "expert") return SkillLevel::expert;
    return std::nullopt;
}

std::string_view to_string(ForgettingModel model) noexcept {
    return model == ForgettingModel::ebbinghaus ? "ebbinghaus" : "exponential";
}

std::optional<ForgettingModel> parse_forgetting_model(std::string_view text) noexcept {
    if (text == "exponential") return ForgettingModel::exponential;
    if (text == "ebbinghaus") return ForgettingModel::ebbinghaus;
    return std::nullopt;
}

void check_params(const DynamicsParams& p) {
    check_range(in_open_unit(p.alpha), "alpha");
    check_range(in_open_unit(p.beta), "beta");
    check_range(in_open_unit(p.sigma_decay), "sigma_decay");
    check_range(in_unit_interval(p.sigma_floor), "sigma_floor");
    check_range(in_unit_interval(p.mastery_threshold), "mastery_threshold");
    check_range(std::isfinite(p.above_grade_decay_multiplier) && p.above_grade_decay_multiplier > 0,
                "above_grade_decay_multiplier");
    check_range(std::isfinite(p.mastered_decay_multiplier) && p.mastered_decay_multiplier > 0,
                "mastered_decay_multiplier");
    if (p.forgetting != ForgettingModel::exponential)
        throw ValidationError("forgetting model '" + std::string(to_string(p.forgetting)) +
                              "' is not implemented");
}

MemoryStore::MemoryStore(DynamicsParams params) : params_(params) { check_params(params_); }

EpisodeSeq MemoryStore::record_episode(EpisodeDraft draft) {
    if (!in_unit_interval(draft.emotion))
        throw ValidationError("episode emotion must be in [0,1], got " + std::to_string(draft.emotion));
    for (const auto& [concept_id, score] : draft.mastery_map) {
        if (score < kMinMasteryScore || score > kMaxMasteryScore)
            throw ValidationError("mastery score for '" + concept_id + "' must be in 1..10, got " +
                                  std::to_string(score));
        if (std::find(draft.concept_refs.begin(), draft.concept_refs.end(), concept_id) ==
            draft.concept_refs.end())
            throw ValidationError("mastery key '" + concept_id + "' is not among the episode concepts");
    }

    EpisodicUnit e;
    e.seq = clock_ + 1;
    e.t = std::move(draft.t);
    e.content = std::move(draft.content);
    e.summary = std::move(draft.summary);
    e.insights = std::move(draft.insights);
    e.emotion = draft.emotion;
    e.concept_refs = std::move(draft.concept_refs);
    e.mastery_map = std::move(draft.mastery_map);
    e.strength = 1.0;
    episodes_.push_back(std::move(e));
    return ++clock_;
}

double MemoryStore::update_mastery(std::string_view concept_id, double w, std::string_view desc) {
    if (!in_unit_interval(w))
        throw ValidationError("mastery weight must be in [0,1], got " + std::to_string(w));

    auto it = concepts_.find(concept_id);
    if (it == concepts_.end()) {
        ConceptNode node;
        node.id = std::string(concept_id);
        node.desc = std::string(desc);
        it = concepts_.emplace(node.id, std::move(node)).first;
    }
    auto& node = it->second;
    node.mastery = std::clamp(params_.alpha * node.mastery + params_.beta * w, 0.0, 1.0);
    if (clock_ > 0 && (node.evidence.empty() || node.evidence.back() != clock_))
        node.evidence.push_back(clock_);
    return node.mastery;
}

void MemoryStore::consolidation_tick(const std::set<ConceptId>& touched, int current_grade) {
    for (auto& e : episodes_) e.strength *= params_.sigma_decay;

    for (auto& [id, node] : concepts_) {
        if (touched.count(id)) continue;
        double alpha = params_.alpha;
        if (current_grade > 0 && node.grade > current_grade)
            alpha *= params_.above_grade_decay_multiplier;
        if (node.mastery >= params_.mastery_threshold) alpha *= params_.mastered_decay_multiplier;
        node.mastery = std::clamp(std::min(alpha, 1.0) * node.mastery, 0.0, 1.0);
    }
}

std::vector<EpisodicUnit> MemoryStore::retrieve_recent(std::size_t k) const {
    std::vector<EpisodicUnit> out;
    for (auto it = episodes_.rbegin(); it != episodes_.rend() && out.size() < k; ++it) {
        if (it->strength >= params_.sigma_floor) out.push_back(*it);
    }
    return out;
}

void MemoryStore::set_understanding(std::string_view concept_id, std::string text, int grade) {
    auto it = concepts_.find(concept_id);
    if (it == concepts_.end()) throw ValidationError("unknown concept node '" + std::string(concept_id) + "'");
    it->second.understanding = std::move(text);
    it->second.grade = grade;
}

void MemoryStore::set_skill(SkillProfile profile) {
    auto key = profile.subject;
    skills_.insert_or_assign(std::move(key), std::move(profile));
}

const ConceptNode* MemoryStore::find_concept(std::string_view id) const {
    auto it = concepts_.find(id);
    return it == concepts_.end() ? nullptr : &it->second;
}

const EpisodicUnit* MemoryStore::find_episode(EpisodeSeq seq) const {
    auto it = std::lower_bound(episodes_.begin(), episodes_.end(), seq,
                               [](const EpisodicUnit& e, EpisodeSeq s) { return e.seq < s; });
    return it != episodes_.end() && it->seq == seq ? &*it : nullptr;
}

const SkillProfile* MemoryStore::find_skill(std::string_view subject) const {
    auto it = skills_.find(subject);
    return it == skills_.end() ? nullptr : &it->second;
}

double MemoryStore::mastery_of(std::string_view id) const {
    const auto* node = find_concept(id);
    return node ? node->mastery : 0.0;
}

// ---------------------------------------------------------------------------
// Snapshot format

namespace {

json params_to_json(const DynamicsParams& p) {
    return {{"alpha", p.alpha},
            {"beta", p.beta},
            {"sigma_decay", p.sigma_decay},
            {"sigma_floor", p.sigma_floor},
            {"mastery_threshold", p.mastery_threshold},
            {"above_grade_decay_multiplier", p.above_grade_decay_multiplier},
            {"mastered_decay_multiplier", p.mastered_decay_multiplier},
            {"forgetting", std::string(to_string(p.forgetting))}};
}

// Reads `key` from `obj` as T, reporting a JSON-pointer-ish path on failure.
template <typename T>
T field(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(path, std::string("missing '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(path + "/" + key, e.what());
    }
}

DynamicsParams params_from_json(const json& j) {
    DynamicsParams p;
    p.alpha = field<double>(j, "/params", "alpha");
    p.beta = field<double>(j, "/params", "beta");
    p.sigma_decay = field<double>(j, "/params", "sigma_decay");
    p.sigma_floor = field<double>(j, "/params", "sigma_floor");
    p.mastery_threshold = field<double>(j, "/params", "mastery_threshold");
    p.above_grade_decay_multiplier = field<double>(j, "/params", "above_grade_decay_multiplier");
    p.mastered_decay_multiplier = field<double>(j, "/params", "mastered_decay_multiplier");
    auto model = parse_forgetting_model(field<std::string>(j, "/params", "forgetting"));
    if (!model) throw SchemaError("/params/forgetting", "unknown forgetting model");
    p.forgetting = *model;
    return p;
}

}  // namespace

std::string snapshot(const MemoryStore& store) {
    json doc;
    doc["version"] = kSnapshotVersion;
    doc["params"] = params_to_json(store.params());
    doc["clock"] = store.clock();

    doc["episodes"] = json::array();
    for (const auto& e : store.episodes()) {
        json mastery = json::object();
        for (const auto& [k, v] : e.mastery_map) mastery[k] = v;
        doc["episodes"].push_back({{"seq", e.seq},
                                   {"t", e.t},
                                   {"content", e.content},
                                   {"summary", e.summary},
                                   {"insights", e.insights},
                                   {"emotion", e.emotion},
                                   {"concept_refs", e.concept_refs},
                                   {"mastery_map", mastery},
                                   {"strength", e.strength}});
    }

    doc["concepts"] = json::object();
    for (const auto& [id, n] : store.concepts()) {
        doc["concepts"][id] = {{"id", n.id},
                               {"desc", n.desc},
                               {"understanding", n.understanding},
                               {"mastery", n.mastery},
                               {"evidence", n.evidence},
                               {"grade", n.grade}};
    }

    doc["skills"] = json::object();
    for (const auto& [subject, s] : store.skills()) {
        doc["skills"][subject] = {{"subject", s.subject},
                                  {"level", std::string(to_string(s.level))},
                                  {"pattern", s.pattern},
                                  {"grade", s.grade}};
    }
    return doc.dump(2) + "\n";
}

MemoryStore restore(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw SchemaError("byte " + std::to_string(e.byte), e.what());
    }
    if (!doc.is_object()) throw SchemaError("", "snapshot must be a JSON object");
    if (field<int>(doc, "", "version") != kSnapshotVersion)
        throw SchemaError("/version", "unsupported snapshot version");

    DynamicsParams params = params_from_json(doc.contains("params") ? doc["params"] : json());
    try {
        check_params(params);
    } catch (const ValidationError& e) {
        throw SchemaError("/params", e.what());
    }

    MemoryStore store(params);
    store.clock_ = field<EpisodeSeq>(doc, "", "clock");

    const auto& episodes = doc.contains("episodes") ? doc["episodes"] : json();
    if (!episodes.is_array()) throw SchemaError("/episodes", "expected an array");
    EpisodeSeq prev = 0;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        const std::string path = "/episodes/" + std::to_string(i);
        const auto& je = episodes[i];
        EpisodicUnit e;
        e.seq = field<EpisodeSeq>(je, path, "seq");
        e.t = field<std::string>(je, path, "t");
        e.content = field<std::string>(je, path, "content");
        e.summary = field<std::string>(je, path, "summary");
        e.insights = field<std::vector<std::string>>(je, path, "insights");
        e.emotion = field<double>(je, path, "emotion");
        e.concept_refs = field<std::vector<ConceptId>>(je, path, "concept_refs");
        e.mastery_map = field<std::map<ConceptId, int>>(je, path, "mastery_map");
        e.strength = field<double>(je, path, "strength");
        if (e.seq <= prev || e.seq > store.clock_) throw SchemaError(path + "/seq", "seq out of order");
        if (!in_unit_interval(e.emotion)) throw SchemaError(path + "/emotion", "outside [0,1]");
        if (!in_unit_interval(e.strength)) throw SchemaError(path + "/strength", "outside [0,1]");
        for (const auto& [k, v] : e.mastery_map) {
            if (v < kMinMasteryScore || v > kMaxMasteryScore)
                throw SchemaError(path + "/mastery_map/" + k, "outside 1..10");
        }
        prev = e.seq;
        store.episodes_.push_back(std::move(e));
    }

    const auto& concepts = doc.contains("concepts") ? doc["concepts"] : json();
    if (!concepts.is_object()) throw SchemaError("/concepts", "expected an object");
    for (const auto& [key, jn] : concepts.items()) {
        const std::string path = "/concepts/" + key;
        ConceptNode n;
        n.id = field<std::string>(jn, path, "id");
        n.desc = field<std::string>(jn, path, "desc");
        n.understanding = field<std::string>(jn, path, "understanding");
        n.mastery = field<double>(jn, path, "mastery");
        n.evidence = field<std::vector<EpisodeSeq>>(jn, path, "evidence");
        n.grade = field<int>(jn, path, "grade");
        if (n.id != key) throw SchemaError(path + "/id", "id does not match key");
        if (!in_unit_interval(n.mastery)) throw SchemaError(path + "/mastery", "outside [0,1]");
        for (auto seq : n.evidence) {
            if (!store.find_episode(seq)) throw SchemaError(path + "/evidence", "dangling episode seq");
        }
        store.concepts_.emplace(key, std::move(n));
    }

    const auto& skills = doc.contains("skills") ? doc["skills"] : json();
    if (!skills.is_object()) throw SchemaError("/skills", "expected an object");
    for (const auto& [key, js] : skills.items()) {
        const std::string path = "/skills/" + key;
        SkillProfile s;
        s.subject = field<std::string>(js, path, "subject");
        auto level = parse_skill_level(field<std::string>(js, path, "level"));
        if (!level) throw SchemaError(path + "/level", "unknown skill level");
        s.level = *level;
        s.pattern = field<std::string>(js, path, "pattern");
        s.grade = field<int>(js, path, "grade");
        if (s.subject != key) throw SchemaError(path + "/subject", "subject does not match key");
        store.skills_.emplace(key, std::move(s));
    }
    return store;
}

}  // namespace simlearner
