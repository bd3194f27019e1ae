#pragma once
// Three-level student memory: episodes, concept nodes and per-subject skill
// profiles, plus the mastery/forgetting dynamics that connect them.
//
// A MemoryStore belongs to one simulated student. It is a value type with a
// single-writer contract; copy it to stage a batch of mutations and assign it
// back to commit them.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "simlearner/curriculum.hpp"

namespace simlearner {

using EpisodeSeq = std::uint64_t;

inline constexpr int kMinMasteryScore = 1;
inline constexpr int kMaxMasteryScore = 10;

// Consolidation output before it is stamped into the store.
struct EpisodeDraft {
    std::string t;  // ISO-8601
    std::string content;
    std::string summary;
    std::vector<std::string> insights;
    double emotion = 0.5;
    std::vector<ConceptId> concept_refs;
    std::map<ConceptId, int> mastery_map;  // 1..10
};

struct EpisodicUnit {
    EpisodeSeq seq = 0;
    std::string t;
    std::string content;
    std::string summary;
    std::vector<std::string> insights;
    double emotion = 0.5;
    std::vector<ConceptId> concept_refs;
    std::map<ConceptId, int> mastery_map;
    double strength = 1.0;

    bool operator==(const EpisodicUnit&) const = default;
};

struct ConceptNode {
    ConceptId id;
    std::string desc;
    std::string understanding;  // overwritten with the latest consolidation
    double mastery = 0.0;
    std::vector<EpisodeSeq> evidence;
    int grade = 0;  // grade of the session that last touched it; 0 = never

    bool operator==(const ConceptNode&) const = default;
};

enum class SkillLevel { beginner, developing, expert };

std::string_view to_string(SkillLevel level) noexcept;
std::optional<SkillLevel> parse_skill_level(std::string_view text) noexcept;

struct SkillProfile {
    SubjectCode subject;
    SkillLevel level = SkillLevel::beginner;
    std::string pattern;
    int grade = kMinGrade;

    bool operator==(const SkillProfile&) const = default;
};

enum class ForgettingModel { exponential, ebbinghaus };

std::string_view to_string(ForgettingModel model) noexcept;
std::optional<ForgettingModel> parse_forgetting_model(std::string_view text) noexcept;

struct DynamicsParams {
    double alpha = 0.95;             // per-episode decay of conceptual mastery
    double beta = 0.25;              // weight of newly demonstrated mastery
    double sigma_decay = 0.9;        // per-tick episodic strength multiplier
    double sigma_floor = 0.05;       // episodes below this are not retrieved
    double mastery_threshold = 0.3;  // learned/unknown cutoff
    // Optional modulation of alpha for untouched concepts. 1.0 disables.
    double above_grade_decay_multiplier = 1.0;
    double mastered_decay_multiplier = 1.0;
    ForgettingModel forgetting = ForgettingModel::exponential;

    bool operator==(const DynamicsParams&) const = default;
};

// Throws ValidationError when a field is out of range or the forgetting
// model is not implemented.
void check_params(const DynamicsParams& p);

class MemoryStore {
public:
    explicit MemoryStore(DynamicsParams params = {});

    // Appends the draft as a new episode with seq = clock + 1, strength 1.0.
    EpisodeSeq record_episode(EpisodeDraft draft);

    // mu <- clamp(alpha * mu + beta * w, 0, 1). Creates the node with mu = 0
    // on first touch; `desc` seeds its description. The current episode (the
    // latest seq) is appended to the node's evidence.
    double update_mastery(std::string_view concept_id, double w, std::string_view desc = {});

    // Episode strengths decay by sigma_decay; concepts outside `touched`
    // decay by alpha. `current_grade` feeds the above-grade multiplier; pass 0
    // when unknown.
    void consolidation_tick(const std::set<ConceptId>& touched, int current_grade = 0);

    // Newest first, skipping episodes whose strength fell below sigma_floor.
    std::vector<EpisodicUnit> retrieve_recent(std::size_t k) const;

    void set_understanding(std::string_view concept_id, std::string text, int grade);
    void set_skill(SkillProfile profile);

    const std::vector<EpisodicUnit>& episodes() const noexcept { return episodes_; }
    const std::map<ConceptId, ConceptNode, std::less<>>& concepts() const noexcept {
        return concepts_;
    }
    const std::map<SubjectCode, SkillProfile, std::less<>>& skills() const noexcept {
        return skills_;
    }
    const DynamicsParams& params() const noexcept { return params_; }
    EpisodeSeq clock() const noexcept { return clock_; }

    const ConceptNode* find_concept(std::string_view id) const;
    const EpisodicUnit* find_episode(EpisodeSeq seq) const;
    const SkillProfile* find_skill(std::string_view subject) const;
    // 0 for concepts never touched.
    double mastery_of(std::string_view id) const;

    bool operator==(const MemoryStore&) const = default;

private:
    friend MemoryStore restore(std::string_view bytes);

    DynamicsParams params_;
    EpisodeSeq clock_ = 0;
    std::vector<EpisodicUnit> episodes_;
    std::map<ConceptId, ConceptNode, std::less<>> concepts_;
    std::map<SubjectCode, SkillProfile, std::less<>> skills_;
};

// Canonical, versioned JSON; re-serializing a restored store is byte-stable.
std::string snapshot(const MemoryStore& store);
// Throws SchemaError on malformed or truncated input.
MemoryStore restore(std::string_view bytes);

}  // namespace simlearner
