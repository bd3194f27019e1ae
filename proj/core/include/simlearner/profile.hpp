#pragma once
// Learner profile: Big Five personality (high/low per trait), developmental
// constraints, and the conditioning text rendered from them.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simlearner/memory.hpp"

namespace simlearner {

enum class Trait { openness, conscientiousness, extraversion, agreeableness, neuroticism };
enum class TraitLevel { high, low };

inline constexpr std::array<Trait, 5> kAllTraits = {Trait::openness, Trait::conscientiousness,
                                                    Trait::extraversion, Trait::agreeableness,
                                                    Trait::neuroticism};

std::string_view to_string(Trait trait) noexcept;
std::string_view to_string(TraitLevel level) noexcept;
std::optional<TraitLevel> parse_trait_level(std::string_view text) noexcept;
std::optional<Trait> parse_trait(std::string_view text) noexcept;

struct PersonalityProfile {
    std::array<TraitLevel, 5> levels{TraitLevel::high, TraitLevel::high, TraitLevel::high,
                                     TraitLevel::high, TraitLevel::high};

    TraitLevel operator[](Trait t) const noexcept { return levels[static_cast<std::size_t>(t)]; }
    TraitLevel& operator[](Trait t) noexcept { return levels[static_cast<std::size_t>(t)]; }

    // Compact form such as "high-O, low-C, high-E, high-A, low-N".
    std::string short_code() const;

    bool operator==(const PersonalityProfile&) const = default;
};

PersonalityProfile make_personality(TraitLevel o, TraitLevel c, TraitLevel e, TraitLevel a,
                                    TraitLevel n);

// Descriptor lines for one trait/level, shared with the personality judge.
const std::vector<std::string>& trait_descriptors(Trait trait, TraitLevel level);

struct DevelopmentalConstraints {
    int grade = kMinGrade;
    std::string reading_level_note;
    std::string response_style_note;

    bool operator==(const DevelopmentalConstraints&) const = default;
};

// Default notes for a grade. Throws DomainError on an invalid grade.
DevelopmentalConstraints constraints_for_grade(int grade);

struct StudentProfile {
    std::string id;
    std::optional<std::string> gender;  // metadata only
    PersonalityProfile personality;
    DevelopmentalConstraints constraints;
    SkillLevel initial_skill_level = SkillLevel::beginner;

    bool operator==(const StudentProfile&) const = default;
};

// Natural-language conditioning text for the student agent.
std::string render_personality(const PersonalityProfile& p);

// The three reference students P1, P2 and P3 at grade 1.
std::vector<StudentProfile> preset_profiles();

}  // namespace simlearner
