#include "simlearner/profile.hpp"

#include <map>

#include "simlearner/errors.hpp"

namespace simlearner {

namespace {

struct TraitDescriptors {
    std::string_view label;
    std::vector<std::string> high;
    std::vector<std::string> low;
};

// Same definitions the personality judge prompt uses.
const std::array<TraitDescriptors, 5>& descriptor_bank() {
    static const std::array<TraitDescriptors, 5> bank = {{
        {"Openness",
         {"Creativity in answers", "Open to new ideas from teacher", "Curiosity and interest in learning"},
         {"Lack of creativity in answers", "Reluctant to change original ideas", "Little interest in learning"}},
        {"Conscientiousness",
         {"Well-organized and logical thinking", "Positive attitude toward learning"},
         {"Struggling to organize answers", "Disengaged in learning", "Easily distracted"}},
        {"Extraversion",
         {"Active in conversation", "Talkative and enjoyable", "Willing to communicate"},
         {"Reluctant to talk", "Sometimes answering with fillers", "Hesitating in answers"}},
        {"Agreeableness",
         {"Showing great interest", "Empathy and concern for people", "Being polite and kind"},
         {"Showing little interest in conversation", "Not caring about others",
          "Impolite and uncooperative"}},
        {"Neuroticism",
         {"Feeling anxious", "Nervous in conversation", "Dramatic shifts in mood"},
         {"Emotional stability", "Rarely feeling sad or depressed", "Confident in answers"}},
    }};
    return bank;
}

}  // namespace

std::string_view to_string(Trait trait) noexcept {
    switch (trait) {
        case Trait::openness: return "openness";
        case Trait::conscientiousness: return "conscientiousness";
        case Trait::extraversion: return "extraversion";
        case Trait::agreeableness: return "agreeableness";
        case Trait::neuroticism: return "neuroticism";
    }
    return "openness";
}

std::string_view to_string(TraitLevel level) noexcept {
    return level == TraitLevel::high ? "high" : "low";
}

std::optional<TraitLevel> parse_trait_level(std::string_view text) noexcept {
    if (text == "high") return TraitLevel::high;
    if (text == "low") return TraitLevel::low;
    return std::nullopt;
}

std::optional<Trait> parse_trait(std::string_view text) noexcept {
    for (auto t : kAllTraits) {
        if (to_string(t) == text || to_string(t).substr(0, 1) == text) return t;
    }
    return std::nullopt;
}

std::string PersonalityProfile::short_code() const {
    static constexpr char letters[] = {'O', 'C', 'E', 'A', 'N'};
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) out += ", ";
        out += std::string(to_string(levels[i])) + "-" + letters[i];
    }
    return out;
}

PersonalityProfile make_personality(TraitLevel o, TraitLevel c, TraitLevel e, TraitLevel a,
                                    TraitLevel n) {
    return PersonalityProfile{{o, c, e, a, n}};
}

const std::vector<std::string>& trait_descriptors(Trait trait, TraitLevel level) {
    const auto& d = descriptor_bank()[static_cast<std::size_t>(trait)];
    return level == TraitLevel::high ? d.high : d.low;
}

DevelopmentalConstraints constraints_for_grade(int grade) {
    check_grade(grade);
    static const std::map<int, std::pair<std::string, std::string>> notes = {
        {1, {"Reads simple sentences with familiar words.",
             "Speaks in short, simple sentences and describes things from everyday experience."}},
        {2, {"Reads short texts with some help.",
             "Uses short sentences, explains with simple examples, and sometimes mixes ideas up."}},
        {3, {"Reads grade-level texts independently.",
             "Gives simple explanations with one or two reasons and basic science words."}},
        {4, {"Reads longer informational texts.",
             "Explains ideas with reasons and examples and uses some science vocabulary."}},
        {5, {"Reads and compares information from several sources.",
             "Gives organized explanations, uses evidence, and uses grade-level science vocabulary."}},
    };
    const auto& [reading, style] = notes.at(grade);
    return {grade, reading, style};
}

std::string render_personality(const PersonalityProfile& p) {
    std::string out;
    for (auto trait : kAllTraits) {
        const auto level = p[trait];
        const auto& d = descriptor_bank()[static_cast<std::size_t>(trait)];
        out += "- " + std::string(d.label) + " (" + std::string(to_string(level)) + "): ";
        const auto& lines = level == TraitLevel::high ? d.high : d.low;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (i) out += "; ";
            out += lines[i];
        }
        out += "\n";
    }
    return out;
}

std::vector<StudentProfile> preset_profiles() {
    using L = TraitLevel;
    return {
        {"P1", "male", make_personality(L::high, L::low, L::high, L::high, L::low),
         constraints_for_grade(1), SkillLevel::beginner},
        {"P2", "female", make_personality(L::low, L::high, L::low, L::low, L::high),
         constraints_for_grade(1), SkillLevel::beginner},
        {"P3", "male", make_personality(L::high, L::low, L::high, L::low, L::high),
         constraints_for_grade(1), SkillLevel::beginner},
    };
}

}  // namespace simlearner
