#pragma once
// Three-level curriculum hierarchy: subjects -> concepts -> learning units.
//
// A Curriculum is immutable once loaded. Every list it hands out is ordered
// lexicographically by id so that replays are deterministic.

#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace simlearner {

using ConceptId = std::string;
using SubjectCode = std::string;

inline constexpr int kMinGrade = 1;
inline constexpr int kMaxGrade = 5;

// Throws DomainError unless g is in [kMinGrade, kMaxGrade].
void check_grade(int g);

struct Subject {
    SubjectCode code;
    std::string name;

    bool operator==(const Subject&) const = default;
};

struct Concept {
    ConceptId id;
    std::string desc;
    SubjectCode subject;

    bool operator==(const Concept&) const = default;
};

struct LearningUnit {
    std::string id;
    std::string core_idea;
    std::string outcome;
    int grade = kMinGrade;
    ConceptId concept_id;

    bool operator==(const LearningUnit&) const = default;
};

struct Violation {
    std::string path;
    std::string message;
};

class Curriculum {
public:
    Curriculum() = default;
    // No validation here; load_curriculum is the checked entry point.
    Curriculum(std::string version, std::vector<Subject> subjects,
               std::vector<Concept> concepts, std::vector<LearningUnit> units);

    const std::string& version() const noexcept { return version_; }
    const std::vector<Subject>& subjects() const noexcept { return subjects_; }
    const std::vector<Concept>& concepts() const noexcept { return concepts_; }
    const std::vector<LearningUnit>& units() const noexcept { return units_; }

    const Concept* find_concept(std::string_view id) const;
    const LearningUnit* find_unit(std::string_view id) const;
    const Subject* find_subject(std::string_view code) const;

    // Minimum grade over the concept's units; 0 when it has none.
    int concept_grade(std::string_view id) const;
    std::vector<const LearningUnit*> units_of_concept(std::string_view id) const;

    bool operator==(const Curriculum& other) const;

private:
    std::string version_;
    std::vector<Subject> subjects_;
    std::vector<Concept> concepts_;
    std::vector<LearningUnit> units_;
};

// Parses and checks a curriculum document. Throws SchemaError for structural
// problems, DomainError for grade/subject-code range problems and
// ReferenceError for dangling ids.
Curriculum load_curriculum(std::istream& source);
Curriculum load_curriculum(std::string_view text);
Curriculum load_curriculum_file(const std::string& path);

// Structural parse only (SchemaError); references, ranges and invariants are
// left for validate() to report.
Curriculum parse_curriculum(std::string_view text);
Curriculum parse_curriculum_file(const std::string& path);

// Curriculum shipped with the library (elementary NGSS transcription).
Curriculum bundled_curriculum();
std::string_view bundled_curriculum_text();

// Canonical JSON text (sorted keys, two-space indent, trailing newline).
std::string serialize(const Curriculum& c);

std::vector<LearningUnit> units_for_grade(const Curriculum& c, int g);
std::set<ConceptId> concepts_at_or_below(const Curriculum& c, int g);
std::vector<Violation> validate(const Curriculum& c);

}  // namespace simlearner
