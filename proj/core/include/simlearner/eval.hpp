#pragma once
// Evaluation protocols: knowledge-mastery consistency, grade coverage,
// concept alignment and personality consistency.
//
// judge_* functions call a provider; everything else is pure arithmetic.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "simlearner/curriculum.hpp"
#include "simlearner/dialogue.hpp"
#include "simlearner/memory.hpp"
#include "simlearner/profile.hpp"
#include "simlearner/provider.hpp"
#include "simlearner/templates.hpp"

namespace simlearner {

struct JudgedAnswer {
    std::string unit_id;
    int grade = kMinGrade;
    int score = kMinMasteryScore;  // 1..10
    std::string rationale;

    bool operator==(const JudgedAnswer&) const = default;
};

struct JudgeError {
    std::string unit_id;
    int grade = kMinGrade;
    std::string message;
};

struct MasteryJudging {
    std::vector<JudgedAnswer> judged;
    std::vector<JudgeError> errors;  // items skipped after failed extraction
    // Set when the judge backend itself failed (transport, exhausted script);
    // `judged` then holds the answers scored before the failure.
    bool aborted = false;
    std::string abort_reason;
};

// One rubric extraction per answer. Throws ValidationError on empty input.
MasteryJudging judge_mastery(Provider& judge, const Curriculum& curriculum, const TemplateSet& templates,
                             const std::vector<ProbeAnswer>& answers);

// Mean score per question grade; grades without answers are omitted.
std::map<int, double> mastery_consistency(const std::vector<JudgedAnswer>& judged);

struct CoverageResult {
    double coverage = 0.0;
    std::map<int, double> leakage;  // the same ratio for each grade above g
};

// Fraction of the grade's units whose concept mastery reaches tau.
double unit_ratio(const MemoryStore& store, const Curriculum& curriculum, int grade, double tau);
CoverageResult grade_coverage(const MemoryStore& store, const Curriculum& curriculum, int g,
                              double tau = 0.5);

// Fraction of sessions whose planned concept is among the concepts extracted
// into the session's episode.
double concept_alignment(const std::vector<Transcript>& transcripts, const MemoryStore& store);

struct TraitLabels {
    std::array<TraitLevel, 5> levels{};

    TraitLevel operator[](Trait t) const noexcept { return levels[static_cast<std::size_t>(t)]; }
    bool operator==(const TraitLabels&) const = default;
};

TraitLabels labels_of(const PersonalityProfile& p);

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;
};

struct PersonalityReport {
    std::array<PrfScore, 5> per_trait;  // indexed by Trait
    PrfScore macro;                     // unweighted mean of P, R and F1; counts are summed
};

// "high" is the positive class; ratios with a zero denominator are 0.
PrfScore prf_from_counts(int tp, int fp, int fn, int tn = 0);
PersonalityReport personality_prf(const std::vector<TraitLabels>& judged,
                                  const std::vector<PersonalityProfile>& truth);

TraitLabels judge_personality(Provider& judge, const TemplateSet& templates, const Transcript& transcript);

}  // namespace simlearner
