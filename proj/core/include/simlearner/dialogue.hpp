#pragma once
// Teacher <-> student tutoring sessions, full-curriculum runs and the
// question/answer probe.
//
// The store is only written after a session terminates: consolidation is
// staged on a copy and committed in one assignment, so any failure leaves
// the store exactly as it was before the session.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "simlearner/context.hpp"
#include "simlearner/curriculum.hpp"
#include "simlearner/memory.hpp"
#include "simlearner/profile.hpp"
#include "simlearner/provider.hpp"
#include "simlearner/templates.hpp"

namespace simlearner {

// Wraps the teacher's closing one-sentence summary.
inline constexpr std::string_view kSummaryOpen = "[SUMMARY]";
inline constexpr std::string_view kSummaryClose = "[/SUMMARY]";

enum class Termination { teacher_summary, max_turns };
enum class Speaker { teacher, student };
enum class Outcome { understood, exhausted };

std::string_view to_string(Termination t) noexcept;
std::string_view to_string(Speaker s) noexcept;
std::string_view to_string(Outcome o) noexcept;

struct SessionPlan {
    std::string unit;
    ConceptId concept_id;
    int grade = kMinGrade;
    int max_turns = 12;
    Termination termination = Termination::teacher_summary;

    bool operator==(const SessionPlan&) const = default;
};

void check_plan(const SessionPlan& plan, const Curriculum& curriculum);

struct Turn {
    Speaker speaker = Speaker::teacher;
    std::string text;
    std::string t;

    bool operator==(const Turn&) const = default;
};

struct Transcript {
    std::string session_id;
    std::string student_id;
    SessionPlan plan;
    std::vector<Turn> turns;
    Outcome outcome = Outcome::exhausted;
    std::map<std::string, std::string> template_checksums;
    std::optional<EpisodeSeq> episode_seq;  // set once consolidated

    bool operator==(const Transcript&) const = default;
};

// "Teacher: ...\nStudent: ..." form used as consolidation input.
std::string dialogue_text(const Transcript& t);

// One header line followed by one line per turn.
std::string to_jsonl(const Transcript& t);
Transcript parse_transcript(std::string_view jsonl);

// Deterministic virtual clock; every call to next() advances one step.
class SimClock {
public:
    explicit SimClock(std::int64_t epoch_seconds = 1756713600,  // 2025-09-01T08:00:00Z
                      std::int64_t step_seconds = 30)
        : now_(epoch_seconds), step_(step_seconds) {}

    std::string next();
    std::string peek() const;

private:
    std::int64_t now_;
    std::int64_t step_;
};

struct Agents {
    Provider& teacher;
    Provider& student;
    Provider& consolidator;
};

struct SessionOptions {
    AssembleOptions assemble;
    std::size_t metacog_window = 5;
};

// Consolidates a finished transcript into `store`: the episode and concept
// mastery, then the subject's skill profile when the window comes due.
EpisodeSeq consolidate_session(Provider& consolidator, const Curriculum& curriculum,
                               const TemplateSet& templates, const Transcript& transcript,
                               MemoryStore& store, const SessionOptions& options = {});

Transcript run_session(const Agents& agents, const Curriculum& curriculum, const StudentProfile& profile,
                       MemoryStore& store, const SessionPlan& plan, const TemplateSet& templates,
                       SimClock& clock, const std::string& session_id, const SessionOptions& options = {});

struct RunError {
    std::string session_id;
    std::string unit;
    std::string message;

    bool operator==(const RunError&) const = default;
};

struct CurriculumRun {
    std::vector<Transcript> transcripts;
    std::vector<RunError> errors;
};

struct CurriculumRunOptions {
    int first_grade = kMinGrade;
    int last_grade = kMaxGrade;
    int per_unit_sessions = 1;
    int max_turns = 12;
    bool fail_fast = false;
    SessionOptions session;
    // Called after each completed grade with the store at that point.
    std::function<void(int grade, const MemoryStore&)> checkpoint;
    // Called after each session, successful or not.
    std::function<void(const Transcript*, const RunError*)> on_session;
};

CurriculumRun run_curriculum(const Agents& agents, const Curriculum& curriculum, StudentProfile profile,
                             MemoryStore& store, const TemplateSet& templates, SimClock& clock,
                             const CurriculumRunOptions& options);

struct ProbeAnswer {
    std::string unit_id;
    int grade = kMinGrade;
    std::string question;
    std::string answer;

    bool operator==(const ProbeAnswer&) const = default;
};

// One fixed-template question per unit of the selected grades and one
// student answer each. Never consolidates.
std::vector<ProbeAnswer> run_qa_probe(Provider& student, const Curriculum& curriculum,
                                      const StudentProfile& profile, const MemoryStore& store,
                                      const std::set<int>& question_grades, const TemplateSet& templates,
                                      const AssembleOptions& options = {});

}  // namespace simlearner
