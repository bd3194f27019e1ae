#include "simlearner/dialogue.hpp"

#include <ctime>

#include "simlearner/consolidation.hpp"
#include "simlearner/errors.hpp"

namespace simlearner {

namespace {

constexpr std::string_view kLessonKickoff = "(The student has joined the lesson. Begin the conversation.)";

std::string format_utc(std::int64_t seconds) {
    std::time_t tt = static_cast<std::time_t>(seconds);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string describe_concept(const Curriculum& curriculum, const SessionPlan& plan) {
    const auto* unit = curriculum.find_unit(plan.unit);
    const auto* info = curriculum.find_concept(plan.concept_id);
    std::string out = info ? info->desc : plan.concept_id;
    if (unit) out += ". Core idea (" + unit->id + "): " + unit->core_idea;
    return out;
}

std::vector<ChatMessage> teacher_messages(const std::string& system, const std::vector<Turn>& turns) {
    std::vector<ChatMessage> m;
    m.push_back({Role::system, system});
    m.push_back({Role::user, std::string(kLessonKickoff)});
    // Teacher speaks first, so after the kickoff roles alternate naturally.
    for (const auto& t : turns)
        m.push_back({t.speaker == Speaker::teacher ? Role::assistant : Role::user, t.text});
    return m;
}

std::vector<ChatMessage> student_history(const std::vector<Turn>& turns) {
    std::vector<ChatMessage> h;
    for (const auto& t : turns) h.push_back({t.speaker == Speaker::teacher ? Role::user : Role::assistant, t.text});
    return h;
}

std::map<std::string, std::string> session_checksums(const TemplateSet& templates) {
    std::map<std::string, std::string> out;
    for (auto name : {tpl::teacher_agent, tpl::student_agent, tpl::episodic_consolidation, tpl::metacognition})
        out[std::string(name)] = templates.get(name).checksum;
    return out;
}

}  // namespace

std::string_view to_string(Termination t) noexcept {
    return t == Termination::teacher_summary ? "teacher_summary" : "max_turns";
}
std::string_view to_string(Speaker s) noexcept { return s == Speaker::teacher ? "teacher" : "student"; }
std::string_view to_string(Outcome o) noexcept { return o == Outcome::understood ? "understood" : "exhausted"; }

std::string SimClock::next() {
    auto out = format_utc(now_);
    now_ += step_;
    return out;
}

std::string SimClock::peek() const { return format_utc(now_); }

void check_plan(const SessionPlan& plan, const Curriculum& curriculum) {
    check_grade(plan.grade);
    if (plan.max_turns < 2) throw ValidationError("session max_turns must be >= 2");
    if (!curriculum.find_concept(plan.concept_id))
        throw ReferenceError("session concept '" + plan.concept_id + "' is not in the curriculum");
    if (!plan.unit.empty() && !curriculum.find_unit(plan.unit))
        throw ReferenceError("session unit '" + plan.unit + "' is not in the curriculum");
}

std::string dialogue_text(const Transcript& t) {
    std::string out;
    for (const auto& turn : t.turns) {
        out += turn.speaker == Speaker::teacher ? "Teacher: " : "Student: ";
        out += turn.text;
        out += "\n";
    }
    return out;
}

EpisodeSeq consolidate_session(Provider& consolidator, const Curriculum& curriculum,
                               const TemplateSet& templates, const Transcript& transcript,
                               MemoryStore& store, const SessionOptions& options) {
    if (transcript.turns.empty()) throw ValidationError("cannot consolidate an empty session");
    MemoryStore staged = store;
    const EpisodeContext ctx{transcript.turns.back().t, transcript.plan.grade};
    const auto seq = consolidate_episode(consolidator, curriculum, templates, dialogue_text(transcript), ctx, staged);

    if (const auto* info = curriculum.find_concept(transcript.plan.concept_id)) {
        const MetacogWindow window{options.metacog_window, info->subject};
        if (consolidation_policy(staged, curriculum, window) == ConsolidationDecision::episode_and_metacog)
            consolidate_metacognition(consolidator, curriculum, templates, staged, window, transcript.plan.grade);
    }
    store = std::move(staged);
    return seq;
}

Transcript run_session(const Agents& agents, const Curriculum& curriculum, const StudentProfile& profile,
                       MemoryStore& store, const SessionPlan& plan, const TemplateSet& templates,
                       SimClock& clock, const std::string& session_id, const SessionOptions& options) {
    check_plan(plan, curriculum);

    Transcript tr;
    tr.session_id = session_id;
    tr.student_id = profile.id;
    tr.plan = plan;
    tr.template_checksums = session_checksums(templates);

    const std::string teacher_system = render(templates.get(tpl::teacher_agent),
                                              {{"grade_level", std::to_string(plan.grade)},
                                               {"current_concept", describe_concept(curriculum, plan)}});
    const std::set<ConceptId> session_concepts{plan.concept_id};

    tr.outcome = Outcome::exhausted;
    for (int i = 0; i < plan.max_turns; ++i) {
        if (i % 2 == 0) {
            auto text = agents.teacher.generate(teacher_messages(teacher_system, tr.turns));
            tr.turns.push_back({Speaker::teacher, std::move(text), clock.next()});
            if (plan.termination == Termination::teacher_summary &&
                tr.turns.back().text.find(kSummaryOpen) != std::string::npos) {
                tr.outcome = Outcome::understood;
                break;
            }
        } else {
            auto bundle = assemble(profile, store, curriculum, session_concepts,
                                   student_history(tr.turns), options.assemble);
            auto text = agents.student.generate(render_student_prompt(bundle, templates));
            tr.turns.push_back({Speaker::student, std::move(text), clock.next()});
        }
    }

    tr.episode_seq = consolidate_session(agents.consolidator, curriculum, templates, tr, store, options);
    return tr;
}

CurriculumRun run_curriculum(const Agents& agents, const Curriculum& curriculum, StudentProfile profile,
                             MemoryStore& store, const TemplateSet& templates, SimClock& clock,
                             const CurriculumRunOptions& options) {
    check_grade(options.first_grade);
    check_grade(options.last_grade);
    if (options.first_grade > options.last_grade) throw DomainError("grade range is empty");
    if (options.per_unit_sessions < 1) throw ValidationError("per_unit_sessions must be >= 1");

    CurriculumRun run;
    for (int g = options.first_grade; g <= options.last_grade; ++g) {
        profile.constraints = constraints_for_grade(g);
        for (const auto& unit : units_for_grade(curriculum, g)) {
            for (int k = 1; k <= options.per_unit_sessions; ++k) {
                const std::string session_id =
                    profile.id + "-g" + std::to_string(g) + "-" + unit.id + "-s" + std::to_string(k);
                SessionPlan plan{unit.id, unit.concept_id, g, options.max_turns, Termination::teacher_summary};
                try {
                    run.transcripts.push_back(run_session(agents, curriculum, profile, store, plan, templates,
                                                          clock, session_id, options.session));
                    if (options.on_session) options.on_session(&run.transcripts.back(), nullptr);
                } catch (const std::exception& e) {
                    run.errors.push_back({session_id, unit.id, e.what()});
                    if (options.on_session) options.on_session(nullptr, &run.errors.back());
                    if (options.fail_fast) throw;
                }
            }
        }
        if (options.checkpoint) options.checkpoint(g, store);
    }
    return run;
}

std::vector<ProbeAnswer> run_qa_probe(Provider& student, const Curriculum& curriculum,
                                      const StudentProfile& profile, const MemoryStore& store,
                                      const std::set<int>& question_grades, const TemplateSet& templates,
                                      const AssembleOptions& options) {
    std::vector<ProbeAnswer> out;
    for (int g : question_grades) {
        for (const auto& unit : units_for_grade(curriculum, g)) {
            auto question = render(templates.get(tpl::probe_question), {{"outcome", unit.outcome}});
            while (!question.empty() && question.back() == '\n') question.pop_back();
            auto bundle = assemble(profile, store, curriculum, {unit.concept_id}, {{Role::user, question}}, options);
            auto answer = student.generate(render_student_prompt(bundle, templates));
            out.push_back({unit.id, g, std::move(question), std::move(answer)});
        }
    }
    return out;
}

}  // namespace simlearner
