#include "simlearner/context.hpp"

#include <cstdio>

#include "simlearner/errors.hpp"

namespace simlearner {

namespace {

std::string format_mastery(double mu) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", mu);
    return buf;
}

std::string render_skill(const MemoryStore& store, const Curriculum& curriculum,
                         const std::set<ConceptId>& session_concepts, SkillLevel initial) {
    std::set<SubjectCode> subjects;
    for (const auto& id : session_concepts) {
        if (const auto* c = curriculum.find_concept(id)) subjects.insert(c->subject);
    }
    std::string out;
    for (const auto& subject : subjects) {
        if (const auto* skill = store.find_skill(subject)) {
            out += subject + " (" + std::string(to_string(skill->level)) + "): " + skill->pattern + "\n";
        } else {
            out += subject + " (" + std::string(to_string(initial)) +
                   "): No learning pattern observed yet.\n";
        }
    }
    return out.empty() ? "No learning pattern observed yet.\n" : out;
}

std::string render_conceptual(const ContextBundle& b) {
    std::string out;
    out += "Concepts you have learned:\n";
    if (b.partition.learned.empty()) out += "- (none yet)\n";
    for (const auto& c : b.partition.learned) {
        out += "- " + c.id + " (mastery " + format_mastery(c.mastery) + "): " +
               (c.understanding.empty() ? std::string("no notes yet") : c.understanding) + "\n";
    }
    out += "\nConcepts you have NOT learned yet (you do not know these, so do not explain them):\n";
    if (b.partition.unknown.empty()) out += "- (none)\n";
    for (const auto& c : b.partition.unknown) out += "- " + c.id + ": " + c.desc + "\n";
    out += "\nStay at grade " + std::to_string(b.constraints.grade) + ": " +
           b.constraints.reading_level_note + " " + b.constraints.response_style_note + "\n";
    return out;
}

}  // namespace

std::set<ConceptId> relevant_concepts(const Curriculum& curriculum, int grade,
                                      const std::set<ConceptId>& session_concepts) {
    check_grade(grade);
    std::set<SubjectCode> subjects;
    for (const auto& id : session_concepts) {
        if (const auto* c = curriculum.find_concept(id)) subjects.insert(c->subject);
    }
    std::set<ConceptId> out = session_concepts;
    for (const auto& c : curriculum.concepts()) {
        if (!subjects.count(c.subject)) continue;
        const int g = curriculum.concept_grade(c.id);
        if (g > 0 && g <= grade) out.insert(c.id);
    }
    return out;
}

KnowledgePartition partition_knowledge(const MemoryStore& store, const Curriculum& curriculum,
                                       int grade, const std::set<ConceptId>& session_concepts,
                                       double tau) {
    check_grade(grade);
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("mastery threshold must be in [0,1]");

    KnowledgePartition p;
    for (const auto& id : relevant_concepts(curriculum, grade, session_concepts)) {
        const auto* info = curriculum.find_concept(id);
        const int g = curriculum.concept_grade(id);
        const bool within_grade = g > 0 && g <= grade;
        const double mu = store.mastery_of(id);
        if (within_grade && mu >= tau) {
            const auto* node = store.find_concept(id);
            p.learned.push_back({id, mu, node ? node->understanding : std::string()});
        } else {
            p.unknown.push_back({id, info ? info->desc : std::string()});
        }
    }
    return p;
}

ContextBundle assemble(const StudentProfile& profile, const MemoryStore& store,
                       const Curriculum& curriculum, const std::set<ConceptId>& session_concepts,
                       std::vector<ChatMessage> history, const AssembleOptions& options) {
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i].role == history[i - 1].role || history[i].role == Role::system)
            throw ValidationError("dialogue history must alternate teacher and student turns");
    }
    if (!history.empty() && history.front().role == Role::system)
        throw ValidationError("dialogue history must not contain system messages");

    ContextBundle b;
    b.personality_text = render_personality(profile.personality);
    b.skill_text = render_skill(store, curriculum, session_concepts, profile.initial_skill_level);
    for (const auto& e : store.retrieve_recent(options.recent_k)) b.recent_episode_texts.push_back(e.summary);
    b.partition = partition_knowledge(store, curriculum, profile.constraints.grade, session_concepts,
                                      store.params().mastery_threshold);
    b.history = std::move(history);
    b.constraints = profile.constraints;
    return b;
}

std::vector<ChatMessage> render_student_prompt(const ContextBundle& bundle, const TemplateSet& templates) {
    std::string recent;
    for (const auto& text : bundle.recent_episode_texts) recent += "- " + text + "\n";
    if (recent.empty()) recent = "- (no previous learning sessions)\n";

    std::vector<ChatMessage> messages;
    messages.push_back({Role::system, render(templates.get(tpl::student_agent),
                                             {{"grade_level", std::to_string(bundle.constraints.grade)},
                                              {"personality_context", bundle.personality_text},
                                              {"skill_context", bundle.skill_text},
                                              {"recent_episodes", recent},
                                              {"conceptual_context", render_conceptual(bundle)}})});
    messages.insert(messages.end(), bundle.history.begin(), bundle.history.end());
    return messages;
}

}  // namespace simlearner
