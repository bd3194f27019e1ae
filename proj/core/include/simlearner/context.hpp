#pragma once
// Student response context: personality text, memory context (recent
// episodes, skill pattern, learned/unknown partition), dialogue history and
// developmental constraints. Pure read-side; never mutates the store.

#include <set>
#include <string>
#include <vector>

#include "simlearner/curriculum.hpp"
#include "simlearner/memory.hpp"
#include "simlearner/profile.hpp"
#include "simlearner/provider.hpp"
#include "simlearner/templates.hpp"

namespace simlearner {

struct LearnedConcept {
    ConceptId id;
    double mastery = 0.0;
    std::string understanding;

    bool operator==(const LearnedConcept&) const = default;
};

struct UnknownConcept {
    ConceptId id;
    std::string desc;

    bool operator==(const UnknownConcept&) const = default;
};

struct KnowledgePartition {
    std::vector<LearnedConcept> learned;  // sorted by id
    std::vector<UnknownConcept> unknown;  // sorted by id

    bool operator==(const KnowledgePartition&) const = default;
};

struct ContextBundle {
    std::string personality_text;
    std::string skill_text;
    std::vector<std::string> recent_episode_texts;
    KnowledgePartition partition;
    std::vector<ChatMessage> history;  // teacher turns as user, student turns as assistant
    DevelopmentalConstraints constraints;

    bool operator==(const ContextBundle&) const = default;
};

// Session concepts plus every concept of the same subjects whose minimum unit
// grade is at or below `grade`.
std::set<ConceptId> relevant_concepts(const Curriculum& curriculum, int grade,
                                      const std::set<ConceptId>& session_concepts);

// A relevant concept is learned iff its minimum unit grade <= grade and its
// mastery >= tau; otherwise it is unknown.
KnowledgePartition partition_knowledge(const MemoryStore& store, const Curriculum& curriculum,
                                       int grade, const std::set<ConceptId>& session_concepts,
                                       double tau);

struct AssembleOptions {
    std::size_t recent_k = 3;
};

ContextBundle assemble(const StudentProfile& profile, const MemoryStore& store,
                       const Curriculum& curriculum, const std::set<ConceptId>& session_concepts,
                       std::vector<ChatMessage> history, const AssembleOptions& options = {});

// System message from the student template followed by the history.
std::vector<ChatMessage> render_student_prompt(const ContextBundle& bundle,
                                               const TemplateSet& templates);

}  // namespace simlearner
