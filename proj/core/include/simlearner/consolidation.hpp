#pragma once
// Bottom-up consolidation: dialogue -> episodic unit -> concept mastery, and
// periodically recent episodes -> per-subject metacognitive profile.
//
// Every operation is all-or-nothing with respect to the store: the full
// mutation is staged on a copy and committed only after extraction succeeded.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "simlearner/curriculum.hpp"
#include "simlearner/memory.hpp"
#include "simlearner/provider.hpp"
#include "simlearner/templates.hpp"

namespace simlearner {

struct ConsolidationOutput {
    std::string summary;
    std::vector<std::string> insights;
    double emotion = 0.5;
    std::vector<ConceptId> concepts;
    std::map<ConceptId, int> mastery_of_concepts;
};

struct MetacogWindow {
    std::size_t n = 5;
    SubjectCode subject;
};

enum class ConsolidationDecision { episode_only, episode_and_metacog };

struct EpisodeContext {
    std::string timestamp;  // ISO-8601 stamp for the episode
    int grade = kMinGrade;  // grade of the session being consolidated
};

// "Type LS1" / "type ls1" / "LS1" -> "LS1".
std::string normalize_concept_id(std::string_view raw);

// Numbered concept list injected as the taxonomy, one "Type <id>: <desc>" per line.
std::string concept_taxonomy(const Curriculum& curriculum);

// Runs the episodic-consolidation prompt and validates the result against
// the curriculum. Out-of-taxonomy ids trigger one corrective re-prompt, then
// UnknownConceptError.
ConsolidationOutput extract_episode(Provider& provider, const Curriculum& curriculum,
                                    const TemplateSet& templates, std::string_view dialogue);

// Applies an already-validated output: decays untouched concepts, records the
// episode, and reinforces each extracted concept with w = score / 10.
EpisodeSeq apply_consolidation(const ConsolidationOutput& out, const Curriculum& curriculum,
                               std::string_view dialogue, const EpisodeContext& ctx,
                               MemoryStore& store);

EpisodeSeq consolidate_episode(Provider& provider, const Curriculum& curriculum,
                               const TemplateSet& templates, std::string_view dialogue,
                               const EpisodeContext& ctx, MemoryStore& store);

// Episodes whose concepts include one of `subject`, oldest first.
std::vector<const EpisodicUnit*> episodes_for_subject(const MemoryStore& store,
                                                      const Curriculum& curriculum,
                                                      std::string_view subject);

// Summarizes the last window.n episodes of window.subject into a skill
// profile and stores it. Throws EmptyWindowError when there are none.
SkillProfile consolidate_metacognition(Provider& provider, const Curriculum& curriculum,
                                       const TemplateSet& templates, MemoryStore& store,
                                       const MetacogWindow& window, int grade);

// episode_and_metacog on every n-th episode of the window's subject.
ConsolidationDecision consolidation_policy(const MemoryStore& store, const Curriculum& curriculum,
                                           const MetacogWindow& window);

}  // namespace simlearner
