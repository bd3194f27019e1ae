#include "simlearner/consolidation.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "simlearner/errors.hpp"

namespace simlearner {

using nlohmann::json;

namespace {

std::vector<FieldSpec> episode_schema() {
    return {
        {"summary", FieldKind::string, {}, {}, {}},
        {"insights", FieldKind::string_list, {}, {}, {}},
        {"emotion", FieldKind::real, 0.0, 1.0, {}},
        {"concepts", FieldKind::string_list, {}, {}, {}},
        {"mastery_of_concepts", FieldKind::map, double(kMinMasteryScore), double(kMaxMasteryScore), {}},
    };
}

std::vector<FieldSpec> metacog_schema() {
    return {
        {"level", FieldKind::string, {}, {}, {"beginner", "developing", "expert"}},
        {"pattern", FieldKind::string, {}, {}, {}},
    };
}

// Problems that warrant the single corrective re-prompt.
struct OutputProblems {
    std::vector<std::string> unknown_ids;
    std::vector<std::string> unscored_ids;
    bool empty() const { return unknown_ids.empty() && unscored_ids.empty(); }
};

ConsolidationOutput to_output(const json& fields) {
    ConsolidationOutput out;
    out.summary = fields.at("summary").get<std::string>();
    out.insights = fields.at("insights").get<std::vector<std::string>>();
    out.emotion = fields.at("emotion").get<double>();

    std::set<ConceptId> ids;
    for (const auto& raw : fields.at("concepts")) ids.insert(normalize_concept_id(raw.get<std::string>()));
    for (const auto& [raw, score] : fields.at("mastery_of_concepts").items()) {
        auto id = normalize_concept_id(raw);
        ids.insert(id);
        out.mastery_of_concepts[id] = score.get<int>();
    }
    out.concepts.assign(ids.begin(), ids.end());
    return out;
}

OutputProblems inspect(const ConsolidationOutput& out, const Curriculum& curriculum) {
    OutputProblems p;
    for (const auto& id : out.concepts) {
        if (!curriculum.find_concept(id)) p.unknown_ids.push_back(id);
        else if (!out.mastery_of_concepts.count(id)) p.unscored_ids.push_back(id);
    }
    return p;
}

std::string join(const std::vector<std::string>& v, std::string_view sep = ", ") {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

}  // namespace

std::string normalize_concept_id(std::string_view raw) {
    std::string s(raw);
    auto trim = [](std::string& x) {
        auto b = x.find_first_not_of(" \t\r\n'\"");
        auto e = x.find_last_not_of(" \t\r\n'\".:");
        x = b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    trim(s);
    if (s.size() > 5) {
        std::string head = s.substr(0, 5);
        std::transform(head.begin(), head.end(), head.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (head == "type ") s = s.substr(5);
    }
    trim(s);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::string concept_taxonomy(const Curriculum& curriculum) {
    std::string out;
    for (const auto& c : curriculum.concepts()) {
        out += "Type " + c.id + ": " + c.desc + "\n";
    }
    return out;
}

ConsolidationOutput extract_episode(Provider& provider, const Curriculum& curriculum,
                                    const TemplateSet& templates, std::string_view dialogue) {
    if (dialogue.empty()) throw ValidationError("cannot consolidate an empty dialogue");

    StructuredRequest req;
    req.schema = episode_schema();
    req.messages.push_back({Role::user, render(templates.get(tpl::episodic_consolidation),
                                               {{"one_dialogue_content", std::string(dialogue)},
                                                {"all_concept_list_with_idx", concept_taxonomy(curriculum)}})});

    auto first = provider.extract(req);
    auto out = to_output(first.fields);
    auto problems = inspect(out, curriculum);
    if (problems.empty()) return out;

    std::string correction = "Some core idea types in your answer are not valid.";
    if (!problems.unknown_ids.empty())
        correction += " These are not in the NGSS Core Idea Types list: " + join(problems.unknown_ids) + ".";
    if (!problems.unscored_ids.empty())
        correction += " These have no mastery score: " + join(problems.unscored_ids) + ".";
    correction += " Use only types from the list and score every type you return. "
                  "Format as JSON with keys: summary, insights, emotion, concepts, mastery_of_concepts.";
    req.messages.push_back({Role::assistant, first.raw});
    req.messages.push_back({Role::user, correction});

    out = to_output(provider.extract(req).fields);
    problems = inspect(out, curriculum);
    if (!problems.unknown_ids.empty())
        throw UnknownConceptError("extraction returned concepts outside the curriculum: " +
                                  join(problems.unknown_ids));
    if (!problems.unscored_ids.empty())
        throw ExtractionError("extraction left concepts without a mastery score: " +
                                  join(problems.unscored_ids),
                              {});
    return out;
}

EpisodeSeq apply_consolidation(const ConsolidationOutput& out, const Curriculum& curriculum,
                               std::string_view dialogue, const EpisodeContext& ctx,
                               MemoryStore& store) {
    MemoryStore staged = store;
    const std::set<ConceptId> touched(out.concepts.begin(), out.concepts.end());

    // Decay first so the new episode enters at full strength.
    staged.consolidation_tick(touched, ctx.grade);

    EpisodeDraft draft;
    draft.t = ctx.timestamp;
    draft.content = std::string(dialogue);
    draft.summary = out.summary;
    draft.insights = out.insights;
    draft.emotion = out.emotion;
    draft.concept_refs = out.concepts;
    draft.mastery_map = out.mastery_of_concepts;
    const auto seq = staged.record_episode(std::move(draft));

    for (const auto& id : out.concepts) {
        const auto* info = curriculum.find_concept(id);
        const double w = out.mastery_of_concepts.at(id) / 10.0;
        staged.update_mastery(id, w, info ? std::string_view(info->desc) : std::string_view{});
        staged.set_understanding(id, out.summary, ctx.grade);
    }

    store = std::move(staged);
    return seq;
}

EpisodeSeq consolidate_episode(Provider& provider, const Curriculum& curriculum,
                               const TemplateSet& templates, std::string_view dialogue,
                               const EpisodeContext& ctx, MemoryStore& store) {
    auto out = extract_episode(provider, curriculum, templates, dialogue);
    return apply_consolidation(out, curriculum, dialogue, ctx, store);
}

std::vector<const EpisodicUnit*> episodes_for_subject(const MemoryStore& store,
                                                      const Curriculum& curriculum,
                                                      std::string_view subject) {
    std::vector<const EpisodicUnit*> out;
    for (const auto& e : store.episodes()) {
        for (const auto& id : e.concept_refs) {
            const auto* c = curriculum.find_concept(id);
            if (c && c->subject == subject) {
                out.push_back(&e);
                break;
            }
        }
    }
    return out;
}

SkillProfile consolidate_metacognition(Provider& provider, const Curriculum& curriculum,
                                       const TemplateSet& templates, MemoryStore& store,
                                       const MetacogWindow& window, int grade) {
    if (window.n == 0) throw ValidationError("metacognition window must be >= 1");
    check_grade(grade);
    auto episodes = episodes_for_subject(store, curriculum, window.subject);
    if (episodes.empty())
        throw EmptyWindowError("no episodes touch subject '" + window.subject + "'");
    if (episodes.size() > window.n) episodes.erase(episodes.begin(), episodes.end() - window.n);

    std::ostringstream recent;
    for (const auto* e : episodes) {
        recent << "- Episode " << e->seq << " (" << e->t << "): " << e->summary << " Mastery:";
        for (const auto& [id, score] : e->mastery_map) recent << ' ' << id << '=' << score;
        recent << '\n';
    }

    StructuredRequest req;
    req.schema = metacog_schema();
    req.messages.push_back({Role::user, render(templates.get(tpl::metacognition),
                                               {{"grade_level", std::to_string(grade)},
                                                {"subject", window.subject},
                                                {"recent_episodes", recent.str()}})});
    auto fields = provider.extract(req).fields;

    SkillProfile profile;
    profile.subject = window.subject;
    profile.level = *parse_skill_level(fields.at("level").get<std::string>());
    profile.pattern = fields.at("pattern").get<std::string>();
    profile.grade = grade;
    store.set_skill(profile);
    return profile;
}

ConsolidationDecision consolidation_policy(const MemoryStore& store, const Curriculum& curriculum,
                                           const MetacogWindow& window) {
    if (window.n == 0) throw ValidationError("metacognition window must be >= 1");
    const auto count = episodes_for_subject(store, curriculum, window.subject).size();
    return count > 0 && count % window.n == 0 ? ConsolidationDecision::episode_and_metacog
                                              : ConsolidationDecision::episode_only;
}

}  // namespace simlearner
