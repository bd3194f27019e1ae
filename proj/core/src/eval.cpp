#include "simlearner/eval.hpp"

#include <cmath>

#include "simlearner/errors.hpp"

namespace simlearner {

MasteryJudging judge_mastery(Provider& judge, const Curriculum& curriculum, const TemplateSet& templates,
                             const std::vector<ProbeAnswer>& answers) {
    if (answers.empty()) throw ValidationError("judge_mastery needs at least one answer");
    const auto& tmpl = templates.get(tpl::mastery_judge);
    const std::vector<FieldSpec> schema = {
        {"score", FieldKind::integer, double(kMinMasteryScore), double(kMaxMasteryScore), {}},
        {"rationale", FieldKind::string, std::nullopt, std::nullopt, {}},
    };

    MasteryJudging out;
    for (const auto& a : answers) {
        const auto* unit = curriculum.find_unit(a.unit_id);
        if (!unit) throw ReferenceError("probe answer for unknown unit '" + a.unit_id + "'");
        auto prompt = render(tmpl, {{"grade_level", std::to_string(a.grade)},
                                    {"core_idea", unit->core_idea},
                                    {"question", a.question},
                                    {"answer", a.answer}});
        try {
            auto res = judge.extract({{{Role::user, prompt}}, schema});
            out.judged.push_back({a.unit_id, a.grade, res.fields["score"].get<int>(),
                                  res.fields["rationale"].get<std::string>()});
        } catch (const ExtractionError& e) {
            out.errors.push_back({a.unit_id, a.grade, e.what()});
        } catch (const Error& e) {
            out.aborted = true;
            out.abort_reason = e.what();
            break;
        }
    }
    return out;
}

std::map<int, double> mastery_consistency(const std::vector<JudgedAnswer>& judged) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& j : judged) {
        auto& [sum, n] = acc[j.grade];
        sum += j.score;
        ++n;
    }
    std::map<int, double> out;
    for (const auto& [g, sn] : acc) out[g] = sn.first / sn.second;
    return out;
}

double unit_ratio(const MemoryStore& store, const Curriculum& curriculum, int grade, double tau) {
    check_grade(grade);
    if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0) throw DomainError("coverage threshold must be in [0, 1]");
    const auto units = units_for_grade(curriculum, grade);
    if (units.empty()) return 0.0;
    std::size_t covered = 0;
    for (const auto& u : units)
        if (store.mastery_of(u.concept_id) >= tau) ++covered;
    return static_cast<double>(covered) / static_cast<double>(units.size());
}

CoverageResult grade_coverage(const MemoryStore& store, const Curriculum& curriculum, int g, double tau) {
    CoverageResult r;
    r.coverage = unit_ratio(store, curriculum, g, tau);
    for (int h = g + 1; h <= kMaxGrade; ++h) r.leakage[h] = unit_ratio(store, curriculum, h, tau);
    return r;
}

double concept_alignment(const std::vector<Transcript>& transcripts, const MemoryStore& store) {
    if (transcripts.empty()) throw ValidationError("concept_alignment needs at least one transcript");
    std::size_t aligned = 0;
    for (const auto& t : transcripts) {
        const EpisodicUnit* ep = t.episode_seq ? store.find_episode(*t.episode_seq) : nullptr;
        if (!ep) throw MissingEpisodeError("session '" + t.session_id + "' has no consolidated episode");
        for (const auto& c : ep->concept_refs) {
            if (c == t.plan.concept_id) {
                ++aligned;
                break;
            }
        }
    }
    return static_cast<double>(aligned) / static_cast<double>(transcripts.size());
}

TraitLabels labels_of(const PersonalityProfile& p) { return TraitLabels{p.levels}; }

PrfScore prf_from_counts(int tp, int fp, int fn, int tn) {
    PrfScore s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    s.tn = tn;
    s.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    s.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

PersonalityReport personality_prf(const std::vector<TraitLabels>& judged,
                                  const std::vector<PersonalityProfile>& truth) {
    if (judged.size() != truth.size())
        throw LengthMismatchError("personality_prf: " + std::to_string(judged.size()) + " judged vs " +
                                  std::to_string(truth.size()) + " truth labels");
    PersonalityReport r;
    for (auto trait : kAllTraits) {
        int tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < judged.size(); ++i) {
            const bool pred = judged[i][trait] == TraitLevel::high;
            const bool gold = truth[i][trait] == TraitLevel::high;
            if (pred && gold) ++tp;
            else if (pred) ++fp;
            else if (gold) ++fn;
            else ++tn;
        }
        r.per_trait[static_cast<std::size_t>(trait)] = prf_from_counts(tp, fp, fn, tn);
    }
    for (const auto& s : r.per_trait) {
        r.macro.precision += s.precision / 5.0;
        r.macro.recall += s.recall / 5.0;
        r.macro.f1 += s.f1 / 5.0;
        r.macro.tp += s.tp;
        r.macro.fp += s.fp;
        r.macro.fn += s.fn;
        r.macro.tn += s.tn;
    }
    return r;
}

TraitLabels judge_personality(Provider& judge, const TemplateSet& templates, const Transcript& transcript) {
    if (transcript.turns.empty()) throw ValidationError("cannot judge an empty transcript");
    auto prompt = render(templates.get(tpl::personality_judge), {{"one_dialogue_content", dialogue_text(transcript)}});
    std::vector<FieldSpec> schema;
    for (auto trait : kAllTraits)
        schema.push_back({std::string(to_string(trait)), FieldKind::string, std::nullopt, std::nullopt, {"high", "low"}});
    auto res = judge.extract({{{Role::user, prompt}}, schema});
    TraitLabels out;
    for (auto trait : kAllTraits)
        out.levels[static_cast<std::size_t>(trait)] =
            *parse_trait_level(res.fields[std::string(to_string(trait))].get<std::string>());
    return out;
}

}  // namespace simlearner
