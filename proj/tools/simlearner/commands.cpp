#include "simlearner/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "simlearner/checksum.hpp"
#include "simlearner/config.hpp"
#include "simlearner/context.hpp"
#include "simlearner/curriculum.hpp"
#include "simlearner/dialogue.hpp"
#include "simlearner/errors.hpp"
#include "simlearner/eval.hpp"
#include "simlearner/report.hpp"
#include "simlearner/templates.hpp"
#include "simlearner/version.hpp"

namespace simlearner::cli {

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRunErrors = 1;
constexpr int kConfigError = 2;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(p.string() + ": cannot open");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(p.string() + ": cannot write");
    out << content;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

std::string rel(const fs::path& p, const fs::path& base) { return p.lexically_relative(base).generic_string(); }

ExperimentConfig effective_config(const GlobalOptions& opts) {
    if (!opts.config) throw ConfigError("--config is required");
    auto cfg = load_config(*opts.config);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        for (auto& [_, p] : cfg.providers) p.seed = cfg.seed;
    }
    if (opts.out) cfg.output_dir = fs::absolute(*opts.out);
    return cfg;
}

Curriculum curriculum_of(const ExperimentConfig& cfg) {
    return cfg.curriculum ? load_curriculum_file(cfg.curriculum->string()) : bundled_curriculum();
}

TemplateSet templates_of(const ExperimentConfig& cfg) {
    return cfg.templates_dir ? TemplateSet::from_directory(cfg.templates_dir->string()) : TemplateSet::builtin();
}

MemoryStore initial_store(const StudentSpec& s, const ExperimentConfig& cfg) {
    if (!s.snapshot) return MemoryStore(cfg.dynamics);
    try {
        return restore(read_file(*s.snapshot));
    } catch (const SchemaError& e) {
        throw ConfigError(s.snapshot->string() + ": " + e.what());
    }
}

json personality_json(const PersonalityProfile& p) {
    json j = json::object();
    for (auto t : kAllTraits) j[std::string(to_string(t))] = std::string(to_string(p[t]));
    return j;
}

PersonalityProfile personality_from_json(const json& j) {
    PersonalityProfile p;
    for (auto t : kAllTraits) {
        auto level = parse_trait_level(j.at(std::string(to_string(t))).get<std::string>());
        if (!level) throw ConfigError("manifest: bad personality label");
        p[t] = *level;
    }
    return p;
}

json dynamics_json(const DynamicsParams& d) {
    return {{"alpha", d.alpha},
            {"beta", d.beta},
            {"sigma_decay", d.sigma_decay},
            {"sigma_floor", d.sigma_floor},
            {"mastery_threshold", d.mastery_threshold},
            {"above_grade_decay_multiplier", d.above_grade_decay_multiplier},
            {"mastered_decay_multiplier", d.mastered_decay_multiplier},
            {"forgetting", std::string(to_string(d.forgetting))}};
}

// Every exception type maps onto an exit code here so main() stays trivial.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
    } catch (const ReferenceError& e) {
        err << "schema error: " << e.what() << "\n";
    } catch (const DomainError& e) {
        err << "schema error: " << e.what() << "\n";
    } catch (const TemplateError& e) {
        err << "template error: " << e.what() << "\n";
    } catch (const fs::filesystem_error& e) {
        err << "filesystem error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRunErrors;
    }
    return kConfigError;
}

}  // namespace

int cmd_validate(const GlobalOptions& opts, const std::optional<fs::path>& curriculum, Io io) {
    return guarded(io.err, [&] {
        std::optional<fs::path> path = curriculum;
        if (!path && opts.config) path = load_config(*opts.config).curriculum;

        Curriculum c = path ? parse_curriculum_file(path->string()) : bundled_curriculum();
        auto violations = validate(c);
        for (const auto& v : violations) io.out << v.path << ": " << v.message << "\n";
        if (!violations.empty()) return kRunErrors;
        io.out << (path ? path->string() : std::string("bundled curriculum")) << ": ok (" << c.subjects().size()
               << " subjects, " << c.concepts().size() << " concepts, " << c.units().size() << " units)\n";
        return kOk;
    });
}

int cmd_simulate(const GlobalOptions& opts, Io io) {
    return guarded(io.err, [&] {
        const auto cfg = effective_config(opts);
        const auto curriculum = curriculum_of(cfg);
        const auto templates = templates_of(cfg);
        const auto& simulator_cfg = cfg.provider("simulator");
        const auto& teacher_cfg = cfg.provider("teacher");
        const auto& consolidator_cfg = cfg.provider("consolidator");

        const fs::path root = cfg.output_dir;
        fs::remove_all(root / "students");

        json cfg_copy = cfg.document;
        cfg_copy["seed"] = cfg.seed;
        write_file(root / "config.json", pretty(cfg_copy));
        const std::string curriculum_text = serialize(curriculum);
        write_file(root / "curriculum.json", curriculum_text);

        json manifest;
        manifest["format"] = 1;
        manifest["tool_version"] = kVersion;
        manifest["seed"] = cfg.seed;
        manifest["config"] = "config.json";
        manifest["config_hash"] = config_hash(cfg);
        manifest["curriculum"] = {{"path", "curriculum.json"},
                                  {"version", curriculum.version()},
                                  {"checksum", checksum_hex(curriculum_text)}};
        manifest["template_checksums"] = templates.checksums();
        manifest["dynamics"] = dynamics_json(cfg.dynamics);
        manifest["coverage_threshold"] = cfg.coverage_threshold;
        manifest["grades"] = {{"first", cfg.first_grade}, {"last", cfg.last_grade}};
        manifest["session"] = {{"max_turns", cfg.session.max_turns},
                               {"per_unit_sessions", cfg.session.per_unit_sessions},
                               {"recent_k", cfg.session.recent_k},
                               {"metacog_window", cfg.session.metacog_window}};
        manifest["students"] = json::array();

        bool any_error = false;
        bool aborted = false;
        for (const auto& spec : cfg.students) {
            if (aborted) break;
            const auto& profile = spec.profile;
            const fs::path dir = root / "students" / profile.id;
            // Fresh providers per student: scripted state never leaks between students.
            auto teacher = make_provider(teacher_cfg);
            auto student = make_provider(simulator_cfg);
            auto consolidator = make_provider(consolidator_cfg);
            Agents agents{*teacher, *student, *consolidator};

            MemoryStore store = initial_store(spec, cfg);
            SimClock clock;

            json entry;
            entry["id"] = profile.id;
            entry["gender"] = profile.gender ? json(*profile.gender) : json(nullptr);
            entry["personality"] = personality_json(profile.personality);
            entry["transcripts"] = json::array();
            entry["snapshots"] = json::object();
            entry["errors"] = json::array();

            CurriculumRunOptions run_opts;
            run_opts.first_grade = cfg.first_grade;
            run_opts.last_grade = cfg.last_grade;
            run_opts.per_unit_sessions = cfg.session.per_unit_sessions;
            run_opts.max_turns = cfg.session.max_turns;
            run_opts.fail_fast = opts.fail_fast;
            run_opts.session.assemble.recent_k = cfg.session.recent_k;
            run_opts.session.metacog_window = cfg.session.metacog_window;
            run_opts.checkpoint = [&](int g, const MemoryStore& s) {
                const fs::path p = dir / "snapshots" / ("grade-" + std::to_string(g) + ".json");
                write_file(p, snapshot(s));
                entry["snapshots"][std::to_string(g)] = rel(p, root);
            };
            run_opts.on_session = [&](const Transcript* t, const RunError* e) {
                if (t) {
                    const fs::path p = dir / "transcripts" / (t->session_id + ".jsonl");
                    write_file(p, to_jsonl(*t));
                    entry["transcripts"].push_back(rel(p, root));
                } else {
                    entry["errors"].push_back(
                        {{"session_id", e->session_id}, {"unit", e->unit}, {"message", e->message}});
                    io.err << e->session_id << ": " << e->message << "\n";
                }
            };

            StudentProfile start = profile;
            try {
                auto run = run_curriculum(agents, curriculum, start, store, templates, clock, run_opts);
                any_error = any_error || !run.errors.empty();
            } catch (const std::exception&) {
                any_error = true;
                aborted = true;
            }
            manifest["students"].push_back(std::move(entry));
        }
        manifest["aborted"] = aborted;

        const fs::path manifest_path = root / "manifest.json";
        write_file(manifest_path, pretty(manifest));
        io.out << manifest_path.string() << "\n";
        return any_error ? kRunErrors : kOk;
    });
}

int cmd_probe(const GlobalOptions& opts, const std::vector<int>& grades, Io io) {
    return guarded(io.err, [&] {
        const auto cfg = effective_config(opts);
        const auto curriculum = curriculum_of(cfg);
        const auto templates = templates_of(cfg);
        const std::vector<int>& wanted = grades.empty() ? cfg.probe_grades : grades;
        std::set<int> grade_set;
        for (int g : wanted) {
            if (g < kMinGrade || g > kMaxGrade) throw ConfigError("--grades: grade must be in 1..5");
            grade_set.insert(g);
        }
        const auto& simulator_cfg = cfg.provider("simulator");
        const auto& judge_cfg = cfg.provider("judge");

        const fs::path root = cfg.output_dir / "probe";
        bool failed = false;
        std::string summary_csv = csv_row({"student", "grade", "mean_score", "answers"});
        for (const auto& spec : cfg.students) {
            const fs::path dir = root / spec.profile.id;
            auto student = make_provider(simulator_cfg);
            auto judge = make_provider(judge_cfg);
            const MemoryStore store = initial_store(spec, cfg);

            std::string error_log;
            std::vector<ProbeAnswer> answers;
            try {
                answers = run_qa_probe(*student, curriculum, spec.profile, store, grade_set, templates,
                                       AssembleOptions{cfg.session.recent_k});
            } catch (const Error& e) {
                error_log += "probe: " + std::string(e.what()) + "\n";
                failed = true;
            }

            MasteryJudging judging;
            if (!answers.empty()) judging = judge_mastery(*judge, curriculum, templates, answers);
            for (const auto& e : judging.errors)
                error_log += e.unit_id + " (grade " + std::to_string(e.grade) + "): " + e.message + "\n";
            if (judging.aborted) error_log += "judge aborted: " + judging.abort_reason + "\n";
            failed = failed || !judging.errors.empty() || judging.aborted;

            std::string csv = csv_row({"unit_id", "grade", "score", "rationale", "question", "answer"});
            std::map<std::string, const ProbeAnswer*> by_unit;
            for (const auto& a : answers) by_unit[a.unit_id] = &a;
            for (const auto& j : judging.judged) {
                const auto* a = by_unit.at(j.unit_id);
                csv += csv_row({j.unit_id, std::to_string(j.grade), std::to_string(j.score), j.rationale,
                                a->question, a->answer});
            }
            write_file(dir / "answers.csv", csv);
            write_file(dir / "errors.log", error_log);

            const auto means = mastery_consistency(judging.judged);
            std::map<int, int> counts;
            for (const auto& j : judging.judged) ++counts[j.grade];
            json summary;
            summary["student"] = spec.profile.id;
            summary["mastery_by_grade"] = json::object();
            for (const auto& [g, m] : means) {
                summary["mastery_by_grade"][std::to_string(g)] = m;
                summary_csv += csv_row({spec.profile.id, std::to_string(g), fmt_number(m), std::to_string(counts[g])});
            }
            summary["answers"] = answers.size();
            summary["judged"] = judging.judged.size();
            summary["skipped"] = judging.errors.size();
            summary["aborted"] = judging.aborted;
            write_file(dir / "summary.json", pretty(summary));
            io.out << (dir / "answers.csv").string() << "\n";
            if (!error_log.empty()) io.err << error_log;
        }
        write_file(root / "summary.csv", summary_csv);
        return failed ? kRunErrors : kOk;
    });
}

namespace {

struct ManifestStudent {
    std::string id;
    PersonalityProfile personality;
    std::vector<Transcript> transcripts;
    std::map<int, MemoryStore> snapshots;
};

std::vector<ManifestStudent> load_manifest_students(const json& manifest, const fs::path& root) {
    std::vector<ManifestStudent> out;
    try {
        for (const auto& sj : manifest.at("students")) {
            ManifestStudent s;
            s.id = sj.at("id").get<std::string>();
            s.personality = personality_from_json(sj.at("personality"));
            for (const auto& p : sj.at("transcripts"))
                s.transcripts.push_back(parse_transcript(read_file(root / p.get<std::string>())));
            for (const auto& [g, p] : sj.at("snapshots").items()) {
                try {
                    s.snapshots.emplace(std::stoi(g), restore(read_file(root / p.get<std::string>())));
                } catch (const SchemaError& e) {
                    throw ConfigError(p.get<std::string>() + ": " + e.what());
                }
            }
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    return out;
}

}  // namespace

int cmd_eval(const GlobalOptions& opts, const fs::path& manifest_path, const std::vector<double>& taus_in, Io io) {
    return guarded(io.err, [&] {
        const fs::path root = fs::absolute(manifest_path).parent_path();
        json manifest;
        try {
            manifest = json::parse(read_file(manifest_path));
        } catch (const json::parse_error& e) {
            throw ConfigError(manifest_path.string() + ": " + e.what());
        }
        Curriculum curriculum = load_curriculum_file((root / manifest.value("curriculum", json::object())
                                                                   .value("path", std::string("curriculum.json")))
                                                         .string());
        std::vector<double> taus = taus_in;
        if (taus.empty()) taus.push_back(manifest.value("coverage_threshold", 0.5));
        for (double t : taus)
            if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("--tau: threshold must be in [0, 1]");

        const auto students = load_manifest_students(manifest, root);
        const fs::path report = opts.out ? fs::absolute(*opts.out) : root / "report";

        std::unique_ptr<Provider> judge;
        std::optional<TemplateSet> templates;
        if (opts.config) {
            const auto cfg = effective_config(GlobalOptions{opts.config, std::nullopt, opts.seed, false});
            judge = make_provider(cfg.provider("judge"));
            templates = templates_of(cfg);
        }

        std::vector<LearningUnit> all_units;
        for (int g = kMinGrade; g <= kMaxGrade; ++g)
            for (auto& u : units_for_grade(curriculum, g)) all_units.push_back(u);
        std::vector<std::string> unit_labels;
        for (const auto& u : all_units) unit_labels.push_back(u.id);

        bool failed = false;
        json summary;
        summary["coverage"] = json::object();
        summary["alignment"] = json::object();
        summary["errors"] = json::array();
        std::string coverage_csv = csv_row({"student", "tau", "after_grade", "grade", "coverage"});
        std::string mastery_csv = csv_row({"student", "after_grade", "unit", "concept", "mastery"});
        std::string alignment_csv = csv_row({"student", "sessions", "alignment"});
        std::vector<TraitLabels> judged;
        std::vector<PersonalityProfile> truth;

        for (const auto& s : students) {
            std::vector<Series> lines;
            for (double tau : taus) {
                Series grade_level{"coverage tau=" + fmt_number(tau), {}, false};
                for (const auto& [after, store] : s.snapshots) {
                    for (int g = kMinGrade; g <= kMaxGrade; ++g) {
                        const double v = unit_ratio(store, curriculum, g, tau);
                        coverage_csv += csv_row({s.id, fmt_number(tau), std::to_string(after), std::to_string(g),
                                                 fmt_number(v)});
                        summary["coverage"][s.id][fmt_number(tau)][std::to_string(after)][std::to_string(g)] = v;
                        if (g == after) grade_level.points.emplace_back(after, v);
                    }
                }
                lines.push_back(std::move(grade_level));
            }
            Series expected{"expected", {}, true};
            for (const auto& [after, _] : s.snapshots) expected.points.emplace_back(after, 1.0);
            lines.push_back(std::move(expected));
            double y_max = 1.0;
            for (const auto& l : lines)
                for (const auto& [_, y] : l.points) y_max = std::max(y_max, y);
            write_file(report / ("coverage_" + s.id + ".svg"),
                       line_chart_svg("Grade-level coverage: " + s.id, "grade", "coverage", lines, y_max));

            std::vector<std::string> rows;
            std::vector<std::vector<double>> cells;
            for (const auto& [after, store] : s.snapshots) {
                rows.push_back("after grade " + std::to_string(after));
                cells.emplace_back();
                for (const auto& u : all_units) {
                    const double m = store.mastery_of(u.concept_id);
                    cells.back().push_back(m);
                    mastery_csv += csv_row({s.id, std::to_string(after), u.id, u.concept_id, fmt_number(m)});
                }
            }
            write_file(report / ("heatmap_" + s.id + ".svg"),
                       heatmap_svg("Unit mastery: " + s.id, rows, unit_labels, cells));

            if (!s.transcripts.empty()) {
                try {
                    if (s.snapshots.empty()) throw MissingEpisodeError("student '" + s.id + "' has no snapshots");
                    const double a = concept_alignment(s.transcripts, s.snapshots.rbegin()->second);
                    summary["alignment"][s.id] = a;
                    alignment_csv += csv_row({s.id, std::to_string(s.transcripts.size()), fmt_number(a)});
                } catch (const MissingEpisodeError& e) {
                    io.err << s.id << ": " << e.what() << "\n";
                    summary["errors"].push_back(s.id + ": " + e.what());
                    failed = true;
                }
            }

            if (judge) {
                for (const auto& t : s.transcripts) {
                    try {
                        judged.push_back(judge_personality(*judge, *templates, t));
                        truth.push_back(s.personality);
                    } catch (const ExtractionError& e) {
                        io.err << t.session_id << ": " << e.what() << "\n";
                        summary["errors"].push_back(t.session_id + ": " + e.what());
                        failed = true;
                    }
                }
            }
        }

        write_file(report / "coverage.csv", coverage_csv);
        write_file(report / "concept_mastery.csv", mastery_csv);
        write_file(report / "alignment.csv", alignment_csv);
        if (judge && !judged.empty()) {
            const auto prf = personality_prf(judged, truth);
            std::string csv = csv_row({"trait", "precision", "recall", "f1", "tp", "fp", "fn", "tn"});
            auto row = [&](const std::string& name, const PrfScore& p) {
                csv += csv_row({name, fmt_number(p.precision), fmt_number(p.recall), fmt_number(p.f1),
                                std::to_string(p.tp), std::to_string(p.fp), std::to_string(p.fn),
                                std::to_string(p.tn)});
                summary["personality"][name] = {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
            };
            for (auto t : kAllTraits) row(std::string(to_string(t)), prf.per_trait[static_cast<std::size_t>(t)]);
            row("macro", prf.macro);
            write_file(report / "personality.csv", csv);
        } else {
            summary["personality"] = nullptr;
        }
        write_file(report / "summary.json", pretty(summary));
        io.out << report.string() << "\n";
        return failed ? kRunErrors : kOk;
    });
}

int cmd_chat(const GlobalOptions& opts, const std::string& profile_id, const std::optional<std::string>& unit,
             Io io) {
    return guarded(io.err, [&] {
        const auto cfg = effective_config(opts);
        const auto curriculum = curriculum_of(cfg);
        const auto templates = templates_of(cfg);
        const auto& spec = cfg.student(profile_id);
        auto student = make_provider(cfg.provider("simulator"));
        auto consolidator = make_provider(cfg.provider("consolidator"));
        MemoryStore store = initial_store(spec, cfg);

        Transcript tr;
        tr.session_id = profile_id + "-chat";
        tr.student_id = profile_id;
        tr.plan.grade = spec.profile.constraints.grade;
        tr.plan.max_turns = 2;
        std::set<ConceptId> session_concepts;
        if (unit) {
            const auto* u = curriculum.find_unit(*unit);
            if (!u) throw ConfigError("--unit: unknown unit '" + *unit + "'");
            tr.plan.unit = u->id;
            tr.plan.concept_id = u->concept_id;
            session_concepts.insert(u->concept_id);
        }
        for (auto name : {tpl::student_agent, tpl::episodic_consolidation, tpl::metacognition})
            tr.template_checksums[std::string(name)] = templates.get(name).checksum;

        SimClock clock;
        io.out << "chatting with " << profile_id << " (grade " << tr.plan.grade
               << "); type teacher turns, /end to finish\n";
        std::string line;
        while (std::getline(io.in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty()) continue;
            if (line == "/end") {
                if (tr.turns.empty()) {
                    io.out << "nothing to consolidate\n";
                    return kOk;
                }
                tr.plan.max_turns = std::max<int>(2, static_cast<int>(tr.turns.size()));
                try {
                    SessionOptions so;
                    so.assemble.recent_k = cfg.session.recent_k;
                    so.metacog_window = cfg.session.metacog_window;
                    tr.episode_seq = consolidate_session(*consolidator, curriculum, templates, tr, store, so);
                } catch (const Error& e) {
                    io.err << "consolidation failed: " << e.what() << "\n";
                    continue;
                }
                const fs::path dir = cfg.output_dir / "chat" / profile_id;
                write_file(dir / "snapshot.json", snapshot(store));
                write_file(dir / "transcript.jsonl", to_jsonl(tr));
                io.out << "episode " << *tr.episode_seq << " consolidated; snapshot at "
                       << (dir / "snapshot.json").string() << "\n";
                return kOk;
            }
            tr.turns.push_back({Speaker::teacher, line, clock.next()});
            std::vector<ChatMessage> history;
            for (const auto& t : tr.turns)
                history.push_back({t.speaker == Speaker::teacher ? Role::user : Role::assistant, t.text});
            try {
                auto bundle = assemble(spec.profile, store, curriculum, session_concepts, std::move(history),
                                       AssembleOptions{cfg.session.recent_k});
                auto reply = student->generate(render_student_prompt(bundle, templates));
                tr.turns.push_back({Speaker::student, reply, clock.next()});
                io.out << "student> " << reply << "\n";
            } catch (const Error& e) {
                tr.turns.pop_back();
                io.err << "student reply failed: " << e.what() << "\n";
            }
        }
        return kOk;
    });
}

}  // namespace simlearner::cli
