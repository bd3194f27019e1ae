// Acceptance checks. One PASS/FAIL/SKIP line per criterion; exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "simlearner/commands.hpp"
#include "simlearner/consolidation.hpp"
#include "simlearner/dialogue.hpp"
#include "simlearner/errors.hpp"
#include "simlearner/eval.hpp"

using namespace simlearner;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << id << ": " << detail << "\n";
    if (!pass) ++failures;
}

void skip(const std::string& id, const std::string& detail) { std::cout << "SKIP " << id << ": " << detail << "\n"; }

// Runs a check; an escaping exception counts as a failure.
void check(const std::string& id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class FnProvider final : public Provider {
public:
    using Fn = std::function<std::string(const std::vector<ChatMessage>&)>;
    explicit FnProvider(Fn fn, int max_retries = 2) : Provider(max_retries), fn_(std::move(fn)) {}
    std::vector<std::vector<ChatMessage>> prompts;

protected:
    std::string complete(const std::vector<ChatMessage>& m) override {
        prompts.push_back(m);
        return fn_(m);
    }

private:
    Fn fn_;
};

std::string episode(const ConceptId& id, int score) {
    json j = {{"summary", "worked on " + id},
              {"insights", {"kept going"}},
              {"emotion", 0.7},
              {"concepts", {"Type " + id}},
              {"mastery_of_concepts", {{"Type " + id, score}}}};
    return j.dump();
}

const std::string kOpener = "Hello! Let's explore something new today.";
const std::string kClosing = "Well done. [SUMMARY]You explained the idea.[/SUMMARY]";

FnProvider scripted_teacher() {
    return FnProvider([](const std::vector<ChatMessage>& m) { return m.size() == 2 ? kOpener : kClosing; });
}

// ---------------------------------------------------------------------------

void criterion_1() {
    const DynamicsParams params;
    std::mt19937_64 rng(20250901);
    const std::vector<ConceptId> ids = {"A", "B", "C"};
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        MemoryStore store(params);
        std::map<ConceptId, double> mu;  // reference
        std::vector<double> sigma;
        const int len = 1 + static_cast<int>(rng() % 50);
        for (int step = 0; step < len; ++step) {
            switch (rng() % 3) {
                case 0: {
                    const auto& id = ids[rng() % 3];
                    const double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                    store.update_mastery(id, w);
                    mu[id] = std::clamp(0.95 * mu[id] + 0.25 * w, 0.0, 1.0);
                    break;
                }
                case 1: {
                    std::set<ConceptId> touched;
                    for (const auto& id : ids)
                        if (rng() % 2) touched.insert(id);
                    store.consolidation_tick(touched);
                    for (auto& [id, m] : mu)
                        if (!touched.count(id)) m *= 0.95;
                    for (auto& s : sigma) s *= 0.9;
                    break;
                }
                default: {
                    EpisodeDraft d;
                    d.t = "t";
                    d.content = "c";
                    store.record_episode(d);
                    sigma.push_back(1.0);
                    break;
                }
            }
        }
        for (const auto& [id, m] : mu) worst = std::max(worst, std::abs(store.mastery_of(id) - m));
        for (std::size_t i = 0; i < sigma.size(); ++i)
            worst = std::max(worst, std::abs(store.episodes()[i].strength - sigma[i]));
        if (store.concepts().size() != mu.size()) worst = 1.0;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream d;
    d << "1000 sequences, max |diff| = " << worst << ", " << secs << " s";
    report("1 mastery-dynamics oracle", worst <= 1e-9 && secs < 5.0, d.str());
}

void criterion_2() {
    MemoryStore store;
    store.update_mastery("A", 1.0);
    const double mu0 = store.mastery_of("A");
    EpisodeDraft d;
    d.t = "t";
    d.content = "c";
    store.record_episode(d);
    for (int i = 0; i < 10; ++i) {
        store.consolidation_tick({});
        if (i == 2) {
            const double sigma = store.episodes()[0].strength;
            report("2b episode strength after 3 ticks", std::abs(sigma - 0.729) <= 1e-9,
                   "sigma = " + std::to_string(sigma));
        }
    }
    const double expect = std::pow(0.95, 10) * mu0;
    report("2a closed-form decay over 10 ticks", std::abs(store.mastery_of("A") - expect) <= 1e-9,
           "mu = " + std::to_string(store.mastery_of("A")) + ", expected " + std::to_string(expect));
}

void criterion_3() {
    MemoryStore store;
    store.update_mastery("A", 1.0);  // 0.25
    store.update_mastery("A", 1.0);  // 0.4875
    // Bring mu to exactly 0.5 through a snapshot edit, then apply w = 0.8.
    auto doc = json::parse(snapshot(store));
    doc["concepts"]["A"]["mastery"] = 0.5;
    auto s = restore(doc.dump());
    const double got = s.update_mastery("A", 0.8);
    report("3 single-step update", got == 0.675, "0.95*0.5 + 0.25*0.8 = " + std::to_string(got));
}

void criterion_4() {
    const auto curriculum = bundled_curriculum();
    const auto templates = TemplateSet::builtin();
    const auto units = units_for_grade(curriculum, 1);

    // Extractor script in unit order: mastery 10 for the taught concept.
    std::vector<ScriptEntry> script;
    for (const auto& u : units) script.push_back({"Analyze this learning dialogue", episode(u.concept_id, 10), false});
    script.push_back({"meta-cognitive skills", R"({"level": "developing", "pattern": "Asks for examples."})", true});
    ScriptedProvider consolidator(script, 0);
    auto teacher = scripted_teacher();
    FnProvider student([](const std::vector<ChatMessage>&) { return std::string("I think it helps them live!"); });

    MemoryStore store;
    SimClock clock;
    CurriculumRunOptions opts;
    opts.first_grade = opts.last_grade = 1;
    opts.max_turns = 6;
    auto run = run_curriculum({teacher, student, consolidator}, curriculum, preset_profiles().front(), store,
                              templates, clock, opts);

    std::size_t prompts = 0, leaks = 0;
    for (const auto& p : student.prompts) {
        ++prompts;
        const auto& sys = p.at(0).text;
        const std::string open = "Concepts you have learned:\n";
        const auto b = sys.find(open);
        const auto e = sys.find("Concepts you have NOT learned yet");
        if (b == std::string::npos || e == std::string::npos) {
            ++leaks;
            continue;
        }
        const auto block = sys.substr(b + open.size(), e - b - open.size());
        for (const auto& c : curriculum.concepts())
            if (curriculum.concept_grade(c.id) > 1 && block.find("- " + c.id + " ") != std::string::npos) ++leaks;
    }
    report("4a gating soundness", run.errors.empty() && prompts > 0 && leaks == 0,
           std::to_string(run.transcripts.size()) + " sessions, " + std::to_string(prompts) +
               " student prompts, " + std::to_string(leaks) + " above-grade concepts in learned blocks");

    const auto cov = grade_coverage(store, curriculum, 1, 0.5);
    bool leak_zero = true;
    std::ostringstream d;
    d << "coverage(1) = " << cov.coverage << ", leakage";
    for (const auto& [g, l] : cov.leakage) {
        d << " g" << g << "=" << l;
        leak_zero = leak_zero && l == 0.0;
    }
    d << " (grade-1 mastery:";
    for (const auto& id : concepts_at_or_below(curriculum, 1)) d << " " << id << "=" << store.mastery_of(id);
    d << ")";
    report("4b coverage and leakage after the scripted grade-1 run", cov.coverage == 1.0 && leak_zero, d.str());
}

void criterion_5() {
    const fs::path base = fs::temp_directory_path() / ("simlearner-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(base);
    // Fixture config with absolute paths.
    const fs::path fixtures = SIMLEARNER_FIXTURES;
    auto doc = json::parse(slurp(fixtures / "config.json"));
    doc["curriculum"] = (fixtures / doc["curriculum"].get<std::string>()).string();
    for (auto& [role, p] : doc["providers"].items())
        p["script"] = (fixtures / p["script"].get<std::string>()).string();
    std::ofstream(base / "config.json") << doc.dump(2);

    auto simulate = [&](const std::string& name) {
        cli::GlobalOptions o;
        o.config = base / "config.json";
        o.out = base / name;
        std::istringstream in;
        std::ostringstream out, err;
        return cli::cmd_simulate(o, cli::Io{in, out, err});
    };
    auto tree = [](const fs::path& root) {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
        return files;
    };
    const int rc1 = simulate("a"), rc2 = simulate("b");
    const auto a = tree(base / "a"), b = tree(base / "b");
    std::size_t transcripts = 0, snapshots = 0;
    for (const auto& [name, _] : a) {
        transcripts += name.find("transcripts/") != std::string::npos;
        snapshots += name.find("snapshots/") != std::string::npos;
    }
    fs::remove_all(base);
    report("5 replay determinism", rc1 == 0 && rc2 == 0 && a == b && a.count("manifest.json") && transcripts > 0 &&
                                       snapshots > 0,
           std::to_string(a.size()) + " files (" + std::to_string(transcripts) + " transcripts, " +
               std::to_string(snapshots) + " snapshots) byte-identical across two runs");
}

void criterion_6() {
    const auto c = bundled_curriculum();
    const auto violations = validate(c);
    const auto text = serialize(c);
    const bool stable = serialize(load_curriculum(text)) == text && text == bundled_curriculum_text();
    report("6 curriculum integrity", c.subjects().size() == 4 && c.concepts().size() == 29 && violations.empty() &&
                                         stable,
           std::to_string(c.subjects().size()) + " subjects, " + std::to_string(c.concepts().size()) +
               " concepts, " + std::to_string(violations.size()) + " violations, round trip " +
               (stable ? "stable" : "unstable"));
}

void criterion_7() {
    using L = TraitLevel;
    // Openness only: truth [h,h,l,l], judged [h,l,l,h] -> TP 1, FP 1, FN 1.
    std::vector<PersonalityProfile> truth(4);
    std::vector<TraitLabels> judged(4);
    const L t[] = {L::high, L::high, L::low, L::low};
    const L j[] = {L::high, L::low, L::low, L::high};
    for (int i = 0; i < 4; ++i) {
        truth[i][Trait::openness] = t[i];
        judged[i].levels[0] = j[i];
    }
    const auto o = personality_prf(judged, truth).per_trait[0];
    report("7a confusion-matrix example", o.precision == 0.5 && o.recall == 0.5 && o.f1 == 0.5,
           "P=" + std::to_string(o.precision) + " R=" + std::to_string(o.recall) + " F1=" + std::to_string(o.f1));

    // Echo judge: each student's sessions are judged by a script returning its true labels.
    const auto curriculum = bundled_curriculum();
    const auto templates = TemplateSet::builtin();
    std::vector<TraitLabels> labels;
    std::vector<PersonalityProfile> gold;
    for (const auto& p : preset_profiles()) {
        auto teacher = scripted_teacher();
        FnProvider student([](const std::vector<ChatMessage>&) { return std::string("Is it because of the sun?"); });
        FnProvider consolidator([](const std::vector<ChatMessage>&) { return episode("PS4", 7); });
        MemoryStore store;
        SimClock clock;
        auto tr = run_session({teacher, student, consolidator}, curriculum, p, store,
                              {"1-PS4-1", "PS4", 1, 6, Termination::teacher_summary}, templates, clock, p.id);
        json echo;
        for (auto trait : kAllTraits) echo[std::string(to_string(trait))] = std::string(to_string(p.personality[trait]));
        ScriptedProvider judge({{"Analyze the student's personality", echo.dump(), true}});
        labels.push_back(judge_personality(judge, templates, tr));
        gold.push_back(p.personality);
    }
    const auto macro = personality_prf(labels, gold).macro;
    report("7b echo-judge macro F1", macro.f1 == 1.0, "macro F1 = " + std::to_string(macro.f1) + " over P1..P3");

    std::vector<JudgedAnswer> answers = {{"1-PS4-1", 1, 7, ""}, {"1-PS4-1", 1, 8, ""}, {"1-PS4-1", 1, 6, ""}};
    const double m = mastery_consistency(answers).at(1);
    report("7c mastery consistency mean", m == 7.0, "mean([7, 8, 6]) = " + std::to_string(m));
}

void criterion_8() {
    const auto curriculum = bundled_curriculum();
    const auto templates = TemplateSet::builtin();
    MemoryStore store;
    // Prior state so the comparison is not against an empty store.
    apply_consolidation({"s", {}, 0.5, {"LS1"}, {{"LS1", 6}}}, curriculum, "Teacher: hi\n", {"t", 1}, store);
    const auto before = snapshot(store);

    auto teacher = scripted_teacher();
    FnProvider student([](const std::vector<ChatMessage>&) { return std::string("Plants need water."); });
    ScriptedProvider consolidator({{"", "Sorry, I cannot produce JSON.", true}}, 2);
    SimClock clock;
    std::string error;
    try {
        run_session({teacher, student, consolidator}, curriculum, preset_profiles().front(), store,
                    {"1-LS1-1", "LS1", 1, 6, Termination::teacher_summary}, templates, clock, "atomic");
    } catch (const ExtractionError& e) {
        error = e.what();
    }
    report("8 consolidation atomicity", !error.empty() && consolidator.calls() == 3 && snapshot(store) == before,
           error.empty() ? "no extraction failure raised"
                         : std::to_string(consolidator.calls()) + " extraction attempts, snapshot unchanged: " +
                               (snapshot(store) == before ? "yes" : "no"));
}

void criterion_9() {
    const char* key = std::getenv("SIMLEARNER_API_KEY");
    const char* endpoint = std::getenv("SIMLEARNER_ENDPOINT");
    const char* model = std::getenv("SIMLEARNER_MODEL");
    if (!key || !endpoint || !model) {
        skip("9 live probe shape", "set SIMLEARNER_API_KEY, SIMLEARNER_ENDPOINT and SIMLEARNER_MODEL to run");
        return;
    }
    const auto curriculum = bundled_curriculum();
    const auto templates = TemplateSet::builtin();
    int monotone = 0;
    std::ostringstream d;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ProviderConfig cfg;
        cfg.backend = Backend::http;
        cfg.endpoint = endpoint;
        cfg.api_key = key;
        cfg.model_name = model;
        cfg.temperature = 0.7;
        cfg.seed = seed;
        auto student = make_provider(cfg);
        cfg.temperature = 0.0;
        auto judge = make_provider(cfg);
        const MemoryStore fresh;
        auto answers = run_qa_probe(*student, curriculum, preset_profiles().front(), fresh, {1, 2, 3, 4, 5}, templates);
        auto means = mastery_consistency(judge_mastery(*judge, curriculum, templates, answers).judged);
        bool ok = means.size() == 5;
        for (int g = 2; g <= 5 && ok; ++g) ok = means[g] <= means[g - 1];
        monotone += ok;
        d << " seed " << seed << ":";
        for (const auto& [g, m] : means) d << " " << m;
    }
    report("9 live probe shape", monotone >= 2, std::to_string(monotone) + "/3 runs non-increasing;" + d.str());
}

}  // namespace

int main() {
    check("1 mastery-dynamics oracle", criterion_1);
    check("2 closed-form decay", criterion_2);
    check("3 single-step update", criterion_3);
    check("4 gating soundness", criterion_4);
    check("5 replay determinism", criterion_5);
    check("6 curriculum integrity", criterion_6);
    check("7 metric arithmetic", criterion_7);
    check("8 consolidation atomicity", criterion_8);
    check("9 live probe shape", criterion_9);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion check(s) failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
