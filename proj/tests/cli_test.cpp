#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "simlearner/config.hpp"
#include "simlearner/commands.hpp"
#include "simlearner/report.hpp"
#include "simlearner/dialogue.hpp"
#include "support.hpp"

using namespace simlearner;
using namespace simlearner::cli;
using nlohmann::json;
using testing_support::fixture;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

struct Captured {
    int rc = -1;
    std::string out, err;
};

template <class F>
Captured capture(F&& f, const std::string& input = {}) {
    std::istringstream in(input);
    std::ostringstream out, err;
    Captured c;
    c.rc = f(Io{in, out, err});
    c.out = out.str();
    c.err = err.str();
    return c;
}

json fixture_config() { return json::parse(slurp(fixture("config.json"))); }

GlobalOptions options_for(const TempDir& dir, const json& cfg) {
    const auto path = dir.path() / "config.json";
    // Rewrite relative paths against the fixture directory.
    json doc = cfg;
    doc["curriculum"] = fixture(doc["curriculum"]).string();
    for (auto& [role, p] : doc["providers"].items())
        if (p.contains("script") && p["script"].is_string()) p["script"] = fixture(p["script"]).string();
    std::ofstream(path) << doc.dump(2);
    GlobalOptions o;
    o.config = path;
    o.out = dir.path() / "run";
    return o;
}

}  // namespace

TEST(Config, FixtureParses) {
    auto cfg = load_config(fixture("config.json"));
    EXPECT_EQ(cfg.students.size(), 1u);
    EXPECT_EQ(cfg.students[0].profile.id, "P1");
    EXPECT_EQ(cfg.last_grade, 1);
    EXPECT_EQ(cfg.session.max_turns, 6);
    EXPECT_EQ(cfg.provider("consolidator").max_retries, 1);
    EXPECT_EQ(cfg.provider("teacher").seed, 7u);
    EXPECT_EQ(*cfg.curriculum, fixture("mini_curriculum.json"));
    EXPECT_EQ(config_hash(cfg), config_hash(load_config(fixture("config.json"))));
}

TEST(Config, ConsolidatorFallsBackToSimulator) {
    auto doc = fixture_config();
    doc["providers"].erase("consolidator");
    auto cfg = parse_config(doc, fixture(""));
    EXPECT_EQ(cfg.provider("consolidator").backend, Backend::scripted);
    doc["providers"].erase("judge");
    EXPECT_THROW(parse_config(doc, fixture("")).provider("judge"), ConfigError);
}

TEST(Config, RejectsBadDocuments) {
    auto bad = [](auto edit) {
        auto doc = fixture_config();
        edit(doc);
        return parse_config(doc, fixture(""));
    };
    EXPECT_THROW(bad([](json& d) { d["colour"] = "blue"; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["grades"]["last"] = 6; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["grades"] = {{"first", 3}, {"last", 2}}; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["providers"]["teacher"]["backend"] = "grpc"; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["providers"]["teacher"].erase("script"); }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["students"] = {{{"preset", "P9"}}}; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["students"] = {{{"preset", "P1"}}, {{"preset", "P1"}}}; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["dynamics"] = {{"alpha", 2.0}}; }), ConfigError);
    EXPECT_THROW(bad([](json& d) { d["coverage_threshold"] = -0.1; }), ConfigError);
}

TEST(Config, HttpBackendNeedsKey) {
    auto doc = fixture_config();
    doc["providers"]["teacher"] = {{"backend", "http"}, {"endpoint", "http://127.0.0.1:9/v1/chat/completions"},
                                   {"model", "m"}};
    const char* saved = std::getenv("SIMLEARNER_API_KEY");
    std::string keep = saved ? saved : "";
    unsetenv("SIMLEARNER_API_KEY");
    EXPECT_THROW(parse_config(doc, fixture("")), ConfigError);
    setenv("SIMLEARNER_API_KEY", "k", 1);
    EXPECT_NO_THROW(parse_config(doc, fixture("")));
    if (saved) setenv("SIMLEARNER_API_KEY", keep.c_str(), 1);
    else unsetenv("SIMLEARNER_API_KEY");
}

TEST(Cli, ValidateExitCodes) {
    GlobalOptions none;
    auto ok = capture([&](Io io) { return cmd_validate(none, std::nullopt, io); });
    EXPECT_EQ(ok.rc, 0);
    EXPECT_NE(ok.out.find("ok (4 subjects"), std::string::npos);

    TempDir dir("validate");
    auto doc = json::parse(slurp(fixture("mini_curriculum.json")));
    doc["units"][0]["concept"] = "XX9";
    std::ofstream(dir.path() / "dangling.json") << doc.dump();
    auto broken = capture([&](Io io) { return cmd_validate(none, dir.path() / "dangling.json", io); });
    EXPECT_EQ(broken.rc, 1);
    EXPECT_NE((broken.out + broken.err).find("XX9"), std::string::npos);

    std::ofstream(dir.path() / "garbage.json") << "{";
    EXPECT_EQ(capture([&](Io io) { return cmd_validate(none, dir.path() / "garbage.json", io); }).rc, 2);
    EXPECT_EQ(capture([&](Io io) { return cmd_validate(none, dir.path() / "missing.json", io); }).rc, 2);
}

TEST(Cli, MissingConfigIsExitTwo) {
    GlobalOptions o;
    o.config = "/nonexistent/config.json";
    EXPECT_EQ(capture([&](Io io) { return cmd_simulate(o, io); }).rc, 2);
}

TEST(Cli, SimulateWritesRunDirectoryDeterministically) {
    TempDir dir("simulate");
    auto opts = options_for(dir, fixture_config());
    auto first = capture([&](Io io) { return cmd_simulate(opts, io); });
    ASSERT_EQ(first.rc, 0) << first.err;
    const auto root = *opts.out;
    auto manifest = json::parse(slurp(root / "manifest.json"));
    EXPECT_EQ(manifest["seed"], 7);
    ASSERT_EQ(manifest["students"].size(), 1u);
    const auto& st = manifest["students"][0];
    EXPECT_EQ(st["transcripts"].size(), 2u);
    EXPECT_EQ(st["snapshots"]["1"], "students/P1/snapshots/grade-1.json");
    EXPECT_TRUE(st["errors"].empty());

    auto store = restore(slurp(root / st["snapshots"]["1"].get<std::string>()));
    // LS1: 0.25 * 0.6, then decayed once. PS4: 0.25 * 0.8.
    EXPECT_NEAR(store.mastery_of("LS1"), 0.15 * 0.95, 1e-12);
    EXPECT_NEAR(store.mastery_of("PS4"), 0.2, 1e-12);

    auto transcript = parse_transcript(slurp(root / st["transcripts"][0].get<std::string>()));
    EXPECT_EQ(transcript.outcome, Outcome::understood);
    EXPECT_EQ(transcript.turns.size(), 3u);

    std::map<std::string, std::string> before;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) before[fs::relative(e.path(), root).string()] = slurp(e.path());
    auto second = capture([&](Io io) { return cmd_simulate(opts, io); });
    ASSERT_EQ(second.rc, 0);
    std::map<std::string, std::string> after;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) after[fs::relative(e.path(), root).string()] = slurp(e.path());
    EXPECT_EQ(before, after);
}

TEST(Cli, SimulateRecordsSessionErrors) {
    TempDir dir("simulate-errors");
    auto cfg = fixture_config();
    cfg["providers"]["consolidator"] = {{"backend", "scripted"},
                                       {"script", json::array({{{"response", "nope"}, {"repeat", true}}})},
                                       {"max_retries", 0}};
    auto opts = options_for(dir, cfg);
    auto r = capture([&](Io io) { return cmd_simulate(opts, io); });
    EXPECT_EQ(r.rc, 1);
    auto manifest = json::parse(slurp(*opts.out / "manifest.json"));
    EXPECT_EQ(manifest["students"][0]["errors"].size(), 2u);
    EXPECT_FALSE(manifest["aborted"].get<bool>());

    opts.fail_fast = true;
    r = capture([&](Io io) { return cmd_simulate(opts, io); });
    EXPECT_EQ(r.rc, 1);
    manifest = json::parse(slurp(*opts.out / "manifest.json"));
    EXPECT_TRUE(manifest["aborted"].get<bool>());
    EXPECT_EQ(manifest["students"][0]["errors"].size(), 1u);
}

TEST(Cli, ProbeWritesAnswersPerStudent) {
    TempDir dir("probe");
    auto opts = options_for(dir, fixture_config());
    auto r = capture([&](Io io) { return cmd_probe(opts, {1, 2}, io); });
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto csv = slurp(*opts.out / "probe" / "P1" / "answers.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(csv.rfind("unit_id,grade,score,rationale,question,answer\n", 0), 0u);
    auto summary = json::parse(slurp(*opts.out / "probe" / "P1" / "summary.json"));
    EXPECT_DOUBLE_EQ(summary["mastery_by_grade"]["1"].get<double>(), 7.0);
    EXPECT_EQ(capture([&](Io io) { return cmd_probe(opts, {6}, io); }).rc, 2);
}

TEST(Cli, EvalReadsManifest) {
    TempDir dir("eval");
    auto opts = options_for(dir, fixture_config());
    ASSERT_EQ(capture([&](Io io) { return cmd_simulate(opts, io); }).rc, 0);
    // Without --out the report lands next to the manifest.
    auto eval_opts = opts;
    eval_opts.out.reset();
    auto r = capture([&](Io io) { return cmd_eval(eval_opts, *opts.out / "manifest.json", {0.1, 0.5}, io); });
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto report = *opts.out / "report";
    const auto coverage = slurp(report / "coverage.csv");
    // P1 after grade 1 at tau 0.1 covers both grade-1 units.
    EXPECT_NE(coverage.find("P1,0.1,1,1,1\n"), std::string::npos) << coverage;
    EXPECT_NE(coverage.find("P1,0.5,1,1,0\n"), std::string::npos) << coverage;
    auto summary = json::parse(slurp(report / "summary.json"));
    EXPECT_DOUBLE_EQ(summary["alignment"]["P1"].get<double>(), 1.0);
    EXPECT_TRUE(fs::exists(report / "personality.csv"));
    EXPECT_NE(slurp(report / "heatmap_P1.svg").find("class=\"cell\""), std::string::npos);

    EXPECT_EQ(capture([&](Io io) { return cmd_eval(opts, dir.path() / "missing.json", {}, io); }).rc, 2);
}

TEST(Cli, ChatConsolidatesOnlyOnEnd) {
    TempDir dir("chat");
    auto opts = options_for(dir, fixture_config());
    const auto snap = *opts.out / "chat" / "P1" / "snapshot.json";

    auto eof = capture([&](Io io) { return cmd_chat(opts, "P1", std::string("1-LS1-1"), io); },
                       "What helps a cactus survive?\n");
    EXPECT_EQ(eof.rc, 0);
    EXPECT_NE(eof.out.find("student> Um, I think"), std::string::npos);
    EXPECT_FALSE(fs::exists(snap));

    auto done = capture([&](Io io) { return cmd_chat(opts, "P1", std::string("1-LS1-1"), io); },
                        "What helps a cactus survive?\n/end\n");
    ASSERT_EQ(done.rc, 0) << done.err;
    ASSERT_TRUE(fs::exists(snap));
    EXPECT_NEAR(restore(slurp(snap)).mastery_of("LS1"), 0.15, 1e-12);
    auto tr = parse_transcript(slurp(snap.parent_path() / "transcript.jsonl"));
    EXPECT_EQ(tr.turns.size(), 2u);

    EXPECT_EQ(capture([&](Io io) { return cmd_chat(opts, "P7", std::nullopt, io); }).rc, 2);
    EXPECT_EQ(capture([&](Io io) { return cmd_chat(opts, "P1", std::string("9-XX-9"), io); }).rc, 2);
}

TEST(Report, CsvQuotingAndNumbers) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_row({"a", "b\nc"}), "a,\"b\nc\"\n");
    EXPECT_EQ(fmt_number(0.5), "0.5");
    EXPECT_EQ(fmt_number(1.0), "1");
    EXPECT_EQ(fmt_number(0.1), "0.1");
}

TEST(Report, SvgChartsAreWellFormed) {
    auto svg = line_chart_svg("t", "x", "y", {{"P1", {{1, 0.5}, {2, 0.75}}, false}}, 1.0);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    auto heat = heatmap_svg("h", {"g1", "g2"}, {"u1", "u2", "u3"}, {{0, 0.5, 1}, {1, 1, 1}});
    std::size_t cells = 0;
    for (auto p = heat.find("class=\"cell\""); p != std::string::npos; p = heat.find("class=\"cell\"", p + 1)) ++cells;
    EXPECT_EQ(cells, 6u);
}
