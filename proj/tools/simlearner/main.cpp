#include <iostream>

#include <CLI11.hpp>

#include "simlearner/commands.hpp"
#include "simlearner/version.hpp"

int main(int argc, char** argv) {
    using namespace simlearner::cli;

    CLI::App app{"Curriculum-aligned student simulation"};
    app.set_version_flag("--version", simlearner::kVersion);
    app.require_subcommand(1);

    GlobalOptions opts;
    std::string config, out;
    std::uint64_t seed = 0;
    app.add_option("--config", config, "Experiment config (JSON)");
    app.add_option("--out", out, "Output directory (overrides output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "Run seed (overrides the config)");
    app.add_flag("--fail-fast", opts.fail_fast, "Stop at the first failed session");

    std::string curriculum;
    auto* validate = app.add_subcommand("validate", "Check a curriculum file");
    validate->add_option("curriculum", curriculum, "Curriculum JSON; bundled one when omitted");

    auto* simulate = app.add_subcommand("simulate", "Run the tutoring curriculum for every student");

    std::vector<int> grades;
    auto* probe = app.add_subcommand("probe", "Question/answer mastery probe");
    probe->add_option("--grades", grades, "Question grades")->delimiter(',')->check(CLI::Range(1, 5));

    std::string manifest;
    std::vector<double> taus;
    auto* eval = app.add_subcommand("eval", "Reports from a simulate run");
    eval->add_option("manifest", manifest, "Run manifest")->required();
    eval->add_option("--tau", taus, "Coverage thresholds to sweep")->delimiter(',')->check(CLI::Range(0.0, 1.0));

    std::string profile;
    std::string unit;
    auto* chat = app.add_subcommand("chat", "Play the teacher against one simulated student");
    chat->add_option("--profile", profile, "Student id")->required();
    chat->add_option("--unit", unit, "Learning unit in focus");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (!config.empty()) opts.config = config;
    if (!out.empty()) opts.out = out;
    if (*seed_opt) opts.seed = seed;
    Io io{std::cin, std::cout, std::cerr};

    if (*validate)
        return cmd_validate(opts, curriculum.empty() ? std::nullopt : std::optional<fs::path>(curriculum), io);
    if (*simulate) return cmd_simulate(opts, io);
    if (*probe) return cmd_probe(opts, grades, io);
    if (*eval) return cmd_eval(opts, manifest, taus, io);
    return cmd_chat(opts, profile, unit.empty() ? std::nullopt : std::optional<std::string>(unit), io);
}
