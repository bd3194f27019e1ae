#pragma once
// Subcommand implementations. Each returns the process exit code:
//   0  success
//   1  run finished with recorded errors (violations, failed sessions, ...)
//   2  configuration, schema or missing-artifact error

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace simlearner::cli {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::optional<fs::path> config;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    bool fail_fast = false;
};

struct Io {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

// Validates `curriculum`, or the config's curriculum, or the bundled one.
int cmd_validate(const GlobalOptions& opts, const std::optional<fs::path>& curriculum, Io io);
int cmd_simulate(const GlobalOptions& opts, Io io);
int cmd_probe(const GlobalOptions& opts, const std::vector<int>& grades, Io io);
// `taus` empty means the manifest's coverage threshold.
int cmd_eval(const GlobalOptions& opts, const fs::path& manifest, const std::vector<double>& taus, Io io);
int cmd_chat(const GlobalOptions& opts, const std::string& profile_id, const std::optional<std::string>& unit,
             Io io);

}  // namespace simlearner::cli
