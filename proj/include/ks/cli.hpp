#pragma once
// Command-line front end: argument and config-file parsing, point-set and
// measure specifications, dispatch to the experiment runners, report output.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ks/experiments.hpp"
#include "ks/geometry.hpp"

namespace ks::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    std::string out = ".";
    Precision precision = Precision::DoubleDouble;
    Thresholds thresholds;
    bool dump_eigs = false;
    // Every command-specific option that was set, by long name without
    // dashes ("kernel", "points", "n", ...), after config-file merging.
    std::map<std::string, std::string> options;

    std::string option(const std::string& key, const std::string& fallback) const;
};

// Thrown for invalid arguments; what() is the message for the user.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Returns nullopt after printing help to out (exit 0). Throws UsageError.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out);

// "grid:d=1,m=64", "uniform:d=1,n=200", "mixture:d=1,n=200,centers=0.25/0.75,width=0.08",
// "circle:n=100", "csv:path/to/points.csv". For random kinds the seed is
// used unless the spec carries seed=...
PointSet parse_points(const std::string& spec, std::uint64_t seed);

// A measure without size: "uniform", "grid", "mixture:centers=0.2/0.8,widths=0.1/0.05,weights=0.5/0.5",
// "circle". Mixture center coordinates are separated by ':' in d > 1.
MeasureSpec parse_measure(const std::string& spec, std::size_t d);

// Runs the configured experiment.
Report execute(const RunConfig& cfg);

// Full CLI: parse, execute, write the report, print a summary. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ks::cli
