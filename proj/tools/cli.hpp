#pragma once

// Command-line front end. Subcommands: simulate, pmf, table, copula, verify.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 a check was
// inconclusive, 64 usage error, 70 numerical inconsistency, 74 I/O error.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdpoisson/joint_pmf.hpp"

namespace sdpoisson::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNumerical = 70;
inline constexpr int kExitIo = 74;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { Simulate, Pmf, Table, Copula, Verify };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Command c);
std::string_view to_string(OutputFormat f);

struct RunConfig {
    Command command = Command::Pmf;
    double lambda = 1.0;
    double mu = 1.0;
    double a = 0.5;
    std::uint64_t seed = 1;
    /// Empty or "-" writes to standard output.
    std::string output;
    OutputFormat format = OutputFormat::Csv;
    Method method = Method::Auto;
    std::uint64_t renewals = 1000;
    double s = 1.0;
    double t = 0.4;
    unsigned m = 0;
    unsigned n = 0;
    unsigned m_max = 10;
    unsigned n_max = 10;
    /// Monte Carlo paths; 0 disables the estimate in `pmf`.
    std::uint64_t samples = 0;
    unsigned grid = 50;
    std::string copula = "self-decomposable";
    double b = 0.5;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Keys accepted in a config file and, with a leading "--", on the command
/// line. Every key of serialize_config is in this list.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value; throws UsageError on an unknown key
/// or a malformed value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// One "key=value" line per key, in config_keys() order, LF-terminated.
std::string serialize_config(const RunConfig& cfg);

/// Applies a flat key=value text on top of `base`. Blank lines and lines
/// starting with '#' are skipped.
RunConfig parse_config_text(std::string_view text, RunConfig base = {});

/// Throws UsageError when a value is outside its domain.
void validate(const RunConfig& cfg);

/// A produced file: `suffix` is appended to the output stem ("" for the
/// main file).
struct Artifact {
    std::string suffix;
    std::string content;
};

struct Outcome {
    std::vector<Artifact> artifacts;
    int exit_code = kExitOk;
};

/// Runs a validated config without touching the filesystem.
Outcome execute(const RunConfig& cfg);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest round-trip text for v, '.' decimal regardless of locale.
std::string format_double(double v);
/// 17 significant digits, for probabilities in CSV output.
std::string format_prob(double v);

}  // namespace sdpoisson::cli
