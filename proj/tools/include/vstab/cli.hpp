#pragma once

// Command dispatch for the `vstab` tool. Kept in a library so tests can drive
// commands without spawning processes.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstab/continuation.hpp"
#include "vstab/netmodel.hpp"

namespace vstab::cli {

enum class Command { Solve, Indices, Sweep, Nose, Counterexample };
enum class OutputFormat { Csv, Json };

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitAssertion = 3;

struct RunConfig {
    Command command = Command::Solve;
    std::string network_path;
    double lambda = 0.0;
    double lambda_max = 0.0;
    int steps = kDefaultSweepSteps;
    /// Monitored bus; defaults to the first load bus in file order.
    std::optional<BusId> bus;
    /// Defaults: csv for sweep, json for solve/indices/nose, text verdict for
    /// counterexample.
    std::optional<OutputFormat> output;
    std::optional<std::string> out_path;
};

class UsageError : public std::invalid_argument {
  public:
    explicit UsageError(const std::string& what, bool help = false) : std::invalid_argument(what), help_(help) {}
    /// True when the "error" is a --help request; what() holds the help text.
    [[nodiscard]] bool help() const noexcept { return help_; }

  private:
    bool help_;
};

/// Parses `vstab <command> [flags]`; args excludes the program name.
/// Throws UsageError.
RunConfig parse_args(const std::vector<std::string>& args);

/// Runs one command, writing the document to `out` and one-line diagnostics
/// to `err`. Returns an exit code. Honors config.out_path.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run; what main() calls.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Rendering, exposed for tests.
std::string render_solution_json(const PowerFlowSolution& sol);
std::string render_solution_csv(const PowerFlowSolution& sol);
std::string render_report_json(const StabilityReport& report);
std::string render_trace_json(const ContinuationTrace& trace);

struct NoseSummary {
    double lambda_nose = 0.0;
    double lambda_fail = 0.0;
    std::optional<double> lambda_delta_zero;
    BusId bus = 0;
    double v_mag_at_nose = 0.0;
    double l_at_nose = 0.0;
    std::optional<double> zl_at_nose;
    std::optional<double> zeq_mag;
    std::optional<double> delta_at_nose;
    std::optional<double> match_reference;
};

NoseSummary summarize_nose(const Network& net, const ContinuationTrace& trace);
std::string render_nose_json(const NoseSummary& s);

struct Finding {
    std::string claim;
    bool pass = false;
};

/// Full two-bus pipeline: sweep, nose, ENA and impedance-matching checks.
struct CounterexampleVerdict {
    NoseSummary nose;
    double lambda_star = 0.0;
    std::vector<Finding> findings;

    [[nodiscard]] bool all_pass() const;
};

CounterexampleVerdict evaluate_counterexample();
std::string render_verdict_text(const CounterexampleVerdict& v);
std::string render_verdict_json(const CounterexampleVerdict& v);

}  // namespace vstab::cli
