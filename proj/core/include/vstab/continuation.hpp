#pragma once

// Load-scaling continuation: a uniform lambda grid solved with warm starts,
// nose location by bisection on power-flow convergence, and detection of the
// first sign change of the ENA discriminant at a monitored bus.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstab/indices.hpp"
#include "vstab/netmodel.hpp"
#include "vstab/powerflow.hpp"

namespace vstab {

namespace tol {
/// Terminal bracket width of the nose bisection, relative to lambda.
inline constexpr double kNoseRelative = 1e-4;
/// Terminal bracket width (absolute, in lambda) of the Delta zero refinement.
inline constexpr double kDeltaLambda = 1e-6;
}  // namespace tol

inline constexpr int kDefaultSweepSteps = 200;

class ContinuationError : public std::runtime_error {
  public:
    enum class Kind { InvalidInput, Numerical };

    ContinuationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

struct TraceRecord {
    double lambda = 0.0;
    PowerFlowSolution solution;
    StabilityReport report;
};

struct ContinuationTrace {
    /// Converged points, strictly increasing in lambda. The last record is the
    /// converged end of the nose bracket.
    std::vector<TraceRecord> records;
    /// Largest lambda known to converge (lower end of the final bracket).
    double lambda_nose = 0.0;
    /// Smallest lambda known to fail (upper end of the final bracket).
    double lambda_fail = 0.0;
    /// First sign change of Delta at the monitored bus, if any.
    std::optional<double> lambda_delta_zero;
    BusId monitored_bus = 0;

    [[nodiscard]] const TraceRecord& nose() const { return records.back(); }
};

/// Sweeps lambda over k * lambda_max_guess / steps, k = 0, 1, ... until the
/// first failed solve (continuing past lambda_max_guess with the same step if
/// needed, up to ten times the guess), then bisects the nose bracket.
///
/// Throws std::invalid_argument for steps < 2 or a non-positive guess, and
/// ContinuationError when the base case fails, the monitored bus is not a
/// load, every base load is zero, or no collapse is found.
ContinuationTrace sweep(const Network& net, double lambda_max_guess, int steps, BusId monitored_bus);

struct NoseOracle {
    double lambda_star = 0.0;
    double v_nose_mag = 0.0;
};

/// Closed-form maximum loading of a constant source E behind z_line feeding a
/// load sigma * s_dir. Throws ContinuationError when no positive scale exists.
NoseOracle two_bus_nose_oracle(double e_mag, Complex z_line, Complex s_dir);

inline constexpr const char* kTraceCsvHeader =
    "lambda,bus,v_mag,v_angle_rad,margin,L_term,L_max,delta,alpha1,alpha2,vs_mag,zeq_mag,seq_mag,phi,zl_mag";

/// CSV with kTraceCsvHeader and one row per (record, load bus); undefined
/// quantities are left empty.
std::string export_trace(const ContinuationTrace& trace);

/// Rows for a single report, without the header.
std::string export_report_rows(const StabilityReport& report);

}  // namespace vstab
