#pragma once

// Newton power flow for fixed-voltage generators and constant-power loads,
// plus the similarity-transformed complex Jacobian and its row dominance
// margins.

#include <optional>
#include <vector>

#include "vstab/cnum.hpp"
#include "vstab/netmodel.hpp"

namespace vstab {

namespace tol {
inline constexpr double kMismatch = 1e-10;
inline constexpr int kMaxIterations = 50;
inline constexpr double kDivergeNorm = 1e3;
}  // namespace tol

struct SolverOptions {
    double mismatch_tol = tol::kMismatch;
    int max_iterations = tol::kMaxIterations;
    double diverge_norm = tol::kDivergeNorm;
};

enum class SolveStatus { Converged, IterationLimit, Diverged, SingularJacobian };

const char* to_string(SolveStatus s) noexcept;

/// Result of one power-flow solve. Vectors are in partition order
/// (generators first, then loads; see AdmittancePartition).
struct PowerFlowSolution {
    std::vector<BusId> bus_order;
    std::size_t n_gen = 0;
    ComplexVector v;
    /// Injection currents, I = Y * V.
    ComplexVector i;
    bool converged = false;
    SolveStatus status = SolveStatus::IterationLimit;
    int iterations = 0;
    /// Max modulus of the complex power mismatch over load buses.
    double max_mismatch = 0.0;
    double lambda = 0.0;

    [[nodiscard]] ComplexVector v_gen() const;
    [[nodiscard]] ComplexVector v_load() const;
    [[nodiscard]] ComplexVector i_gen() const;
    [[nodiscard]] ComplexVector i_load() const;
    [[nodiscard]] std::size_t slot(BusId id) const;
};

/// Cached admittance data for repeated solves of one network.
///
/// Unknowns are the rectangular components (Re V_i, Im V_i) of each load
/// voltage; the residual is f_i = V_i * conj(I_i) + lambda * S_i, split into
/// real and imaginary equations. Generator voltages stay at their setpoints.
class PowerFlowModel {
  public:
    explicit PowerFlowModel(const Network& net, SolverOptions opts = {});

    [[nodiscard]] const AdmittancePartition& partition() const noexcept { return part_; }
    [[nodiscard]] const ComplexVector& v_gen() const noexcept { return v_gen_; }
    /// Base drawn power per load bus, in partition order.
    [[nodiscard]] const ComplexVector& load_powers() const noexcept { return s_load_; }
    [[nodiscard]] const SolverOptions& options() const noexcept { return opts_; }

    /// Complex power mismatch per load bus.
    [[nodiscard]] ComplexVector mismatch(const ComplexVector& v_load, double lambda) const;

    /// Real Jacobian of the split mismatch [Re f; Im f] with respect to
    /// [Re V_L; Im V_L]. Entries are real; stored in a ComplexMatrix so the
    /// shared LU applies.
    [[nodiscard]] ComplexMatrix newton_jacobian(const ComplexVector& v_load) const;

    /// Flat start: every load at the mean generator voltage.
    [[nodiscard]] ComplexVector flat_start() const;

    /// Newton solve at load scale `lambda`, optionally from a warm start.
    /// Never throws for numerical failure; inspect `converged` / `status`.
    [[nodiscard]] PowerFlowSolution solve(double lambda, const std::optional<ComplexVector>& start = std::nullopt) const;

    /// Assembles a solution record (currents, mismatch) for given load voltages.
    [[nodiscard]] PowerFlowSolution evaluate(const ComplexVector& v_load, double lambda) const;

  private:
    AdmittancePartition part_;
    ComplexVector v_gen_;
    ComplexVector s_load_;
    SolverOptions opts_;
};

PowerFlowSolution solve(const Network& net, double lambda);

/// I = Y * V in partition order.
ComplexVector bus_currents(const AdmittancePartition& partition, const ComplexVector& v);

struct TransformedJacobian {
    /// 2 n_L square: diag([V; conj V]) + [[0, B], [conj B, 0]].
    ComplexMatrix j;
    /// B_ij = Z_ij * I_L,j.
    ComplexMatrix b;
};

/// Similarity-transformed complex power-flow Jacobian; `z` is Y_LL^{-1}.
TransformedJacobian transformed_jacobian(const ComplexMatrix& z, const ComplexVector& v_load,
                                         const ComplexVector& i_load);

/// margin_i = |V_i| - sum_j |Z_ij * I_L,j|. All positive certifies the
/// transformed Jacobian strictly diagonally dominant.
std::vector<double> dominance_margins(const ComplexVector& v_load, const ComplexMatrix& z,
                                      const ComplexVector& i_load);

}  // namespace vstab
