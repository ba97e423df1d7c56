#pragma once

// Load-bus stability indices computed from a power-flow state:
//
//  * L-index equivalents. Partitioning I = Y V into generator and load blocks
//    gives V_L = E + Z I_L with E = -Y_LL^{-1} Y_LG V_G and Z = Y_LL^{-1};
//    each load bus i sees a source E_i behind (z_i^T I_L) / I_L,i and
//    L = max_i |(E_i - V_i) / V_i|.
//
//  * Equivalent Nodal Analysis (ENA) quantities built from Z~ = Y^{-1}:
//    V_s = sum_{j in G} Z~_ij I_j, Z_eq = Z~_ii,
//    S_eq = V_i conj(sum_{j in L} (Z~_ij / Z~_ii) I_j), and the discriminant
//    Delta = (|V_s|^2 - alpha1)(|V_s|^2 + alpha2) with
//    alpha1,2 = 2 |Z_eq| |S_eq| (1 +/- cos phi), phi = arg S_eq - arg Z_eq.
//
// Currents are injections (I = Y V) throughout, so S_eq carries the
// injection sign: a bus drawing reactive power has Im S_eq < 0.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstab/cnum.hpp"
#include "vstab/netmodel.hpp"
#include "vstab/powerflow.hpp"

namespace vstab {

namespace tol {
/// Load currents below this modulus leave the equivalent line impedance undefined.
inline constexpr double kZeroCurrent = 1e-12;
}  // namespace tol

struct LoadEquivalent {
    BusId bus = 0;
    /// Equivalent source voltage E_i.
    Complex e;
    /// (z_i^T I_L) / I_L,i; empty when |I_L,i| < tol::kZeroCurrent.
    std::optional<Complex> z_eq_line;
    double l_term = 0.0;
};

struct EnaEquivalent {
    BusId bus = 0;
    Complex v_s;
    Complex z_eq;
    Complex s_eq;
    /// arg(S_eq) - arg(Z_eq), wrapped to (-pi, pi].
    double phi = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double delta = 0.0;
};

/// ENA needs Y^{-1}; shuntless networks have a singular Y.
class EnaUndefinedError : public std::runtime_error {
  public:
    EnaUndefinedError() : std::runtime_error("admittance matrix singular — ENA undefined") {}
};

class NotRadialLeafError : public std::domain_error {
  public:
    explicit NotRadialLeafError(BusId bus)
        : std::domain_error("bus " + std::to_string(bus) + " is not a radial leaf — no closed-form reference") {}
};

/// E, equivalent line impedance and L-term for every load bus. Inputs are in
/// partition order. Throws SingularMatrixError if Y_LL is singular.
std::vector<LoadEquivalent> lindex_equivalents(const AdmittancePartition& partition, const ComplexVector& v_gen,
                                               const ComplexVector& v_load, const ComplexVector& i_load);

/// max_i L_term; throws std::invalid_argument for an empty set.
double l_index(std::span<const LoadEquivalent> equivalents);

/// ENA equivalent at load bus `bus`. `y` is the full admittance matrix and
/// `z_tilde` its inverse, both in the solution's partition order. Throws
/// EnaUndefinedError when `y` fails invertibility_check.
EnaEquivalent ena_equivalent(const ComplexMatrix& y, const ComplexMatrix& z_tilde, const PowerFlowSolution& sol,
                             BusId bus);

/// Same, inverting `y` internally.
EnaEquivalent ena_equivalent(const ComplexMatrix& y, const PowerFlowSolution& sol, BusId bus);

/// Residual of the quartic relation
///   |V|^4 + (2 (P R + Q X) - |V_s|^2) |V|^2 + |S|^2 |Z_eq|^2
/// at |V| = |v|, where P + iQ = -S_eq is the power drawn by the equivalent
/// load and R + iX = Z_eq. It vanishes identically for any consistent state.
double quadratic_residual(const EnaEquivalent& eq, Complex v);

/// |V|^2 / |S|; throws std::invalid_argument when S == 0.
double load_impedance(Complex v, Complex s_drawn);

/// |1 / y| for the single line feeding a radial leaf load bus (parallel lines
/// to the same neighbour are combined). Throws NotRadialLeafError otherwise.
double impedance_match_reference(const Network& net, BusId bus);

struct BusStability {
    BusId bus = 0;
    Complex v;
    LoadEquivalent lindex;
    std::optional<EnaEquivalent> ena;
    /// |V|^2 / |lambda S|; empty at zero drawn power.
    std::optional<double> z_l_mag;
    double margin = 0.0;
};

struct StabilityReport {
    double lambda = 0.0;
    std::vector<BusStability> buses;
    double l_index = 0.0;
    double min_margin = 0.0;
    /// Smallest singular value of the transformed Jacobian.
    double jacobian_sigma_min = 0.0;
    /// Set when ENA quantities could not be formed (singular Y).
    std::optional<std::string> ena_unavailable;

    [[nodiscard]] const BusStability& at(BusId bus) const;
};

/// Precomputes Z = Y_LL^{-1}, E and (when Y is invertible) Z~ = Y^{-1} for
/// one network, then assesses solutions of that network.
class StabilityAnalyzer {
  public:
    /// Throws std::invalid_argument without load buses, SingularMatrixError if
    /// Y_LL is singular.
    explicit StabilityAnalyzer(const Network& net);

    [[nodiscard]] const PowerFlowModel& model() const noexcept { return model_; }
    [[nodiscard]] const AdmittancePartition& partition() const noexcept { return model_.partition(); }
    [[nodiscard]] const ComplexMatrix& z() const noexcept { return z_; }
    [[nodiscard]] const std::optional<ComplexMatrix>& z_tilde() const noexcept { return z_tilde_; }
    [[nodiscard]] const ComplexVector& e() const noexcept { return e_; }

    [[nodiscard]] StabilityReport assess(const PowerFlowSolution& sol) const;

  private:
    PowerFlowModel model_;
    ComplexMatrix z_;
    ComplexVector e_;
    std::optional<ComplexMatrix> z_tilde_;
};

}  // namespace vstab
