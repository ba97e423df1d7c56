#include "vstab/powerflow.hpp"

#include <algorithm>
#include <cmath>

namespace vstab {

const char* to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::IterationLimit: return "iteration limit";
        case SolveStatus::Diverged: return "diverged";
        case SolveStatus::SingularJacobian: return "singular jacobian";
    }
    return "unknown";
}

// --- PowerFlowSolution -------------------------------------------------------

namespace {

ComplexVector slice(const ComplexVector& v, std::size_t begin, std::size_t end) {
    return ComplexVector(std::vector<Complex>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                              v.begin() + static_cast<std::ptrdiff_t>(end)));
}

ComplexVector concat(const ComplexVector& a, const ComplexVector& b) {
    std::vector<Complex> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return ComplexVector(std::move(out));
}

}  // namespace

ComplexVector PowerFlowSolution::v_gen() const { return slice(v, 0, n_gen); }
ComplexVector PowerFlowSolution::v_load() const { return slice(v, n_gen, v.size()); }
ComplexVector PowerFlowSolution::i_gen() const { return slice(i, 0, n_gen); }
ComplexVector PowerFlowSolution::i_load() const { return slice(i, n_gen, i.size()); }

std::size_t PowerFlowSolution::slot(BusId id) const {
    const auto it = std::find(bus_order.begin(), bus_order.end(), id);
    if (it == bus_order.end()) throw std::out_of_range("unknown bus " + std::to_string(id));
    return static_cast<std::size_t>(it - bus_order.begin());
}

// --- PowerFlowModel ----------------------------------------------------------

PowerFlowModel::PowerFlowModel(const Network& net, SolverOptions opts) : part_(build_ybus(net)), opts_(opts) {
    v_gen_ = ComplexVector(part_.n_gen());
    for (std::size_t k = 0; k < part_.n_gen(); ++k) v_gen_[k] = *net.bus(part_.gen_index[k]).voltage;
    s_load_ = ComplexVector(part_.n_load());
    for (std::size_t k = 0; k < part_.n_load(); ++k) s_load_[k] = *net.bus(part_.load_index[k]).base_power;
}

ComplexVector PowerFlowModel::flat_start() const {
    Complex mean{};
    for (const auto& v : v_gen_) mean += v;
    mean /= static_cast<double>(v_gen_.size());
    return ComplexVector(part_.n_load(), mean);
}

ComplexVector PowerFlowModel::mismatch(const ComplexVector& v_load, double lambda) const {
    if (v_load.size() != part_.n_load()) throw DimensionError("mismatch: load voltage length mismatch");
    const ComplexVector i_load = part_.y_lg * v_gen_ + part_.y_ll * v_load;
    ComplexVector f(v_load.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = v_load[k] * std::conj(i_load[k]) + lambda * s_load_[k];
    return f;
}

ComplexMatrix PowerFlowModel::newton_jacobian(const ComplexVector& v_load) const {
    const std::size_t n = part_.n_load();
    if (v_load.size() != n) throw DimensionError("newton_jacobian: load voltage length mismatch");
    const ComplexVector i_load = part_.y_lg * v_gen_ + part_.y_ll * v_load;

    // Wirtinger derivatives of f_i = V_i conj(I_i):
    //   df_i/dV_k    = delta_ik conj(I_i)
    //   df_i/dconjV_k = V_i conj(Y_ik)
    // then d/dRe = d/dV + d/dconjV and d/dIm = i (d/dV - d/dconjV).
    ComplexMatrix jac(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const Complex d_v = i == k ? std::conj(i_load[i]) : Complex{};
            const Complex d_vbar = v_load[i] * std::conj(part_.y_ll(i, k));
            const Complex d_re = d_v + d_vbar;
            const Complex d_im = Complex{0.0, 1.0} * (d_v - d_vbar);
            jac(i, k) = d_re.real();
            jac(i, n + k) = d_im.real();
            jac(n + i, k) = d_re.imag();
            jac(n + i, n + k) = d_im.imag();
        }
    }
    return jac;
}

PowerFlowSolution PowerFlowModel::evaluate(const ComplexVector& v_load, double lambda) const {
    PowerFlowSolution sol;
    sol.bus_order = part_.order();
    sol.n_gen = part_.n_gen();
    sol.v = concat(v_gen_, v_load);
    sol.i = bus_currents(part_, sol.v);
    sol.lambda = lambda;
    sol.max_mismatch = mismatch(v_load, lambda).norm_inf();
    return sol;
}

PowerFlowSolution PowerFlowModel::solve(double lambda, const std::optional<ComplexVector>& start) const {
    const std::size_t n = part_.n_load();
    ComplexVector v_load = start.value_or(flat_start());
    if (v_load.size() != n) throw DimensionError("solve: warm start length mismatch");

    SolveStatus status = SolveStatus::IterationLimit;
    int iter = 0;
    for (;; ++iter) {
        const ComplexVector f = mismatch(v_load, lambda);
        if (f.norm_inf() <= opts_.mismatch_tol) {
            status = SolveStatus::Converged;
            break;
        }
        if (iter >= opts_.max_iterations) break;

        const LuFactorization lu(newton_jacobian(v_load));
        if (!lu.ok()) {
            status = SolveStatus::SingularJacobian;
            break;
        }
        ComplexVector rhs(2 * n);
        for (std::size_t k = 0; k < n; ++k) {
            rhs[k] = -f[k].real();
            rhs[n + k] = -f[k].imag();
        }
        const ComplexVector dx = lu.solve(rhs);
        bool finite = true;
        for (std::size_t k = 0; k < n; ++k) {
            v_load[k] += Complex{dx[k].real(), dx[n + k].real()};
            finite = finite && std::isfinite(v_load[k].real()) && std::isfinite(v_load[k].imag());
        }
        if (!finite || v_load.norm_inf() > opts_.diverge_norm) {
            ++iter;
            status = SolveStatus::Diverged;
            break;
        }
    }

    PowerFlowSolution sol = evaluate(v_load, lambda);
    sol.iterations = iter;
    sol.status = status;
    sol.converged = status == SolveStatus::Converged;
    return sol;
}

PowerFlowSolution solve(const Network& net, double lambda) { return PowerFlowModel(net).solve(lambda); }

// --- Jacobian structure ------------------------------------------------------

ComplexVector bus_currents(const AdmittancePartition& partition, const ComplexVector& v) {
    if (v.size() != partition.y.cols()) throw DimensionError("bus_currents: voltage length does not match Y");
    return partition.y * v;
}

namespace {

void require_load_dims(const ComplexMatrix& z, const ComplexVector& v_load, const ComplexVector& i_load, const char* op) {
    if (!z.square() || z.rows() != v_load.size() || v_load.size() != i_load.size()) {
        throw DimensionError(std::string(op) + ": Z, V_L and I_L dimensions disagree");
    }
}

}  // namespace

TransformedJacobian transformed_jacobian(const ComplexMatrix& z, const ComplexVector& v_load,
                                         const ComplexVector& i_load) {
    require_load_dims(z, v_load, i_load, "transformed_jacobian");
    const std::size_t n = v_load.size();
    TransformedJacobian out{ComplexMatrix(2 * n, 2 * n), ComplexMatrix(n, n)};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) out.b(r, c) = z(r, c) * i_load[c];

    for (std::size_t r = 0; r < n; ++r) {
        out.j(r, r) = v_load[r];
        out.j(n + r, n + r) = std::conj(v_load[r]);
        for (std::size_t c = 0; c < n; ++c) {
            out.j(r, n + c) = out.b(r, c);
            out.j(n + r, c) = std::conj(out.b(r, c));
        }
    }
    return out;
}

std::vector<double> dominance_margins(const ComplexVector& v_load, const ComplexMatrix& z,
                                      const ComplexVector& i_load) {
    require_load_dims(z, v_load, i_load, "dominance_margins");
    std::vector<double> margin(v_load.size());
    for (std::size_t r = 0; r < v_load.size(); ++r) {
        double off = 0.0;
        for (std::size_t c = 0; c < v_load.size(); ++c) off += std::abs(z(r, c) * i_load[c]);
        margin[r] = std::abs(v_load[r]) - off;
    }
    return margin;
}

}  // namespace vstab
