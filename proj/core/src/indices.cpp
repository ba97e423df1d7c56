#include "vstab/indices.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vstab {

namespace {

double wrap_angle(double a) {
    // (-pi, pi]
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

std::vector<LoadEquivalent> equivalents_from(const AdmittancePartition& part, const ComplexMatrix& z,
                                             const ComplexVector& e, const ComplexVector& v_load,
                                             const ComplexVector& i_load) {
    const ComplexVector drop = z * i_load;
    std::vector<LoadEquivalent> out(v_load.size());
    for (std::size_t k = 0; k < v_load.size(); ++k) {
        LoadEquivalent& q = out[k];
        q.bus = part.load_index[k];
        q.e = e[k];
        if (std::abs(i_load[k]) >= tol::kZeroCurrent) q.z_eq_line = drop[k] / i_load[k];
        q.l_term = std::abs((e[k] - v_load[k]) / v_load[k]);
    }
    return out;
}

ComplexVector equivalent_source(const AdmittancePartition& part, const ComplexMatrix& z, const ComplexVector& v_gen) {
    return Complex{-1.0} * (z * (part.y_lg * v_gen));
}

void require_partition_dims(const AdmittancePartition& part, const ComplexVector& v_gen, const ComplexVector& v_load,
                            const ComplexVector& i_load) {
    if (v_gen.size() != part.n_gen() || v_load.size() != part.n_load() || i_load.size() != part.n_load()) {
        throw DimensionError("lindex_equivalents: vector lengths do not match the partition");
    }
}

}  // namespace

std::vector<LoadEquivalent> lindex_equivalents(const AdmittancePartition& partition, const ComplexVector& v_gen,
                                               const ComplexVector& v_load, const ComplexVector& i_load) {
    require_partition_dims(partition, v_gen, v_load, i_load);
    const ComplexMatrix z = invert(partition.y_ll);
    return equivalents_from(partition, z, equivalent_source(partition, z, v_gen), v_load, i_load);
}

double l_index(std::span<const LoadEquivalent> equivalents) {
    if (equivalents.empty()) throw std::invalid_argument("l_index: no load buses");
    double l = 0.0;
    for (const auto& q : equivalents) l = std::max(l, q.l_term);
    return l;
}

EnaEquivalent ena_equivalent(const ComplexMatrix& y, const ComplexMatrix& z_tilde, const PowerFlowSolution& sol,
                             BusId bus) {
    if (!invertibility_check(y).invertible) throw EnaUndefinedError();
    const std::size_t n = sol.v.size();
    if (y.rows() != n || z_tilde.rows() != n || z_tilde.cols() != n) {
        throw DimensionError("ena_equivalent: matrix and solution dimensions disagree");
    }
    const std::size_t s = sol.slot(bus);
    if (s < sol.n_gen) throw std::invalid_argument("ena_equivalent: bus " + std::to_string(bus) + " is not a load bus");

    EnaEquivalent eq;
    eq.bus = bus;
    eq.z_eq = z_tilde(s, s);
    for (std::size_t j = 0; j < sol.n_gen; ++j) eq.v_s += z_tilde(s, j) * sol.i[j];
    Complex weighted{};
    for (std::size_t j = sol.n_gen; j < n; ++j) weighted += z_tilde(s, j) / eq.z_eq * sol.i[j];
    eq.s_eq = sol.v[s] * std::conj(weighted);

    eq.phi = wrap_angle(std::arg(eq.s_eq) - std::arg(eq.z_eq));
    const double zs = 2.0 * std::abs(eq.z_eq) * std::abs(eq.s_eq);
    eq.alpha1 = zs * (1.0 + std::cos(eq.phi));
    eq.alpha2 = zs * (1.0 - std::cos(eq.phi));
    const double vs2 = std::norm(eq.v_s);
    eq.delta = (vs2 - eq.alpha1) * (vs2 + eq.alpha2);
    return eq;
}

EnaEquivalent ena_equivalent(const ComplexMatrix& y, const PowerFlowSolution& sol, BusId bus) {
    if (!invertibility_check(y).invertible) throw EnaUndefinedError();
    return ena_equivalent(y, invert(y), sol, bus);
}

double quadratic_residual(const EnaEquivalent& eq, Complex v) {
    const Complex drawn = -eq.s_eq;
    const double u = std::norm(v);
    const double coupling = drawn.real() * eq.z_eq.real() + drawn.imag() * eq.z_eq.imag();
    return u * u + (2.0 * coupling - std::norm(eq.v_s)) * u + std::norm(eq.s_eq) * std::norm(eq.z_eq);
}

double load_impedance(Complex v, Complex s_drawn) {
    if (s_drawn == Complex{}) throw std::invalid_argument("load_impedance: zero load power");
    return std::norm(v) / std::abs(s_drawn);
}

double impedance_match_reference(const Network& net, BusId bus) {
    const Bus& b = net.bus(bus);
    if (b.kind != BusKind::Load) throw NotRadialLeafError(bus);
    std::optional<BusId> neighbour;
    Complex y{};
    for (const auto& br : net.branches()) {
        if (br.from != bus && br.to != bus) continue;
        const BusId other = br.from == bus ? br.to : br.from;
        if (neighbour && *neighbour != other) throw NotRadialLeafError(bus);
        neighbour = other;
        y += br.admittance;
    }
    if (!neighbour || y == Complex{}) throw NotRadialLeafError(bus);
    return 1.0 / std::abs(y);
}

// --- StabilityReport ---------------------------------------------------------

const BusStability& StabilityReport::at(BusId bus) const {
    const auto it = std::find_if(buses.begin(), buses.end(), [bus](const BusStability& b) { return b.bus == bus; });
    if (it == buses.end()) throw std::out_of_range("no load bus " + std::to_string(bus) + " in report");
    return *it;
}

StabilityAnalyzer::StabilityAnalyzer(const Network& net) : model_(net) {
    const auto& part = model_.partition();
    if (part.n_load() == 0) throw std::invalid_argument("network has no load buses");
    z_ = invert(part.y_ll);
    e_ = equivalent_source(part, z_, model_.v_gen());
    if (invertibility_check(part.y).invertible) z_tilde_ = invert(part.y);
}

StabilityReport StabilityAnalyzer::assess(const PowerFlowSolution& sol) const {
    const auto& part = model_.partition();
    if (sol.v.size() != part.n_bus() || sol.n_gen != part.n_gen()) {
        throw DimensionError("assess: solution does not belong to this network");
    }
    const ComplexVector v_load = sol.v_load();
    const ComplexVector i_load = sol.i_load();

    StabilityReport rep;
    rep.lambda = sol.lambda;
    const auto eqs = equivalents_from(part, z_, e_, v_load, i_load);
    const auto margins = dominance_margins(v_load, z_, i_load);
    rep.l_index = l_index(eqs);
    rep.min_margin = *std::min_element(margins.begin(), margins.end());
    rep.jacobian_sigma_min = min_singular_value(transformed_jacobian(z_, v_load, i_load).j);
    if (!z_tilde_) rep.ena_unavailable = EnaUndefinedError().what();

    for (std::size_t k = 0; k < part.n_load(); ++k) {
        BusStability b;
        b.bus = part.load_index[k];
        b.v = v_load[k];
        b.lindex = eqs[k];
        b.margin = margins[k];
        if (z_tilde_) b.ena = ena_equivalent(part.y, *z_tilde_, sol, b.bus);
        const Complex drawn = sol.lambda * model_.load_powers()[k];
        if (drawn != Complex{}) b.z_l_mag = load_impedance(b.v, drawn);
        rep.buses.push_back(std::move(b));
    }
    return rep;
}

}  // namespace vstab
