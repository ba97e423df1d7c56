#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support/random_networks.hpp"
#include "support/two_bus_oracle.hpp"
#include "vstab/indices.hpp"

using namespace vstab;
namespace tb = vstab::testing::two_bus;

namespace {

const Complex I{0.0, 1.0};

/// Two-bus state built by hand from a real load voltage v (no solver).
PowerFlowSolution two_bus_state(double v, double lambda) {
    const PowerFlowModel model(two_bus_counterexample());
    return model.evaluate(ComplexVector{v}, lambda);
}

const ComplexMatrix kZTilde{{-I, -I}, {-I, -2.0 * I / 3.0}};

}  // namespace

TEST_CASE("lindex_equivalents: two-bus E = 1 at any load") {
    const auto part = build_ybus(two_bus_counterexample());
    for (double lambda : {0.0, 1.0, 3.0}) {
        const auto sol = solve(two_bus_counterexample(), lambda);
        REQUIRE(sol.converged);
        const auto eqs = lindex_equivalents(part, sol.v_gen(), sol.v_load(), sol.i_load());
        REQUIRE(eqs.size() == 1);
        CHECK(eqs[0].bus == 2);
        CHECK(std::abs(eqs[0].e - Complex{1.0}) < 1e-14);
    }
}

TEST_CASE("lindex_equivalents: L-term at lambda = 1") {
    const auto part = build_ybus(two_bus_counterexample());
    const auto sol = solve(two_bus_counterexample(), 1.0);
    const auto eqs = lindex_equivalents(part, sol.v_gen(), sol.v_load(), sol.i_load());
    const double v2 = tb::high_voltage(1.0, 1.0 / 3.0, 0.2);
    CHECK(eqs[0].l_term == doctest::Approx((1.0 - v2) / v2).epsilon(1e-9));
    CHECK(eqs[0].l_term == doctest::Approx(0.077383).epsilon(1e-5));
    REQUIRE(eqs[0].z_eq_line);
    CHECK(std::abs(*eqs[0].z_eq_line - I / 3.0) < 1e-12);
    CHECK(l_index(eqs) == eqs[0].l_term);
}

TEST_CASE("lindex_equivalents: zero load gives V_L = E and no line impedance") {
    std::mt19937_64 rng(2);
    const Network net = testing::random_feasible_network(rng).with_scaled_loads(0.0);
    const auto sol = solve(net, 0.0);
    REQUIRE(sol.converged);
    const auto part = build_ybus(net);
    const auto eqs = lindex_equivalents(part, sol.v_gen(), sol.v_load(), sol.i_load());
    for (std::size_t k = 0; k < eqs.size(); ++k) {
        CHECK(std::abs(eqs[k].e - sol.v_load()[k]) < 1e-12);
        CHECK(eqs[k].l_term < 1e-12);
        CHECK_FALSE(eqs[k].z_eq_line);
    }
    CHECK(l_index(eqs) < 1e-12);
}

TEST_CASE("l_index: nose value and empty input") {
    const auto sol = two_bus_state(0.5, 3.75);
    const auto part = build_ybus(two_bus_counterexample());
    const auto eqs = lindex_equivalents(part, sol.v_gen(), sol.v_load(), sol.i_load());
    CHECK(l_index(eqs) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(l_index({}), std::invalid_argument);
}

TEST_CASE("E_i - V_i = z_i^T I_L at converged random solutions") {
    std::mt19937_64 rng(4242);
    for (int t = 0; t < 200; ++t) {
        const Network net = testing::random_feasible_network(rng);
        const auto part = build_ybus(net);
        const auto sol = solve(net, 1.0);
        REQUIRE(sol.converged);
        const auto eqs = lindex_equivalents(part, sol.v_gen(), sol.v_load(), sol.i_load());
        const auto drop = invert(part.y_ll) * sol.i_load();
        for (std::size_t k = 0; k < eqs.size(); ++k) {
            CHECK(std::abs(eqs[k].e - sol.v_load()[k] + drop[k]) < 1e-10);
        }
    }
}

TEST_CASE("ena_equivalent: two-bus at the nose") {
    const auto y = build_ybus(two_bus_counterexample()).y;
    const auto eq = ena_equivalent(y, kZTilde, two_bus_state(0.5, 3.75), 2);
    CHECK(std::abs(eq.v_s - Complex{-0.5}) < 1e-12);
    CHECK(std::abs(eq.z_eq - (-2.0 * I / 3.0)) < 1e-15);
    CHECK(std::abs(eq.s_eq - (-0.75 * I)) < 1e-12);
    CHECK(eq.phi == doctest::Approx(0.0));
    CHECK(eq.alpha1 == doctest::Approx(2.0));
    CHECK(std::abs(eq.alpha2) < 1e-12);
    CHECK(eq.delta == doctest::Approx(-0.4375));
}

TEST_CASE("ena_equivalent: two-bus at lambda = 1") {
    const auto y = build_ybus(two_bus_counterexample()).y;
    const auto sol = solve(two_bus_counterexample(), 1.0);
    const auto eq = ena_equivalent(y, sol, 2);
    const double v2 = tb::high_voltage(1.0, 1.0 / 3.0, 0.2);
    CHECK(std::norm(eq.v_s) == doctest::Approx(0.615481).epsilon(1e-5));
    CHECK(eq.alpha1 == doctest::Approx(0.533333).epsilon(1e-5));
    CHECK(eq.delta == doctest::Approx(0.050560).epsilon(1e-4));
    CHECK(eq.delta == doctest::Approx(tb::builtin_delta(v2)).epsilon(1e-9));
}

TEST_CASE("ena_equivalent: zero load gives Delta = |V_s|^4") {
    const auto y = build_ybus(two_bus_counterexample()).y;
    const auto eq = ena_equivalent(y, two_bus_state(1.0, 0.0), 2);
    CHECK(std::abs(eq.s_eq) < 1e-15);
    CHECK(eq.alpha1 == 0.0);
    CHECK(eq.alpha2 == 0.0);
    CHECK(eq.delta == doctest::Approx(std::pow(std::norm(eq.v_s), 2)));
}

TEST_CASE("ena_equivalent: shuntless network is refused") {
    const Network bare = two_bus_counterexample(false);
    const auto y = build_ybus(bare).y;
    const auto sol = solve(bare, 1.0);
    REQUIRE(sol.converged);
    CHECK_THROWS_AS(ena_equivalent(y, sol, 2), EnaUndefinedError);
    CHECK_THROWS_WITH(ena_equivalent(y, kZTilde, sol, 2), "admittance matrix singular — ENA undefined");
    CHECK_THROWS_AS(ena_equivalent(build_ybus(two_bus_counterexample()).y, kZTilde, sol, 1), std::invalid_argument);
}

TEST_CASE("quadratic_residual: identity at consistent states, not elsewhere") {
    const auto y = build_ybus(two_bus_counterexample()).y;
    const auto sol = solve(two_bus_counterexample(), 1.0);
    const auto eq = ena_equivalent(y, sol, 2);
    CHECK(std::abs(quadratic_residual(eq, sol.v[1])) < 1e-8);

    const auto nose = ena_equivalent(y, two_bus_state(0.5, 3.75), 2);
    CHECK(std::abs(quadratic_residual(nose, 0.5)) < 1e-8);

    CHECK(std::abs(quadratic_residual(eq, 1.1 * sol.v[1])) > 1e-3);
}

TEST_CASE("ENA invariants on random networks") {
    std::mt19937_64 rng(5150);
    for (int t = 0; t < 300; ++t) {
        const Network net = testing::random_feasible_network(rng);
        const StabilityAnalyzer analyzer(net);
        REQUIRE(analyzer.z_tilde());
        const auto sol = analyzer.model().solve(testing::uniform(rng, 0.1, 1.0));
        if (!sol.converged) continue;
        for (const auto& b : analyzer.assess(sol).buses) {
            REQUIRE(b.ena);
            const auto& e = *b.ena;
            CHECK(std::abs(quadratic_residual(e, b.v)) < 1e-8);
            const double vs2 = std::norm(e.v_s);
            CHECK(e.delta == (vs2 - e.alpha1) * (vs2 + e.alpha2));
            CHECK(e.alpha1 >= 0.0);
            CHECK(e.alpha2 >= 0.0);
            const double sin_phi = std::sin(e.phi);
            CHECK(e.alpha1 * e.alpha2 ==
                  doctest::Approx(4.0 * std::norm(e.z_eq) * std::norm(e.s_eq) * sin_phi * sin_phi).epsilon(1e-9));
            CHECK(e.phi > -std::numbers::pi);
            CHECK(e.phi <= std::numbers::pi);
        }
    }
}

TEST_CASE("load_impedance") {
    CHECK(load_impedance(0.5, 0.75 * I) == doctest::Approx(1.0 / 3.0));
    const double v2 = tb::high_voltage(1.0, 1.0 / 3.0, 0.2);
    CHECK(load_impedance(v2, 0.2 * I) == doctest::Approx(4.30754).epsilon(1e-5));
    CHECK(load_impedance(1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(load_impedance(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("impedance_match_reference") {
    CHECK(impedance_match_reference(two_bus_counterexample(), 2) == doctest::Approx(1.0 / 3.0));

    const Network real_line({Bus::generator(1, 1.0), Bus::load(2, 0.1)}, {{1, 2, 4.0}}, {});
    CHECK(impedance_match_reference(real_line, 2) == doctest::Approx(0.25));

    const Network meshed({Bus::generator(1, 1.0), Bus::load(2, 0.1), Bus::load(3, 0.1)},
                         {{1, 2, -I}, {2, 3, -I}, {1, 3, -I}}, {});
    CHECK_THROWS_AS(impedance_match_reference(meshed, 2), NotRadialLeafError);
    CHECK_THROWS_AS(impedance_match_reference(meshed, 1), NotRadialLeafError);
}

TEST_CASE("StabilityAnalyzer: report fields on the two-bus system") {
    const StabilityAnalyzer analyzer(two_bus_counterexample());
    const auto rep = analyzer.assess(analyzer.model().solve(1.0));
    CHECK(rep.l_index == doctest::Approx(0.077383).epsilon(1e-5));
    CHECK(rep.min_margin == doctest::Approx(0.856350).epsilon(1e-6));
    CHECK_FALSE(rep.ena_unavailable);
    const auto& b = rep.at(2);
    REQUIRE(b.z_l_mag);
    CHECK(*b.z_l_mag == doctest::Approx(4.30754).epsilon(1e-5));
    CHECK_THROWS_AS((void)rep.at(1), std::out_of_range);

    const auto flat = analyzer.assess(analyzer.model().solve(0.0));
    CHECK_FALSE(flat.at(2).z_l_mag);

    const StabilityAnalyzer bare(two_bus_counterexample(false));
    const auto rb = bare.assess(bare.model().solve(1.0));
    CHECK(rb.ena_unavailable);
    CHECK_FALSE(rb.at(2).ena);
}
