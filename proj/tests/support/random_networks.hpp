#pragma once

// Seeded generators for property and acceptance tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vstab/netmodel.hpp"
#include "vstab/powerflow.hpp"

namespace vstab::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
    return {uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    ComplexMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = random_complex(rng, scale);
    return m;
}

/// Random matrix plus a dominant diagonal; condition number stays modest.
inline ComplexMatrix random_well_conditioned(std::mt19937_64& rng, std::size_t n) {
    ComplexMatrix m = random_matrix(rng, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += Complex{2.0 * static_cast<double>(n), 0.5};
    return m;
}

inline ComplexVector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    ComplexVector v(n);
    for (auto& x : v) x = random_complex(rng, scale);
    return v;
}

struct RandomNetworkSpec {
    int min_buses = 3;
    int max_buses = 5;
    /// Every bus gets a shunt, so Y is invertible.
    bool shunt_every_bus = true;
};

/// Connected random network: bus ids 1..n, one or two generators first,
/// random spanning tree plus optional extra lines, inductive lines with some
/// resistance, small capacitive shunts, and modest loads.
inline Network random_network(std::mt19937_64& rng, const RandomNetworkSpec& spec = {}) {
    const int n = std::uniform_int_distribution<int>(spec.min_buses, spec.max_buses)(rng);
    const int n_gen = std::uniform_int_distribution<int>(1, 2)(rng);

    std::vector<Bus> buses;
    for (int k = 1; k <= n; ++k) {
        if (k <= n_gen) {
            buses.push_back(Bus::generator(k, std::polar(uniform(rng, 0.95, 1.05), uniform(rng, -0.1, 0.1))));
        } else {
            buses.push_back(Bus::load(k, {uniform(rng, 0.0, 0.4), uniform(rng, -0.1, 0.2)}));
        }
    }
    auto line = [&rng] {
        const double b = uniform(rng, 2.0, 10.0);
        return Complex{uniform(rng, 0.0, 0.3 * b), -b};
    };
    std::vector<Branch> branches;
    for (int k = 2; k <= n; ++k) {
        const int parent = std::uniform_int_distribution<int>(1, k - 1)(rng);
        branches.push_back({parent, k, line()});
    }
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b)
            if (uniform(rng, 0.0, 1.0) < 0.25) branches.push_back({a, b, line()});

    std::vector<Shunt> shunts;
    for (int k = 1; k <= n; ++k) {
        if (spec.shunt_every_bus || uniform(rng, 0.0, 1.0) < 0.5) {
            shunts.push_back({k, Complex{uniform(rng, 0.0, 0.02), uniform(rng, 0.05, 0.3)}});
        }
    }
    return {std::move(buses), std::move(branches), std::move(shunts)};
}

/// Draws networks until one solves at lambda = 1, halving loads on failure.
inline Network random_feasible_network(std::mt19937_64& rng, const RandomNetworkSpec& spec = {}) {
    for (;;) {
        Network net = random_network(rng, spec);
        for (int tries = 0; tries < 6; ++tries) {
            if (solve(net, 1.0).converged) return net;
            net = net.with_scaled_loads(0.5);
        }
    }
}

/// Generator of magnitude e behind reactance x, load drawing i*q.
inline Network radial_two_bus(double e, double x, double q, bool shunt = false) {
    std::vector<Shunt> shunts;
    if (shunt) shunts.push_back({1, Complex{0.0, 1.0}});
    return {{Bus::generator(1, {e, 0.0}), Bus::load(2, {0.0, q})}, {{1, 2, Complex{0.0, -1.0 / x}}}, shunts};
}

}  // namespace vstab::testing
