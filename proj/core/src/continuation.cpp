#include "vstab/continuation.hpp"

#include <cmath>
#include <sstream>

#include "vstab/format.hpp"

namespace vstab {

namespace {

constexpr double kGridExtension = 10.0;

std::optional<double> delta_at(const StabilityReport& rep, BusId bus) {
    const auto& b = rep.at(bus);
    if (!b.ena) return std::nullopt;
    return b.ena->delta;
}

bool sign_change(double a, double b) { return (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0); }

/// Bisects [lo, hi] for the Delta sign change, solving from lo's voltages.
double refine_delta_zero(const StabilityAnalyzer& analyzer, const TraceRecord& lo_rec, const TraceRecord& hi_rec,
                         BusId bus) {
    double lo = lo_rec.lambda;
    double hi = hi_rec.lambda;
    double d_lo = *delta_at(lo_rec.report, bus);
    if (d_lo == 0.0) return lo;
    ComplexVector start = lo_rec.solution.v_load();
    const auto& y = analyzer.partition().y;
    const auto& z_tilde = *analyzer.z_tilde();

    while (hi - lo > tol::kDeltaLambda) {
        const double mid = 0.5 * (lo + hi);
        const PowerFlowSolution sol = analyzer.model().solve(mid, start);
        if (!sol.converged) {
            hi = mid;
            continue;
        }
        const double d = ena_equivalent(y, z_tilde, sol, bus).delta;
        if (d == 0.0) return mid;
        if (sign_change(d_lo, d)) {
            hi = mid;
        } else {
            lo = mid;
            d_lo = d;
            start = sol.v_load();
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ContinuationTrace sweep(const Network& net, double lambda_max_guess, int steps, BusId monitored_bus) {
    if (steps < 2) throw std::invalid_argument("sweep: steps must be >= 2");
    if (!(lambda_max_guess > 0.0) || !std::isfinite(lambda_max_guess)) {
        throw std::invalid_argument("sweep: lambda_max must be positive and finite");
    }
    if (!net.contains(monitored_bus) || net.bus(monitored_bus).kind != BusKind::Load) {
        throw ContinuationError(ContinuationError::Kind::InvalidInput, "monitored bus " + std::to_string(monitored_bus) + " is not a load bus");
    }
    bool any_load = false;
    for (const auto& b : net.buses()) any_load = any_load || (b.base_power && *b.base_power != Complex{});
    if (!any_load) throw ContinuationError(ContinuationError::Kind::InvalidInput, "degenerate scaling direction: every base load is zero");

    const StabilityAnalyzer analyzer(net);
    const PowerFlowModel& model = analyzer.model();

    ContinuationTrace trace;
    trace.monitored_bus = monitored_bus;

    const PowerFlowSolution base = model.solve(0.0);
    if (!base.converged) throw ContinuationError(ContinuationError::Kind::Numerical, "base case (lambda = 0) failed to converge");
    trace.records.push_back({0.0, base, analyzer.assess(base)});

    const double step = lambda_max_guess / steps;
    const auto max_k = static_cast<long>(std::ceil(kGridExtension * steps));
    std::optional<double> failed;
    for (long k = 1; k <= max_k; ++k) {
        const double lambda = static_cast<double>(k) * lambda_max_guess / steps;
        const PowerFlowSolution sol = model.solve(lambda, trace.records.back().solution.v_load());
        if (!sol.converged) {
            failed = lambda;
            break;
        }
        trace.records.push_back({lambda, sol, analyzer.assess(sol)});
    }
    if (!failed) {
        throw ContinuationError(ContinuationError::Kind::Numerical, "no voltage collapse found up to lambda = " +
                                format_real(static_cast<double>(max_k) * step));
    }

    // Nose bracket: [last converged, first failed].
    double lo = trace.records.back().lambda;
    double hi = *failed;
    std::optional<PowerFlowSolution> best;
    ComplexVector start = trace.records.back().solution.v_load();
    while (hi - lo > tol::kNoseRelative * hi) {
        const double mid = 0.5 * (lo + hi);
        PowerFlowSolution sol = model.solve(mid, start);
        if (sol.converged) {
            lo = mid;
            start = sol.v_load();
            best = std::move(sol);
        } else {
            hi = mid;
        }
    }
    if (best) trace.records.push_back({best->lambda, *best, analyzer.assess(*best)});
    trace.lambda_nose = lo;
    trace.lambda_fail = hi;

    for (std::size_t k = 1; k < trace.records.size() && analyzer.z_tilde(); ++k) {
        const auto d0 = delta_at(trace.records[k - 1].report, monitored_bus);
        const auto d1 = delta_at(trace.records[k].report, monitored_bus);
        if (!d0 || !d1) continue;
        if (*d0 == 0.0) {
            trace.lambda_delta_zero = trace.records[k - 1].lambda;
            break;
        }
        if (sign_change(*d0, *d1)) {
            trace.lambda_delta_zero =
                refine_delta_zero(analyzer, trace.records[k - 1], trace.records[k], monitored_bus);
            break;
        }
    }
    return trace;
}

NoseOracle two_bus_nose_oracle(double e_mag, Complex z_line, Complex s_dir) {
    if (s_dir == Complex{}) throw std::invalid_argument("two_bus_nose_oracle: zero load direction");
    if (z_line == Complex{}) throw std::invalid_argument("two_bus_nose_oracle: zero line impedance");
    if (!(e_mag > 0.0)) throw std::invalid_argument("two_bus_nose_oracle: source magnitude must be positive");

    // Zero discriminant of u^2 + (2 sigma a - E^2) u + sigma^2 m^2 = 0 in u = |V|^2:
    //   4 sigma^2 (a^2 - m^2) - 4 sigma a E^2 + E^4 = 0,
    // whose roots are E^2 / (2 (a - m)) <= 0 and E^2 / (2 (a + m)).
    const double a = s_dir.real() * z_line.real() + s_dir.imag() * z_line.imag();
    const double m = std::abs(s_dir) * std::abs(z_line);
    const double e2 = e_mag * e_mag;
    if (a + m <= 1e-14 * m) {
        throw ContinuationError(ContinuationError::Kind::InvalidInput, "load direction never reaches a nose: no positive loading limit");
    }
    NoseOracle out;
    out.lambda_star = e2 / (2.0 * (a + m));
    out.v_nose_mag = std::sqrt(0.5 * (e2 - 2.0 * out.lambda_star * a));
    return out;
}

std::string export_report_rows(const StabilityReport& report) {
    std::ostringstream os;
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    for (const auto& b : report.buses) {
        os << format_real(report.lambda) << ',' << b.bus << ',' << format_real(std::abs(b.v)) << ','
           << format_real(std::arg(b.v)) << ',' << format_real(b.margin) << ',' << format_real(b.lindex.l_term) << ','
           << format_real(report.l_index);
        if (b.ena) {
            const auto& e = *b.ena;
            os << ',' << format_real(e.delta) << ',' << format_real(e.alpha1) << ',' << format_real(e.alpha2) << ','
               << format_real(std::abs(e.v_s)) << ',' << format_real(std::abs(e.z_eq)) << ','
               << format_real(std::abs(e.s_eq)) << ',' << format_real(e.phi);
        } else {
            os << ",,,,,,,";
        }
        os << ',' << opt(b.z_l_mag) << '\n';
    }
    return os.str();
}

std::string export_trace(const ContinuationTrace& trace) {
    if (trace.records.empty()) throw std::invalid_argument("export_trace: empty trace");
    std::string out = std::string(kTraceCsvHeader) + "\n";
    for (const auto& r : trace.records) out += export_report_rows(r.report);
    return out;
}

}  // namespace vstab
