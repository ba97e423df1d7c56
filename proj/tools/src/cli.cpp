#include "vstab/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vstab/format.hpp"
#include "vstab/indices.hpp"

namespace vstab::cli {

namespace {

using Json = nlohmann::ordered_json;

// Acceptance thresholds for the built-in two-bus verdict.
constexpr double kNoseTolerance = 0.005;
constexpr double kMatchRelTolerance = 0.01;
constexpr double kEnaGap = 0.3;
constexpr double kDeltaAtNoseMax = -0.40;
constexpr double kDeltaCrossingFraction = 0.3;

constexpr double kCounterexampleLambdaMax = 5.0;
constexpr BusId kCounterexampleBus = 2;

Json real(double x) { return round_to_printed(x); }

Json real(const std::optional<double>& x) { return x ? real(*x) : Json(nullptr); }

Json cplx(Complex z) { return Json::array({real(z.real()), real(z.imag())}); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

const char* command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Indices: return "indices";
        case Command::Sweep: return "sweep";
        case Command::Nose: return "nose";
        case Command::Counterexample: return "counterexample";
    }
    return "?";
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read network file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

BusId default_bus(const Network& net) {
    for (const auto& b : net.buses())
        if (b.kind == BusKind::Load) return b.id;
    throw UsageError("network has no load bus to monitor");
}

struct Emitted {
    std::string doc;
    bool assertions_failed = false;
};

Emitted execute(const RunConfig& cfg) {
    const OutputFormat fallback = cfg.command == Command::Sweep ? OutputFormat::Csv : OutputFormat::Json;
    const OutputFormat fmt = cfg.output.value_or(fallback);

    if (cfg.command == Command::Counterexample) {
        if (cfg.output == OutputFormat::Csv) throw UsageError("counterexample: csv output is not supported");
        const auto verdict = evaluate_counterexample();
        return {cfg.output ? render_verdict_json(verdict) : render_verdict_text(verdict), !verdict.all_pass()};
    }

    const Network net = load_network(cfg.network_path);
    switch (cfg.command) {
        case Command::Solve: {
            const auto sol = solve(net, cfg.lambda);
            return {fmt == OutputFormat::Json ? render_solution_json(sol) : render_solution_csv(sol)};
        }
        case Command::Indices: {
            const StabilityAnalyzer analyzer(net);
            const auto sol = analyzer.model().solve(cfg.lambda);
            if (!sol.converged) {
                throw std::runtime_error("power flow did not converge at lambda = " + format_real(cfg.lambda) + " (" +
                                         to_string(sol.status) + ")");
            }
            const auto rep = analyzer.assess(sol);
            if (fmt == OutputFormat::Json) return {render_report_json(rep)};
            return {std::string(kTraceCsvHeader) + "\n" + export_report_rows(rep)};
        }
        case Command::Sweep: {
            const auto trace = sweep(net, cfg.lambda_max, cfg.steps, cfg.bus.value_or(default_bus(net)));
            return {fmt == OutputFormat::Csv ? export_trace(trace) : render_trace_json(trace)};
        }
        case Command::Nose: {
            if (fmt == OutputFormat::Csv) throw UsageError("nose: csv output is not supported");
            const auto trace = sweep(net, cfg.lambda_max, cfg.steps, cfg.bus.value_or(default_bus(net)));
            return {render_nose_json(summarize_nose(net, trace))};
        }
        case Command::Counterexample: break;
    }
    return {};
}

}  // namespace

// --- argument parsing --------------------------------------------------------

RunConfig parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Steady-state voltage stability indices and load-scaling continuation", "vstab"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::optional<double> lambda;
    std::optional<double> lambda_max;
    std::optional<std::string> output;

    app.add_option("--network", cfg.network_path, "Network file (JSON)");
    app.add_option("--lambda", lambda, "Load scale for solve/indices");
    app.add_option("--lambda-max", lambda_max, "Upper end of the sweep grid");
    app.add_option("--steps", cfg.steps, "Number of sweep grid intervals");
    app.add_option("--bus", cfg.bus, "Monitored load bus id");
    app.add_option("--output", output, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", cfg.out_path, "Write the document here instead of standard output");

    auto* solve_cmd = app.add_subcommand("solve", "Solve the power flow at --lambda");
    auto* indices_cmd = app.add_subcommand("indices", "Stability report at --lambda");
    auto* sweep_cmd = app.add_subcommand("sweep", "Load-scaling sweep, CSV trace");
    auto* nose_cmd = app.add_subcommand("nose", "Locate the nose point and the Delta zero crossing");
    auto* cex_cmd = app.add_subcommand("counterexample", "Run the built-in two-bus counterexample");

    std::vector<const char*> argv{"vstab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), true);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (solve_cmd->parsed()) cfg.command = Command::Solve;
    else if (indices_cmd->parsed()) cfg.command = Command::Indices;
    else if (sweep_cmd->parsed()) cfg.command = Command::Sweep;
    else if (nose_cmd->parsed()) cfg.command = Command::Nose;
    else if (cex_cmd->parsed()) cfg.command = Command::Counterexample;

    if (output) cfg.output = *output == "csv" ? OutputFormat::Csv : OutputFormat::Json;

    const std::string name = command_name(cfg.command);
    switch (cfg.command) {
        case Command::Solve:
        case Command::Indices:
            if (cfg.network_path.empty()) throw UsageError(name + ": --network is required");
            if (!lambda) throw UsageError(name + ": --lambda is required");
            if (!(*lambda >= 0.0) || !std::isfinite(*lambda)) throw UsageError(name + ": --lambda must be >= 0");
            cfg.lambda = *lambda;
            break;
        case Command::Sweep:
        case Command::Nose:
            if (cfg.network_path.empty()) throw UsageError(name + ": --network is required");
            if (!lambda_max) throw UsageError(name + ": --lambda-max is required");
            if (!(*lambda_max > 0.0) || !std::isfinite(*lambda_max)) throw UsageError(name + ": --lambda-max must be > 0");
            if (cfg.steps < 2) throw UsageError(name + ": --steps must be >= 2");
            cfg.lambda_max = *lambda_max;
            break;
        case Command::Counterexample:
            cfg.lambda_max = kCounterexampleLambdaMax;
            break;
    }
    return cfg;
}

// --- dispatch ----------------------------------------------------------------

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    Emitted emitted;
    try {
        emitted = execute(config);
    } catch (const UsageError& e) {
        err << "vstab: " << e.what() << '\n';
        return kExitInput;
    } catch (const ParseError& e) {
        err << "vstab: syntax error in network file at " << e.what() << '\n';
        return kExitInput;
    } catch (const ValidationError& e) {
        err << "vstab: invalid network at " << e.what() << '\n';
        return kExitInput;
    } catch (const ContinuationError& e) {
        err << "vstab: " << e.what() << '\n';
        return e.kind() == ContinuationError::Kind::InvalidInput ? kExitInput : kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "vstab: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "vstab: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }

    if (config.out_path) {
        std::ofstream file(*config.out_path, std::ios::binary);
        if (!file) {
            err << "vstab: cannot write '" << *config.out_path << "'\n";
            return kExitInput;
        }
        file << emitted.doc;
    } else {
        out << emitted.doc;
    }
    if (emitted.assertions_failed) {
        err << "vstab: counterexample assertions failed\n";
        return kExitAssertion;
    }
    return kExitOk;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const UsageError& e) {
        if (e.help()) {
            out << e.what();
            return kExitOk;
        }
        err << "vstab: " << e.what() << '\n';
        return kExitInput;
    }
    return run(cfg, out, err);
}

// --- rendering ---------------------------------------------------------------

std::string render_solution_json(const PowerFlowSolution& sol) {
    Json j;
    j["lambda"] = real(sol.lambda);
    j["converged"] = sol.converged;
    j["status"] = to_string(sol.status);
    j["iterations"] = sol.iterations;
    j["max_mismatch"] = real(sol.max_mismatch);
    j["bus_order"] = sol.bus_order;
    Json v = Json::array();
    Json i = Json::array();
    for (std::size_t k = 0; k < sol.v.size(); ++k) {
        v.push_back(cplx(sol.v[k]));
        i.push_back(cplx(sol.i[k]));
    }
    j["V"] = std::move(v);
    j["I"] = std::move(i);
    return dump(j);
}

std::string render_solution_csv(const PowerFlowSolution& sol) {
    std::ostringstream os;
    os << "bus,kind,v_re,v_im,i_re,i_im\n";
    for (std::size_t k = 0; k < sol.v.size(); ++k) {
        os << sol.bus_order[k] << ',' << (k < sol.n_gen ? "generator" : "load") << ','
           << format_real(sol.v[k].real()) << ',' << format_real(sol.v[k].imag()) << ','
           << format_real(sol.i[k].real()) << ',' << format_real(sol.i[k].imag()) << '\n';
    }
    return os.str();
}

namespace {

Json report_to_json(const StabilityReport& rep) {
    Json j;
    j["lambda"] = real(rep.lambda);
    j["L"] = real(rep.l_index);
    j["min_margin"] = real(rep.min_margin);
    j["jacobian_sigma_min"] = real(rep.jacobian_sigma_min);
    j["ena_unavailable"] = rep.ena_unavailable ? Json(*rep.ena_unavailable) : Json(nullptr);
    Json buses = Json::array();
    for (const auto& b : rep.buses) {
        Json jb;
        jb["id"] = b.bus;
        jb["V"] = cplx(b.v);
        jb["E"] = cplx(b.lindex.e);
        jb["z_eq_line"] = b.lindex.z_eq_line ? cplx(*b.lindex.z_eq_line) : Json(nullptr);
        jb["L_term"] = real(b.lindex.l_term);
        jb["margin"] = real(b.margin);
        jb["Z_L_mag"] = real(b.z_l_mag);
        if (b.ena) {
            const auto& e = *b.ena;
            jb["ena"] = Json{{"V_s", cplx(e.v_s)},         {"Z_eq", cplx(e.z_eq)},          {"S_eq", cplx(e.s_eq)},
                             {"phi", real(e.phi)},         {"alpha1", real(e.alpha1)},      {"alpha2", real(e.alpha2)},
                             {"delta", real(e.delta)}};
        } else {
            jb["ena"] = nullptr;
        }
        buses.push_back(std::move(jb));
    }
    j["buses"] = std::move(buses);
    return j;
}

}  // namespace

std::string render_report_json(const StabilityReport& report) { return dump(report_to_json(report)); }

std::string render_trace_json(const ContinuationTrace& trace) {
    Json j;
    j["monitored_bus"] = trace.monitored_bus;
    j["lambda_nose"] = real(trace.lambda_nose);
    j["lambda_fail"] = real(trace.lambda_fail);
    j["lambda_delta_zero"] = real(trace.lambda_delta_zero);
    Json recs = Json::array();
    for (const auto& r : trace.records) recs.push_back(report_to_json(r.report));
    j["records"] = std::move(recs);
    return dump(j);
}

NoseSummary summarize_nose(const Network& net, const ContinuationTrace& trace) {
    const auto& rec = trace.nose();
    const auto& b = rec.report.at(trace.monitored_bus);
    NoseSummary s;
    s.lambda_nose = trace.lambda_nose;
    s.lambda_fail = trace.lambda_fail;
    s.lambda_delta_zero = trace.lambda_delta_zero;
    s.bus = trace.monitored_bus;
    s.v_mag_at_nose = std::abs(b.v);
    s.l_at_nose = rec.report.l_index;
    s.zl_at_nose = b.z_l_mag;
    if (b.ena) {
        s.zeq_mag = std::abs(b.ena->z_eq);
        s.delta_at_nose = b.ena->delta;
    }
    try {
        s.match_reference = impedance_match_reference(net, trace.monitored_bus);
    } catch (const NotRadialLeafError&) {
    }
    return s;
}

std::string render_nose_json(const NoseSummary& s) {
    Json j;
    j["lambda_nose"] = real(s.lambda_nose);
    j["lambda_fail"] = real(s.lambda_fail);
    j["lambda_delta_zero"] = real(s.lambda_delta_zero);
    j["bus"] = s.bus;
    j["v_mag_at_nose"] = real(s.v_mag_at_nose);
    j["L_at_nose"] = real(s.l_at_nose);
    j["zl_at_nose"] = real(s.zl_at_nose);
    j["zeq_mag"] = real(s.zeq_mag);
    j["delta_at_nose"] = real(s.delta_at_nose);
    j["match_reference"] = real(s.match_reference);
    return dump(j);
}

// --- counterexample ----------------------------------------------------------

bool CounterexampleVerdict::all_pass() const {
    return std::all_of(findings.begin(), findings.end(), [](const Finding& f) { return f.pass; });
}

CounterexampleVerdict evaluate_counterexample() {
    const Network net = two_bus_counterexample();
    const auto trace = sweep(net, kCounterexampleLambdaMax, kDefaultSweepSteps, kCounterexampleBus);

    CounterexampleVerdict v;
    v.nose = summarize_nose(net, trace);

    const Bus& gen = net.buses().front();
    const Branch& line = net.branches().front();
    v.lambda_star = two_bus_nose_oracle(std::abs(*gen.voltage), 1.0 / line.admittance,
                                        *net.bus(kCounterexampleBus).base_power)
                        .lambda_star;

    const auto& n = v.nose;
    v.findings.push_back({"power flow collapses at lambda = " + format_real(v.lambda_star) +
                              " x base load (|lambda_nose - lambda*| <= " + format_real(kNoseTolerance) + ")",
                          std::abs(n.lambda_nose - v.lambda_star) <= kNoseTolerance});

    const bool matches = n.zl_at_nose && n.match_reference &&
                         std::abs(*n.zl_at_nose - *n.match_reference) <= kMatchRelTolerance * *n.match_reference;
    const bool ena_off = n.zl_at_nose && n.zeq_mag && std::abs(*n.zl_at_nose - *n.zeq_mag) > kEnaGap;
    v.findings.push_back({"|Z_L| at the nose equals |1/Y12| (within 1%) and misses |Z_eq| by more than " +
                              format_real(kEnaGap),
                          matches && ena_off});

    const bool delta_negative = n.delta_at_nose && *n.delta_at_nose <= kDeltaAtNoseMax;
    const bool crossing_early =
        n.lambda_delta_zero && *n.lambda_delta_zero < kDeltaCrossingFraction * n.lambda_nose;
    v.findings.push_back({"Delta != 0 at the nose (Delta <= " + format_real(kDeltaAtNoseMax) +
                              ") and Delta = 0 occurs below " + format_real(kDeltaCrossingFraction) + " x lambda_nose",
                          delta_negative && crossing_early});
    return v;
}

std::string render_verdict_text(const CounterexampleVerdict& v) {
    auto opt = [](const std::optional<double>& x) { return x ? format_real(*x) : std::string("undefined"); };
    const auto& n = v.nose;
    std::ostringstream os;
    os << "two-bus system: V1 = 1, Y12 = -3i, Ysh = i (bus 1), base load S = 0.2i (bus 2)\n"
       << "  lambda_nose        " << format_real(n.lambda_nose) << "\n"
       << "  lambda_star        " << format_real(v.lambda_star) << "  (closed form)\n"
       << "  v_mag_at_nose      " << format_real(n.v_mag_at_nose) << "\n"
       << "  L_at_nose          " << format_real(n.l_at_nose) << "\n"
       << "  zl_at_nose         " << opt(n.zl_at_nose) << "\n"
       << "  match_reference    " << opt(n.match_reference) << "  (|1/Y12|)\n"
       << "  zeq_mag            " << opt(n.zeq_mag) << "  (|Z~22|)\n"
       << "  delta_at_nose      " << opt(n.delta_at_nose) << "\n"
       << "  lambda_delta_zero  " << opt(n.lambda_delta_zero) << "\n";
    for (const auto& f : v.findings) os << (f.pass ? "[PASS] " : "[FAIL] ") << f.claim << "\n";
    os << (v.all_pass() ? "verdict: impedance matching and L-index locate the collapse; the ENA condition does not\n"
                        : "verdict: FAIL\n");
    return os.str();
}

std::string render_verdict_json(const CounterexampleVerdict& v) {
    Json j = Json::parse(render_nose_json(v.nose));
    j["lambda_star"] = real(v.lambda_star);
    Json findings = Json::array();
    for (const auto& f : v.findings) findings.push_back(Json{{"claim", f.claim}, {"pass", f.pass}});
    j["findings"] = std::move(findings);
    j["all_pass"] = v.all_pass();
    return dump(j);
}

}  // namespace vstab::cli
