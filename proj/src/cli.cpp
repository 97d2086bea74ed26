#include "frhc/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "frhc/config.hpp"
#include "frhc/metrics.hpp"
#include "frhc/report.hpp"
#include "frhc/scenarios.hpp"
#include "json.hpp"

namespace frhc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slug(std::string_view name) {
    std::string s;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!s.empty() && s.back() != '_') {
            s += '_';
        }
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

json metricsJson(const ResponseMetrics& m) {
    const auto& lc = m.limitCycle;
    return {{"ise", m.ise},
            {"ise_after_first_crossing", m.iseAfterFirstCrossing},
            {"max_u", m.maxU},
            {"steady_u", m.steadyU},
            {"overshoot_pct", m.overshootPct},
            {"rise_time", m.riseTime},
            {"rise_reached", m.riseReached},
            {"settling_time", m.settlingTime},
            {"limit_cycle",
             {{"status", std::string(toString(lc.status))},
              {"detected", lc.detected()},
              {"amplitude", lc.amplitude},
              {"period", lc.period},
              {"peak_to_peak", lc.peakToPeak},
              {"decay_per_period", lc.decayPerPeriod}}}};
}

json stabilityJson(const StabilityReport& s) {
    return {{"pass", s.pass},
            {"max_phase_difference_deg", s.worstDifferenceDeg},
            {"margin_deg", s.marginDeg},
            {"worst_pair", {s.worstA, s.worstB}},
            {"at_omega", s.worstOmega},
            {"pair_differences_deg", s.pairDifferencesDeg}};
}

json marginsJson(const LoopMargins& m) {
    json j;
    j["crossover_rad_s"] = m.crossoverRadS ? json(*m.crossoverRadS) : json(nullptr);
    j["phase_margin_deg"] = m.phaseMarginDeg ? json(*m.phaseMarginDeg) : json(nullptr);
    return j;
}

json residualsJson(const std::vector<SpecResidual>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back({{"name", r.name}, {"value", r.value}, {"satisfied", r.satisfied}});
    return a;
}

json paramsJson(ControllerKind kind, std::span<const double> v) {
    json j = json::object();
    const auto& names = parameterNames(kind);
    for (std::size_t i = 0; i < names.size() && i < v.size(); ++i) j[names[i]] = v[i];
    return j;
}

json header(const std::string& command, std::uint64_t seed) {
    return {{"toolkit", "frhc"}, {"version", FRHC_VERSION}, {"command", command}, {"seed", seed}};
}

void writeSummary(const fs::path& dir, const json& summary) { writeFileAtomic(dir / "summary.json", summary.dump(2) + "\n"); }

void writeTrace(const fs::path& dir, const std::string& stem, const SimulationTrace& tr) {
    writeFileAtomic(dir / (stem + ".csv"), traceCsv(tr));
    writeFileAtomic(dir / (stem + "_events.csv"), eventsCsv(tr));
}

// ---------------------------------------------------------------------------
// Config-driven commands

void applyOverrides(ScenarioConfig& c, const Overrides& o) {
    if (o.seed) {
        c.simulation.seed = *o.seed;
        c.tuner.seed = *o.seed;
    }
    if (o.gridPoints) c.grid.points = *o.gridPoints;
    if (o.h) c.simulation.h = *o.h;
    if (o.horizon) c.simulation.horizon = *o.horizon;
    if (o.memoryPolicy) c.simulation.memoryPolicy = *o.memoryPolicy;
    if (o.strictDf) c.df.strict = true;
}

int runDesign(const ScenarioConfig& c, const fs::path& dir, json summary, std::ostream& out) {
    const auto problem = buildDesignProblem(c);
    int status = kOk;
    OptimizationResult best;
    try {
        best = solve(problem);
    } catch (const NoFeasiblePoint& e) {
        best = e.best();
        status = kInfeasible;
    }
    const auto report = verify(best.params, problem);
    summary["design"] = {{"kind", c.controller.kind},
                         {"feasible", best.feasible},
                         {"converged", best.converged},
                         {"params", paramsJson(problem.kind, best.params)},
                         {"objective", best.objective},
                         {"phase_margin_deg", report.phaseMarginDeg},
                         {"start_index", best.startIndex},
                         {"iterations", best.iterations}};
    summary["residuals"] = residualsJson(report.residuals);
    summary["stability"] = {{"margin_deg", report.stabilityMarginDeg}};
    writeSummary(dir, summary);
    out << (status == kOk ? "feasible" : "infeasible") << " " << c.controller.kind << " " << paramsJson(problem.kind, best.params).dump()
        << "\n";
    return status;
}

int runStability(const ScenarioConfig& c, const fs::path& dir, json summary, std::ostream& out) {
    const auto tmpl = buildTemplate(c);
    const auto k = toTransferFunction(tmpl);
    const auto plant = buildSwitchedPlant(c);
    const auto grid = buildGrid(c);
    const auto st = quadraticStabilityCheck(k, plant, grid);
    summary["stability"] = stabilityJson(st);
    json margins = json::array();
    for (const auto& m : perSubsystemMargins(k, plant, grid)) margins.push_back(marginsJson(m));
    summary["margins"] = margins;
    writeSummary(dir, summary);
    out << "max phase difference " << st.worstDifferenceDeg << " deg, " << (st.pass ? "pass" : "fail") << "\n";
    return kOk;
}

int runDf(const ScenarioConfig& c, const fs::path& dir, json summary, std::ostream& out) {
    const auto tmpl = buildTemplate(c);
    const double kp = tmpl.get("K_p"), tau = tmpl.get("tau_i"), p = tmpl.get("P_reset");
    const double alpha = tmpl.find("alpha").value_or(1.0);
    std::string csv = "omega,re,im,magnitude,phase_deg\n";
    json rows = json::array();
    for (double w : c.df.omegas) {
        const auto n = describingFunction(kp, tau, p, alpha, w, c.df.strict);
        const double ph = deg(std::arg(n));
        csv += formatDouble(w) + ',' + formatDouble(n.real()) + ',' + formatDouble(n.imag()) + ',' + formatDouble(std::abs(n)) + ',' +
               formatDouble(ph) + '\n';
        rows.push_back({{"omega", w}, {"re", n.real()}, {"im", n.imag()}, {"magnitude", std::abs(n)}, {"phase_deg", ph}});
    }
    writeFileAtomic(dir / "df.csv", csv);
    summary["describing_function"] = {{"strict", c.df.strict}, {"values", rows}};
    writeSummary(dir, summary);
    out << "wrote " << c.df.omegas.size() << " describing-function samples\n";
    return kOk;
}

int runSimulate(const ScenarioConfig& c, const fs::path& dir, json summary, std::ostream& out) {
    const auto loop = buildClosedLoop(c);
    const auto tr = simulate(loop);
    const auto m = computeMetrics(tr, metricsFinalValue(c), buildLimitCycleOptions(c));
    writeFileAtomic(dir / "trace.csv", traceCsv(tr));
    writeFileAtomic(dir / "events.csv", eventsCsv(tr));

    const auto tmpl = buildTemplate(c);
    const auto k = toTransferFunction(tmpl);
    const auto plant = buildSwitchedPlant(c);
    const auto grid = buildGrid(c);
    summary["metrics"] = metricsJson(m);
    summary["applied_memory_policy"] = std::string(toString(tr.memoryPolicy));
    summary["reset_events"] = tr.events.size();
    summary["stability"] = stabilityJson(quadraticStabilityCheck(k, plant, grid));
    summary["margins"] = marginsJson(loopMargins(k, plant.worst(), grid));
    if (!c.specs.empty()) {
        const auto problem = buildDesignProblem(c);
        summary["residuals"] = residualsJson(verify(tmpl.toVector(), problem).residuals);
    }
    writeSummary(dir, summary);
    writeFileAtomic(dir / "plot.py", exportPlotScript({{"output", "Output", "y", {{"trace.csv", c.controller.kind}}, true},
                                                      {"control", "Control signal", "u", {{"trace.csv", c.controller.kind}}, false}}));
    out << "ISE " << m.ise << ", overshoot " << m.overshootPct << " %, limit cycle " << toString(m.limitCycle.status) << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// Reproductions

struct RunSettings {
    double h;
    double horizon;
    std::optional<MemoryPolicy> policy;
};

RunSettings settingsFor(const Overrides& o, double h, double horizon) {
    RunSettings s{o.h.value_or(h), o.horizon.value_or(horizon), std::nullopt};
    if (o.memoryPolicy) s.policy = memoryPolicyFromString(*o.memoryPolicy);
    return s;
}

json settingsJson(const RunSettings& s, const ClosedLoopConfig& sample) {
    return {{"h", s.h},
            {"horizon", s.horizon},
            {"memory_policy", std::string(toString(s.policy.value_or(sample.memoryPolicy)))},
            {"memory_length", sample.memoryLength}};
}

SimulationTrace runLoop(ClosedLoopConfig loop, const RunSettings& s) {
    if (s.policy) loop.memoryPolicy = *s.policy;
    return simulate(loop);
}

int reproduceExample1(const fs::path& dir, const Overrides& o, json summary, std::ostream& out) {
    using namespace scenarios;
    const std::uint64_t seed = o.seed.value_or(1);
    const auto grid = logGrid(1e-3, 1e3, o.gridPoints.value_or(2000));
    const auto plant = vehiclePlant();

    json stab;
    for (const auto& [name, tmpl] : {std::pair{"FPI", vehicleFpi()}, std::pair{"PID", vehiclePid()}}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto st = quadraticStabilityCheck(toTransferFunction(tmpl), plant, grid);
        auto j = stabilityJson(st);
        j["params"] = tmpl.params;
        j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stab[name] = j;
        out << name << " max phase difference " << st.worstDifferenceDeg << " deg\n";
    }
    summary["stability"] = stab;

    auto problem = vehicleDesignProblem(ControllerKind::FPI);
    problem.grid = grid;
    problem.seed = seed;
    const auto paperPoint = vehicleFpi().toVector();
    const auto paper = verify(paperPoint, problem);
    summary["paper_point"] = {{"params", paramsJson(problem.kind, paperPoint)},
                              {"feasible", paper.feasible},
                              {"phase_margin_deg", paper.phaseMarginDeg},
                              {"residuals", residualsJson(paper.residuals)}};
    json design;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto best = solve(problem);
        const auto rep = verify(best.params, problem);
        design = {{"feasible", true},
                  {"params", paramsJson(problem.kind, best.params)},
                  {"phase_margin_deg", rep.phaseMarginDeg},
                  {"stability_margin_deg", rep.stabilityMarginDeg},
                  {"residuals", residualsJson(rep.residuals)}};
    } catch (const NoFeasiblePoint& e) {
        design = {{"feasible", false}, {"params", paramsJson(problem.kind, e.best().params)}};
    }
    design["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    design["starts"] = problem.latinHypercubeStarts + problem.initialGuesses.size();
    summary["design"] = design;
    out << "tuner " << (design["feasible"].get<bool>() ? "feasible " : "infeasible ") << design["params"].dump() << "\n";

    const auto s = settingsFor(o, kVehicleStep, kVehicleHorizon);
    json runs;
    std::vector<PlotSeries> ys;
    for (const auto& [name, tmpl] : {std::pair{"FPI", vehicleFpi()}, std::pair{"PID", vehiclePid()}}) {
        const auto loop = vehicleLoop(tmpl, seed, s.h, s.horizon);
        const auto tr = runLoop(loop, s);
        const auto stem = "trace_" + slug(name);
        writeTrace(dir, stem, tr);
        ys.push_back({stem + ".csv", name});
        const auto m = computeMetrics(tr, 50.0);
        runs[name] = {{"metrics", metricsJson(m)}, {"switches", loop.switching.switches.size()}};
        if (!summary.contains("settings")) summary["settings"] = settingsJson(s, loop);
    }
    summary["runs"] = runs;
    writeSummary(dir, summary);
    writeFileAtomic(dir / "plot.py", exportPlotScript({{"velocity", "Vehicle velocity", "y", ys, true},
                                                      {"control", "Control signal", "u", ys, false}}));
    return kOk;
}

int reproduceExample2(const fs::path& dir, const Overrides& o, json summary, std::ostream& out) {
    using namespace scenarios;
    const auto s = settingsFor(o, kActuatorStep, kActuatorHorizon);
    summary["feedforward_gain"] = actuatorFeedforwardGain();
    json runs;
    std::vector<PlotSeries> zc, fixed;
    for (auto c : allActuatorControllers()) {
        const auto loop = actuatorLoop(c, 1.0, s.h, s.horizon);
        const auto tr = runLoop(loop, s);
        const auto name = std::string(toString(c));
        const auto stem = "trace_" + slug(name);
        writeTrace(dir, stem, tr);
        const bool periodic = c == ActuatorController::Zheng || c == ActuatorController::GeneralFixedInstant;
        (periodic ? fixed : zc).push_back({stem + ".csv", name});
        const auto m = computeMetrics(tr, 1.0);
        runs[name] = {{"metrics", metricsJson(m)}, {"reset_events", tr.events.size()}};
        if (!summary.contains("settings")) summary["settings"] = settingsJson(s, loop);
        out << name << ": steady u " << m.steadyU << ", overshoot " << m.overshootPct << " %\n";
    }
    summary["runs"] = runs;

    // Reset-order sweep on the general zero-crossing controller.
    const double sweepHorizon = std::min(s.horizon, 10e-3);
    json sweep = json::array();
    std::vector<PlotSeries> alphas;
    for (double a : {1.0, 1.1, 1.2}) {
        const auto tr = runLoop(actuatorLoop(ActuatorController::GeneralZeroCrossing, a, s.h, sweepHorizon), s);
        const auto m = computeMetrics(tr, 1.0);
        char label[16];
        std::snprintf(label, sizeof label, "%.1f", a);
        const auto stem = "trace_alpha_" + slug(label);
        writeTrace(dir, stem, tr);
        alphas.push_back({stem + ".csv", std::string("alpha = ") + label});
        sweep.push_back({{"alpha", a},
                         {"overshoot_pct", m.overshootPct},
                         {"rise_time", m.riseTime},
                         {"applied_memory_policy", std::string(toString(tr.memoryPolicy))}});
    }
    summary["alpha_sweep"] = {{"horizon", sweepHorizon}, {"runs", sweep}};
    writeSummary(dir, summary);
    writeFileAtomic(dir / "plot.py", exportPlotScript({{"zero_crossing", "Zero-crossing reset controllers", "y", zc, true},
                                                      {"fixed_instant", "Fixed-instant reset controllers", "y", fixed, true},
                                                      {"control", "Control signal", "u", zc, false},
                                                      {"alpha_sweep", "General reset, varying alpha", "y", alphas, true}}));
    return kOk;
}

int reproduceExample3(const fs::path& dir, const Overrides& o, json summary, std::ostream& out) {
    using namespace scenarios;
    const auto s = settingsFor(o, kServoStep, kServoHorizon);
    const auto grid = logGrid(1e-3, 1e3, o.gridPoints.value_or(2000));
    summary["pi_margins"] = marginsJson(loopMargins(toTransferFunction(servoTemplate(ServoController::PI)), servoTransferFunction(), grid));
    json runs;
    std::vector<PlotSeries> base, reset;
    for (auto c : allServoControllers()) {
        const auto tmpl = servoTemplate(c);
        const auto loop = servoLoop(c, s.h, s.horizon);
        const auto tr = runLoop(loop, s);
        const auto name = std::string(toString(c));
        const auto stem = "trace_" + slug(name);
        writeTrace(dir, stem, tr);
        (isResetKind(tmpl.kind) ? reset : base).push_back({stem + ".csv", name});
        const auto m = computeMetrics(tr, 1.0);
        runs[name] = {{"params", tmpl.params}, {"metrics", metricsJson(m)}, {"reset_events", tr.events.size()}};
        if (!summary.contains("settings")) summary["settings"] = settingsJson(s, loop);
        out << name << ": overshoot " << m.overshootPct << " %, limit cycle " << toString(m.limitCycle.status) << "\n";
    }
    summary["runs"] = runs;
    writeSummary(dir, summary);
    writeFileAtomic(dir / "plot.py", exportPlotScript({{"base", "Base controllers", "y", base, true},
                                                      {"reset", "Reset controllers", "y", reset, true}}));
    return kOk;
}

template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        err << "config error at " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace

int runConfig(const std::string& command, const std::string& configPath, const std::string& outDir, const Overrides& overrides,
              std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto c = loadScenario(configPath);
        if (std::string(toString(c.kind)) != command) {
            throw ConfigError("/kind", "document is a '" + std::string(toString(c.kind)) + "' scenario, not '" + command + "'");
        }
        applyOverrides(c, overrides);
        c = parseScenario(dumpScenario(c));  // re-validate with the overrides applied
        const fs::path dir = !outDir.empty() ? outDir : (!c.output.empty() ? c.output : std::string("frhc_out"));
        fs::create_directories(dir);
        auto summary = header(command, c.kind == ScenarioKind::Design ? c.tuner.seed : c.simulation.seed);
        summary["name"] = c.name;
        summary["config"] = json::parse(dumpScenario(c));
        switch (c.kind) {
            case ScenarioKind::Design:
                return runDesign(c, dir, summary, out);
            case ScenarioKind::Simulate:
                return runSimulate(c, dir, summary, out);
            case ScenarioKind::Stability:
                return runStability(c, dir, summary, out);
            case ScenarioKind::DescribingFunction:
                return runDf(c, dir, summary, out);
        }
        return static_cast<int>(kUsage);
    });
}

int reproduce(const std::string& target, const std::string& outDir, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        if (overrides.memoryPolicy) memoryPolicyFromString(*overrides.memoryPolicy);
        const fs::path dir = !outDir.empty() ? fs::path(outDir) : fs::path("frhc_out") / target;
        fs::create_directories(dir);
        auto summary = header("reproduce " + target, overrides.seed.value_or(1));
        if (target == "example1") return reproduceExample1(dir, overrides, summary, out);
        if (target == "example2") return reproduceExample2(dir, overrides, summary, out);
        if (target == "example3") return reproduceExample3(dir, overrides, summary, out);
        throw ConfigError("/", "unknown reproduction '" + target + "'");
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional-order and reset controller design, simulation and analysis", "frhc"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.fallthrough();
    app.require_subcommand(1);

    std::string outDir;
    Overrides o;
    std::uint64_t seed = 0;
    std::size_t gridPoints = 0;
    double h = 0.0, horizon = 0.0;
    std::string policy;
    app.add_option("--out", outDir, "Output directory");
    auto* seedOpt = app.add_option("--seed", seed, "Seed for switching and tuner starts");
    auto* gridOpt = app.add_option("--grid-points", gridPoints, "Points in the log frequency grid")->check(CLI::Range(2, 10000000));
    auto* hOpt = app.add_option("--h", h, "Simulation step [s]")->check(CLI::PositiveNumber);
    auto* horizonOpt = app.add_option("--horizon", horizon, "Simulation horizon [s]")->check(CLI::PositiveNumber);
    auto* policyOpt = app.add_option("--memory-policy", policy, "Fractional memory at resets")->check(CLI::IsMember({"clear", "retain"}));
    app.add_flag("--strict-df", o.strictDf, "Use the alternative describing-function arrangement");

    std::string configPath, target, command;
    for (const char* name : {"design", "simulate", "stability", "df"}) {
        auto* sub = app.add_subcommand(name, std::string("Run a '") + name + "' scenario document");
        sub->add_option("config", configPath, "Scenario JSON")->required();
        sub->callback([&command, name] { command = name; });
    }
    auto* rep = app.add_subcommand("reproduce", "Run one of the bundled examples");
    rep->add_option("target", target, "example1, example2 or example3")
        ->required()
        ->check(CLI::IsMember({"example1", "example2", "example3"}));
    rep->callback([&command] { command = "reproduce"; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << "\n" << app.help();
        return kConfigError;
    }
    if (*seedOpt) o.seed = seed;
    if (*gridOpt) o.gridPoints = gridPoints;
    if (*hOpt) o.h = h;
    if (*horizonOpt) o.horizon = horizon;
    if (*policyOpt) o.memoryPolicy = policy;

    if (command == "reproduce") return reproduce(target, outDir, o, out, err);
    return runConfig(command, configPath, outDir, o, out, err);
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace frhc::cli
