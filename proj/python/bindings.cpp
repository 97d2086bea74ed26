#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "frhc/cli.hpp"
#include "frhc/config.hpp"
#include "frhc/metrics.hpp"
#include "frhc/scenarios.hpp"

namespace py = pybind11;
using namespace frhc;

namespace {

using Terms = std::vector<std::pair<double, double>>;

FractionalPolynomial poly(const Terms& terms) {
    std::vector<FractionalTerm> t;
    for (const auto& [c, o] : terms) t.push_back({c, o});
    return FractionalPolynomial(t);
}

FractionalTransferFunction tf(const Terms& num, const Terms& den) { return {poly(num), poly(den)}; }

py::array_t<double> array(const std::vector<double>& v) { return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data()); }

py::dict metricsDict(const ResponseMetrics& m) {
    py::dict lc;
    lc["status"] = std::string(toString(m.limitCycle.status));
    lc["detected"] = m.limitCycle.detected();
    lc["amplitude"] = m.limitCycle.amplitude;
    lc["period"] = m.limitCycle.period;
    lc["decay_per_period"] = m.limitCycle.decayPerPeriod;
    py::dict d;
    d["ise"] = m.ise;
    d["ise_after_first_crossing"] = m.iseAfterFirstCrossing;
    d["max_u"] = m.maxU;
    d["steady_u"] = m.steadyU;
    d["overshoot_pct"] = m.overshootPct;
    d["rise_time"] = m.riseTime;
    d["settling_time"] = m.settlingTime;
    d["limit_cycle"] = lc;
    return d;
}

py::dict traceDict(const SimulationTrace& tr) {
    py::dict d;
    d["t"] = array(tr.t);
    d["y"] = array(tr.y);
    d["u"] = array(tr.u);
    d["e"] = array(tr.e);
    d["r"] = array(tr.r);
    d["active"] = py::array_t<std::size_t>(static_cast<py::ssize_t>(tr.active.size()), tr.active.data());
    std::vector<double> times;
    for (const auto& ev : tr.events) times.push_back(ev.time);
    d["reset_times"] = array(times);
    d["memory_policy"] = std::string(toString(tr.memoryPolicy));
    return d;
}

// Python exceptions carry the config path in the message.
template <class F>
auto withConfigErrors(F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw py::value_error(e.what());
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fractional-order and reset control toolkit";
    m.attr("__version__") = FRHC_VERSION_STRING;

    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

    m.def("gl_weights", &glWeights, py::arg("alpha"), py::arg("n"), "Grunwald-Letnikov weights w_0..w_n.");

    m.def(
        "log_grid", [](double lo, double hi, std::size_t n) { return array(logGrid(lo, hi, n)); }, py::arg("w_min") = 1e-3,
        py::arg("w_max") = 1e3, py::arg("points") = 2000);

    m.def(
        "freq_response",
        [](const Terms& num, const Terms& den, const std::vector<double>& omegas) { return freqResponse(tf(num, den), omegas); },
        py::arg("num"), py::arg("den"), py::arg("omegas"),
        "Complex response of num/den; polynomials are lists of (coefficient, order).");

    m.def(
        "controller_tf",
        [](const std::string& kind, const std::map<std::string, double>& params) {
            const auto k = toTransferFunction(ControllerTemplate{controllerKindFromString(kind), params});
            Terms num, den;
            for (const auto& t : k.num().terms()) num.emplace_back(t.coeff, t.order);
            for (const auto& t : k.den().terms()) den.emplace_back(t.coeff, t.order);
            return std::make_pair(num, den);
        },
        py::arg("kind"), py::arg("params"));

    m.def(
        "stability_check",
        [](const std::string& kind, const std::map<std::string, double>& params, const std::vector<std::pair<Terms, Terms>>& plants,
           std::size_t points) {
            SwitchedPlant sp;
            for (const auto& [n, d] : plants) sp.subsystems.push_back(tf(n, d));
            const auto grid = logGrid(1e-3, 1e3, points);
            const auto r = quadraticStabilityCheck(toTransferFunction(ControllerTemplate{controllerKindFromString(kind), params}), sp, grid);
            py::dict d;
            d["pass"] = r.pass;
            d["max_phase_difference_deg"] = r.worstDifferenceDeg;
            d["margin_deg"] = r.marginDeg;
            d["pair_differences_deg"] = r.pairDifferencesDeg;
            return d;
        },
        py::arg("kind"), py::arg("params"), py::arg("plants"), py::arg("grid_points") = 2000);

    m.def(
        "loop_margins",
        [](const std::string& kind, const std::map<std::string, double>& params, const Terms& num, const Terms& den) {
            const auto lm = loopMargins(toTransferFunction(ControllerTemplate{controllerKindFromString(kind), params}), tf(num, den),
                                        logGrid());
            return std::make_pair(lm.crossoverRadS, lm.phaseMarginDeg);
        },
        py::arg("kind"), py::arg("params"), py::arg("num"), py::arg("den"), "(crossover rad/s, phase margin deg), None when absent.");

    m.def("describing_function", &describingFunction, py::arg("kp"), py::arg("tau_i"), py::arg("p_reset"), py::arg("alpha"),
          py::arg("omega"), py::arg("strict") = false);
    m.def("ci_alpha_describing_function", &ciAlphaDescribingFunction, py::arg("alpha"), py::arg("omega"));

    m.def(
        "normalize_scenario", [](const std::string& text) { return withConfigErrors([&] { return dumpScenario(parseScenario(text)); }); },
        py::arg("json_text"), "Validate a scenario document and return its full echo. Raises ValueError naming the path.");

    m.def(
        "simulate_scenario",
        [](const std::string& text) {
            const auto c = withConfigErrors([&] { return parseScenario(text); });
            const auto loop = withConfigErrors([&] { return buildClosedLoop(c); });
            SimulationTrace tr;
            {
                py::gil_scoped_release release;
                tr = simulate(loop);
            }
            auto d = traceDict(tr);
            d["metrics"] = metricsDict(computeMetrics(tr, metricsFinalValue(c), buildLimitCycleOptions(c)));
            return d;
        },
        py::arg("json_text"));

    m.def(
        "design",
        [](const std::string& text) {
            const auto c = withConfigErrors([&] { return parseScenario(text); });
            const auto problem = buildDesignProblem(c);
            OptimizationResult best;
            {
                py::gil_scoped_release release;
                try {
                    best = solve(problem);
                } catch (const NoFeasiblePoint& e) {
                    best = e.best();
                }
            }
            const auto rep = verify(best.params, problem);
            py::dict d;
            d["feasible"] = best.feasible;
            d["params"] = best.params;
            d["names"] = parameterNames(problem.kind);
            d["phase_margin_deg"] = rep.phaseMarginDeg;
            d["stability_margin_deg"] = rep.stabilityMarginDeg;
            return d;
        },
        py::arg("json_text"));

    m.def(
        "actuator_run",
        [](const std::string& controller, double alpha, double h, double horizon) {
            for (auto c : scenarios::allActuatorControllers()) {
                if (scenarios::toString(c) != controller) continue;
                SimulationTrace tr;
                {
                    py::gil_scoped_release release;
                    tr = simulate(scenarios::actuatorLoop(c, alpha, h, horizon));
                }
                auto d = traceDict(tr);
                d["metrics"] = metricsDict(computeMetrics(tr, 1.0));
                return d;
            }
            throw py::value_error("unknown actuator controller '" + controller + "'");
        },
        py::arg("controller"), py::arg("alpha") = 1.0, py::arg("h") = scenarios::kActuatorStep,
        py::arg("horizon") = scenarios::kActuatorHorizon, "Example 2 run: PI, PCI, PCI+FF, general_zero_crossing, ...");

    m.def("actuator_feedforward_gain", &scenarios::actuatorFeedforwardGain);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line front-end in-process; returns (exit code, stdout, stderr).");
}
