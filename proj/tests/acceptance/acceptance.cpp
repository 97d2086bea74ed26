// Acceptance suite: one PASS/FAIL line per criterion, INFO lines for context.
// Exit status is the number of failed criteria (capped at 255).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "frhc/metrics.hpp"
#include "frhc/scenarios.hpp"

using namespace frhc;
using namespace frhc::scenarios;

namespace {

int failures = 0;

void check(const std::string& id, bool ok, const std::string& what) {
    std::printf("%s %-4s %s\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str());
    if (!ok) ++failures;
}

void info(const std::string& id, const std::string& what) { std::printf("INFO %-4s %s\n", id.c_str(), what.c_str()); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// RMS of (coarse - fine) at the shared instants, relative to RMS of coarse.
double halvingChange(const SimulationTrace& coarse, const SimulationTrace& fine) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < coarse.size() && 2 * k < fine.size(); ++k) {
        const double d = coarse.y[k] - fine.y[2 * k];
        num += d * d;
        den += coarse.y[k] * coarse.y[k];
    }
    return std::sqrt(num / den);
}

double rmsRelative(const std::vector<double>& a, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (a[i] - ref[i]) * (a[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return std::sqrt(num / den);
}

void criterion1() {
    const auto grid = logGrid();
    const auto plant = vehiclePlant();
    struct Row {
        const char* name;
        ControllerTemplate tmpl;
        double expected;
    };
    for (const auto& row : {Row{"FPI", vehicleFpi(), 27.35}, Row{"PID", vehiclePid(), 10.57}}) {
        StabilityReport r;
        const double dt = seconds([&] { r = quadraticStabilityCheck(toTransferFunction(row.tmpl), plant, grid); });
        check("1", std::abs(r.worstDifferenceDeg - row.expected) <= 0.5 && dt < 1.0,
              fmt("%s max phase difference %.3f deg (expected %.2f +/- 0.5), %.3f s (< 1 s)", row.name, r.worstDifferenceDeg,
                  row.expected, dt));
    }
}

void criterion2() {
    const auto problem = vehicleDesignProblem(ControllerKind::FPI);
    OptimizationResult best;
    bool found = true;
    const double dt = seconds([&] {
        try {
            best = solve(problem);
        } catch (const NoFeasiblePoint& e) {
            best = e.best();
            found = false;
        }
    });
    const auto rep = verify(best.params, problem);
    const double gain = gainAt(toTransferFunction(problem.controllerAt(best.params)), problem.plant.worst(), 0.8);
    check("2a", found && rep.feasible && rep.phaseMarginDeg >= 79.0 && std::abs(gain) <= 0.2 && rep.stabilityMarginDeg > 0.0 && dt < 30.0,
          fmt("tuned FPI (%.4f, %.4f, %.4f): PM %.3f deg, |KG| %.4f dB, stability margin %.3f deg, %zu starts, %.2f s", best.params[0],
              best.params[1], best.params[2], rep.phaseMarginDeg, gain, rep.stabilityMarginDeg, problem.latinHypercubeStarts, dt));

    const auto paper = vehicleFpi().toVector();
    const auto prep = verify(paper, problem);
    const double pgain = gainAt(toTransferFunction(vehicleFpi()), problem.plant.worst(), 0.8);
    check("2b", prep.feasible,
          fmt("published FPI (0.15, 0.07, 0.71): PM %.3f deg, |KG| %.4f dB (band 0.2), stability margin %.3f deg", prep.phaseMarginDeg,
              pgain, prep.stabilityMarginDeg));
}

void criterion3() {
    const auto gen = computeMetrics(simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing)), 1.0);
    check("3a", std::abs(gen.steadyU - 0.336) <= 0.002, fmt("general reset steady u %.5f (expected 0.336 +/- 0.002)", gen.steadyU));
    const auto zheng = computeMetrics(simulate(actuatorLoop(ActuatorController::Zheng)), 1.0);
    check("3b", std::abs(zheng.steadyU - 0.336) <= 0.002,
          fmt("periodic state-feedback reset steady u %.5f (expected 0.336 +/- 0.002)", zheng.steadyU));
    const double k = actuatorFeedforwardGain();
    check("3c", std::abs(k - 0.3333) <= 1e-6 || std::abs(k - 1.0 / 3.0) <= 1e-6, fmt("K = 1/P(0) = %.9f", k));
}

void criterion4() {
    struct Run {
        ActuatorController c;
        ResponseMetrics m;
    };
    std::vector<Run> runs;
    const double dt = seconds([&] {
        for (auto c : allActuatorControllers()) runs.push_back({c, computeMetrics(simulate(actuatorLoop(c)), 1.0)});
    });
    auto of = [&](ActuatorController c) -> const ResponseMetrics& {
        return std::find_if(runs.begin(), runs.end(), [&](const Run& r) { return r.c == c; })->m;
    };
    using A = ActuatorController;
    const std::vector<A> order{A::GeneralFixedInstant, A::GeneralZeroCrossing, A::PCIFeedforward, A::PI, A::PCI};

    auto describe = [&](double ResponseMetrics::*field) {
        std::string s;
        for (auto c : order) s += fmt("%s %.4g; ", std::string(toString(c)).c_str(), of(c).*field);
        return s;
    };
    auto increasing = [&](double ResponseMetrics::*field) {
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (!(of(order[i - 1]).*field < of(order[i]).*field)) return false;
        }
        return true;
    };
    check("4a", increasing(&ResponseMetrics::ise), "ISE ordering fixed < zero-crossing < PCI+FF < PI < PCI: " + describe(&ResponseMetrics::ise));
    info("4a", std::string("ISE from the first error sign change ") + (increasing(&ResponseMetrics::iseAfterFirstCrossing) ? "follows" : "breaks") +
                   " the ordering: " + describe(&ResponseMetrics::iseAfterFirstCrossing));

    struct Os {
        A c;
        double expected;
    };
    for (const auto& [c, expected] : {Os{A::PI, 36.30}, Os{A::PCIFeedforward, 24.56}, Os{A::GeneralZeroCrossing, 15.50}, Os{A::GeneralFixedInstant, 3.2}}) {
        const double os = of(c).overshootPct;
        check("4b", std::abs(os - expected) <= 3.0,
              fmt("%s overshoot %.2f %% (expected %.2f +/- 3)", std::string(toString(c)).c_str(), os, expected));
    }
    const double tPi = of(A::PI).riseTime, tPci = of(A::PCI).riseTime, tGen = of(A::GeneralZeroCrossing).riseTime;
    const double spread = std::max({tPi, tPci, tGen}) - std::min({tPi, tPci, tGen});
    check("4c", spread <= kActuatorStep * (1 + 1e-9),
          fmt("rise times PI %.6g, PCI %.6g, general %.6g s; spread %.3g s (one sample %.0e)", tPi, tPci, tGen, spread, kActuatorStep));
    check("4d", dt < 10.0, fmt("six Example 2 runs in %.2f s (< 10 s)", dt));
}

void criterion5() {
    const auto pci2 = computeMetrics(simulate(actuatorLoop(ActuatorController::PCI)), 1.0).limitCycle;
    check("5a", pci2.detected(), fmt("Example 2 PCI limit cycle %s (period %.4g s)", std::string(toString(pci2.status)).c_str(), pci2.period));
    const auto gen2 = computeMetrics(simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing)), 1.0).limitCycle;
    check("5b", !gen2.detected(), fmt("Example 2 general reset limit cycle %s", std::string(toString(gen2.status)).c_str()));
    for (auto c : {ServoController::PCI, ServoController::PCID}) {
        const auto lc = computeMetrics(simulate(servoLoop(c)), 1.0).limitCycle;
        check("5c", lc.detected(), fmt("Example 3 %s limit cycle %s (period %.4g s, amplitude %.4g)", std::string(toString(c)).c_str(),
                                       std::string(toString(lc.status)).c_str(), lc.period, lc.amplitude));
    }
    const auto fpci = computeMetrics(simulate(servoLoop(ServoController::FPCI)), 1.0).limitCycle;
    check("5d", !fpci.detected(), fmt("Example 3 FPCI alpha = 0.75 limit cycle %s (retain policy)", std::string(toString(fpci.status)).c_str()));
    auto cleared = servoLoop(ServoController::FPCI);
    cleared.memoryPolicy = MemoryPolicy::Clear;
    const auto fc = computeMetrics(simulate(cleared), 1.0).limitCycle;
    info("5d", fmt("under the clear policy FPCI limit cycle is %s", std::string(toString(fc.status)).c_str()));
}

void criterion6() {
    for (double w : {0.1, 1.0, 10.0}) {
        const auto n = ciAlphaDescribingFunction(1.0, w);
        const auto clegg = 1.0 / std::complex<double>(0.0, w) * std::complex<double>(1.0, 4.0 / kPi);
        const double rel = std::abs(n - clegg) / std::abs(clegg);
        check("6a", rel <= 1e-4,
              fmt("w = %g: |N| w = %.6f, phase %.4f deg, relative error vs Clegg %.2e", w, std::abs(n) * w, deg(std::arg(n)), rel));
    }
    info("6a", fmt("rounded magnitude 1.6188 differs from sqrt(1 + 16/pi^2) = %.6f by %.1e relative",
                   std::sqrt(1.0 + 16.0 / (kPi * kPi)), std::abs(1.6188 / std::sqrt(1.0 + 16.0 / (kPi * kPi)) - 1.0)));

    std::uint64_t state = 12345;
    auto uniform = [&] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) / 9007199254740992.0;
    };
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double alpha = 0.05 + 1.9 * uniform(), w = std::pow(10.0, -3.0 + 6.0 * uniform());
        const double kp = 0.1 + 2.0 * uniform(), tau = 0.01 + uniform();
        const auto lin = kp * (1.0 + 1.0 / (tau * std::polar(std::pow(w, alpha), alpha * kPi / 2.0)));
        worst = std::max(worst, std::abs(describingFunction(kp, tau, 0.0, alpha, w) - lin) / std::abs(lin));
    }
    check("6b", worst <= 1e-12, fmt("P_reset = 0 vs linear PI^alpha over 100 samples: worst relative error %.2e", worst));
}

void criterion7() {
    // GL at alpha = 1 against explicit Euler on x' = -x + sin t.
    const double h = 1e-3;
    GlState gl(GlKernel(1.0, h), 1.0);
    double euler = 1.0, t = 0.0;
    bool same = true;
    for (int k = 0; k < 10000; ++k) {
        const double rhs = -gl.value() + std::sin(t);
        const double eulerNext = euler + h * (-euler + std::sin(t));
        gl.advance(rhs);
        euler = eulerNext;
        t += h;
        same = same && gl.value() == euler;
    }
    check("7a", same, "GL alpha = 1 equals explicit Euler bit-for-bit over 10000 steps");

    const auto cfg = vehicleLoop(vehicleFpi(), 1, 1e-3, 40.0);
    const auto glRun = simulate(cfg);
    const auto ou = simulateOustaloupFpi(0.15, 0.07, 0.71, cfg, 1e-4, 1e2, 12);
    const double d = rmsRelative(ou.y, glRun.y);
    check("7b", d < 0.03, fmt("Example 1 FPI loop, GL vs Oustaloup (1e-4..1e2 rad/s, 12 cells) over 40 s: RMS difference %.2e", d));

    double worst1 = 0.0;
    for (const auto& tmpl : {vehicleFpi(), vehiclePid()}) {
        const auto a = simulate(vehicleLoop(tmpl, 1, kVehicleStep, 50.0));
        const auto b = simulate(vehicleLoop(tmpl, 1, kVehicleStep / 2, 50.0));
        worst1 = std::max(worst1, halvingChange(a, b));
    }
    check("7c", worst1 < 0.02, fmt("Example 1 (FPI, PID; 50 s): halving h changes output by %.2e RMS", worst1));

    double worst2 = 0.0;
    for (auto c : allActuatorControllers()) {
        worst2 = std::max(worst2, halvingChange(simulate(actuatorLoop(c)), simulate(actuatorLoop(c, 1.0, kActuatorStep / 2))));
    }
    check("7c", worst2 < 0.02, fmt("Example 2 (all six controllers): halving h changes output by %.2e RMS", worst2));

    double worst3 = 0.0;
    for (auto c : allServoControllers()) {
        worst3 = std::max(worst3, halvingChange(simulate(servoLoop(c)), simulate(servoLoop(c, kServoStep / 2))));
    }
    check("7c", worst3 < 0.02, fmt("Example 3 (all six controllers): halving h changes output by %.2e RMS", worst3));
}

void criterion8() {
    std::vector<ResponseMetrics> m;
    std::string s;
    for (double a : {1.0, 1.1, 1.2}) {
        const auto tr = simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing, a, kActuatorStep, 10e-3));
        m.push_back(computeMetrics(tr, 1.0));
        s += fmt("alpha %.1f: overshoot %.2f %%, rise %.4g ms (%s); ", a, m.back().overshootPct, m.back().riseTime * 1e3,
                 std::string(toString(tr.memoryPolicy)).c_str());
    }
    const bool ok = m[0].overshootPct > m[1].overshootPct && m[1].overshootPct > m[2].overshootPct && m[0].riseTime < m[1].riseTime &&
                    m[1].riseTime < m[2].riseTime;
    check("8", ok, s);
}

void criterion9() {
    const auto lm = loopMargins(toTransferFunction(servoTemplate(ServoController::PI)), servoTransferFunction(), logGrid());
    const double wc = lm.crossoverRadS.value_or(NAN), pm = lm.phaseMarginDeg.value_or(NAN);
    check("9", std::abs(wc - 5.5) <= 0.3 && std::abs(pm - 42.0) <= 3.0,
          fmt("servo PI(1.6, 18.5): crossover %.4f rad/s (5.5 +/- 0.3), phase margin %.3f deg (42 +/- 3)", wc, pm));
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void()>>> all{
        {"quadratic stability", criterion1}, {"design feasibility", criterion2}, {"steady control", criterion3},
        {"Example 2 table", criterion4},     {"limit cycles", criterion5},       {"describing function", criterion6},
        {"numerical kernels", criterion7},   {"alpha monotonicity", criterion8}, {"servo margins", criterion9},
    };
    for (const auto& [name, fn] : all) {
        try {
            fn();
        } catch (const std::exception& e) {
            check("?", false, std::string(name) + " threw: " + e.what());
        }
        std::fflush(stdout);
    }
    std::printf("%d criterion line(s) failed\n", failures);
    return std::min(failures, 255);
}
