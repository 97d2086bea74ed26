#include <gtest/gtest.h>

#include <cmath>

#include "frhc/metrics.hpp"
#include "frhc/scenarios.hpp"

using namespace frhc;
using namespace frhc::scenarios;

namespace {

double rmsRelative(const std::vector<double>& a, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (a[i] - ref[i]) * (a[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return std::sqrt(num / den);
}

// Mean of u right after each periodic reset over the last half of the run.
double postResetU(const SimulationTrace& tr) {
    double sum = 0.0;
    int n = 0;
    for (const auto& ev : tr.events) {
        if (tr.t[ev.sample] < tr.t.back() / 2) continue;
        sum += tr.u[ev.sample];
        ++n;
    }
    return sum / n;
}

}  // namespace

TEST(PlantModel, Realisations) {
    EXPECT_NEAR(servoPlant().dcGain(), 0.93, 1e-12);
    EXPECT_NEAR(actuatorPlant().dcGain(), 3.0, 1e-12);
    EXPECT_NEAR(PlantModel::fromTransferFunction(actuatorTransferFunction()).dcGain(), 3.0, 1e-12);
    EXPECT_NEAR(actuatorFeedforwardGain(), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(actuatorPlant().fastestTimeConstant(), 1e-3, 1e-12);

    const FractionalTransferFunction improper(FractionalPolynomial({{1.0, 1.0}}), FractionalPolynomial({{1.0, 1.0}, {1.0, 0.0}}));
    EXPECT_THROW(PlantModel::fromTransferFunction(improper), std::invalid_argument);
    const FractionalTransferFunction frac(FractionalPolynomial::constant(1.0), FractionalPolynomial({{1.0, 0.5}, {1.0, 0.0}}));
    EXPECT_THROW(PlantModel::fromTransferFunction(frac), std::invalid_argument);
}

TEST(ClosedLoopConfig, RejectsBadSteps) {
    auto cfg = actuatorLoop(ActuatorController::PI);
    cfg.h = 1e-4;  // a tenth of the actuator time constant
    EXPECT_THROW(simulate(cfg), std::invalid_argument);
    cfg = actuatorLoop(ActuatorController::PI);
    cfg.horizon = cfg.h / 2;
    EXPECT_THROW(simulate(cfg), std::invalid_argument);
    cfg = actuatorLoop(ActuatorController::PI);
    cfg.switching.switches = {{0.0, 3}};
    EXPECT_THROW(simulate(cfg), std::invalid_argument);
}

TEST(ResetSpec, PaperMatricesForPIalphaCIalpha) {
    const auto c = makePIalphaCIalpha(2.0, 0.5, 1.0, 0.8);
    EXPECT_EQ(c.A, Eigen::MatrixXd::Zero(2, 2));
    EXPECT_EQ(c.B, Eigen::VectorXd::Ones(2));
    EXPECT_DOUBLE_EQ(c.C(0), 0.0);
    EXPECT_DOUBLE_EQ(c.C(1), 4.0);
    EXPECT_DOUBLE_EQ(c.D, 2.0);
    Eigen::MatrixXd ar(2, 2);
    ar << 1, 0, 0, 0;
    EXPECT_EQ(c.AR, ar);
    EXPECT_NO_THROW(c.validate());
    EXPECT_THROW(makePIalphaCIalpha(1.0, 0.0, 0.5, 1.0), std::invalid_argument);
    EXPECT_THROW(makePIalphaCIalpha(1.0, 1.0, 1.5, 1.0), std::invalid_argument);

    auto bad = c;
    bad.AR(0, 0) = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Simulate, TraceInvariants) {
    const auto tr = simulate(servoLoop(ServoController::PCI));
    ASSERT_EQ(tr.y.size(), tr.t.size());
    ASSERT_EQ(tr.u.size(), tr.t.size());
    ASSERT_EQ(tr.active.size(), tr.t.size());
    for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_NEAR(tr.e[k], tr.r[k] - tr.y[k], 1e-12);
    ASSERT_FALSE(tr.events.empty());
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        const auto& ev = tr.events[i];
        EXPECT_GE(ev.time, tr.t[ev.sample] - tr.h);
        EXPECT_LE(ev.time, tr.t[ev.sample]);
        EXPECT_LE(std::abs(ev.post[0]), std::abs(ev.pre[0]));
        if (i > 0) EXPECT_GE(ev.sample - tr.events[i - 1].sample, 2u);
    }
}

TEST(Simulate, IdentityJumpReproducesLinearBitForBit) {
    auto cfg = servoLoop(ServoController::PCI);
    cfg.controller.AR = Eigen::MatrixXd::Identity(1, 1);
    cfg.controller.BR = Eigen::VectorXd::Zero(1);
    cfg.controller.nR = 0;
    const auto reset = simulate(cfg);
    const auto linear = simulate(servoLoop(ServoController::PI));
    EXPECT_FALSE(reset.events.empty());
    EXPECT_EQ(reset.y, linear.y);
    EXPECT_EQ(reset.u, linear.u);
}

TEST(Simulate, NonResetStatesUntouchedByJumps) {
    auto cfg = servoLoop(ServoController::PI);
    cfg.controller = makePIalphaCIalpha(1.6, 1.6 / 18.5, 0.5, 0.8);
    const auto tr = simulate(cfg);
    ASSERT_FALSE(tr.events.empty());
    for (const auto& ev : tr.events) EXPECT_EQ(ev.pre[0], ev.post[0]);
}

TEST(Simulate, PIalphaCIalphaReductions) {
    // P_reset = 0: plain PI^alpha.
    auto cfg = servoLoop(ServoController::FPI);
    const auto fpi = simulate(cfg);
    cfg.controller = makePIalphaCIalpha(0.067, 0.067 / 13.4, 0.0, 0.75);
    const auto split = simulate(cfg);
    EXPECT_LT(rmsRelative(split.y, fpi.y), 1e-9);

    // P_reset = 1, alpha = 1: proportional plus Clegg integrator.
    auto pci = servoLoop(ServoController::PCI);
    const auto ref = simulate(pci);
    pci.controller = makePIalphaCIalpha(1.6, 1.6 / 18.5, 1.0, 1.0);
    const auto full = simulate(pci);
    EXPECT_LT(rmsRelative(full.y, ref.y), 1e-9);
    EXPECT_EQ(full.events.size(), ref.events.size());
}

TEST(Simulate, DeterministicReplay) {
    auto cfg = vehicleLoop(vehiclePid(), 42, 1e-2, 60.0);
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.active, b.active);
    EXPECT_GT(cfg.switching.switches.size(), 5u);
}

TEST(Switching, SeededDwellTimes) {
    const auto s = randomSwitching(7, 500.0, 2);
    ASSERT_GT(s.switches.size(), 10u);
    for (std::size_t i = 1; i < s.switches.size(); ++i) {
        const double dwell = s.switches[i].first - s.switches[i - 1].first;
        EXPECT_GE(dwell, 2.0);
        EXPECT_LE(dwell, 10.0);
        EXPECT_NE(s.switches[i].second, s.switches[i - 1].second);
    }
    EXPECT_EQ(randomSwitching(7, 500.0, 2).switches, s.switches);
}

TEST(Actuator, PeriodicStateFeedbackSteadyControl) {
    const auto tr = simulate(actuatorLoop(ActuatorController::Zheng));
    EXPECT_NEAR(postResetU(tr), 0.336, 0.002);
    EXPECT_NEAR((0.08 / (8.0 / 3.0 * 1e-4)) * (-2.8e-4 + 0.0014), 0.336, 1e-12);
}

TEST(Actuator, ZeroGainsResetToZero) {
    auto cfg = actuatorLoop(ActuatorController::Zheng);
    cfg.controller = makeZhengReset(0.0, 0.0, 0.0);
    cfg.horizon = 5e-3;
    const auto tr = simulate(cfg);
    ASSERT_EQ(tr.events.size(), 5u);
    for (const auto& ev : tr.events) EXPECT_EQ(ev.post[0], 0.0);
}

TEST(Actuator, GeneralResetSettlesOnFeedforwardGain) {
    const auto tr = simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing));
    const auto m = computeMetrics(tr, 1.0);
    EXPECT_NEAR(m.steadyU, 1.0 / 3.0, 1e-6);
}

TEST(Actuator, RiseTimeMatchesBaseController) {
    const auto pi = computeMetrics(simulate(actuatorLoop(ActuatorController::PI)), 1.0);
    const auto gen = computeMetrics(simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing)), 1.0);
    EXPECT_LE(std::abs(pi.riseTime - gen.riseTime), kActuatorStep);
}

TEST(Actuator, FlowMatchesClosedLoopTransferFunctionBeforeFirstReset) {
    const auto tr = simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing));
    const auto tf = closedLoopTF(actuatorBasePi(), actuatorTransferFunction(), false, 0.0);
    const auto oracle = stepResponse(tf, kActuatorStep, kActuatorHorizon);
    const std::size_t first = tr.events.front().sample;
    ASSERT_GT(first, 100u);
    double worst = 0.0;
    for (std::size_t k = first / 10; k < first; ++k) worst = std::max(worst, std::abs(tr.y[k] - oracle[k]));
    EXPECT_LT(worst, 0.01);
}

TEST(ClosedLoopTF, DcGains) {
    const auto base = actuatorBasePi();
    const auto plain = closedLoopTF(base, actuatorTransferFunction(), false, 0.0);
    const auto ff = closedLoopTF(base, actuatorTransferFunction(), true, actuatorFeedforwardGain());
    EXPECT_NEAR(plain.dcGain(), 1.0, 1e-12);
    EXPECT_NEAR(ff.dcGain(), 1.0, 1e-12);
    EXPECT_GT(std::abs(ff(2000.0) - plain(2000.0)), 0.05);

    const FractionalTransferFunction one(FractionalPolynomial::constant(1.0), FractionalPolynomial({{1.0, 1.0}, {1.0, 0.0}}));
    const auto cl = closedLoopTF(FractionalTransferFunction::gain(1.0), one, false, 0.0);
    EXPECT_EQ(cl.den(), FractionalPolynomial({{1.0, 1.0}, {2.0, 0.0}}));
}

TEST(Actuator, HigherOrderLowersOvershootAndSlowsRise) {
    double prevOs = 1e9, prevRise = 0.0;
    for (double alpha : {1.0, 1.1, 1.2}) {
        const auto tr = simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing, alpha, kActuatorStep, 10e-3));
        const auto m = computeMetrics(tr, 1.0);
        EXPECT_LT(m.overshootPct, prevOs);
        EXPECT_GT(m.riseTime, prevRise);
        prevOs = m.overshootPct;
        prevRise = m.riseTime;
        if (alpha > 1.0) EXPECT_EQ(tr.memoryPolicy, MemoryPolicy::Clear);
    }
}

TEST(Vehicle, OustaloupLoopAgreesWithGl) {
    auto cfg = vehicleLoop(vehicleFpi(), 1, 1e-3, 40.0);
    const auto gl = simulate(cfg);
    const auto ou = simulateOustaloupFpi(0.15, 0.07, 0.71, cfg, 1e-4, 1e2, 12);
    EXPECT_LT(rmsRelative(ou.y, gl.y), 0.03);
}

TEST(Servo, FractionalResetAvoidsLimitCycleUnderRetain) {
    auto cfg = servoLoop(ServoController::FPCI);
    EXPECT_FALSE(computeMetrics(simulate(cfg), 1.0).limitCycle.detected());
    EXPECT_TRUE(computeMetrics(simulate(servoLoop(ServoController::PCI)), 1.0).limitCycle.detected());
    EXPECT_TRUE(computeMetrics(simulate(servoLoop(ServoController::PCID)), 1.0).limitCycle.detected());
}

TEST(Simulate, ShortMemoryOption) {
    auto cfg = servoLoop(ServoController::FPI);
    cfg.memoryLength = 2000;
    const auto window = simulate(cfg);
    const auto full = simulate(servoLoop(ServoController::FPI));
    EXPECT_LT(rmsRelative(window.y, full.y), 0.05);
    EXPECT_NE(window.y, full.y);
}
