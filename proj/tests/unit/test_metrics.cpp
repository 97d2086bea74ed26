#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "frhc/metrics.hpp"
#include "frhc/scenarios.hpp"

using namespace frhc;

namespace {

SimulationTrace syntheticTrace(double h, std::size_t n, const std::function<double(double)>& y, double r = 1.0) {
    SimulationTrace tr;
    tr.h = h;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        tr.t.push_back(t);
        tr.y.push_back(y(t));
        tr.r.push_back(r);
        tr.e.push_back(r - y(t));
        tr.u.push_back(0.0);
    }
    return tr;
}

// Classical Clegg integrator describing function (1/jw)(1 + j 4/pi).
std::complex<double> clegg(double w) { return 1.0 / std::complex<double>(0.0, w) * std::complex<double>(1.0, 4.0 / kPi); }

}  // namespace

TEST(Metrics, ConstantTrace) {
    const auto tr = syntheticTrace(0.01, 100, [](double) { return 1.0; });
    const auto m = computeMetrics(tr, 1.0);
    EXPECT_EQ(m.overshootPct, 0.0);
    EXPECT_EQ(m.riseTime, 0.0);
    EXPECT_EQ(m.ise, 0.0);
    EXPECT_EQ(m.settlingTime, 0.0);
    EXPECT_THROW(computeMetrics(SimulationTrace{}, 1.0), std::invalid_argument);
}

TEST(Metrics, FirstOrderOracle) {
    // y = 1 - exp(-t): rise to 90% at ln 10, ISE -> 1/2.
    const double h = 1e-4;
    const auto tr = syntheticTrace(h, 200001, [](double t) { return 1.0 - std::exp(-t); });
    const auto m = computeMetrics(tr, 1.0);
    EXPECT_NEAR(m.riseTime, std::log(10.0), h);
    EXPECT_NEAR(m.ise, 0.5, 1e-3);
    EXPECT_NEAR(m.settlingTime, std::log(50.0), h);
    EXPECT_EQ(m.overshootPct, 0.0);
}

TEST(Metrics, IseAdditiveOverConcatenation) {
    const auto a = syntheticTrace(0.01, 300, [](double t) { return std::sin(t); });
    auto b = a;
    for (auto& v : b.e) v *= 0.5;
    auto joined = a;
    joined.e.insert(joined.e.end(), b.e.begin(), b.e.end());
    joined.y.insert(joined.y.end(), b.y.begin(), b.y.end());
    joined.u.insert(joined.u.end(), b.u.begin(), b.u.end());
    joined.r.insert(joined.r.end(), b.r.begin(), b.r.end());
    for (std::size_t k = 0; k < b.t.size(); ++k) joined.t.push_back(a.t.back() + 0.01 * (k + 1));
    EXPECT_NEAR(computeMetrics(joined, 1.0).ise, computeMetrics(a, 1.0).ise + computeMetrics(b, 1.0).ise, 1e-12);
}

TEST(LimitCycle, SyntheticSignals) {
    const double h = 1e-3;
    const auto decaying = syntheticTrace(h, 10001, [](double t) { return 1.0 - std::exp(-t); });
    EXPECT_EQ(detectLimitCycle(decaying, 0.5).status, LimitCycleStatus::NotDetected);

    const auto sustained = syntheticTrace(h, 10001, [](double t) { return 1.0 + 0.1 * std::sin(2 * kPi * t / 0.5); });
    const auto lc = detectLimitCycle(sustained, 0.5);
    EXPECT_EQ(lc.status, LimitCycleStatus::Detected);
    EXPECT_NEAR(lc.period, 0.5, 0.01);
    EXPECT_NEAR(lc.amplitude, 0.1, 0.005);

    const auto ringing = syntheticTrace(h, 10001, [](double t) { return 1.0 + 0.3 * std::exp(-t) * std::sin(2 * kPi * t / 0.5); });
    EXPECT_EQ(detectLimitCycle(ringing, 0.5).status, LimitCycleStatus::NotDetected);

    const auto slow = syntheticTrace(h, 10001, [](double t) { return 1.0 + 0.1 * std::sin(2 * kPi * t / 3.0); });
    EXPECT_EQ(detectLimitCycle(slow, 0.5).status, LimitCycleStatus::Indeterminate);

    EXPECT_THROW(detectLimitCycle(sustained, 1.0), std::invalid_argument);
}

TEST(LimitCycle, StableLinearLoopsNeverFlagged) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tau(0.1, 1.0), gain(0.5, 2.0), kp(0.2, 2.0), ki(0.2, 3.0);
    for (int i = 0; i < 20; ++i) {
        ClosedLoopConfig cfg;
        const FractionalTransferFunction g(FractionalPolynomial::constant(gain(rng)), FractionalPolynomial({{tau(rng), 1.0}, {1.0, 0.0}}));
        cfg.plants = {PlantModel::fromTransferFunction(g)};
        cfg.controller = realize({ControllerKind::PI, {{"K_p", kp(rng)}, {"K_i", ki(rng)}}});
        cfg.h = 1e-3;
        cfg.horizon = 40.0;
        EXPECT_FALSE(detectLimitCycle(simulate(cfg), 0.5).detected()) << i;
    }
}

TEST(Metrics, ActuatorOvershootRows) {
    using namespace frhc::scenarios;
    const auto pi = computeMetrics(simulate(actuatorLoop(ActuatorController::PI, 1.0, kActuatorStep, 10e-3)), 1.0);
    const auto gen = computeMetrics(simulate(actuatorLoop(ActuatorController::GeneralZeroCrossing, 1.0, kActuatorStep, 10e-3)), 1.0);
    EXPECT_NEAR(pi.overshootPct, 36.30, 3.0);
    EXPECT_NEAR(gen.overshootPct, 15.50, 3.0);
    EXPECT_LE(std::abs(pi.riseTime - gen.riseTime), kActuatorStep);
}

TEST(DescribingFunction, CleggLimit) {
    for (double w : {0.1, 1.0, 10.0}) {
        const auto n = ciAlphaDescribingFunction(1.0, w);
        EXPECT_NEAR(std::abs(n - clegg(w)), 0.0, 1e-12 * std::abs(clegg(w)));
        EXPECT_NEAR(std::abs(n) * w, std::sqrt(1.0 + 16.0 / (kPi * kPi)), 1e-12);
        EXPECT_NEAR(deg(std::arg(n)), -38.1460, 1e-4);
    }
}

TEST(DescribingFunction, HandEvaluation) {
    const auto n = describingFunction(1.0, 1.0, 1.0, 1.0, 1.0);
    EXPECT_NEAR(n.real(), 1.0 + 4.0 / kPi, 1e-12);
    EXPECT_NEAR(n.real(), 2.2732, 1e-4);
    EXPECT_NEAR(n.imag(), -1.0, 1e-12);
    EXPECT_THROW(describingFunction(1.0, 1.0, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(DescribingFunction, ZeroResetIsLinear) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> a(0.05, 1.95), lw(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double alpha = a(rng), w = std::pow(10.0, lw(rng));
        const auto lin = 2.0 * (1.0 + 1.0 / (0.3 * std::polar(std::pow(w, alpha), alpha * kPi / 2.0)));
        const auto n = describingFunction(2.0, 0.3, 0.0, alpha, w);
        EXPECT_LE(std::abs(n - lin), 1e-12 * std::abs(lin));
    }
}

TEST(DescribingFunction, ContinuousInResetFraction) {
    const auto a = describingFunction(1.0, 0.5, 0.3, 0.7, 2.0);
    const auto b = describingFunction(1.0, 0.5, 0.3 + 1e-9, 0.7, 2.0);
    EXPECT_LT(std::abs(a - b), 1e-7);
}

TEST(DescribingFunction, PhaseLeadOverFractionalIntegrator) {
    for (double alpha = 0.05; alpha <= 1.0 + 1e-12; alpha += 0.05) {
        for (double w : {0.01, 1.0, 100.0}) {
            EXPECT_GT(deg(std::arg(ciAlphaDescribingFunction(alpha, w))), -alpha * 90.0);
        }
    }
}

TEST(DescribingFunction, StrictArrangementFlipsPhase) {
    const auto strict = describingFunction(1.0, 1.0, 1.0, 1.0, 1.0, true) - 1.0;
    EXPECT_NEAR(deg(std::arg(strict)), 38.1460, 1e-4);
}
