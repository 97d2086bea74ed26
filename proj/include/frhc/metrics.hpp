#pragma once

// Step-response metrics, limit-cycle detection and the PI^a+CI^a describing
// function.

#include <complex>
#include <string_view>

#include "frhc/hybridsim.hpp"

namespace frhc {

enum class LimitCycleStatus { NotDetected, Detected, Indeterminate };
std::string_view toString(LimitCycleStatus s);

struct LimitCycleResult {
    LimitCycleStatus status = LimitCycleStatus::NotDetected;
    double amplitude = 0.0;  // half peak-to-peak of e over the last period
    double period = 0.0;     // seconds
    double peakToPeak = 0.0; // of e over the whole analysis window
    double decayPerPeriod = 0.0;

    bool detected() const { return status == LimitCycleStatus::Detected; }
};

struct LimitCycleOptions {
    double settleFraction = 0.5;
    double amplitudeFraction = 0.005;  // of the reference amplitude
    std::size_t minPeriods = 3;
    double maxDecayPerPeriod = 0.1;
    double correlationThreshold = 0.5;
};

struct ResponseMetrics {
    double ise = 0.0;
    /// ISE accumulated from the first sign change of e onwards.
    double iseAfterFirstCrossing = 0.0;
    double maxU = 0.0;
    /// Mean of u over the trailing 10% of the horizon.
    double steadyU = 0.0;
    double overshootPct = 0.0;
    double riseTime = 0.0;
    bool riseReached = false;
    double settlingTime = 0.0;  // 2% band
    LimitCycleResult limitCycle;
};

ResponseMetrics computeMetrics(const SimulationTrace& trace, double finalValue, const LimitCycleOptions& lc = {});

LimitCycleResult detectLimitCycle(const SimulationTrace& trace, double settleFraction);
LimitCycleResult detectLimitCycle(const SimulationTrace& trace, const LimitCycleOptions& options);

/// Describing function of the CI^a element alone,
/// (4 / (pi w^a)) (sin(a pi/2) + (pi/4) e^{-j a pi/2}).
std::complex<double> ciAlphaDescribingFunction(double alpha, double omega);

/// N(jw) of PI^a+CI^a. strict = true evaluates the alternative arrangement
/// with the CI^a expression in the denominator of the reset term.
std::complex<double> describingFunction(double kp, double tauI, double pReset, double alpha, double omega,
                                        bool strict = false);

}  // namespace frhc
