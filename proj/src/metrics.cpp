#include "frhc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace frhc {

namespace {

constexpr std::size_t kMaxCorrelationSamples = 4000;

double peakToPeak(std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

}  // namespace

std::string_view toString(LimitCycleStatus s) {
    switch (s) {
        case LimitCycleStatus::NotDetected:
            return "not_detected";
        case LimitCycleStatus::Detected:
            return "detected";
        case LimitCycleStatus::Indeterminate:
            return "indeterminate";
    }
    return "?";
}

LimitCycleResult detectLimitCycle(const SimulationTrace& trace, double settleFraction) {
    LimitCycleOptions o;
    o.settleFraction = settleFraction;
    return detectLimitCycle(trace, o);
}

LimitCycleResult detectLimitCycle(const SimulationTrace& trace, const LimitCycleOptions& o) {
    if (trace.size() == 0) throw std::invalid_argument("empty trace");
    if (!(o.settleFraction > 0.0 && o.settleFraction < 1.0)) throw std::invalid_argument("settleFraction must lie in (0, 1)");
    const double horizon = trace.t.back();
    const double tStart = o.settleFraction * horizon;
    const auto first = static_cast<std::size_t>(std::lower_bound(trace.t.begin(), trace.t.end(), tStart) - trace.t.begin());
    const std::span<const double> e(trace.e.data() + first, trace.e.size() - first);

    LimitCycleResult res;
    if (e.size() < 4) {
        res.status = LimitCycleStatus::Indeterminate;
        return res;
    }
    double refAmp = 0.0;
    for (double r : trace.r) refAmp = std::max(refAmp, std::abs(r));
    if (refAmp == 0.0) refAmp = 1.0;
    res.peakToPeak = peakToPeak(e);
    if (res.peakToPeak <= o.amplitudeFraction * refAmp) return res;

    // Decimate so the quadratic autocorrelation stays cheap.
    const std::size_t stride = std::max<std::size_t>(1, (e.size() + kMaxCorrelationSamples - 1) / kMaxCorrelationSamples);
    std::vector<double> x;
    for (std::size_t i = 0; i < e.size(); i += stride) x.push_back(e[i]);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (auto& v : x) v -= mean;
    const std::size_t n = x.size();
    auto acf = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
        return s / static_cast<double>(n - lag);
    };
    std::size_t meanCrossings = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if ((x[i - 1] < 0.0) != (x[i] < 0.0)) ++meanCrossings;
    }
    // A monotone tail is a transient, not an oscillation.
    if (meanCrossings <= 1) return res;
    if (meanCrossings < 2 * o.minPeriods) {
        res.status = LimitCycleStatus::Indeterminate;
        return res;
    }
    const double r0 = acf(0);
    if (r0 <= 0.0) return res;

    std::vector<double> rho(n / 2 + 1);
    for (std::size_t lag = 0; lag < rho.size(); ++lag) rho[lag] = acf(lag) / r0;

    std::size_t lagPeak = 0;
    bool wentNegative = false;
    for (std::size_t lag = 1; lag + 1 < rho.size(); ++lag) {
        if (rho[lag] < 0.0) wentNegative = true;
        if (wentNegative && rho[lag] >= rho[lag - 1] && rho[lag] >= rho[lag + 1] && rho[lag] > o.correlationThreshold) {
            lagPeak = lag;
            break;
        }
    }
    if (lagPeak == 0) {
        // An oscillation slower than half the window cannot show three periods.
        res.status = wentNegative ? LimitCycleStatus::Indeterminate : LimitCycleStatus::NotDetected;
        return res;
    }
    const std::size_t periodSamples = lagPeak * stride;
    res.period = static_cast<double>(periodSamples) * trace.h;
    const std::size_t periods = e.size() / periodSamples;
    if (periods < o.minPeriods) {
        res.status = LimitCycleStatus::Indeterminate;
        return res;
    }
    std::vector<double> amps;
    for (std::size_t p = 0; p < periods; ++p) amps.push_back(peakToPeak(e.subspan(p * periodSamples, periodSamples)));
    const double ratio = amps.front() > 0.0 ? std::pow(amps.back() / amps.front(), 1.0 / static_cast<double>(periods - 1)) : 0.0;
    res.decayPerPeriod = 1.0 - ratio;
    res.amplitude = amps.back() / 2.0;
    res.status = res.decayPerPeriod < o.maxDecayPerPeriod && res.amplitude > 0.0 ? LimitCycleStatus::Detected
                                                                                   : LimitCycleStatus::NotDetected;
    if (!res.detected()) res.amplitude = 0.0;
    return res;
}

ResponseMetrics computeMetrics(const SimulationTrace& trace, double finalValue, const LimitCycleOptions& lc) {
    if (trace.size() == 0) throw std::invalid_argument("empty trace");
    if (finalValue == 0.0) throw std::invalid_argument("final value must be non-zero");
    ResponseMetrics m;
    const double h = trace.h;
    const std::size_t n = trace.size();

    const int sign0 = trace.e.front() > 0.0 ? 1 : (trace.e.front() < 0.0 ? -1 : 0);
    bool crossed = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double e2 = trace.e[k] * trace.e[k] * h;
        m.ise += e2;
        if (!crossed && sign0 != 0 && trace.e[k] * sign0 <= 0.0) crossed = true;
        if (crossed) m.iseAfterFirstCrossing += e2;
        m.maxU = std::max(m.maxU, std::abs(trace.u[k]));
    }

    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    m.steadyU = std::accumulate(trace.u.end() - static_cast<std::ptrdiff_t>(tail), trace.u.end(), 0.0) / static_cast<double>(tail);

    const double peak = finalValue > 0.0 ? *std::max_element(trace.y.begin(), trace.y.end())
                                         : *std::min_element(trace.y.begin(), trace.y.end());
    m.overshootPct = std::max(0.0, (peak - finalValue) / finalValue * 100.0);

    m.riseTime = trace.t.back();
    for (std::size_t k = 0; k < n; ++k) {
        if (trace.y[k] / finalValue >= 0.9) {
            m.riseTime = trace.t[k];
            m.riseReached = true;
            break;
        }
    }

    m.settlingTime = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        if (std::abs(trace.y[k] - finalValue) > 0.02 * std::abs(finalValue)) {
            m.settlingTime = k + 1 < n ? trace.t[k + 1] : trace.t.back();
            break;
        }
    }

    m.limitCycle = detectLimitCycle(trace, lc);
    return m;
}

std::complex<double> ciAlphaDescribingFunction(double alpha, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("describing function needs omega > 0");
    const double half = alpha * kPi / 2.0;
    return 4.0 / (kPi * std::pow(omega, alpha)) * (std::sin(half) + kPi / 4.0 * std::polar(1.0, -half));
}

std::complex<double> describingFunction(double kp, double tauI, double pReset, double alpha, double omega, bool strict) {
    if (!(omega > 0.0)) throw std::invalid_argument("describing function needs omega > 0");
    if (!(tauI > 0.0)) throw std::invalid_argument("tau_i must be positive");
    const std::complex<double> linear = (1.0 - pReset) / (tauI * std::polar(std::pow(omega, alpha), alpha * kPi / 2.0));
    const auto ci = ciAlphaDescribingFunction(alpha, omega);
    const std::complex<double> reset = strict ? pReset / (tauI * ci) : pReset / tauI * ci;
    return kp * (1.0 + linear + reset);
}

}  // namespace frhc
