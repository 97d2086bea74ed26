#include "frhc/freqdesign.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frhc {

namespace {

struct KindInfo {
    ControllerKind kind;
    std::string_view name;
    std::vector<std::string> params;
};

const std::vector<KindInfo>& kindTable() {
    static const std::vector<KindInfo> table = {
        {ControllerKind::PID, "PID", {"K_p", "K_i", "K_d"}},
        {ControllerKind::FPI, "FPI", {"K_p", "K_i", "lambda"}},
        {ControllerKind::FPD, "FPD", {"K_p", "K_d", "mu"}},
        {ControllerKind::NPID, "NPID", {"K_p", "K_i", "K_d", "NN"}},
        {ControllerKind::FPID, "FPID", {"K_p", "K_i", "K_d", "lambda", "mu"}},
        {ControllerKind::PI, "PI", {"K_p", "K_i"}},
        {ControllerKind::PCI, "PCI", {"K_p", "K_i"}},
        {ControllerKind::PCID, "PCID", {"K_p", "K_i", "K_d"}},
        {ControllerKind::FPCI, "FPCI", {"K_p", "K_i", "alpha"}},
        {ControllerKind::PIplusCI, "PI+CI", {"K_p", "tau_i", "P_reset"}},
        {ControllerKind::PIalphaCIalpha, "PIa+CIa", {"K_p", "tau_i", "P_reset", "alpha"}},
    };
    return table;
}

const KindInfo& info(ControllerKind kind) {
    for (const auto& k : kindTable()) {
        if (k.kind == kind) return k;
    }
    throw std::logic_error("unknown controller kind");
}

bool isOrderName(const std::string& n) { return n == "lambda" || n == "mu" || n == "alpha"; }

FractionalPolynomial s(double order, double coeff = 1.0) { return FractionalPolynomial::monomial(coeff, order); }
FractionalPolynomial c(double v) { return FractionalPolynomial::constant(v); }

// Walks a log grid from far below omega so the argument stays continuous.
constexpr double kPointsPerDecade = 60.0;
constexpr double kDecadesBelow = 6.0;

double lowFrequencyArg(const FractionalPolynomial& p) {
    const auto& t = p.terms().back();
    return t.order * kPi / 2.0 + (t.coeff < 0.0 ? kPi : 0.0);
}

double nearestBranch(double principal, double reference) {
    return principal + 2.0 * kPi * std::round((reference - principal) / (2.0 * kPi));
}

}  // namespace

std::string_view toString(ControllerKind kind) { return info(kind).name; }

ControllerKind controllerKindFromString(std::string_view name) {
    for (const auto& k : kindTable()) {
        if (k.name == name) return k.kind;
    }
    if (name == "PIalpha+CIalpha" || name == "PI^a+CI^a") return ControllerKind::PIalphaCIalpha;
    throw std::invalid_argument("unknown controller kind '" + std::string(name) + "'");
}

const std::vector<std::string>& parameterNames(ControllerKind kind) { return info(kind).params; }

bool isResetKind(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::PCI:
        case ControllerKind::PCID:
        case ControllerKind::FPCI:
        case ControllerKind::PIplusCI:
        case ControllerKind::PIalphaCIalpha:
            return true;
        default:
            return false;
    }
}

ControllerTemplate ControllerTemplate::fromVector(ControllerKind kind, std::span<const double> values) {
    const auto& names = parameterNames(kind);
    if (values.size() != names.size()) {
        std::ostringstream os;
        os << toString(kind) << " expects " << names.size() << " parameters, got " << values.size();
        throw std::invalid_argument(os.str());
    }
    ControllerTemplate t{kind, {}};
    for (std::size_t i = 0; i < names.size(); ++i) t.params[names[i]] = values[i];
    return t;
}

std::vector<double> ControllerTemplate::toVector() const {
    std::vector<double> v;
    for (const auto& n : parameterNames(kind)) v.push_back(get(n));
    return v;
}

std::optional<double> ControllerTemplate::find(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

double ControllerTemplate::get(const std::string& name) const {
    auto v = find(name);
    if (!v) {
        throw std::invalid_argument(std::string(toString(kind)) + " controller is missing parameter '" + name + "'");
    }
    return *v;
}

void ControllerTemplate::validate() const {
    for (const auto& n : parameterNames(kind)) {
        const double v = get(n);
        if (!std::isfinite(v)) throw std::invalid_argument("parameter '" + n + "' is not finite");
        if (isOrderName(n) && !(v > 0.0 && v < 2.0)) {
            throw std::invalid_argument("order '" + n + "' must lie in (0, 2)");
        }
        if (n == "P_reset" && !(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("P_reset must lie in [0, 1]");
        if (n == "tau_i" && !(v > 0.0)) throw std::invalid_argument("tau_i must be > 0");
    }
    if (auto nn = find("NN"); nn && !(*nn > 0.0)) throw std::invalid_argument("NN must be > 0");
}

FractionalTransferFunction toTransferFunction(const ControllerTemplate& tmpl) {
    tmpl.validate();
    const auto& p = tmpl;
    switch (tmpl.kind) {
        case ControllerKind::PI:
        case ControllerKind::PCI:
            return {s(1, p.get("K_p")) + c(p.get("K_i")), s(1)};
        case ControllerKind::PID:
        case ControllerKind::PCID:
            return {s(2, p.get("K_d")) + s(1, p.get("K_p")) + c(p.get("K_i")), s(1)};
        case ControllerKind::FPI:
            return {s(p.get("lambda"), p.get("K_p")) + c(p.get("K_i")), s(p.get("lambda"))};
        case ControllerKind::FPCI:
            return {s(p.get("alpha"), p.get("K_p")) + c(p.get("K_i")), s(p.get("alpha"))};
        case ControllerKind::FPD:
            return {c(p.get("K_p")) + s(p.get("mu"), p.get("K_d")), c(1.0)};
        case ControllerKind::NPID: {
            // K_p + K_i/s + K_d s/(1 + s/NN) over the common denominator s (1 + s/NN).
            const double nn = p.get("NN");
            const auto filt = c(1.0) + s(1, 1.0 / nn);
            return {s(1, p.get("K_p")) * filt + filt * p.get("K_i") + s(2, p.get("K_d")), s(1) * filt};
        }
        case ControllerKind::FPID: {
            const double lam = p.get("lambda");
            return {s(lam + p.get("mu"), p.get("K_d")) + s(lam, p.get("K_p")) + c(p.get("K_i")), s(lam)};
        }
        case ControllerKind::PIplusCI:
        case ControllerKind::PIalphaCIalpha: {
            // Both integral channels are linear between resets: k_p (1 + 1/(tau_i s^a)).
            const double a = tmpl.kind == ControllerKind::PIplusCI ? 1.0 : p.get("alpha");
            const double kp = p.get("K_p");
            return {s(a, kp) + c(kp / p.get("tau_i")), s(a)};
        }
    }
    throw std::logic_error("unhandled controller kind");
}

void SwitchedPlant::validate() const {
    if (subsystems.empty()) throw std::invalid_argument("switched plant needs at least one subsystem");
    if (worstIndex >= subsystems.size()) throw std::invalid_argument("worst-case subsystem index out of range");
}

void validate(const DesignSpec& spec) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PhaseMarginSpec>) {
                if (!(v.phaseMarginDeg > 0.0 && v.phaseMarginDeg < 180.0)) {
                    throw std::invalid_argument("phase margin must lie in (0, 180) degrees");
                }
                if (!(v.crossoverRadS > 0.0)) throw std::invalid_argument("crossover frequency must be > 0");
            } else if constexpr (std::is_same_v<T, GainCrossoverSpec>) {
                if (!(v.crossoverRadS > 0.0)) throw std::invalid_argument("crossover frequency must be > 0");
            } else {
                if (!(v.maxDb < 0.0)) throw std::invalid_argument("sensitivity bound must be < 0 dB");
                if (!(v.bandwidthRadS > 0.0)) throw std::invalid_argument("sensitivity bandwidth must be > 0");
            }
        },
        spec);
}

double continuousArg(const FractionalPolynomial& p, double omega) {
    if (p.isZero()) throw SingularEvaluation("argument of the zero polynomial", omega);
    if (!(omega > 0.0)) throw std::invalid_argument("continuous argument needs omega > 0");
    double phase = lowFrequencyArg(p);
    const auto steps = static_cast<int>(kDecadesBelow * kPointsPerDecade);
    const double logEnd = std::log10(omega);
    const double logStart = logEnd - kDecadesBelow;
    for (int i = 0; i <= steps; ++i) {
        const double w = std::pow(10.0, logStart + (logEnd - logStart) * i / steps);
        const Complex v = evalFractionalPoly(p, i == steps ? omega : w);
        if (v == 0.0) throw SingularEvaluation("polynomial vanishes on the phase path", w);
        phase = nearestBranch(std::arg(v), phase);
    }
    return phase;
}

double phaseMarginAt(const FractionalTransferFunction& k, const FractionalTransferFunction& g, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("crossover frequency must be > 0");
    if (k.num().isZero() || g.num().isZero()) throw SingularEvaluation("loop gain is identically zero", omega);
    const double ph = continuousArg(k.num(), omega) + continuousArg(g.num(), omega) - continuousArg(k.den(), omega) -
                      continuousArg(g.den(), omega);
    double pm = deg(ph) + 180.0;
    // Report in (-180, 540].
    while (pm <= -180.0) pm += 360.0;
    while (pm > 540.0) pm -= 360.0;
    return pm;
}

double gainAt(const FractionalTransferFunction& k, const FractionalTransferFunction& g, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("crossover frequency must be > 0");
    const Complex l = k(omega) * g(omega);
    return 20.0 * std::log10(std::abs(l));
}

double sensitivityMargin(const FractionalTransferFunction& k, const FractionalTransferFunction& g,
                         std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("sensitivity grid is empty");
    double worst = -std::numeric_limits<double>::infinity();
    for (double w : grid) {
        const Complex onePlusL = 1.0 + k(w) * g(w);
        if (onePlusL == 0.0) {
            std::ostringstream os;
            os << "1 + G K vanishes at omega = " << w;
            throw SingularEvaluation(os.str(), w);
        }
        worst = std::max(worst, -20.0 * std::log10(std::abs(onePlusL)));
    }
    return worst;
}

FractionalPolynomial characteristicPolynomial(const FractionalTransferFunction& k, const FractionalTransferFunction& g) {
    return k.num() * g.num() + k.den() * g.den();
}

PhaseDifference phaseDifference(const FractionalPolynomial& a, const FractionalPolynomial& b,
                                std::span<const double> grid, int refineLevels) {
    if (grid.empty()) throw std::invalid_argument("phase-difference grid is empty");
    auto unwrapOn = [&](const FractionalPolynomial& p) {
        std::vector<double> ph(grid.size());
        double prev = continuousArg(p, grid[0]);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Complex v = evalFractionalPoly(p, grid[i]);
            if (v == 0.0) {
                std::ostringstream os;
                os << "characteristic polynomial vanishes at omega = " << grid[i];
                throw SingularEvaluation(os.str(), grid[i]);
            }
            prev = nearestBranch(std::arg(v), prev);
            ph[i] = prev;
        }
        return ph;
    };
    const auto pa = unwrapOn(a);
    const auto pb = unwrapOn(b);
    std::size_t best = 0;
    double bestDiff = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = std::abs(pa[i] - pb[i]);
        if (d > bestDiff) {
            bestDiff = d;
            best = i;
        }
    }
    double bestW = grid[best];
    // Local refinement: bisect towards the better neighbour in log-frequency.
    if (grid.size() >= 2 && refineLevels > 0) {
        const double refA = pa[best];
        const double refB = pb[best];
        auto diffAt = [&](double w) {
            const Complex va = evalFractionalPoly(a, w);
            const Complex vb = evalFractionalPoly(b, w);
            if (va == 0.0 || vb == 0.0) throw SingularEvaluation("characteristic polynomial vanishes", w);
            return std::abs(nearestBranch(std::arg(va), refA) - nearestBranch(std::arg(vb), refB));
        };
        double logW = std::log(bestW);
        double span = best + 1 < grid.size() ? std::log(grid[best + 1]) - logW : logW - std::log(grid[best - 1]);
        const double lo = std::log(grid.front());
        const double hi = std::log(grid.back());
        for (int level = 0; level < refineLevels; ++level) {
            span /= 2.0;
            for (double cand : {logW - span, logW + span}) {
                if (cand < lo || cand > hi) continue;
                const double d = diffAt(std::exp(cand));
                if (d > bestDiff) {
                    bestDiff = d;
                    logW = cand;
                }
            }
        }
        bestW = std::exp(logW);
    }
    return {deg(bestDiff), bestW};
}

double maxPhaseDifference(const FractionalPolynomial& a, const FractionalPolynomial& b, std::span<const double> grid) {
    return phaseDifference(a, b, grid).maxDeg;
}

StabilityReport quadraticStabilityCheck(const FractionalTransferFunction& k, const SwitchedPlant& plant,
                                        std::span<const double> grid) {
    plant.validate();
    StabilityReport report;
    std::vector<FractionalPolynomial> chars;
    for (const auto& g : plant.subsystems) chars.push_back(characteristicPolynomial(k, g));
    report.worstDifferenceDeg = 0.0;
    for (std::size_t i = 0; i < chars.size(); ++i) {
        for (std::size_t j = i + 1; j < chars.size(); ++j) {
            const auto d = phaseDifference(chars[i], chars[j], grid);
            report.pairDifferencesDeg.push_back(d.maxDeg);
            if (report.pairDifferencesDeg.size() == 1 || d.maxDeg > report.worstDifferenceDeg) {
                report.worstDifferenceDeg = d.maxDeg;
                report.worstA = i;
                report.worstB = j;
                report.worstOmega = d.atOmega;
            }
        }
    }
    report.marginDeg = 90.0 - report.worstDifferenceDeg;
    report.pass = report.worstDifferenceDeg < 90.0;
    return report;
}

LoopMargins loopMargins(const FractionalTransferFunction& k, const FractionalTransferFunction& g,
                        std::span<const double> grid) {
    LoopMargins m;
    auto logMag = [&](double w) { return std::log(std::abs(k(w) * g(w))); };
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double a = logMag(grid[i - 1]);
        const double b = logMag(grid[i]);
        if (a >= 0.0 && b < 0.0) {
            double lo = std::log(grid[i - 1]);
            double hi = std::log(grid[i]);
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (logMag(std::exp(mid)) >= 0.0 ? lo : hi) = mid;
            }
            const double wc = std::exp(0.5 * (lo + hi));
            m.crossoverRadS = wc;
            m.phaseMarginDeg = phaseMarginAt(k, g, wc);
            break;
        }
    }
    return m;
}

std::vector<LoopMargins> perSubsystemMargins(const FractionalTransferFunction& k, const SwitchedPlant& plant,
                                             std::span<const double> grid) {
    std::vector<LoopMargins> out;
    for (const auto& g : plant.subsystems) out.push_back(loopMargins(k, g, grid));
    return out;
}

}  // namespace frhc
