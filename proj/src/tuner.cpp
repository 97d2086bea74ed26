#include "frhc/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace frhc {

namespace {

constexpr double kInfeasible = 1e12;

bool isGainName(const std::string& n) { return n == "K_p" || n == "K_i" || n == "K_d"; }

// Coordinates in [0, 1]^n; wide positive boxes are searched in log space.
class BoxMap {
public:
    BoxMap(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        for (std::size_t i = 0; i < lo_.size(); ++i) {
            logScale_.push_back(lo_[i] > 0.0 && hi_[i] / lo_[i] > 100.0);
            if (hi_[i] > lo_[i]) free_.push_back(i);
        }
    }

    std::size_t freeDims() const { return free_.size(); }

    std::vector<double> toParams(std::span<const double> u) const {
        std::vector<double> x = lo_;
        for (std::size_t k = 0; k < free_.size(); ++k) {
            const std::size_t i = free_[k];
            const double t = std::clamp(u[k], 0.0, 1.0);
            x[i] = logScale_[i] ? std::exp(std::log(lo_[i]) + t * (std::log(hi_[i]) - std::log(lo_[i])))
                                : lo_[i] + t * (hi_[i] - lo_[i]);
        }
        return x;
    }

    std::vector<double> toUnit(std::span<const double> x) const {
        std::vector<double> u(free_.size());
        for (std::size_t k = 0; k < free_.size(); ++k) {
            const std::size_t i = free_[k];
            const double v = std::clamp(x[i], lo_[i], hi_[i]);
            u[k] = logScale_[i] ? (std::log(v) - std::log(lo_[i])) / (std::log(hi_[i]) - std::log(lo_[i]))
                                : (v - lo_[i]) / (hi_[i] - lo_[i]);
        }
        return u;
    }

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<bool> logScale_;
    std::vector<std::size_t> free_;
};

struct NelderMeadResult {
    std::vector<double> best;
    double value = 0.0;
    std::size_t iterations = 0;
};

NelderMeadResult nelderMead(const std::function<double(std::span<const double>)>& f, std::vector<double> start,
                            std::size_t maxIter, double xTol) {
    const std::size_t n = start.size();
    NelderMeadResult out;
    if (n == 0) {
        out.best = start;
        out.value = f(start);
        return out;
    }
    auto clampUnit = [](std::vector<double>& v) {
        for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
    };
    clampUnit(start);
    std::vector<std::vector<double>> simplex{start};
    for (std::size_t i = 0; i < n; ++i) {
        auto v = start;
        const double step = 0.05;
        v[i] = v[i] + step <= 1.0 ? v[i] + step : v[i] - step;
        simplex.push_back(v);
    }
    std::vector<double> values;
    for (const auto& v : simplex) values.push_back(f(v));

    std::vector<std::size_t> order(n + 1);
    std::size_t it = 0;
    for (; it < maxIter; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        const auto& bestV = simplex[order.front()];
        double size = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(simplex[order[k]][d] - bestV[d]));
        }
        const double spread = values[order.back()] - values[order.front()];
        if (size < xTol && spread < 1e-12 * (1.0 + std::abs(values[order.front()]))) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[order[k]][d] / static_cast<double>(n);
        }
        const std::size_t worst = order.back();
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
            clampUnit(p);
            return p;
        };
        auto reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr < values[order.front()]) {
            auto expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[order[n - 1]]) {
            simplex[worst] = std::move(reflected);
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        auto contracted = along(outside ? -0.5 : 0.5);
        const double fc = f(contracted);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = std::move(contracted);
            values[worst] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        const auto b = simplex[order.front()];
        for (std::size_t k = 1; k <= n; ++k) {
            auto& v = simplex[order[k]];
            for (std::size_t d = 0; d < n; ++d) v[d] = b[d] + 0.5 * (v[d] - b[d]);
            values[order[k]] = f(v);
        }
    }
    const auto bestIt = std::min_element(values.begin(), values.end());
    out.best = simplex[static_cast<std::size_t>(bestIt - values.begin())];
    out.value = *bestIt;
    out.iterations = it;
    return out;
}

double safeEval(const std::function<double(std::span<const double>)>& f, std::span<const double> x) {
    try {
        const double v = f(x);
        return std::isfinite(v) ? v : kInfeasible;
    } catch (const std::exception&) {
        return kInfeasible;
    }
}

struct PenaltyState {
    double objective = 0.0;
    double violation = 0.0;  // max |eq| and max(0, ineq)
};

PenaltyState measure(const AssembledProblem& ap, std::span<const double> x) {
    PenaltyState s;
    s.objective = safeEval(ap.objective, x);
    for (const auto& c : ap.equalities) s.violation = std::max(s.violation, std::abs(safeEval(c.fn, x)));
    for (const auto& c : ap.inequalities) s.violation = std::max(s.violation, std::max(0.0, safeEval(c.fn, x)));
    return s;
}

OptimizationResult runStart(const DesignProblem& problem, const AssembledProblem& ap, const BoxMap& box,
                            std::vector<double> startUnit, std::size_t index) {
    std::vector<double> u = std::move(startUnit);
    std::size_t iterations = 0;
    double mu = 1.0;
    for (std::size_t round = 0; round < problem.penaltyRounds; ++round) {
        auto penalised = [&](std::span<const double> unit) {
            const auto x = box.toParams(unit);
            double v = safeEval(ap.objective, x);
            for (const auto& c : ap.equalities) {
                const double r = safeEval(c.fn, x);
                v += mu * r * r;
            }
            for (const auto& c : ap.inequalities) {
                const double r = std::max(0.0, safeEval(c.fn, x));
                v += mu * r * r;
            }
            return v;
        };
        auto nm = nelderMead(penalised, u, problem.maxIterationsPerRound, problem.parameterTolerance);
        iterations += nm.iterations;
        u = std::move(nm.best);
        const auto state = measure(ap, box.toParams(u));
        if (state.violation <= problem.constraintTolerance && round > 0) break;
        mu *= 10.0;
    }
    OptimizationResult r;
    r.params = box.toParams(u);
    r.startIndex = index;
    r.iterations = iterations;
    const auto state = measure(ap, r.params);
    r.objective = state.objective;
    r.converged = state.violation <= problem.constraintTolerance;
    const auto report = verify(r.params, problem);
    r.feasible = report.feasible;
    r.specResiduals = report.residuals;
    r.stabilityMarginDeg = report.stabilityMarginDeg;
    return r;
}

double norm2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

std::vector<std::vector<double>> latinHypercube(std::size_t count, std::size_t dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> pts(count, std::vector<double>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
        std::vector<std::size_t> strata(count);
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t i = 0; i < count; ++i) {
            pts[i][d] = (static_cast<double>(strata[i]) + unit(rng)) / static_cast<double>(count);
        }
    }
    return pts;
}

}  // namespace

std::pair<double, double> defaultBounds(const std::string& name) {
    if (isGainName(name)) return {1e-4, 1e3};
    if (name == "lambda" || name == "mu" || name == "alpha") return {0.1, 1.9};
    if (name == "NN") return {1.0, 1e4};
    if (name == "P_reset") return {0.0, 1.0};
    if (name == "tau_i") return {1e-6, 1e3};
    throw std::invalid_argument("no default bounds for parameter '" + name + "'");
}

std::vector<double> DesignProblem::lowerBounds() const {
    if (!lower.empty()) return lower;
    std::vector<double> v;
    for (const auto& n : parameterNames(kind)) v.push_back(defaultBounds(n).first);
    return v;
}

std::vector<double> DesignProblem::upperBounds() const {
    if (!upper.empty()) return upper;
    std::vector<double> v;
    for (const auto& n : parameterNames(kind)) v.push_back(defaultBounds(n).second);
    return v;
}

void DesignProblem::validate() const {
    plant.validate();
    const std::size_t nParams = parameterNames(kind).size();
    const std::size_t required = specs.size() + plant.subsystems.size() - 1;
    if (nParams < required) {
        std::ostringstream os;
        os << toString(kind) << " has " << nParams << " parameters but " << specs.size() << " specifications and "
           << plant.subsystems.size() << " subsystems need at least " << required;
        throw std::invalid_argument(os.str());
    }
    for (const auto& s : specs) frhc::validate(s);
    const auto lo = lowerBounds();
    const auto hi = upperBounds();
    if (lo.size() != nParams || hi.size() != nParams) throw std::invalid_argument("bounds do not match parameter count");
    for (std::size_t i = 0; i < nParams; ++i) {
        if (!(lo[i] <= hi[i])) throw std::invalid_argument("lower bound exceeds upper bound for " + parameterNames(kind)[i]);
    }
    for (const auto& g : initialGuesses) {
        if (g.size() != nParams) throw std::invalid_argument("initial guess does not match parameter count");
    }
    if (grid.empty()) throw std::invalid_argument("design grid is empty");
}

ControllerTemplate DesignProblem::controllerAt(std::span<const double> params) const {
    auto t = ControllerTemplate::fromVector(kind, params);
    for (const auto& [k, v] : fixedParams) t.params.emplace(k, v);
    return t;
}

AssembledProblem assemble(const DesignProblem& problem) {
    problem.validate();
    AssembledProblem ap;
    const auto prob = std::make_shared<const DesignProblem>(problem);
    auto controller = [prob](std::span<const double> x) { return toTransferFunction(prob->controllerAt(x)); };

    bool haveObjective = false;
    for (const auto& spec : problem.specs) {
        if (const auto* pm = std::get_if<PhaseMarginSpec>(&spec)) {
            const auto target = *pm;
            if (!haveObjective) {
                ap.objective = [prob, controller, target](std::span<const double> x) {
                    return std::abs(phaseMarginAt(controller(x), prob->plant.worst(), target.crossoverRadS) -
                                    target.phaseMarginDeg);
                };
                haveObjective = true;
            } else {
                ap.inequalities.push_back({"phase_margin", [prob, controller, target](std::span<const double> x) {
                                               return target.phaseMarginDeg -
                                                      phaseMarginAt(controller(x), prob->plant.worst(), target.crossoverRadS);
                                           }});
            }
        } else if (const auto* gc = std::get_if<GainCrossoverSpec>(&spec)) {
            const double w = gc->crossoverRadS;
            ap.equalities.push_back({"gain_crossover", [prob, controller, w](std::span<const double> x) {
                                         return gainAt(controller(x), prob->plant.worst(), w);
                                     }});
        } else if (const auto* sb = std::get_if<SensitivitySpec>(&spec)) {
            const auto target = *sb;
            std::vector<double> band;
            for (double w : problem.grid) {
                if (w <= target.bandwidthRadS) band.push_back(w);
            }
            if (band.empty()) band.push_back(target.bandwidthRadS);
            ap.inequalities.push_back({"sensitivity", [prob, controller, target, band](std::span<const double> x) {
                                           return sensitivityMargin(controller(x), prob->plant.worst(), band) - target.maxDb;
                                       }});
        }
    }
    if (!haveObjective) ap.objective = [](std::span<const double>) { return 0.0; };

    const std::size_t l = problem.plant.subsystems.size();
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i + 1; j < l; ++j) {
            std::ostringstream name;
            name << "stability_" << i << "_" << j;
            ap.inequalities.push_back({name.str(), [prob, controller, i, j](std::span<const double> x) {
                                           const auto k = controller(x);
                                           const auto ci = characteristicPolynomial(k, prob->plant.subsystems[i]);
                                           const auto cj = characteristicPolynomial(k, prob->plant.subsystems[j]);
                                           return maxPhaseDifference(ci, cj, prob->grid) - 90.0;
                                       }});
        }
    }
    return ap;
}

FeasibilityReport verify(std::span<const double> params, const DesignProblem& problem) {
    problem.validate();
    FeasibilityReport rep;
    rep.feasible = true;
    auto fail = [&rep](SpecResidual r) {
        if (!r.satisfied) rep.feasible = false;
        rep.residuals.push_back(std::move(r));
    };
    FractionalTransferFunction k;
    try {
        k = toTransferFunction(problem.controllerAt(params));
    } catch (const std::exception&) {
        rep.feasible = false;
        rep.objective = std::numeric_limits<double>::infinity();
        return rep;
    }
    const auto& g = problem.plant.worst();
    bool haveObjective = false;
    for (const auto& spec : problem.specs) {
        try {
            if (const auto* pm = std::get_if<PhaseMarginSpec>(&spec)) {
                const double got = phaseMarginAt(k, g, pm->crossoverRadS);
                if (!haveObjective) {
                    rep.phaseMarginDeg = got;
                    rep.objective = std::abs(got - pm->phaseMarginDeg);
                    haveObjective = true;
                }
                const double shortfall = pm->phaseMarginDeg - got;
                fail({"phase_margin", shortfall, shortfall <= kPhaseMarginToleranceDeg});
            } else if (const auto* gc = std::get_if<GainCrossoverSpec>(&spec)) {
                const double db = gainAt(k, g, gc->crossoverRadS);
                // A zero or singular loop cannot cross over at all.
                fail({"gain_crossover", db, std::isfinite(db) && std::abs(db) <= kCrossoverToleranceDb});
            } else if (const auto* sb = std::get_if<SensitivitySpec>(&spec)) {
                std::vector<double> band;
                for (double w : problem.grid) {
                    if (w <= sb->bandwidthRadS) band.push_back(w);
                }
                if (band.empty()) band.push_back(sb->bandwidthRadS);
                const double s = sensitivityMargin(k, g, band);
                fail({"sensitivity", s - sb->maxDb, s <= sb->maxDb});
            }
        } catch (const std::exception&) {
            fail({"evaluation", std::numeric_limits<double>::infinity(), false});
        }
    }
    if (problem.plant.subsystems.size() >= 2) {
        try {
            const auto st = quadraticStabilityCheck(k, problem.plant, problem.grid);
            rep.stabilityMarginDeg = st.marginDeg;
            fail({"stability", st.marginDeg, st.marginDeg > 0.0});
        } catch (const std::exception&) {
            rep.stabilityMarginDeg = -std::numeric_limits<double>::infinity();
            fail({"stability", rep.stabilityMarginDeg, false});
        }
    }
    return rep;
}

bool betterResult(const OptimizationResult& a, const OptimizationResult& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.converged != b.converged) return a.converged;
    if (a.objective != b.objective) return a.objective < b.objective;
    const double na = norm2(a.params), nb = norm2(b.params);
    if (na != nb) return na < nb;
    return a.startIndex < b.startIndex;
}

std::vector<OptimizationResult> solveAllStarts(const DesignProblem& problem) {
    const auto ap = assemble(problem);
    const BoxMap box(problem.lowerBounds(), problem.upperBounds());

    std::vector<std::vector<double>> starts;
    for (const auto& g : problem.initialGuesses) starts.push_back(box.toUnit(g));
    for (auto& p : latinHypercube(problem.latinHypercubeStarts, box.freeDims(), problem.seed)) starts.push_back(std::move(p));
    if (starts.empty()) starts.emplace_back(box.freeDims(), 0.5);

    std::vector<OptimizationResult> results(starts.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), starts.size()));
    std::vector<std::future<void>> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < starts.size(); i = next++) {
                results[i] = runStart(problem, ap, box, starts[i], i);
            }
        }));
    }
    for (auto& f : pool) f.get();
    return results;
}

OptimizationResult solve(const DesignProblem& problem) {
    auto all = solveAllStarts(problem);
    auto best = std::min_element(all.begin(), all.end(), betterResult);
    if (!best->feasible) throw NoFeasiblePoint(*best);
    return *best;
}

}  // namespace frhc
