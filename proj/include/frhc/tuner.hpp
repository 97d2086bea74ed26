#pragma once

// Constrained controller tuning: phase-margin residual as objective, gain
// crossover as equality, sensitivity and pairwise stability as inequalities.
// Solved by a seeded multi-start Nelder-Mead inside a quadratic-penalty loop.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frhc/freqdesign.hpp"

namespace frhc {

struct DesignProblem {
    SwitchedPlant plant;
    ControllerKind kind = ControllerKind::FPI;
    std::vector<DesignSpec> specs;
    /// Per-parameter bounds in parameterNames(kind) order; empty -> defaults.
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::vector<double>> initialGuesses;
    std::vector<double> grid = logGrid();
    /// Parameters outside the tunable vector (e.g. NN for a PID realisation).
    std::map<std::string, double> fixedParams;

    std::size_t latinHypercubeStarts = 16;
    std::uint64_t seed = 1;
    std::size_t penaltyRounds = 8;
    std::size_t maxIterationsPerRound = 400;
    double constraintTolerance = 1e-3;
    double parameterTolerance = 1e-6;

    /// Throws std::invalid_argument when the problem is malformed, including
    /// a template with fewer than N + L - 1 parameters.
    void validate() const;
    std::vector<double> lowerBounds() const;
    std::vector<double> upperBounds() const;
    ControllerTemplate controllerAt(std::span<const double> params) const;
};

/// Default box for a parameter name: gains [1e-4, 1e3], orders [0.1, 1.9],
/// NN [1, 1e4], P_reset [0, 1], tau_i [1e-6, 1e3].
std::pair<double, double> defaultBounds(const std::string& name);

struct Constraint {
    std::string name;
    std::function<double(std::span<const double>)> fn;
};

/// f(x) plus C_eq(x) = 0 and C(x) <= 0.
struct AssembledProblem {
    std::function<double(std::span<const double>)> objective;
    std::vector<Constraint> equalities;
    std::vector<Constraint> inequalities;
};

AssembledProblem assemble(const DesignProblem& problem);

struct SpecResidual {
    std::string name;
    double value = 0.0;
    bool satisfied = false;
};

struct FeasibilityReport {
    bool feasible = false;
    double objective = 0.0;
    double phaseMarginDeg = 0.0;
    double stabilityMarginDeg = 90.0;
    std::vector<SpecResidual> residuals;
};

/// Phase margin may undershoot its target by this much and still pass.
inline constexpr double kPhaseMarginToleranceDeg = 1.0;

/// Evaluates every assembled constraint at params against the reporting
/// thresholds (0.2 dB crossover band, strict stability margin > 0).
FeasibilityReport verify(std::span<const double> params, const DesignProblem& problem);

struct OptimizationResult {
    std::vector<double> params;
    double objective = 0.0;
    std::vector<SpecResidual> specResiduals;
    double stabilityMarginDeg = 90.0;
    bool converged = false;
    bool feasible = false;
    std::size_t iterations = 0;
    std::size_t startIndex = 0;
};

class NoFeasiblePoint : public std::runtime_error {
public:
    explicit NoFeasiblePoint(OptimizationResult best)
        : std::runtime_error("no start reached a feasible controller"), best_(std::move(best)) {}
    const OptimizationResult& best() const { return best_; }

private:
    OptimizationResult best_;
};

/// Best feasible result across all starts (user guesses first, then the
/// Latin-hypercube design). Throws NoFeasiblePoint otherwise.
OptimizationResult solve(const DesignProblem& problem);

/// All per-start results, in start order; exposed for inspection and tests.
std::vector<OptimizationResult> solveAllStarts(const DesignProblem& problem);

/// Ranking used by solve(): feasible first, then converged, smaller objective,
/// smaller parameter 2-norm, lower start index.
bool betterResult(const OptimizationResult& a, const OptimizationResult& b);

}  // namespace frhc
