#pragma once

// Frequency-domain design specifications for (switched) plants: controller
// templates, phase margin / crossover / sensitivity checks, and the pairwise
// characteristic-polynomial phase condition for quadratic stability.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frhc/frlin.hpp"

namespace frhc {

enum class ControllerKind {
    PID,
    FPI,
    FPD,
    NPID,
    FPID,
    PI,
    PCI,
    PCID,
    FPCI,
    PIplusCI,
    PIalphaCIalpha,
};

std::string_view toString(ControllerKind kind);
ControllerKind controllerKindFromString(std::string_view name);

/// Ordered parameter names that make up the tunable vector of a kind.
/// Optional extras (NN for PID/PCID) are not part of the vector.
const std::vector<std::string>& parameterNames(ControllerKind kind);
bool isResetKind(ControllerKind kind);

/// A controller family plus named parameter values. Names follow the
/// conventional symbols: K_p, K_i, K_d, lambda, mu, alpha, NN, tau_i, P_reset.
struct ControllerTemplate {
    ControllerKind kind = ControllerKind::PI;
    std::map<std::string, double> params;

    static ControllerTemplate fromVector(ControllerKind kind, std::span<const double> values);
    std::vector<double> toVector() const;

    double get(const std::string& name) const;
    std::optional<double> find(const std::string& name) const;
    /// Throws std::invalid_argument on a missing or out-of-range parameter.
    void validate() const;
};

/// Linear (base) transfer function of the template; reset kinds map to the
/// base controller with the reset mechanism removed.
FractionalTransferFunction toTransferFunction(const ControllerTemplate& tmpl);

struct SwitchedPlant {
    std::vector<FractionalTransferFunction> subsystems;
    std::size_t worstIndex = 0;  // zero-based index of the worst-case subsystem

    void validate() const;
    const FractionalTransferFunction& worst() const { return subsystems.at(worstIndex); }
};

struct PhaseMarginSpec {
    double phaseMarginDeg = 0.0;
    double crossoverRadS = 0.0;
};
struct GainCrossoverSpec {
    double crossoverRadS = 0.0;
};
struct SensitivitySpec {
    double maxDb = 0.0;
    double bandwidthRadS = 0.0;
};
using DesignSpec = std::variant<PhaseMarginSpec, GainCrossoverSpec, SensitivitySpec>;

void validate(const DesignSpec& spec);

/// Gain-crossover pass/fail band used in reports.
inline constexpr double kCrossoverToleranceDb = 0.2;

/// arg(K G) + 180 at omega, using a phase continuous from omega -> 0, in degrees.
double phaseMarginAt(const FractionalTransferFunction& k, const FractionalTransferFunction& g, double omega);
/// 20 log10 |K(j omega) G(j omega)|.
double gainAt(const FractionalTransferFunction& k, const FractionalTransferFunction& g, double omega);
/// max over the grid of 20 log10 |1 / (1 + G K)|.
double sensitivityMargin(const FractionalTransferFunction& k, const FractionalTransferFunction& g,
                         std::span<const double> grid);

/// num_K num_G + den_K den_G.
FractionalPolynomial characteristicPolynomial(const FractionalTransferFunction& k, const FractionalTransferFunction& g);

/// Continuous argument of p(j omega) in radians, tracked from omega -> 0.
double continuousArg(const FractionalPolynomial& p, double omega);

/// max over the grid of |arg c_a - arg c_b| in degrees, with local refinement
/// around the grid maximum.
struct PhaseDifference {
    double maxDeg = 0.0;
    double atOmega = 0.0;
};
PhaseDifference phaseDifference(const FractionalPolynomial& a, const FractionalPolynomial& b,
                                std::span<const double> grid, int refineLevels = 3);
double maxPhaseDifference(const FractionalPolynomial& a, const FractionalPolynomial& b, std::span<const double> grid);

struct StabilityReport {
    bool pass = true;
    std::size_t worstA = 0;
    std::size_t worstB = 0;
    double worstDifferenceDeg = 0.0;
    double marginDeg = 90.0;
    double worstOmega = 0.0;
    /// One entry per pair (i < j), in lexicographic order.
    std::vector<double> pairDifferencesDeg;
};
StabilityReport quadraticStabilityCheck(const FractionalTransferFunction& k, const SwitchedPlant& plant,
                                        std::span<const double> grid);

/// Loop properties read off a frequency sweep of K G.
struct LoopMargins {
    std::optional<double> crossoverRadS;  // first |KG| = 1 crossing from above
    std::optional<double> phaseMarginDeg;
};
LoopMargins loopMargins(const FractionalTransferFunction& k, const FractionalTransferFunction& g,
                        std::span<const double> grid);

/// Helper for picking the worst-case subsystem: margins of every subsystem.
std::vector<LoopMargins> perSubsystemMargins(const FractionalTransferFunction& k, const SwitchedPlant& plant,
                                             std::span<const double> grid);

}  // namespace frhc
