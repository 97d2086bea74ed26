#pragma once

// Fixed-step simulation of switched plants under linear or reset controllers
// with fractional-order states.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "frhc/freqdesign.hpp"
#include "frhc/frlin.hpp"

namespace frhc {

/// Non-finite state during a run.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integer-order plant x' = A x + B u, y = C x.
struct PlantModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    Eigen::VectorXd x0;

    /// Observable canonical form of a strictly proper integer-order transfer
    /// function; y is the first state.
    static PlantModel fromTransferFunction(const FractionalTransferFunction& tf);
    /// x1' = x2, x2' = -a1 x1 - a2 x2 + b u, y = x1.
    static PlantModel secondOrder(double a1, double a2, double b);

    std::size_t order() const { return static_cast<std::size_t>(A.rows()); }
    void validate() const;
    /// 1 / max |eig(A)|; +inf for a zero matrix.
    double fastestTimeConstant() const;
    double dcGain() const;
};

enum class ResetTrigger { None, ZeroCrossing, FixedInstants };
enum class ResetTarget { Zero, Feedforward, GeneralNonZero, VariableNonZero, StateFeedback };
enum class MemoryPolicy { Retain, Clear };

std::string_view toString(ResetTrigger v);
std::string_view toString(ResetTarget v);
std::string_view toString(MemoryPolicy v);
ResetTrigger resetTriggerFromString(std::string_view s);
ResetTarget resetTargetFromString(std::string_view s);
MemoryPolicy memoryPolicyFromString(std::string_view s);

/// K_d D^order e; order 1 is realised as K_d s/(1 + s/NN).
struct DerivativeChannel {
    double gain = 0.0;
    double order = 1.0;
    double filterNN = 100.0;
};

struct ResetControllerSpec {
    double alpha = 1.0;
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    Eigen::MatrixXd AR;
    Eigen::VectorXd BR;
    double cr = 1.0;
    std::size_t nR = 0;
    ResetTrigger trigger = ResetTrigger::None;
    double period = 0.0;
    ResetTarget target = ResetTarget::Zero;
    double K = 0.0;
    /// StateFeedback target: x_r+ = A_R x_r + B_R (E x_p + G r).
    Eigen::RowVectorXd plantStateGain;
    double referenceGain = 0.0;
    std::optional<DerivativeChannel> derivative;

    std::size_t states() const { return static_cast<std::size_t>(A.rows()); }
    void validate() const;
};

/// State-space realisation of a Table I template or reset base. Reset kinds
/// come back with a zero-crossing trigger and Zero target.
ResetControllerSpec realize(const ControllerTemplate& tmpl, double defaultNN = 100.0);

ResetControllerSpec makePIalphaCIalpha(double kp, double tauI, double pReset, double alpha);

/// Periodic reset x_r = E1 x_p1 + E2 x_p2 + G r every tk seconds on a PI
/// base with gains kp, kp/tauI.
ResetControllerSpec makeZhengReset(double e1 = -2.8e-4, double e2 = -6.8e-7, double g = 0.0014, double kp = 0.08,
                                   double tauI = 8.0 / 3.0 * 1e-4, double tk = 1e-3);

/// Piecewise-constant signal: value of the last breakpoint with time <= t.
struct PiecewiseConstant {
    std::vector<std::pair<double, double>> points{{0.0, 1.0}};
    double at(double t) const;
    void validate(const char* what) const;
    static PiecewiseConstant step(double value = 1.0) { return {{{0.0, value}}}; }
};

struct SwitchingSchedule {
    /// (time, subsystem index), sorted; the first entry must be at t = 0.
    std::vector<std::pair<double, std::size_t>> switches{{0.0, 0}};
    std::size_t at(double t) const;
};

/// Alternating subsystems with seeded uniform dwell times in [minDwell, maxDwell].
SwitchingSchedule randomSwitching(std::uint64_t seed, double horizon, std::size_t subsystems, double minDwell = 2.0,
                                  double maxDwell = 10.0);

struct ClosedLoopConfig {
    std::vector<PlantModel> plants;
    SwitchingSchedule switching;
    ResetControllerSpec controller;
    PiecewiseConstant reference;
    double h = 1e-3;
    double horizon = 1.0;
    MemoryPolicy memoryPolicy = MemoryPolicy::Retain;
    /// GL short-memory window in samples; 0 keeps the full history.
    std::size_t memoryLength = 0;
    double deadband = 1e-9;

    void validate() const;
};

struct ResetEvent {
    double time = 0.0;
    std::size_t sample = 0;
    std::vector<double> pre;
    std::vector<double> post;
};

struct SimulationTrace {
    double h = 0.0;
    /// Policy actually applied at jumps; Retain becomes Clear when alpha > 1.
    MemoryPolicy memoryPolicy = MemoryPolicy::Retain;
    std::vector<double> t, y, u, e, r;
    std::vector<std::vector<double>> controllerStates;  // one column per state
    std::vector<std::vector<double>> plantStates;
    std::vector<std::size_t> active;
    std::vector<ResetEvent> events;

    std::size_t size() const { return t.size(); }
};

SimulationTrace simulate(const ClosedLoopConfig& config);

/// (K + R) P / (1 + R P) with feedforward, R P / (1 + R P) otherwise.
FractionalTransferFunction closedLoopTF(const FractionalTransferFunction& base, const FractionalTransferFunction& plant,
                                        bool withFeedforward, double K);

/// Unit-step response of an integer-order strictly proper transfer function.
std::vector<double> stepResponse(const FractionalTransferFunction& tf, double h, double horizon);

/// FPI loop with s^-lambda replaced by its Oustaloup approximation; each
/// first-order section is discretised exactly under a zero-order hold.
SimulationTrace simulateOustaloupFpi(double kp, double ki, double lambda, const ClosedLoopConfig& config, double wLow,
                                     double wHigh, std::size_t cells);

}  // namespace frhc
