#include "frhc/scenarios.hpp"

#include <cmath>

namespace frhc::scenarios {

namespace {

FractionalTransferFunction firstOrderLag(double gain, double pole) {
    return {FractionalPolynomial::constant(gain), FractionalPolynomial({{1.0, 1.0}, {pole, 0.0}})};
}

}  // namespace

FractionalTransferFunction vehicleThrottle() { return firstOrderLag(4.39, 0.1746); }
FractionalTransferFunction vehicleBrake() { return firstOrderLag(4.45, 0.445); }
SwitchedPlant vehiclePlant() { return {{vehicleThrottle(), vehicleBrake()}, 0}; }

ControllerTemplate vehicleFpi() { return {ControllerKind::FPI, {{"K_p", 0.15}, {"K_i", 0.07}, {"lambda", 0.71}}}; }
ControllerTemplate vehiclePid() { return {ControllerKind::PID, {{"K_p", 0.1}, {"K_i", 0.11}, {"K_d", 0.223}}}; }

DesignProblem vehicleDesignProblem(ControllerKind kind) {
    DesignProblem p;
    p.plant = vehiclePlant();
    p.kind = kind;
    p.specs = {PhaseMarginSpec{80.0, 0.8}, GainCrossoverSpec{0.8}};
    return p;
}

PiecewiseConstant vehicleReference() {
    return {{{0.0, 20.0}, {40.0, 50.0}, {80.0, 0.0}, {120.0, 30.0}, {160.0, 0.0}}};
}

ClosedLoopConfig vehicleLoop(const ControllerTemplate& controller, std::uint64_t seed, double h, double horizon) {
    ClosedLoopConfig c;
    c.plants = {PlantModel::fromTransferFunction(vehicleThrottle()), PlantModel::fromTransferFunction(vehicleBrake())};
    c.switching = randomSwitching(seed, horizon, 2);
    c.controller = realize(controller);
    c.reference = vehicleReference();
    c.h = h;
    c.horizon = horizon;
    return c;
}

PlantModel actuatorPlant() { return PlantModel::secondOrder(kActuatorA1, kActuatorA2, kActuatorB); }

FractionalTransferFunction actuatorTransferFunction() {
    return {FractionalPolynomial::constant(kActuatorB), FractionalPolynomial({{1.0, 2.0}, {kActuatorA2, 1.0}, {kActuatorA1, 0.0}})};
}

double actuatorFeedforwardGain() { return 1.0 / actuatorTransferFunction().dcGain(); }

FractionalTransferFunction actuatorBasePi(double alpha) {
    return {FractionalPolynomial({{kActuatorKp, alpha}, {kActuatorKp / kActuatorTauI, 0.0}}), FractionalPolynomial::monomial(1.0, alpha)};
}

std::string_view toString(ActuatorController c) {
    switch (c) {
        case ActuatorController::PI:
            return "PI";
        case ActuatorController::PCI:
            return "PCI";
        case ActuatorController::PCIFeedforward:
            return "PCI+FF";
        case ActuatorController::GeneralZeroCrossing:
            return "general_zero_crossing";
        case ActuatorController::Zheng:
            return "periodic_state_feedback";
        case ActuatorController::GeneralFixedInstant:
            return "general_fixed_instant";
    }
    return "?";
}

const std::vector<ActuatorController>& allActuatorControllers() {
    static const std::vector<ActuatorController> all{ActuatorController::PCI,
                                                     ActuatorController::PI,
                                                     ActuatorController::PCIFeedforward,
                                                     ActuatorController::GeneralZeroCrossing,
                                                     ActuatorController::Zheng,
                                                     ActuatorController::GeneralFixedInstant};
    return all;
}

ResetControllerSpec actuatorController(ActuatorController c, double alpha) {
    const double ki = kActuatorKp / kActuatorTauI;
    if (c == ActuatorController::Zheng) return makeZhengReset(-2.8e-4, -6.8e-7, 0.0014, kActuatorKp, kActuatorTauI, kActuatorResetPeriod);
    ControllerTemplate base{ControllerKind::FPCI, {{"K_p", kActuatorKp}, {"K_i", ki}, {"alpha", alpha}}};
    if (c == ActuatorController::PI) {
        base = {ControllerKind::FPI, {{"K_p", kActuatorKp}, {"K_i", ki}, {"lambda", alpha}}};
        return realize(base);
    }
    auto spec = realize(base);
    spec.K = actuatorFeedforwardGain();
    switch (c) {
        case ActuatorController::PCI:
            spec.target = ResetTarget::Zero;
            break;
        case ActuatorController::PCIFeedforward:
            spec.target = ResetTarget::Feedforward;
            break;
        case ActuatorController::GeneralZeroCrossing:
            spec.target = ResetTarget::GeneralNonZero;
            break;
        case ActuatorController::GeneralFixedInstant:
            spec.target = ResetTarget::VariableNonZero;
            spec.trigger = ResetTrigger::FixedInstants;
            spec.period = kActuatorResetPeriod;
            break;
        default:
            break;
    }
    return spec;
}

ClosedLoopConfig actuatorLoop(ActuatorController c, double alpha, double h, double horizon) {
    ClosedLoopConfig cfg;
    cfg.plants = {actuatorPlant()};
    cfg.controller = actuatorController(c, alpha);
    cfg.reference = PiecewiseConstant::step(1.0);
    cfg.h = h;
    cfg.horizon = horizon;
    return cfg;
}

FractionalTransferFunction servoTransferFunction() {
    return {FractionalPolynomial::constant(0.93), FractionalPolynomial({{0.61, 1.0}, {1.0, 0.0}})};
}

PlantModel servoPlant() { return PlantModel::fromTransferFunction(servoTransferFunction()); }

std::string_view toString(ServoController c) {
    switch (c) {
        case ServoController::PI:
            return "PI";
        case ServoController::PID:
            return "PID";
        case ServoController::FPI:
            return "FPI";
        case ServoController::PCI:
            return "PCI";
        case ServoController::PCID:
            return "PCID";
        case ServoController::FPCI:
            return "FPCI";
    }
    return "?";
}

const std::vector<ServoController>& allServoControllers() {
    static const std::vector<ServoController> all{ServoController::PI,  ServoController::PID,  ServoController::FPI,
                                                  ServoController::PCI, ServoController::PCID, ServoController::FPCI};
    return all;
}

ControllerTemplate servoTemplate(ServoController c) {
    switch (c) {
        case ServoController::PI:
            return {ControllerKind::PI, {{"K_p", 1.6}, {"K_i", 18.5}}};
        case ServoController::PID:
            return {ControllerKind::PID, {{"K_p", 1.528}, {"K_i", 23.16}, {"K_d", 0.152}}};
        case ServoController::FPI:
            return {ControllerKind::FPI, {{"K_p", 0.067}, {"K_i", 13.4}, {"lambda", 0.75}}};
        case ServoController::PCI:
            return {ControllerKind::PCI, {{"K_p", 1.6}, {"K_i", 18.5}}};
        case ServoController::PCID:
            return {ControllerKind::PCID, {{"K_p", 1.528}, {"K_i", 23.16}, {"K_d", 0.152}}};
        case ServoController::FPCI:
            return {ControllerKind::FPCI, {{"K_p", 0.067}, {"K_i", 13.4}, {"alpha", 0.75}}};
    }
    return {};
}

ClosedLoopConfig servoLoop(ServoController c, double h, double horizon) {
    ClosedLoopConfig cfg;
    cfg.plants = {servoPlant()};
    cfg.controller = realize(servoTemplate(c));
    cfg.reference = PiecewiseConstant::step(1.0);
    cfg.h = h;
    cfg.horizon = horizon;
    return cfg;
}

}  // namespace frhc::scenarios
