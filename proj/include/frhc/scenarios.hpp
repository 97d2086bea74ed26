#pragma once

// Ready-made plants, controllers and loops for the three worked examples.

#include <cstdint>
#include <string_view>
#include <vector>

#include "frhc/hybridsim.hpp"
#include "frhc/tuner.hpp"

namespace frhc::scenarios {

// Example 1: vehicle velocity with throttle (G1) and brake (G2) subsystems.
FractionalTransferFunction vehicleThrottle();
FractionalTransferFunction vehicleBrake();
SwitchedPlant vehiclePlant();
ControllerTemplate vehicleFpi();
ControllerTemplate vehiclePid();
DesignProblem vehicleDesignProblem(ControllerKind kind = ControllerKind::FPI);
/// Velocity steps up from and back down to zero.
PiecewiseConstant vehicleReference();
inline constexpr double kVehicleHorizon = 200.0;
inline constexpr double kVehicleStep = 1e-3;
ClosedLoopConfig vehicleLoop(const ControllerTemplate& controller, std::uint64_t seed, double h = kVehicleStep,
                             double horizon = kVehicleHorizon);

// Example 2: micro-actuator P(s) = b/(s^2 + a2 s + a1).
inline constexpr double kActuatorA1 = 1e6;
inline constexpr double kActuatorA2 = 1810.0;
inline constexpr double kActuatorB = 3e6;
inline constexpr double kActuatorKp = 0.08;
inline constexpr double kActuatorTauI = 8.0 / 3.0 * 1e-4;
inline constexpr double kActuatorStep = 1e-6;
inline constexpr double kActuatorHorizon = 50e-3;
inline constexpr double kActuatorResetPeriod = 1e-3;
PlantModel actuatorPlant();
FractionalTransferFunction actuatorTransferFunction();
/// 1/P(0).
double actuatorFeedforwardGain();
FractionalTransferFunction actuatorBasePi(double alpha = 1.0);

enum class ActuatorController { PI, PCI, PCIFeedforward, GeneralZeroCrossing, Zheng, GeneralFixedInstant };
std::string_view toString(ActuatorController c);
const std::vector<ActuatorController>& allActuatorControllers();
ResetControllerSpec actuatorController(ActuatorController c, double alpha = 1.0);
ClosedLoopConfig actuatorLoop(ActuatorController c, double alpha = 1.0, double h = kActuatorStep,
                              double horizon = kActuatorHorizon);

// Example 3: servomotor P(s) = 0.93/(0.61 s + 1).
inline constexpr double kServoStep = 1e-3;
inline constexpr double kServoHorizon = 10.0;
FractionalTransferFunction servoTransferFunction();
PlantModel servoPlant();
enum class ServoController { PI, PID, FPI, PCI, PCID, FPCI };
std::string_view toString(ServoController c);
const std::vector<ServoController>& allServoControllers();
ControllerTemplate servoTemplate(ServoController c);
ClosedLoopConfig servoLoop(ServoController c, double h = kServoStep, double horizon = kServoHorizon);

}  // namespace frhc::scenarios
