#pragma once

// Scenario documents (JSON): parsing with fail-closed validation, echo back
// to JSON, and conversion into library objects.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "frhc/hybridsim.hpp"
#include "frhc/metrics.hpp"
#include "frhc/tuner.hpp"

namespace frhc {

/// Raised for any invalid scenario; path() is a JSON pointer to the culprit.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class ScenarioKind { Design, Simulate, Stability, DescribingFunction };
std::string_view toString(ScenarioKind k);

/// Polynomial as (coefficient, order) pairs.
struct PlantConfig {
    std::vector<FractionalTerm> num;
    std::vector<FractionalTerm> den;
    bool operator==(const PlantConfig&) const = default;
};

struct ResetConfig {
    std::string trigger = "zero_crossing";
    std::string target = "zero";
    double period = 0.0;
    /// Feedforward gain; unset means 1/P(0) of the first plant.
    std::optional<double> feedforwardGain;
    std::vector<double> plantStateGain;
    double referenceGain = 0.0;
    bool operator==(const ResetConfig&) const = default;
};

struct ControllerConfig {
    std::string kind = "PI";
    std::map<std::string, double> params;
    std::optional<ResetConfig> reset;
    bool operator==(const ControllerConfig&) const = default;
};

struct SpecConfig {
    std::string type;  // phase_margin | gain_crossover | sensitivity
    double phaseMarginDeg = 0.0;
    double crossoverRadS = 0.0;
    double maxDb = 0.0;
    double bandwidthRadS = 0.0;
    bool operator==(const SpecConfig&) const = default;
};

struct GridConfig {
    double wMin = 1e-3;
    double wMax = 1e3;
    std::size_t points = 2000;
    bool operator==(const GridConfig&) const = default;
};

struct TunerConfig {
    std::size_t starts = 16;
    std::uint64_t seed = 1;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::vector<double>> initialGuesses;
    std::map<std::string, double> fixedParams;
    bool operator==(const TunerConfig&) const = default;
};

struct SwitchingConfig {
    /// Explicit (time, zero-based subsystem) list; empty means random dwell.
    std::vector<std::pair<double, std::size_t>> schedule;
    double minDwell = 2.0;
    double maxDwell = 10.0;
    bool operator==(const SwitchingConfig&) const = default;
};

struct SimulationConfig {
    double h = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    std::string memoryPolicy = "retain";
    std::size_t memoryLength = 0;
    std::vector<std::pair<double, double>> reference{{0.0, 1.0}};
    SwitchingConfig switching;
    /// Target for overshoot/rise metrics; unset means the last non-zero reference value.
    std::optional<double> finalValue;
    double settleFraction = 0.5;
    double amplitudeFraction = 0.005;
    std::size_t minPeriods = 3;
    double maxDecayPerPeriod = 0.1;
    bool operator==(const SimulationConfig&) const = default;
};

struct DescribingFunctionConfig {
    std::vector<double> omegas{0.1, 1.0, 10.0};
    bool strict = false;
    bool operator==(const DescribingFunctionConfig&) const = default;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Simulate;
    std::string name;
    std::vector<PlantConfig> plants;
    std::size_t worstSubsystem = 0;
    ControllerConfig controller;
    std::vector<SpecConfig> specs;
    GridConfig grid;
    TunerConfig tuner;
    SimulationConfig simulation;
    DescribingFunctionConfig df;
    std::string output;
    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates; throws ConfigError naming the offending path.
ScenarioConfig parseScenario(const std::string& jsonText);
ScenarioConfig loadScenario(const std::string& path);
/// Full echo with every default spelled out; parseScenario(dumpScenario(c)) == c.
std::string dumpScenario(const ScenarioConfig& config);

// Builders. Library validation failures are rethrown as ConfigError.
FractionalTransferFunction toTransferFunction(const PlantConfig& p);
SwitchedPlant buildSwitchedPlant(const ScenarioConfig& c);
ControllerTemplate buildTemplate(const ScenarioConfig& c);
DesignProblem buildDesignProblem(const ScenarioConfig& c);
ClosedLoopConfig buildClosedLoop(const ScenarioConfig& c);
LimitCycleOptions buildLimitCycleOptions(const ScenarioConfig& c);
std::vector<double> buildGrid(const ScenarioConfig& c);
double metricsFinalValue(const ScenarioConfig& c);

}  // namespace frhc
