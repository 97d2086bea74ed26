#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "frhc/cli.hpp"
#include "frhc/config.hpp"
#include "frhc/report.hpp"
#include "frhc/scenarios.hpp"
#include "json.hpp"

using namespace frhc;
namespace fs = std::filesystem;

namespace {

const char* kServo = R"({
  "kind": "simulate",
  "plants": [{"num": [[0.93, 0]], "den": [[0.61, 1], [1, 0]]}],
  "controller": {"kind": "PCI", "params": {"K_p": 1.6, "K_i": 18.5}},
  "simulation": {"h": 0.001, "horizon": 2}
})";

std::string expectConfigError(const std::string& text) {
    try {
        parseScenario(text);
    } catch (const ConfigError& e) {
        return e.path();
    }
    ADD_FAILURE() << "no ConfigError for " << text;
    return {};
}

std::string readFile(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sourcePath(const std::string& rel) { return std::string(FRHC_SOURCE_DIR) + "/" + rel; }

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("frhc_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Config, ParsesAndFillsDefaults) {
    const auto c = parseScenario(kServo);
    EXPECT_EQ(c.kind, ScenarioKind::Simulate);
    EXPECT_EQ(c.controller.kind, "PCI");
    EXPECT_EQ(c.simulation.memoryPolicy, "retain");
    EXPECT_EQ(c.grid.points, 2000u);
    const auto loop = buildClosedLoop(c);
    EXPECT_EQ(loop.controller.trigger, ResetTrigger::ZeroCrossing);
    EXPECT_EQ(loop.plants.size(), 1u);
}

TEST(Config, RoundTripThroughEcho) {
    for (const auto* f : {"configs/servo_fpci.json", "configs/actuator_general_reset.json", "configs/vehicle_design.json",
                          "configs/vehicle_stability.json", "configs/clegg_df.json"}) {
        const auto c = loadScenario(sourcePath(f));
        const auto echo = dumpScenario(c);
        EXPECT_EQ(parseScenario(echo), c) << f;
        EXPECT_EQ(dumpScenario(parseScenario(echo)), echo) << f;
    }
}

TEST(Config, ErrorsNameThePath) {
    EXPECT_EQ(expectConfigError(R"({"kind": "simulate", "controller": {"kind": "PI"}, "bogus": 1})"), "/bogus");
    EXPECT_EQ(expectConfigError(R"({"kind": "nope", "controller": {"kind": "PI"}})"), "/kind");
    EXPECT_EQ(expectConfigError(R"({"controller": {"kind": "PI"}})"), "/kind");
    EXPECT_EQ(expectConfigError("{not json"), "/");

    std::string s = kServo;
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("\"horizon\": 2"), 12, "\"horizon\": 0.0005")), "/simulation/horizon");
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("\"h\": 0.001"), 10, "\"h\": \"x\"")), "/simulation/h");
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("\"K_i\": 18.5"), 11, "\"K_i\": 18.5, \"K_q\": 1")), "/controller/params/K_q");
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("\"K_i\": 18.5"), 11, "\"K_i\": 18.5, \"NN\": -1")), "/controller/params");
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("\"PCI\""), 5, "\"PXI\"")), "/controller/kind");
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("[1, 0]]}"), 8, "[1, 0]], \"x0\": 1}")), "/plants/0/x0");
    // A step too coarse for the plant is still a config problem.
    EXPECT_EQ(expectConfigError(std::string(s).replace(s.find("\"h\": 0.001"), 10, "\"h\": 0.5, \"horizon\": 5")).substr(0, 11),
              "/simulation");
}

TEST(Config, ResetSectionNeedsResetKind) {
    const std::string bad = R"({"kind": "simulate",
      "plants": [{"num": [[0.93, 0]], "den": [[0.61, 1], [1, 0]]}],
      "controller": {"kind": "PI", "params": {"K_p": 1, "K_i": 1}, "reset": {"target": "feedforward"}}})";
    EXPECT_EQ(expectConfigError(bad), "/controller/reset");
    const std::string fixed = R"({"kind": "simulate",
      "plants": [{"num": [[0.93, 0]], "den": [[0.61, 1], [1, 0]]}],
      "controller": {"kind": "PCI", "params": {"K_p": 1, "K_i": 1}, "reset": {"trigger": "fixed_instants"}}})";
    EXPECT_EQ(expectConfigError(fixed), "/controller/reset/period");
}

TEST(Config, ActuatorConfigMatchesScenario) {
    const auto c = loadScenario(sourcePath("configs/actuator_general_reset.json"));
    const auto loop = buildClosedLoop(c);
    const auto ref = scenarios::actuatorLoop(scenarios::ActuatorController::GeneralZeroCrossing);
    EXPECT_EQ(loop.controller.target, ResetTarget::GeneralNonZero);
    EXPECT_NEAR(loop.controller.K, ref.controller.K, 1e-12);
    EXPECT_NEAR(loop.plants[0].dcGain(), ref.plants[0].dcGain(), 1e-15);
}

TEST(Report, FormatRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) EXPECT_EQ(std::stod(formatDouble(v)), v);
}

TEST(Report, TraceCsvShape) {
    auto cfg = scenarios::servoLoop(scenarios::ServoController::PCI, 1e-3, 0.5);
    const auto tr = simulate(cfg);
    const auto csv = traceCsv(tr);
    const auto header = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(header, "t,y,u,e,r,xc_0,xp_0,active_subsystem");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), tr.size() + 1);
    const auto ev = eventsCsv(tr);
    EXPECT_EQ(static_cast<std::size_t>(std::count(ev.begin(), ev.end(), '\n')), tr.events.size() + 1);
    EXPECT_EQ(csv, traceCsv(simulate(cfg)));
}

TEST(Report, PlotScriptDeterministic) {
    const std::vector<PlotFigure> figs{{"a", "A", "y", {{"x.csv", "x"}}, true}};
    EXPECT_EQ(exportPlotScript(figs), exportPlotScript(figs, PlotStyle{0.0, 0.0, 0, ""}));
    EXPECT_NE(exportPlotScript(figs).find("x.csv"), std::string::npos);
    EXPECT_THROW(exportPlotScript({}), std::invalid_argument);
}

TEST(Report, AtomicWriteLeavesNoTemp) {
    const auto dir = scratch("atomic");
    writeFileAtomic(dir / "f.txt", "one");
    writeFileAtomic(dir / "f.txt", "two");
    EXPECT_EQ(readFile(dir / "f.txt"), "two");
    EXPECT_FALSE(fs::exists(dir / "f.txt.tmp"));
}

TEST(Cli, ExitCodes) {
    std::ostringstream out, err;
    const auto dir = scratch("cli");
    EXPECT_EQ(cli::run({"simulate", sourcePath("tests/data/bad_horizon.json"), "--out", dir.string()}, out, err), cli::kConfigError);
    EXPECT_NE(err.str().find("/simulation/horizon"), std::string::npos);
    EXPECT_EQ(cli::run({"simulate", sourcePath("configs/servo_fpci.json"), "--memory-policy", "sometimes"}, out, err),
              cli::kConfigError);
    EXPECT_EQ(cli::run({"design", sourcePath("configs/servo_fpci.json"), "--out", dir.string()}, out, err), cli::kConfigError);
    EXPECT_EQ(cli::run({"stability", sourcePath("configs/vehicle_stability.json"), "--out", dir.string()}, out, err), cli::kOk);
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Cli, InfeasibleDesignExitsTwo) {
    std::ostringstream out, err;
    const auto dir = scratch("infeasible");
    fs::create_directories(dir);
    const auto cfgPath = dir / "cfg.json";
    std::ofstream(cfgPath) << R"({"kind": "design",
      "plants": [{"num": [[0.93, 0]], "den": [[0.61, 1], [1, 0]]}],
      "controller": {"kind": "PI"},
      "specs": [{"type": "phase_margin", "phase_margin_deg": 80, "crossover_rad_s": 5},
                {"type": "gain_crossover", "crossover_rad_s": 5}],
      "tuner": {"starts": 4, "lower": [1e-4, 1e-4], "upper": [1e-3, 1e-3]}})";
    EXPECT_EQ(cli::run({"design", cfgPath.string(), "--out", (dir / "out").string()}, out, err), cli::kInfeasible);
    EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
}

TEST(Cli, SimulateIsByteDeterministicAndEchoReparses) {
    std::ostringstream out, err;
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto cfg = sourcePath("configs/servo_fpci.json");
    ASSERT_EQ(cli::run({"simulate", cfg, "--out", a.string(), "--horizon", "3"}, out, err), cli::kOk) << err.str();
    ASSERT_EQ(cli::run({"simulate", cfg, "--out", b.string(), "--horizon", "3"}, out, err), cli::kOk) << err.str();
    for (const auto* f : {"trace.csv", "events.csv", "plot.py"}) EXPECT_EQ(readFile(a / f), readFile(b / f)) << f;

    // The echo carries the override and parses back to the same scenario.
    const auto summary = nlohmann::json::parse(readFile(a / "summary.json"));
    auto c = loadScenario(cfg);
    c.simulation.horizon = 3.0;
    EXPECT_EQ(parseScenario(summary.at("config").dump()), c);
    EXPECT_EQ(summary.at("version"), FRHC_VERSION_STRING);
}
