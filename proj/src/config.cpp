#include "frhc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace frhc {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be
// rejected.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(pathOrRoot(), "expected an object");
    }

    std::string at(const std::string& key) const { return path_ + "/" + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "required key is missing");
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            raw(key);
        }
        return asNumber(raw(key), at(key));
    }
    std::optional<double> optionalNumber(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return asNumber(raw(key), at(key));
    }
    std::uint64_t unsignedInt(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        return asUnsigned(raw(key), at(key));
    }
    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key) && fallback) return *fallback;
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }
    const json& array(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array");
        return v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
        }
    }

    static double asNumber(const json& v, const std::string& path) {
        if (!v.is_number()) throw ConfigError(path, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
        return d;
    }
    static std::uint64_t asUnsigned(const json& v, const std::string& path) {
        if (!v.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

private:
    std::string pathOrRoot() const { return path_.empty() ? "/" : path_; }
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> numberArray(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Reader::asNumber(v[i], path + "/" + std::to_string(i)));
    return out;
}

std::pair<double, double> numberPair(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected a [number, number] pair");
    return {Reader::asNumber(v[0], path + "/0"), Reader::asNumber(v[1], path + "/1")};
}

std::vector<FractionalTerm> parseTerms(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of [coefficient, order] pairs");
    std::vector<FractionalTerm> terms;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = path + "/" + std::to_string(i);
        const auto [c, o] = numberPair(v[i], p);
        if (o < 0.0) throw ConfigError(p + "/1", "order must be non-negative");
        terms.push_back({c, o});
    }
    return terms;
}

std::map<std::string, double> parseParams(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object of named numbers");
    std::map<std::string, double> out;
    for (auto it = v.begin(); it != v.end(); ++it) out[it.key()] = Reader::asNumber(it.value(), path + "/" + it.key());
    return out;
}

ScenarioKind kindFromString(const std::string& s, const std::string& path) {
    if (s == "design") return ScenarioKind::Design;
    if (s == "simulate") return ScenarioKind::Simulate;
    if (s == "stability") return ScenarioKind::Stability;
    if (s == "df") return ScenarioKind::DescribingFunction;
    throw ConfigError(path, "unknown kind '" + s + "' (design, simulate, stability, df)");
}

template <class F>
auto rethrowAt(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

PlantConfig parsePlant(const json& v, const std::string& path) {
    Reader r(v, path);
    PlantConfig p;
    p.num = parseTerms(r.raw("num"), r.at("num"));
    p.den = parseTerms(r.raw("den"), r.at("den"));
    r.finish();
    rethrowAt(path, [&] { return toTransferFunction(p); });
    return p;
}

ResetConfig parseReset(const json& v, const std::string& path) {
    Reader r(v, path);
    ResetConfig c;
    c.trigger = r.string("trigger", c.trigger);
    rethrowAt(r.at("trigger"), [&] { return resetTriggerFromString(c.trigger); });
    c.target = r.string("target", c.target);
    rethrowAt(r.at("target"), [&] { return resetTargetFromString(c.target); });
    c.period = r.number("period", 0.0);
    c.feedforwardGain = r.optionalNumber("feedforward_gain");
    if (r.has("plant_state_gain")) c.plantStateGain = numberArray(r.raw("plant_state_gain"), r.at("plant_state_gain"));
    c.referenceGain = r.number("reference_gain", 0.0);
    r.finish();
    if (c.trigger == "fixed_instants" && !(c.period > 0.0)) {
        throw ConfigError(r.at("period"), "fixed-instant resets need a positive period");
    }
    if (c.target == "state_feedback" && c.plantStateGain.empty()) {
        throw ConfigError(r.at("plant_state_gain"), "state-feedback target needs plant_state_gain");
    }
    return c;
}

ControllerConfig parseController(const json& v, const std::string& path) {
    Reader r(v, path);
    ControllerConfig c;
    c.kind = r.string("kind");
    const auto kind = rethrowAt(r.at("kind"), [&] { return controllerKindFromString(c.kind); });
    c.kind = std::string(toString(kind));
    if (r.has("params")) c.params = parseParams(r.raw("params"), r.at("params"));
    const auto& names = parameterNames(kind);
    for (const auto& [name, value] : c.params) {
        if (name != "NN" && std::find(names.begin(), names.end(), name) == names.end()) {
            throw ConfigError(r.at("params") + "/" + name, "not a parameter of " + c.kind);
        }
    }
    if (r.has("reset")) {
        c.reset = parseReset(r.raw("reset"), r.at("reset"));
        if (!isResetKind(kind)) throw ConfigError(r.at("reset"), "reset settings need a reset controller kind");
    }
    r.finish();
    return c;
}

SpecConfig parseSpec(const json& v, const std::string& path) {
    Reader r(v, path);
    SpecConfig s;
    s.type = r.string("type");
    if (s.type == "phase_margin") {
        s.phaseMarginDeg = r.number("phase_margin_deg");
        s.crossoverRadS = r.number("crossover_rad_s");
    } else if (s.type == "gain_crossover") {
        s.crossoverRadS = r.number("crossover_rad_s");
    } else if (s.type == "sensitivity") {
        s.maxDb = r.number("max_db");
        s.bandwidthRadS = r.number("bandwidth_rad_s");
    } else {
        throw ConfigError(r.at("type"), "unknown spec type '" + s.type + "' (phase_margin, gain_crossover, sensitivity)");
    }
    r.finish();
    return s;
}

DesignSpec toDesignSpec(const SpecConfig& s) {
    if (s.type == "phase_margin") return PhaseMarginSpec{s.phaseMarginDeg, s.crossoverRadS};
    if (s.type == "gain_crossover") return GainCrossoverSpec{s.crossoverRadS};
    return SensitivitySpec{s.maxDb, s.bandwidthRadS};
}

void parseGrid(const json& v, const std::string& path, GridConfig& g) {
    Reader r(v, path);
    g.wMin = r.number("w_min", g.wMin);
    g.wMax = r.number("w_max", g.wMax);
    g.points = r.unsignedInt("points", g.points);
    r.finish();
    if (!(g.wMin > 0.0)) throw ConfigError(r.at("w_min"), "must be positive");
    if (!(g.wMax > g.wMin)) throw ConfigError(r.at("w_max"), "must exceed w_min");
    if (g.points < 2) throw ConfigError(r.at("points"), "need at least 2 points");
}

void parseTuner(const json& v, const std::string& path, TunerConfig& t) {
    Reader r(v, path);
    t.starts = r.unsignedInt("starts", t.starts);
    t.seed = r.unsignedInt("seed", t.seed);
    if (r.has("lower")) t.lower = numberArray(r.raw("lower"), r.at("lower"));
    if (r.has("upper")) t.upper = numberArray(r.raw("upper"), r.at("upper"));
    if (r.has("initial_guesses")) {
        const auto& a = r.array("initial_guesses");
        for (std::size_t i = 0; i < a.size(); ++i) {
            t.initialGuesses.push_back(numberArray(a[i], r.at("initial_guesses") + "/" + std::to_string(i)));
        }
    }
    if (r.has("fixed_params")) t.fixedParams = parseParams(r.raw("fixed_params"), r.at("fixed_params"));
    r.finish();
}

void parseSwitching(const json& v, const std::string& path, SwitchingConfig& s) {
    Reader r(v, path);
    if (r.has("schedule")) {
        const auto& a = r.array("schedule");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto p = r.at("schedule") + "/" + std::to_string(i);
            if (!a[i].is_array() || a[i].size() != 2) throw ConfigError(p, "expected a [time, subsystem] pair");
            s.schedule.emplace_back(Reader::asNumber(a[i][0], p + "/0"), Reader::asUnsigned(a[i][1], p + "/1"));
        }
    }
    s.minDwell = r.number("min_dwell", s.minDwell);
    s.maxDwell = r.number("max_dwell", s.maxDwell);
    r.finish();
    if (!(s.minDwell > 0.0)) throw ConfigError(r.at("min_dwell"), "must be positive");
    if (!(s.maxDwell >= s.minDwell)) throw ConfigError(r.at("max_dwell"), "must be at least min_dwell");
}

void parseSimulation(const json& v, const std::string& path, SimulationConfig& s) {
    Reader r(v, path);
    s.h = r.number("h", s.h);
    s.horizon = r.number("horizon", s.horizon);
    s.seed = r.unsignedInt("seed", s.seed);
    s.memoryPolicy = r.string("memory_policy", s.memoryPolicy);
    rethrowAt(r.at("memory_policy"), [&] { return memoryPolicyFromString(s.memoryPolicy); });
    s.memoryLength = r.unsignedInt("memory_length", s.memoryLength);
    if (r.has("reference")) {
        const auto& a = r.array("reference");
        s.reference.clear();
        for (std::size_t i = 0; i < a.size(); ++i) s.reference.push_back(numberPair(a[i], r.at("reference") + "/" + std::to_string(i)));
    }
    if (r.has("switching")) parseSwitching(r.raw("switching"), r.at("switching"), s.switching);
    s.finalValue = r.optionalNumber("final_value");
    s.settleFraction = r.number("settle_fraction", s.settleFraction);
    s.amplitudeFraction = r.number("amplitude_fraction", s.amplitudeFraction);
    s.minPeriods = r.unsignedInt("min_periods", s.minPeriods);
    s.maxDecayPerPeriod = r.number("max_decay_per_period", s.maxDecayPerPeriod);
    r.finish();

    if (!(s.h > 0.0)) throw ConfigError(r.at("h"), "step must be positive");
    if (!(s.horizon > s.h)) throw ConfigError(r.at("horizon"), "horizon must exceed the step h");
    if (s.reference.empty()) throw ConfigError(r.at("reference"), "needs at least one breakpoint");
    for (std::size_t i = 1; i < s.reference.size(); ++i) {
        if (!(s.reference[i].first > s.reference[i - 1].first)) {
            throw ConfigError(r.at("reference") + "/" + std::to_string(i), "times must be strictly increasing");
        }
    }
    if (s.finalValue && *s.finalValue == 0.0) throw ConfigError(r.at("final_value"), "must be non-zero");
    if (!(s.settleFraction > 0.0 && s.settleFraction < 1.0)) throw ConfigError(r.at("settle_fraction"), "must lie in (0, 1)");
    if (!(s.amplitudeFraction >= 0.0)) throw ConfigError(r.at("amplitude_fraction"), "must be non-negative");
    if (s.minPeriods < 1) throw ConfigError(r.at("min_periods"), "must be at least 1");
    if (!(s.maxDecayPerPeriod > 0.0 && s.maxDecayPerPeriod < 1.0)) {
        throw ConfigError(r.at("max_decay_per_period"), "must lie in (0, 1)");
    }
}

void parseDf(const json& v, const std::string& path, DescribingFunctionConfig& d) {
    Reader r(v, path);
    if (r.has("omegas")) d.omegas = numberArray(r.raw("omegas"), r.at("omegas"));
    d.strict = r.boolean("strict", d.strict);
    r.finish();
    if (d.omegas.empty()) throw ConfigError(r.at("omegas"), "needs at least one frequency");
    for (std::size_t i = 0; i < d.omegas.size(); ++i) {
        if (!(d.omegas[i] > 0.0)) throw ConfigError(r.at("omegas") + "/" + std::to_string(i), "frequency must be positive");
    }
}

// Cross-section checks that need the library objects.
void validateScenario(const ScenarioConfig& c) {
    const bool needsPlants = c.kind != ScenarioKind::DescribingFunction;
    if (needsPlants && c.plants.empty()) throw ConfigError("/plants", "at least one plant is required");
    if (!c.plants.empty() && c.worstSubsystem >= c.plants.size()) {
        throw ConfigError("/worst_subsystem", "index out of range");
    }
    const auto kind = controllerKindFromString(c.controller.kind);
    switch (c.kind) {
        case ScenarioKind::Design: {
            if (c.specs.empty()) throw ConfigError("/specs", "a design needs at least one specification");
            rethrowAt("/specs", [&] {
                buildDesignProblem(c).validate();
                return 0;
            });
            break;
        }
        case ScenarioKind::Stability:
            rethrowAt("/controller/params", [&] { return buildTemplate(c); });
            break;
        case ScenarioKind::Simulate: {
            rethrowAt("/controller/params", [&] { return buildTemplate(c); });
            for (std::size_t i = 0; i < c.simulation.switching.schedule.size(); ++i) {
                if (c.simulation.switching.schedule[i].second >= c.plants.size()) {
                    throw ConfigError("/simulation/switching/schedule/" + std::to_string(i) + "/1", "subsystem index out of range");
                }
            }
            const auto loop = rethrowAt("/plants", [&] { return buildClosedLoop(c); });
            rethrowAt("/simulation", [&] {
                loop.validate();
                return 0;
            });
            break;
        }
        case ScenarioKind::DescribingFunction:
            if (kind != ControllerKind::PIplusCI && kind != ControllerKind::PIalphaCIalpha) {
                throw ConfigError("/controller/kind", "df needs a PI+CI or PIalpha+CIalpha controller");
            }
            rethrowAt("/controller/params", [&] { return buildTemplate(c); });
            break;
    }
}

json termsToJson(const std::vector<FractionalTerm>& terms) {
    json a = json::array();
    for (const auto& t : terms) a.push_back({t.coeff, t.order});
    return a;
}

json pairsToJson(const auto& pairs) {
    json a = json::array();
    for (const auto& [x, y] : pairs) a.push_back({x, y});
    return a;
}

}  // namespace

std::string_view toString(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Design:
            return "design";
        case ScenarioKind::Simulate:
            return "simulate";
        case ScenarioKind::Stability:
            return "stability";
        case ScenarioKind::DescribingFunction:
            return "df";
    }
    return "?";
}

ScenarioConfig parseScenario(const std::string& jsonText) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("malformed JSON: ") + e.what());
    }
    Reader r(doc, "");
    ScenarioConfig c;
    c.kind = kindFromString(r.string("kind"), "/kind");
    c.name = r.string("name", "");
    if (r.has("plants")) {
        const auto& a = r.array("plants");
        for (std::size_t i = 0; i < a.size(); ++i) c.plants.push_back(parsePlant(a[i], "/plants/" + std::to_string(i)));
    }
    c.worstSubsystem = r.unsignedInt("worst_subsystem", 0);
    c.controller = parseController(r.raw("controller"), "/controller");
    if (r.has("specs")) {
        const auto& a = r.array("specs");
        for (std::size_t i = 0; i < a.size(); ++i) c.specs.push_back(parseSpec(a[i], "/specs/" + std::to_string(i)));
    }
    if (r.has("grid")) parseGrid(r.raw("grid"), "/grid", c.grid);
    if (r.has("tuner")) parseTuner(r.raw("tuner"), "/tuner", c.tuner);
    if (r.has("simulation")) parseSimulation(r.raw("simulation"), "/simulation", c.simulation);
    if (r.has("df")) parseDf(r.raw("df"), "/df", c.df);
    c.output = r.string("output", "");
    r.finish();
    validateScenario(c);
    return c;
}

ScenarioConfig loadScenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("/", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parseScenario(ss.str());
}

std::string dumpScenario(const ScenarioConfig& c) {
    json j;
    j["kind"] = std::string(toString(c.kind));
    j["name"] = c.name;
    j["plants"] = json::array();
    for (const auto& p : c.plants) j["plants"].push_back({{"num", termsToJson(p.num)}, {"den", termsToJson(p.den)}});
    j["worst_subsystem"] = c.worstSubsystem;

    json ctl{{"kind", c.controller.kind}, {"params", c.controller.params}};
    if (c.controller.reset) {
        const auto& rs = *c.controller.reset;
        json r{{"trigger", rs.trigger}, {"target", rs.target}, {"period", rs.period},
               {"plant_state_gain", rs.plantStateGain}, {"reference_gain", rs.referenceGain}};
        if (rs.feedforwardGain) r["feedforward_gain"] = *rs.feedforwardGain;
        ctl["reset"] = r;
    }
    j["controller"] = ctl;

    j["specs"] = json::array();
    for (const auto& s : c.specs) {
        json o{{"type", s.type}};
        if (s.type == "phase_margin") {
            o["phase_margin_deg"] = s.phaseMarginDeg;
            o["crossover_rad_s"] = s.crossoverRadS;
        } else if (s.type == "gain_crossover") {
            o["crossover_rad_s"] = s.crossoverRadS;
        } else {
            o["max_db"] = s.maxDb;
            o["bandwidth_rad_s"] = s.bandwidthRadS;
        }
        j["specs"].push_back(o);
    }
    j["grid"] = {{"w_min", c.grid.wMin}, {"w_max", c.grid.wMax}, {"points", c.grid.points}};
    j["tuner"] = {{"starts", c.tuner.starts},
                  {"seed", c.tuner.seed},
                  {"lower", c.tuner.lower},
                  {"upper", c.tuner.upper},
                  {"initial_guesses", c.tuner.initialGuesses},
                  {"fixed_params", c.tuner.fixedParams}};
    const auto& s = c.simulation;
    json sim{{"h", s.h},
             {"horizon", s.horizon},
             {"seed", s.seed},
             {"memory_policy", s.memoryPolicy},
             {"memory_length", s.memoryLength},
             {"reference", pairsToJson(s.reference)},
             {"switching",
              {{"schedule", pairsToJson(s.switching.schedule)}, {"min_dwell", s.switching.minDwell}, {"max_dwell", s.switching.maxDwell}}},
             {"settle_fraction", s.settleFraction},
             {"amplitude_fraction", s.amplitudeFraction},
             {"min_periods", s.minPeriods},
             {"max_decay_per_period", s.maxDecayPerPeriod}};
    if (s.finalValue) sim["final_value"] = *s.finalValue;
    j["simulation"] = sim;
    j["df"] = {{"omegas", c.df.omegas}, {"strict", c.df.strict}};
    j["output"] = c.output;
    return j.dump(2);
}

FractionalTransferFunction toTransferFunction(const PlantConfig& p) {
    return {FractionalPolynomial(p.num), FractionalPolynomial(p.den)};
}

SwitchedPlant buildSwitchedPlant(const ScenarioConfig& c) {
    SwitchedPlant sp;
    for (const auto& p : c.plants) sp.subsystems.push_back(toTransferFunction(p));
    sp.worstIndex = c.worstSubsystem;
    return sp;
}

ControllerTemplate buildTemplate(const ScenarioConfig& c) {
    ControllerTemplate t{controllerKindFromString(c.controller.kind), c.controller.params};
    t.validate();
    return t;
}

DesignProblem buildDesignProblem(const ScenarioConfig& c) {
    DesignProblem p;
    p.plant = buildSwitchedPlant(c);
    p.kind = controllerKindFromString(c.controller.kind);
    for (const auto& s : c.specs) p.specs.push_back(toDesignSpec(s));
    p.lower = c.tuner.lower;
    p.upper = c.tuner.upper;
    p.initialGuesses = c.tuner.initialGuesses;
    p.fixedParams = c.tuner.fixedParams;
    p.grid = buildGrid(c);
    p.latinHypercubeStarts = c.tuner.starts;
    p.seed = c.tuner.seed;
    return p;
}

ClosedLoopConfig buildClosedLoop(const ScenarioConfig& c) {
    ClosedLoopConfig cfg;
    for (std::size_t i = 0; i < c.plants.size(); ++i) {
        cfg.plants.push_back(rethrowAt("/plants/" + std::to_string(i),
                                       [&] { return PlantModel::fromTransferFunction(toTransferFunction(c.plants[i])); }));
    }
    const auto& s = c.simulation;
    if (!s.switching.schedule.empty()) {
        cfg.switching.switches = s.switching.schedule;
    } else if (c.plants.size() > 1) {
        cfg.switching = randomSwitching(s.seed, s.horizon, c.plants.size(), s.switching.minDwell, s.switching.maxDwell);
    }
    cfg.controller = rethrowAt("/controller/params", [&] { return realize(buildTemplate(c)); });
    if (const auto& rs = c.controller.reset) {
        auto& ctl = cfg.controller;
        ctl.trigger = resetTriggerFromString(rs->trigger);
        ctl.target = resetTargetFromString(rs->target);
        ctl.period = rs->period;
        ctl.K = rs->feedforwardGain ? *rs->feedforwardGain
                                    : rethrowAt("/plants/0", [&] { return 1.0 / toTransferFunction(c.plants.at(0)).dcGain(); });
        ctl.plantStateGain = Eigen::Map<const Eigen::RowVectorXd>(rs->plantStateGain.data(),
                                                                   static_cast<Eigen::Index>(rs->plantStateGain.size()));
        ctl.referenceGain = rs->referenceGain;
    }
    cfg.reference.points = s.reference;
    cfg.h = s.h;
    cfg.horizon = s.horizon;
    cfg.memoryPolicy = memoryPolicyFromString(s.memoryPolicy);
    cfg.memoryLength = s.memoryLength;
    return cfg;
}

LimitCycleOptions buildLimitCycleOptions(const ScenarioConfig& c) {
    LimitCycleOptions o;
    o.settleFraction = c.simulation.settleFraction;
    o.amplitudeFraction = c.simulation.amplitudeFraction;
    o.minPeriods = c.simulation.minPeriods;
    o.maxDecayPerPeriod = c.simulation.maxDecayPerPeriod;
    return o;
}

std::vector<double> buildGrid(const ScenarioConfig& c) { return logGrid(c.grid.wMin, c.grid.wMax, c.grid.points); }

double metricsFinalValue(const ScenarioConfig& c) {
    if (c.simulation.finalValue) return *c.simulation.finalValue;
    for (auto it = c.simulation.reference.rbegin(); it != c.simulation.reference.rend(); ++it) {
        if (it->second != 0.0) return it->second;
    }
    return 1.0;
}

}  // namespace frhc
