#include "frhc/hybridsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace frhc {

namespace {

struct Discrete {
    Eigen::MatrixXd phi;
    Eigen::VectorXd gamma;
};

// One classical RK4 step of x' = A x + B u with u held, written as a linear map.
Discrete rk4Map(const PlantModel& p, double h) {
    const auto n = static_cast<Eigen::Index>(p.order());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd hA = h * p.A;
    const Eigen::MatrixXd hA2 = hA * hA;
    const Eigen::MatrixXd hA3 = hA2 * hA;
    Discrete d;
    d.phi = I + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 * hA / 24.0;
    d.gamma = h * (I + hA / 2.0 + hA2 / 6.0 + hA3 / 24.0) * p.B;
    return d;
}

// Fractional state split as offset + GL history; the offset absorbs a
// re-initialisation under the clear policy.
class FracState {
public:
    FracState(const GlKernel& kernel, double initial) : z_(kernel, initial) {}
    double value() const { return offset_ + z_.value(); }
    void advance(double rhs) { z_.advance(rhs); }
    void set(double v, MemoryPolicy policy) {
        if (policy == MemoryPolicy::Retain) {
            z_.overwrite(v - offset_);
        } else {
            offset_ = v;
            z_.restart(0.0);
        }
    }

private:
    GlState z_;
    double offset_ = 0.0;
};

std::string describe(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

template <class E>
std::string_view enumName(E v, std::initializer_list<std::pair<E, std::string_view>> table) {
    for (const auto& [k, name] : table) {
        if (k == v) return name;
    }
    return "?";
}

template <class E>
E enumFrom(std::string_view s, std::initializer_list<std::pair<E, std::string_view>> table, const char* what) {
    for (const auto& [k, name] : table) {
        if (name == s) return k;
    }
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

const std::initializer_list<std::pair<ResetTrigger, std::string_view>> kTriggers{
    {ResetTrigger::None, "none"}, {ResetTrigger::ZeroCrossing, "zero_crossing"}, {ResetTrigger::FixedInstants, "fixed_instants"}};
const std::initializer_list<std::pair<ResetTarget, std::string_view>> kTargets{
    {ResetTarget::Zero, "zero"},
    {ResetTarget::Feedforward, "feedforward"},
    {ResetTarget::GeneralNonZero, "general_nonzero"},
    {ResetTarget::VariableNonZero, "variable_nonzero"},
    {ResetTarget::StateFeedback, "state_feedback"}};
const std::initializer_list<std::pair<MemoryPolicy, std::string_view>> kPolicies{{MemoryPolicy::Retain, "retain"},
                                                                                  {MemoryPolicy::Clear, "clear"}};

ResetControllerSpec integralController(double alpha, double kp, double ki) {
    ResetControllerSpec c;
    c.alpha = alpha;
    c.A = Eigen::MatrixXd::Zero(1, 1);
    c.B = Eigen::VectorXd::Ones(1);
    c.C = Eigen::RowVectorXd::Constant(1, ki);
    c.D = kp;
    c.AR = Eigen::MatrixXd::Identity(1, 1);
    c.BR = Eigen::VectorXd::Zero(1);
    c.cr = ki;
    return c;
}

void makeSingleReset(ResetControllerSpec& c) {
    c.AR = Eigen::MatrixXd::Zero(1, 1);
    c.BR = Eigen::VectorXd::Ones(1);
    c.nR = 1;
    c.trigger = ResetTrigger::ZeroCrossing;
    c.target = ResetTarget::Zero;
}

}  // namespace

std::string_view toString(ResetTrigger v) { return enumName(v, kTriggers); }
std::string_view toString(ResetTarget v) { return enumName(v, kTargets); }
std::string_view toString(MemoryPolicy v) { return enumName(v, kPolicies); }
ResetTrigger resetTriggerFromString(std::string_view s) { return enumFrom(s, kTriggers, "reset trigger"); }
ResetTarget resetTargetFromString(std::string_view s) { return enumFrom(s, kTargets, "reset target"); }
MemoryPolicy memoryPolicyFromString(std::string_view s) { return enumFrom(s, kPolicies, "memory policy"); }

// ---------------------------------------------------------------------------
// Plants

PlantModel PlantModel::fromTransferFunction(const FractionalTransferFunction& tf) {
    if (!tf.isIntegerOrder()) throw std::invalid_argument("time-domain plants must be integer order");
    auto num = tf.num().toCoefficients();
    auto den = tf.den().toCoefficients();
    const std::size_t n = den.size() - 1;
    if (n == 0 || num.size() > n) throw std::invalid_argument("plant transfer function must be strictly proper");
    const double lead = den.front();
    for (auto& c : den) c /= lead;
    for (auto& c : num) c /= lead;
    num.insert(num.begin(), n - num.size(), 0.0);

    PlantModel p;
    const auto N = static_cast<Eigen::Index>(n);
    p.A = Eigen::MatrixXd::Zero(N, N);
    p.B = Eigen::VectorXd::Zero(N);
    p.C = Eigen::RowVectorXd::Zero(N);
    p.x0 = Eigen::VectorXd::Zero(N);
    // den = s^n + a_{n-1} s^{n-1} + ...; num aligned to s^{n-1} ... s^0.
    for (Eigen::Index i = 0; i < N; ++i) {
        p.A(i, 0) = -den[static_cast<std::size_t>(i) + 1];
        if (i + 1 < N) p.A(i, i + 1) = 1.0;
        p.B(i) = num[static_cast<std::size_t>(i)];
    }
    p.C(0) = 1.0;
    return p;
}

PlantModel PlantModel::secondOrder(double a1, double a2, double b) {
    PlantModel p;
    p.A.resize(2, 2);
    p.A << 0.0, 1.0, -a1, -a2;
    p.B.resize(2);
    p.B << 0.0, b;
    p.C.resize(2);
    p.C << 1.0, 0.0;
    p.x0 = Eigen::VectorXd::Zero(2);
    return p;
}

void PlantModel::validate() const {
    const auto n = A.rows();
    if (n == 0 || A.cols() != n || B.size() != n || C.size() != n || x0.size() != n) {
        throw std::invalid_argument("plant state-space dimensions are inconsistent");
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !x0.allFinite()) {
        throw std::invalid_argument("plant matrices must be finite");
    }
}

double PlantModel::fastestTimeConstant() const {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    double fastest = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) fastest = std::max(fastest, std::abs(es.eigenvalues()(i)));
    return fastest > 0.0 ? 1.0 / fastest : std::numeric_limits<double>::infinity();
}

double PlantModel::dcGain() const { return -(C * A.fullPivLu().solve(B))(0); }

// ---------------------------------------------------------------------------
// Controllers

void ResetControllerSpec::validate() const {
    const auto n = A.rows();
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("controller order must lie in (0, 2]");
    if (A.cols() != n || B.size() != n || C.size() != n || AR.rows() != n || AR.cols() != n || BR.size() != n) {
        throw std::invalid_argument("controller state-space dimensions are inconsistent");
    }
    if (nR > static_cast<std::size_t>(n)) throw std::invalid_argument("n_R exceeds the controller state count");
    const auto keep = n - static_cast<Eigen::Index>(nR);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double want = (i == j && i < keep) ? 1.0 : 0.0;
            if (AR(i, j) != want) throw std::invalid_argument("A_R must be block-diagonal [I, 0] with n_R trailing zeros");
        }
    }
    if (trigger != ResetTrigger::None) {
        if (nR == 0 && target != ResetTarget::Zero) throw std::invalid_argument("non-zero reset target needs n_R >= 1");
        if ((target == ResetTarget::GeneralNonZero || target == ResetTarget::VariableNonZero) && cr == 0.0) {
            throw std::invalid_argument("c_r must be non-zero for a non-zero reset target");
        }
    }
    if (trigger == ResetTrigger::FixedInstants && !(period > 0.0)) throw std::invalid_argument("reset period must be positive");
    if (target == ResetTarget::StateFeedback && plantStateGain.size() == 0) {
        throw std::invalid_argument("state-feedback reset needs plant state gains");
    }
    if (derivative) {
        if (!(derivative->order > 0.0 && derivative->order <= 2.0)) throw std::invalid_argument("derivative order must lie in (0, 2]");
        if (!(derivative->filterNN > 0.0)) throw std::invalid_argument("NN must be positive");
    }
}

ResetControllerSpec realize(const ControllerTemplate& tmpl, double defaultNN) {
    tmpl.validate();
    const auto nn = tmpl.find("NN").value_or(defaultNN);
    ResetControllerSpec c;
    switch (tmpl.kind) {
        case ControllerKind::PI:
        case ControllerKind::PCI:
            c = integralController(1.0, tmpl.get("K_p"), tmpl.get("K_i"));
            break;
        case ControllerKind::FPI:
            c = integralController(tmpl.get("lambda"), tmpl.get("K_p"), tmpl.get("K_i"));
            break;
        case ControllerKind::FPCI:
            c = integralController(tmpl.get("alpha"), tmpl.get("K_p"), tmpl.get("K_i"));
            break;
        case ControllerKind::PID:
        case ControllerKind::NPID:
        case ControllerKind::PCID:
            c = integralController(1.0, tmpl.get("K_p"), tmpl.get("K_i"));
            c.derivative = DerivativeChannel{tmpl.get("K_d"), 1.0, nn};
            break;
        case ControllerKind::FPID:
            c = integralController(tmpl.get("lambda"), tmpl.get("K_p"), tmpl.get("K_i"));
            c.derivative = DerivativeChannel{tmpl.get("K_d"), tmpl.get("mu"), nn};
            break;
        case ControllerKind::FPD:
            c.A = Eigen::MatrixXd::Zero(0, 0);
            c.B = Eigen::VectorXd::Zero(0);
            c.C = Eigen::RowVectorXd::Zero(0);
            c.AR = Eigen::MatrixXd::Zero(0, 0);
            c.BR = Eigen::VectorXd::Zero(0);
            c.D = tmpl.get("K_p");
            c.derivative = DerivativeChannel{tmpl.get("K_d"), tmpl.get("mu"), nn};
            break;
        case ControllerKind::PIplusCI:
            return makePIalphaCIalpha(tmpl.get("K_p"), tmpl.get("tau_i"), tmpl.get("P_reset"), 1.0);
        case ControllerKind::PIalphaCIalpha:
            return makePIalphaCIalpha(tmpl.get("K_p"), tmpl.get("tau_i"), tmpl.get("P_reset"), tmpl.get("alpha"));
    }
    if (tmpl.kind == ControllerKind::PCI || tmpl.kind == ControllerKind::PCID || tmpl.kind == ControllerKind::FPCI) {
        makeSingleReset(c);
    }
    return c;
}

ResetControllerSpec makePIalphaCIalpha(double kp, double tauI, double pReset, double alpha) {
    if (!(tauI > 0.0)) throw std::invalid_argument("tau_i must be positive");
    if (!(pReset >= 0.0 && pReset <= 1.0)) throw std::invalid_argument("P_reset must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0, 2)");
    ResetControllerSpec c;
    c.alpha = alpha;
    c.A = Eigen::MatrixXd::Zero(2, 2);
    c.B = Eigen::VectorXd::Ones(2);
    c.C.resize(2);
    // Linear channel weighted (1 - P), reset channel weighted P.
    c.C << kp / tauI * (1.0 - pReset), kp / tauI * pReset;
    c.D = kp;
    c.AR.resize(2, 2);
    c.AR << 1.0, 0.0, 0.0, 0.0;
    c.BR.resize(2);
    c.BR << 0.0, 1.0;
    c.cr = kp * pReset / tauI;
    c.nR = 1;
    c.trigger = ResetTrigger::ZeroCrossing;
    c.target = ResetTarget::Zero;
    return c;
}

ResetControllerSpec makeZhengReset(double e1, double e2, double g, double kp, double tauI, double tk) {
    if (!(tauI > 0.0)) throw std::invalid_argument("tau_i must be positive");
    auto c = integralController(1.0, kp, kp / tauI);
    makeSingleReset(c);
    c.trigger = ResetTrigger::FixedInstants;
    c.period = tk;
    c.target = ResetTarget::StateFeedback;
    c.plantStateGain.resize(2);
    c.plantStateGain << e1, e2;
    c.referenceGain = g;
    return c;
}

// ---------------------------------------------------------------------------
// Signals

double PiecewiseConstant::at(double t) const {
    auto it = std::upper_bound(points.begin(), points.end(), t, [](double v, const auto& p) { return v < p.first; });
    return it == points.begin() ? points.front().second : std::prev(it)->second;
}

void PiecewiseConstant::validate(const char* what) const {
    if (points.empty()) throw std::invalid_argument(std::string(what) + " has no breakpoints");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second)) {
            throw std::invalid_argument(std::string(what) + " has a non-finite breakpoint");
        }
        if (i > 0 && !(points[i].first > points[i - 1].first)) {
            throw std::invalid_argument(std::string(what) + " breakpoints must be strictly increasing in time");
        }
    }
}

std::size_t SwitchingSchedule::at(double t) const {
    auto it = std::upper_bound(switches.begin(), switches.end(), t, [](double v, const auto& p) { return v < p.first; });
    return it == switches.begin() ? switches.front().second : std::prev(it)->second;
}

SwitchingSchedule randomSwitching(std::uint64_t seed, double horizon, std::size_t subsystems, double minDwell,
                                  double maxDwell) {
    if (subsystems == 0) throw std::invalid_argument("switching needs at least one subsystem");
    if (!(minDwell > 0.0 && maxDwell >= minDwell)) throw std::invalid_argument("invalid dwell-time range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dwell(minDwell, maxDwell);
    SwitchingSchedule s;
    s.switches = {{0.0, 0}};
    double t = 0.0;
    std::size_t idx = 0;
    while (true) {
        t += dwell(rng);
        if (t >= horizon) break;
        idx = (idx + 1) % subsystems;
        s.switches.emplace_back(t, idx);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Simulation

void ClosedLoopConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step h must be positive");
    if (!(horizon > h) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must exceed the step h");
    if (plants.empty()) throw std::invalid_argument("at least one plant is required");
    for (const auto& p : plants) {
        p.validate();
        if (p.order() != plants.front().order()) throw std::invalid_argument("switched plants must share a state dimension");
        const double tau = p.fastestTimeConstant();
        if (h >= tau / 10.0) {
            throw std::invalid_argument("step h = " + describe(h) + " is not below a tenth of the fastest plant time constant " +
                                        describe(tau));
        }
    }
    controller.validate();
    if (controller.target == ResetTarget::StateFeedback &&
        static_cast<std::size_t>(controller.plantStateGain.size()) != plants.front().order()) {
        throw std::invalid_argument("state-feedback reset gains do not match the plant state dimension");
    }
    reference.validate("reference");
    if (switching.switches.empty() || switching.switches.front().first != 0.0) {
        throw std::invalid_argument("switching schedule must start at t = 0");
    }
    for (std::size_t i = 0; i < switching.switches.size(); ++i) {
        if (switching.switches[i].second >= plants.size()) throw std::invalid_argument("switching index out of range");
        if (i > 0 && !(switching.switches[i].first > switching.switches[i - 1].first)) {
            throw std::invalid_argument("switching times must be strictly increasing");
        }
    }
    if (controller.trigger == ResetTrigger::FixedInstants && std::lround(controller.period / h) < 1) {
        throw std::invalid_argument("reset period is shorter than the step h");
    }
    if (!(deadband >= 0.0)) throw std::invalid_argument("dead-band must be non-negative");
}

SimulationTrace simulate(const ClosedLoopConfig& cfg) {
    cfg.validate();
    const auto& ctl = cfg.controller;
    const double h = cfg.h;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / h));
    const auto nc = static_cast<Eigen::Index>(ctl.states());
    const auto keep = nc - static_cast<Eigen::Index>(ctl.nR);

    std::vector<Discrete> maps;
    for (const auto& p : cfg.plants) maps.push_back(rk4Map(p, h));

    const GlKernel kernel(ctl.alpha, h, cfg.memoryLength);
    std::vector<FracState> xs;
    for (Eigen::Index i = 0; i < nc; ++i) xs.emplace_back(kernel, 0.0);
    Eigen::VectorXd x(nc);
    auto refresh = [&] {
        for (Eigen::Index i = 0; i < nc; ++i) x(i) = xs[static_cast<std::size_t>(i)].value();
    };

    // Derivative channel: first-order filter or a direct GL derivative of e.
    double dFilter = 0.0;
    std::optional<GlKernel> dKernel;
    std::vector<double> eHistory;
    if (ctl.derivative && ctl.derivative->order != 1.0) dKernel.emplace(ctl.derivative->order, h, cfg.memoryLength);

    const std::size_t period = ctl.trigger == ResetTrigger::FixedInstants
                                   ? static_cast<std::size_t>(std::lround(ctl.period / h))
                                   : 0;
    const double gammaFactor = 1.0 / std::tgamma(ctl.alpha + 1.0);
    // Keeping the history across a jump is only meaningful for alpha <= 1:
    // above that the derivative of a step is not integrable.
    const MemoryPolicy policy = ctl.alpha > 1.0 ? MemoryPolicy::Clear : cfg.memoryPolicy;

    SimulationTrace tr;
    tr.h = h;
    tr.memoryPolicy = policy;
    tr.controllerStates.assign(static_cast<std::size_t>(nc), {});
    tr.plantStates.assign(cfg.plants.front().order(), {});
    for (auto* v : {&tr.t, &tr.y, &tr.u, &tr.e, &tr.r}) v->reserve(steps + 1);

    Eigen::VectorXd xp = cfg.plants.front().x0;
    int lastSign = 0;
    double ePrev = 0.0;
    std::size_t lastEvent = 0;
    bool anyEvent = false;

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const std::size_t idx = cfg.switching.at(t);
        const double r = cfg.reference.at(t);
        const double y = cfg.plants[idx].C.dot(xp);
        const double e = r - y;
        refresh();

        bool fire = false;
        double tEvent = t;
        if (ctl.trigger == ResetTrigger::ZeroCrossing && k > 0) {
            const double eps = cfg.deadband * std::max(1.0, std::abs(r));
            const int sgn = e > eps ? 1 : (e < -eps ? -1 : 0);
            const bool debounced = !anyEvent || k - lastEvent >= 2;
            if (lastSign != 0 && sgn != lastSign && debounced) {
                fire = true;
                if (sgn != 0 && ePrev != e) tEvent = t - h + h * ePrev / (ePrev - e);
                lastSign = sgn;
            } else if (sgn != 0) {
                lastSign = sgn;
            }
        } else if (ctl.trigger == ResetTrigger::ZeroCrossing) {
            const double eps = cfg.deadband * std::max(1.0, std::abs(r));
            lastSign = e > eps ? 1 : (e < -eps ? -1 : 0);
        } else if (ctl.trigger == ResetTrigger::FixedInstants && k > 0 && k % period == 0) {
            fire = true;
        }

        if (fire) {
            ResetEvent ev;
            ev.time = tEvent;
            ev.sample = k;
            ev.pre.assign(x.data(), x.data() + nc);
            double inject = 0.0;
            const double denom = static_cast<double>(ctl.nR) * ctl.cr;
            switch (ctl.target) {
                case ResetTarget::Zero:
                case ResetTarget::Feedforward:
                    break;
                case ResetTarget::GeneralNonZero:
                    inject = ctl.K * r / denom;
                    break;
                case ResetTarget::VariableNonZero:
                    inject = (ctl.K * r - ctl.D * e) / denom;
                    break;
                case ResetTarget::StateFeedback:
                    inject = ctl.plantStateGain.dot(xp) + ctl.referenceGain * r;
                    break;
            }
            Eigen::VectorXd post = ctl.AR * x + ctl.BR * inject;
            if (tEvent < t) {
                // Flow of the reset states from the crossing instant to the sample.
                const Eigen::VectorXd rhs = ctl.A * post + ctl.B * e;
                const double span = std::pow(t - tEvent, ctl.alpha) * gammaFactor;
                for (Eigen::Index i = keep; i < nc; ++i) post(i) += span * rhs(i);
            }
            for (Eigen::Index i = keep; i < nc; ++i) xs[static_cast<std::size_t>(i)].set(post(i), policy);
            refresh();
            ev.post.assign(x.data(), x.data() + nc);
            tr.events.push_back(std::move(ev));
            lastEvent = k;
            anyEvent = true;
        }

        double u = ctl.C.dot(x) + ctl.D * e;
        if (ctl.derivative) {
            const auto& dc = *ctl.derivative;
            if (dKernel) {
                eHistory.push_back(e);
                const std::size_t m = dKernel->effectiveMemory(eHistory.size() - 1);
                const double* w = dKernel->weights(m);
                double acc = 0.0;
                for (std::size_t j = 0; j <= m; ++j) acc += w[j] * eHistory[eHistory.size() - 1 - j];
                u += dc.gain * acc / dKernel->hAlpha();
            } else {
                u += dc.gain * dc.filterNN * (e - dFilter);
            }
        }
        if (ctl.target == ResetTarget::Feedforward && ctl.trigger != ResetTrigger::None) u += ctl.K * r;

        if (!std::isfinite(u) || !xp.allFinite() || !x.allFinite()) {
            throw NumericalFailure("non-finite state at t = " + describe(t) + " (sample " + std::to_string(k) + ")");
        }

        tr.t.push_back(t);
        tr.y.push_back(y);
        tr.u.push_back(u);
        tr.e.push_back(e);
        tr.r.push_back(r);
        tr.active.push_back(idx);
        for (Eigen::Index i = 0; i < nc; ++i) tr.controllerStates[static_cast<std::size_t>(i)].push_back(x(i));
        for (Eigen::Index i = 0; i < xp.size(); ++i) tr.plantStates[static_cast<std::size_t>(i)].push_back(xp(i));

        if (k == steps) break;
        xp = maps[idx].phi * xp + maps[idx].gamma * u;
        if (nc > 0) {
            const Eigen::VectorXd rhs = ctl.A * x + ctl.B * e;
            for (Eigen::Index i = 0; i < nc; ++i) xs[static_cast<std::size_t>(i)].advance(rhs(i));
        }
        if (ctl.derivative && !dKernel) dFilter += h * ctl.derivative->filterNN * (e - dFilter);
        ePrev = e;
    }
    return tr;
}

FractionalTransferFunction closedLoopTF(const FractionalTransferFunction& base, const FractionalTransferFunction& plant,
                                        bool withFeedforward, double K) {
    const auto den = base.den() * plant.den() + base.num() * plant.num();
    const auto num = withFeedforward ? (base.den() * K + base.num()) * plant.num() : base.num() * plant.num();
    return {num, den};
}

std::vector<double> stepResponse(const FractionalTransferFunction& tf, double h, double horizon) {
    if (!(h > 0.0) || !(horizon > h)) throw std::invalid_argument("invalid step or horizon");
    const auto p = PlantModel::fromTransferFunction(tf);
    const auto map = rk4Map(p, h);
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    std::vector<double> y;
    y.reserve(steps + 1);
    Eigen::VectorXd x = p.x0;
    for (std::size_t k = 0; k <= steps; ++k) {
        y.push_back(p.C.dot(x));
        x = map.phi * x + map.gamma;
    }
    return y;
}

SimulationTrace simulateOustaloupFpi(double kp, double ki, double lambda, const ClosedLoopConfig& cfg, double wLow,
                                     double wHigh, std::size_t cells) {
    cfg.validate();
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
    // s^-lambda = s^-1 * s^(1 - lambda)
    const auto filter = oustaloupFilter(-lambda, wLow, wHigh, cells);
    const double h = cfg.h;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / h));
    std::vector<Discrete> maps;
    for (const auto& p : cfg.plants) maps.push_back(rk4Map(p, h));

    const std::size_t ns = filter.poles.size();
    std::vector<double> decay(ns), input(ns), xi(ns, 0.0);
    for (std::size_t i = 0; i < ns; ++i) {
        decay[i] = std::exp(-filter.poles[i] * h);
        input[i] = -std::expm1(-filter.poles[i] * h) / filter.poles[i];
    }
    double integral = 0.0;

    SimulationTrace tr;
    tr.h = h;
    tr.controllerStates.assign(1, {});
    tr.plantStates.assign(cfg.plants.front().order(), {});
    Eigen::VectorXd xp = cfg.plants.front().x0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const std::size_t idx = cfg.switching.at(t);
        const double r = cfg.reference.at(t);
        const double y = cfg.plants[idx].C.dot(xp);
        const double e = r - y;
        const double u = kp * e + ki * integral;
        tr.t.push_back(t);
        tr.y.push_back(y);
        tr.u.push_back(u);
        tr.e.push_back(e);
        tr.r.push_back(r);
        tr.active.push_back(idx);
        tr.controllerStates[0].push_back(integral);
        for (Eigen::Index i = 0; i < xp.size(); ++i) tr.plantStates[static_cast<std::size_t>(i)].push_back(xp(i));
        if (k == steps) break;

        double v = filter.gain * e;
        for (std::size_t i = 0; i < ns; ++i) {
            const double out = v + (filter.zeros[i] - filter.poles[i]) * xi[i];
            xi[i] = decay[i] * xi[i] + input[i] * v;
            v = out;
        }
        integral += h * v;
        xp = maps[idx].phi * xp + maps[idx].gamma * u;
        if (!std::isfinite(integral) || !xp.allFinite()) {
            throw NumericalFailure("non-finite state at t = " + describe(t));
        }
    }
    return tr;
}

}  // namespace frhc
