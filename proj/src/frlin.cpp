#include "frhc/frlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace frhc {

namespace {

constexpr double kOrderMergeTol = 1e-12;
constexpr double kOustaloupGuardDecades = 2.0;

bool isInteger(double x) { return std::abs(x - std::round(x)) < kOrderMergeTol; }

void checkOrder(double order) {
    if (!std::isfinite(order) || order < 0.0) {
        std::ostringstream os;
        os << "fractional polynomial order must be finite and >= 0, got " << order;
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

FractionalPolynomial::FractionalPolynomial(std::vector<FractionalTerm> terms) {
    for (const auto& t : terms) {
        checkOrder(t.order);
        if (!std::isfinite(t.coeff)) throw std::invalid_argument("fractional polynomial coefficient must be finite");
    }
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.order > b.order; });
    for (const auto& t : terms) {
        if (!terms_.empty() && std::abs(terms_.back().order - t.order) < kOrderMergeTol) {
            terms_.back().coeff += t.coeff;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](const auto& t) { return t.coeff == 0.0; });
    // Snap near-integer orders so integer detection is exact downstream.
    for (auto& t : terms_) {
        if (isInteger(t.order)) t.order = std::round(t.order);
    }
}

FractionalPolynomial FractionalPolynomial::constant(double c) { return FractionalPolynomial({{c, 0.0}}); }

FractionalPolynomial FractionalPolynomial::monomial(double coeff, double order) {
    return FractionalPolynomial({{coeff, order}});
}

FractionalPolynomial FractionalPolynomial::fromCoefficients(std::span<const double> highestFirst) {
    std::vector<FractionalTerm> terms;
    const auto n = highestFirst.size();
    for (std::size_t i = 0; i < n; ++i) terms.push_back({highestFirst[i], static_cast<double>(n - 1 - i)});
    return FractionalPolynomial(std::move(terms));
}

double FractionalPolynomial::highestOrder() const { return terms_.empty() ? 0.0 : terms_.front().order; }

double FractionalPolynomial::lowestOrder() const { return terms_.empty() ? 0.0 : terms_.back().order; }

bool FractionalPolynomial::isIntegerOrder() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return isInteger(t.order); });
}

std::vector<double> FractionalPolynomial::toCoefficients() const {
    if (!isIntegerOrder()) throw std::domain_error("polynomial has non-integer orders");
    if (terms_.empty()) return {0.0};
    const auto degree = static_cast<std::size_t>(std::lround(highestOrder()));
    std::vector<double> c(degree + 1, 0.0);
    for (const auto& t : terms_) c[degree - static_cast<std::size_t>(std::lround(t.order))] = t.coeff;
    return c;
}

double FractionalPolynomial::valueAtZero() const {
    double v = 0.0;
    for (const auto& t : terms_) {
        if (t.order == 0.0) v += t.coeff;
    }
    return v;
}

FractionalPolynomial FractionalPolynomial::operator+(const FractionalPolynomial& o) const {
    auto terms = terms_;
    terms.insert(terms.end(), o.terms_.begin(), o.terms_.end());
    return FractionalPolynomial(std::move(terms));
}

FractionalPolynomial FractionalPolynomial::operator-(const FractionalPolynomial& o) const { return *this + o * -1.0; }

FractionalPolynomial FractionalPolynomial::operator*(const FractionalPolynomial& o) const {
    std::vector<FractionalTerm> terms;
    terms.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) terms.push_back({a.coeff * b.coeff, a.order + b.order});
    }
    return FractionalPolynomial(std::move(terms));
}

FractionalPolynomial FractionalPolynomial::operator*(double k) const {
    auto terms = terms_;
    for (auto& t : terms) t.coeff *= k;
    return FractionalPolynomial(std::move(terms));
}

FractionalTransferFunction::FractionalTransferFunction(FractionalPolynomial num, FractionalPolynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.isZero()) throw std::invalid_argument("transfer function denominator has no nonzero coefficient");
}

FractionalTransferFunction FractionalTransferFunction::gain(double k) {
    return {FractionalPolynomial::constant(k), FractionalPolynomial::constant(1.0)};
}

double FractionalTransferFunction::relativeOrder() const { return den_.highestOrder() - num_.highestOrder(); }

double FractionalTransferFunction::dcGain() const {
    // Cancel common powers of s at the origin before evaluating.
    const double shift = std::min(num_.isZero() ? den_.lowestOrder() : num_.lowestOrder(), den_.lowestOrder());
    auto lowered = [shift](const FractionalPolynomial& p) {
        double v = 0.0;
        for (const auto& t : p.terms()) {
            if (std::abs(t.order - shift) < kOrderMergeTol) v += t.coeff;
        }
        return v;
    };
    const double d = lowered(den_);
    if (d == 0.0) throw SingularEvaluation("transfer function has a pole at s = 0", 0.0);
    return lowered(num_) / d;
}

Complex FractionalTransferFunction::operator()(double omega) const {
    const Complex d = evalFractionalPoly(den_, omega);
    if (d == 0.0) {
        std::ostringstream os;
        os << "transfer function denominator vanishes at omega = " << omega;
        throw SingularEvaluation(os.str(), omega);
    }
    return evalFractionalPoly(num_, omega) / d;
}

FractionalTransferFunction FractionalTransferFunction::operator*(const FractionalTransferFunction& o) const {
    return {num_ * o.num_, den_ * o.den_};
}

FractionalTransferFunction FractionalTransferFunction::operator+(const FractionalTransferFunction& o) const {
    return {num_ * o.den_ + o.num_ * den_, den_ * o.den_};
}

FractionalTransferFunction FractionalTransferFunction::feedback() const { return {num_, den_ + num_}; }

Complex evalFractionalPoly(const FractionalPolynomial& p, double omega) {
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
        throw std::invalid_argument("evaluation frequency must be finite and >= 0");
    }
    Complex sum = 0.0;
    if (omega == 0.0) {
        for (const auto& t : p.terms()) {
            if (t.order == 0.0) sum += t.coeff;
        }
        return sum;
    }
    const double logW = std::log(omega);
    for (const auto& t : p.terms()) {
        if (t.order == 0.0) {
            sum += t.coeff;
            continue;
        }
        const double mag = t.coeff * std::exp(t.order * logW);
        const double ph = t.order * kPi / 2.0;
        if (isInteger(t.order)) {
            // Exact quadrant for integer powers of j.
            switch (static_cast<long>(std::lround(t.order)) % 4) {
                case 0: sum += Complex(mag, 0.0); break;
                case 1: sum += Complex(0.0, mag); break;
                case 2: sum += Complex(-mag, 0.0); break;
                default: sum += Complex(0.0, -mag); break;
            }
        } else {
            sum += Complex(mag * std::cos(ph), mag * std::sin(ph));
        }
    }
    return sum;
}

std::vector<Complex> freqResponse(const FractionalTransferFunction& tf, std::span<const double> grid) {
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("frequency grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("frequency grid must be strictly increasing");
        out.push_back(tf(grid[i]));
    }
    return out;
}

std::vector<double> logGrid(double wMin, double wMax, std::size_t points) {
    if (!(wMin > 0.0) || !(wMax > wMin) || points < 2) throw std::invalid_argument("invalid log grid");
    std::vector<double> g(points);
    const double a = std::log10(wMin);
    const double b = std::log10(wMax);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    g.front() = wMin;
    g.back() = wMax;
    return g;
}

std::vector<double> unwrapPhase(std::span<const double> principal) {
    std::vector<double> out(principal.begin(), principal.end());
    double offset = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double jump = principal[i] - principal[i - 1];
        if (jump > kPi) offset -= 2.0 * kPi;
        else if (jump < -kPi) offset += 2.0 * kPi;
        out[i] = principal[i] + offset;
    }
    return out;
}

std::vector<double> unwrappedPhase(std::span<const Complex> values) {
    std::vector<double> p(values.size());
    std::transform(values.begin(), values.end(), p.begin(), [](const Complex& c) { return std::arg(c); });
    return unwrapPhase(p);
}

std::vector<double> glWeights(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("GL order must lie in (0, 2]");
    if (n < 1) throw std::invalid_argument("GL weight count must be >= 1");
    std::vector<double> w(n + 1);
    w[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) w[k] = w[k - 1] * (1.0 - (alpha + 1.0) / static_cast<double>(k));
    return w;
}

GlKernel::GlKernel(double alpha, double h, std::size_t memoryLength)
    : alpha_(alpha), h_(h), hAlpha_(std::pow(h, alpha)), memory_(memoryLength), integer_(isInteger(alpha)) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("GL order must lie in (0, 2]");
    if (!(h > 0.0)) throw std::invalid_argument("GL step must be > 0");
    if (integer_) {
        // Finite-difference weights; everything past index alpha is exactly zero.
        weights_ = glWeights(alpha, static_cast<std::size_t>(std::lround(alpha)));
    } else {
        weights_ = glWeights(alpha, 64);
    }
}

void GlKernel::extend(std::size_t n) const {
    if (integer_ || n < weights_.size()) return;
    std::size_t target = std::max(n + 1, 2 * weights_.size());
    const std::size_t start = weights_.size();
    weights_.resize(target);
    for (std::size_t k = start; k < target; ++k) {
        weights_[k] = weights_[k - 1] * (1.0 - (alpha_ + 1.0) / static_cast<double>(k));
    }
}

double GlKernel::weight(std::size_t k) const {
    if (integer_) return k < weights_.size() ? weights_[k] : 0.0;
    extend(k);
    return weights_[k];
}

const double* GlKernel::weights(std::size_t upTo) const {
    extend(upTo);
    return weights_.data();
}

std::size_t GlKernel::effectiveMemory(std::size_t available) const {
    std::size_t m = available;
    if (memory_ > 0) m = std::min(m, memory_);
    if (integer_) m = std::min(m, weights_.size() - 1);
    return m;
}

double glStep(const GlKernel& kernel, std::span<const double> historyNewestFirst, double rhs) {
    const std::size_t m = kernel.effectiveMemory(historyNewestFirst.size());
    double acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j) acc += kernel.weight(j) * historyNewestFirst[j - 1];
    return kernel.hAlpha() * rhs - acc;
}

GlState::GlState(GlKernel kernel, double initial) : kernel_(std::move(kernel)) { history_.push_back(initial); }

double GlState::advance(double rhs) {
    const std::size_t n = history_.size();
    const std::size_t m = kernel_.effectiveMemory(n);
    const double* w = kernel_.weights(m);
    // Four partial sums over the most recent m samples, newest paired with w_1.
    const double* x = history_.data() + n - 1;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t j = 1;
    for (; j + 3 <= m; j += 4) {
        a0 += w[j] * *(x - (j - 1));
        a1 += w[j + 1] * *(x - j);
        a2 += w[j + 2] * *(x - (j + 1));
        a3 += w[j + 3] * *(x - (j + 2));
    }
    for (; j <= m; ++j) a0 += w[j] * *(x - (j - 1));
    const double next = kernel_.hAlpha() * rhs - ((a0 + a1) + (a2 + a3));
    history_.push_back(next);
    return next;
}

void GlState::restart(double value) {
    history_.clear();
    history_.push_back(value);
}

FractionalTransferFunction OustaloupFilter::toTransferFunction() const {
    FractionalPolynomial num = FractionalPolynomial::constant(gain);
    FractionalPolynomial den = FractionalPolynomial::constant(1.0);
    for (double z : zeros) num = num * FractionalPolynomial({{1.0, 1.0}, {z, 0.0}});
    for (double p : poles) den = den * FractionalPolynomial({{1.0, 1.0}, {p, 0.0}});
    if (integerPower > 0) num = num * FractionalPolynomial::monomial(1.0, integerPower);
    if (integerPower < 0) den = den * FractionalPolynomial::monomial(1.0, -integerPower);
    return {num, den};
}

Complex OustaloupFilter::operator()(double omega) const {
    const Complex s(0.0, omega);
    Complex v = gain;
    for (double z : zeros) v *= (s + z);
    for (double p : poles) v /= (s + p);
    if (integerPower != 0) v *= std::pow(s, integerPower);
    return v;
}

OustaloupFilter oustaloupFilter(double alpha, double wLow, double wHigh, std::size_t cells) {
    if (!(wLow > 0.0) || !(wHigh > wLow)) throw std::invalid_argument("Oustaloup band requires 0 < wLow < wHigh");
    if (cells < 1) throw std::invalid_argument("Oustaloup approximation needs at least one cell");
    if (!std::isfinite(alpha)) throw std::invalid_argument("Oustaloup order must be finite");
    OustaloupFilter f;
    f.alpha = alpha;
    const double n = std::floor(alpha);
    f.integerPower = static_cast<int>(n);
    const double frac = alpha - n;
    if (frac < kOrderMergeTol || frac > 1.0 - kOrderMergeTol) {
        f.integerPower = static_cast<int>(std::lround(alpha));
        return f;
    }
    // Guard decades outside the requested band keep the edges of the band
    // accurate; the cell density of the requested band is preserved.
    const double density = static_cast<double>(cells) / std::log10(wHigh / wLow);
    const auto guardCells = static_cast<std::size_t>(std::ceil(density * kOustaloupGuardDecades));
    const double lo = wLow / std::pow(10.0, kOustaloupGuardDecades);
    const double hi = wHigh * std::pow(10.0, kOustaloupGuardDecades);
    const std::size_t total = cells + 2 * guardCells;
    const double ratio = hi / lo;
    const auto m = static_cast<double>(total);
    for (std::size_t k = 1; k <= total; ++k) {
        const auto kk = static_cast<double>(k);
        f.zeros.push_back(lo * std::pow(ratio, (2.0 * kk - 1.0 - frac) / (2.0 * m)));
        f.poles.push_back(lo * std::pow(ratio, (2.0 * kk - 1.0 + frac) / (2.0 * m)));
    }
    f.gain = std::pow(hi, frac);
    return f;
}

FractionalTransferFunction oustaloupApprox(double alpha, double wLow, double wHigh, std::size_t cells) {
    return oustaloupFilter(alpha, wLow, wHigh, cells).toTransferFunction();
}

}  // namespace frhc
