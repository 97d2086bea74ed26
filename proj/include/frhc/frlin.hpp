#pragma once

// Fractional-order LTI numerics: pseudo-polynomials in s^alpha, their exact
// frequency evaluation, and Grunwald-Letnikov time stepping.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace frhc {

using Complex = std::complex<double>;

/// Raised when a transfer function is evaluated at a frequency where its
/// denominator vanishes (or a negative power appears at the origin).
class SingularEvaluation : public std::domain_error {
public:
    SingularEvaluation(const std::string& what, double omega)
        : std::domain_error(what), omega_(omega) {}
    double omega() const { return omega_; }

private:
    double omega_;
};

struct FractionalTerm {
    double coeff = 0.0;
    double order = 0.0;
    bool operator==(const FractionalTerm&) const = default;
};

/// Pseudo-polynomial sum_k c_k s^{a_k}. Terms are kept sorted by descending
/// order with duplicate orders merged; exact-zero coefficients are dropped.
class FractionalPolynomial {
public:
    FractionalPolynomial() = default;
    FractionalPolynomial(std::vector<FractionalTerm> terms);
    FractionalPolynomial(std::initializer_list<FractionalTerm> terms)
        : FractionalPolynomial(std::vector<FractionalTerm>(terms)) {}

    static FractionalPolynomial constant(double c);
    static FractionalPolynomial monomial(double coeff, double order);
    /// From ordinary polynomial coefficients, highest degree first.
    static FractionalPolynomial fromCoefficients(std::span<const double> highestFirst);

    const std::vector<FractionalTerm>& terms() const { return terms_; }
    bool isZero() const { return terms_.empty(); }
    double highestOrder() const;
    double lowestOrder() const;
    bool isIntegerOrder() const;

    /// Ordinary polynomial coefficients, highest degree first. Throws if any
    /// order is non-integer.
    std::vector<double> toCoefficients() const;

    /// Value at s = 0 (only the order-0 term survives).
    double valueAtZero() const;

    FractionalPolynomial operator+(const FractionalPolynomial& o) const;
    FractionalPolynomial operator-(const FractionalPolynomial& o) const;
    FractionalPolynomial operator*(const FractionalPolynomial& o) const;
    FractionalPolynomial operator*(double k) const;
    bool operator==(const FractionalPolynomial& o) const = default;

private:
    std::vector<FractionalTerm> terms_;
};

class FractionalTransferFunction {
public:
    FractionalTransferFunction() : num_(FractionalPolynomial::constant(1.0)), den_(FractionalPolynomial::constant(1.0)) {}
    FractionalTransferFunction(FractionalPolynomial num, FractionalPolynomial den);

    static FractionalTransferFunction gain(double k);

    const FractionalPolynomial& num() const { return num_; }
    const FractionalPolynomial& den() const { return den_; }

    /// highest den order - highest num order; negative for improper systems.
    double relativeOrder() const;
    bool isIntegerOrder() const { return num_.isIntegerOrder() && den_.isIntegerOrder(); }
    /// Static gain num(0)/den(0); throws SingularEvaluation if den(0) = 0.
    double dcGain() const;

    Complex operator()(double omega) const;

    FractionalTransferFunction operator*(const FractionalTransferFunction& o) const;
    FractionalTransferFunction operator+(const FractionalTransferFunction& o) const;
    /// Unity negative feedback: L / (1 + L).
    FractionalTransferFunction feedback() const;

private:
    FractionalPolynomial num_;
    FractionalPolynomial den_;
};

/// sum_k c_k omega^{a_k} e^{j a_k pi/2}; i.e. p(j omega).
Complex evalFractionalPoly(const FractionalPolynomial& p, double omega);

/// Element-wise tf(j omega). Grid must be strictly increasing and positive.
std::vector<Complex> freqResponse(const FractionalTransferFunction& tf, std::span<const double> grid);

/// Logarithmically spaced grid, inclusive of both ends.
std::vector<double> logGrid(double wMin = 1e-3, double wMax = 1e3, std::size_t points = 2000);

/// Principal-value arguments unwrapped along the sequence (adds +-2pi when
/// neighbours jump by more than pi). Radians in, radians out.
std::vector<double> unwrapPhase(std::span<const double> principal);
std::vector<double> unwrappedPhase(std::span<const Complex> values);

inline constexpr double kPi = 3.14159265358979323846;
inline double deg(double rad) { return rad * 180.0 / kPi; }
inline double rad(double deg) { return deg * kPi / 180.0; }

// ---------------------------------------------------------------------------
// Grunwald-Letnikov

/// Binomial weights w_0..w_N for D^alpha: w_0 = 1, w_k = w_{k-1}(1 - (alpha+1)/k).
std::vector<double> glWeights(double alpha, std::size_t n);

/// Fixed-step GL discretisation of D^alpha. memoryLength == 0 means full memory.
class GlKernel {
public:
    GlKernel(double alpha, double h, std::size_t memoryLength = 0);

    double alpha() const { return alpha_; }
    double step() const { return h_; }
    double hAlpha() const { return hAlpha_; }
    std::size_t memoryLength() const { return memory_; }

    /// Weight w_k, extending the table on demand.
    double weight(std::size_t k) const;
    /// Contiguous weights valid for indices 0..upTo.
    const double* weights(std::size_t upTo) const;
    /// Number of history samples that actually contribute, given `available`.
    std::size_t effectiveMemory(std::size_t available) const;

private:
    void extend(std::size_t n) const;

    double alpha_;
    double h_;
    double hAlpha_;
    std::size_t memory_;
    bool integer_;
    mutable std::vector<double> weights_;
};

/// x_k = h^alpha * rhs - sum_{j=1..m} w_j x_{k-j}, history newest first.
double glStep(const GlKernel& kernel, std::span<const double> historyNewestFirst, double rhs);

/// A GL-propagated scalar that owns its history (oldest first).
class GlState {
public:
    explicit GlState(GlKernel kernel, double initial = 0.0);

    double value() const { return history_.back(); }
    const GlKernel& kernel() const { return kernel_; }
    std::size_t samples() const { return history_.size(); }

    /// Advances one step with D^alpha x = rhs and returns the new value.
    double advance(double rhs);
    /// Replaces the newest sample; earlier history is kept.
    void overwrite(double value) { history_.back() = value; }
    /// Drops all history and restarts from `value`.
    void restart(double value);

private:
    GlKernel kernel_;
    std::vector<double> history_;
};

// ---------------------------------------------------------------------------
// Oustaloup

/// Zero/pole form gain * prod (s + z_k)/(s + p_k) of a band-limited s^alpha.
struct OustaloupFilter {
    double alpha = 0.0;
    double gain = 1.0;
    std::vector<double> zeros;  // positive corner frequencies, s + z
    std::vector<double> poles;  // positive corner frequencies, s + p
    /// Integer-power factor s^n pulled out when alpha is outside (0, 1).
    int integerPower = 0;

    FractionalTransferFunction toTransferFunction() const;
    Complex operator()(double omega) const;
};

/// Band-limited rational approximation of s^alpha with `cells` pole/zero
/// pairs over [wLow, wHigh], plus two guard decades on each side at the same
/// cell density. Orders outside (0, 1) are split as s^n s^(alpha - n);
/// integer alpha is returned exactly.
OustaloupFilter oustaloupFilter(double alpha, double wLow, double wHigh, std::size_t cells);
FractionalTransferFunction oustaloupApprox(double alpha, double wLow, double wHigh, std::size_t cells);

}  // namespace frhc
