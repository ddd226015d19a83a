#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluidrecon/grid.hpp"

namespace fluidrecon {

/// Strictly increasing positive angular frequencies.
class FrequencySet {
public:
    explicit FrequencySet(std::vector<double> omegas);

    std::size_t size() const { return omegas_.size(); }
    double operator[](std::size_t i) const { return omegas_[i]; }
    std::span<const double> values() const { return omegas_; }

private:
    std::vector<double> omegas_;
};

/// Pointwise coefficient fields recovered from q_omega.
struct Coefficients {
    ScalarField f1;
    ScalarField f2;
    ScalarField f3;
    /// alpha0 / c on D1, zero on D0.
    ScalarField alpha_ratio;
    /// Absorption exponent on D1, zero on D0.
    ScalarField zeta;
    std::vector<bool> mask_d1;
    /// max |Im q1/w1 - Im q2/w2|; the absorption signature.
    double consistency_residual = 0.0;
    /// Nodes where the absorption amplitude fit was clamped to zero.
    std::size_t clamped_nodes = 0;

    std::size_t d1_count() const;
};

/// Raised when the zeta equation has no root in the admissible range.
class ZetaRangeError : public std::domain_error {
public:
    ZetaRangeError(const std::string& what, double lower, double upper)
        : std::domain_error(what), lower_(lower), upper_(upper) {}
    double lower() const { return lower_; }
    double upper() const { return upper_; }

private:
    double lower_;
    double upper_;
};

/// Raised by disentangle_absorption when the zeta solve fails at some nodes.
class NodeZetaError : public std::domain_error {
public:
    NodeZetaError(const std::string& what, std::vector<std::size_t> nodes)
        : std::domain_error(what), nodes_(std::move(nodes)) {}
    const std::vector<std::size_t>& nodes() const { return nodes_; }

private:
    std::vector<std::size_t> nodes_;
};

/// Raised when two-frequency data carry an absorption signature.
class AbsorptionDetected : public std::runtime_error {
public:
    AbsorptionDetected(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

constexpr double kZetaLower = 1e-8;
constexpr double kZetaUpper = 20.0;

/// ((w2/w1)^z - 1) / ((w3/w1)^z - 1), the right side of the zeta equation.
double zeta_ratio(double zeta, double w1, double w2, double w3);

/// Unique zeta > 0 with zeta_ratio(zeta) == lhs, by bisection to 1e-12.
/// Throws ZetaRangeError when lhs is outside the range of zeta_ratio on the
/// search bracket, or std::invalid_argument unless w1 < w2 < w3.
double solve_zeta(double lhs, double w1, double w2, double w3);

/// Pointwise f1, f2, f3 from two frequencies (no absorption). Throws
/// std::invalid_argument for w1 == w2 and AbsorptionDetected when the
/// consistency residual exceeds absorption_threshold (pass infinity to
/// disable the check).
Coefficients disentangle_two_freq(const ComplexField& q1, const ComplexField& q2, double w1,
                                  double w2,
                                  double absorption_threshold =
                                      std::numeric_limits<double>::infinity());

/// D1 membership: |Im q1/w1 - Im q2/w2| > eps_d0 * max(1, max|Im q1/w1|).
std::vector<bool> partition_domain(const ComplexField& q1, const ComplexField& q2, double w1,
                                   double w2, double eps_d0);

/// Result of the three-frequency absorption formulas at one point.
struct AbsorptionPoint {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    double alpha_ratio = 0.0;
    double zeta = 0.0;
    bool in_d1 = false;
};

/// Exact three-frequency formulas at a single node; in_d1 selects the branch.
AbsorptionPoint absorption_at_point(std::span<const std::complex<double>, 3> q,
                                    const FrequencySet& freqs, bool in_d1);

Coefficients disentangle_absorption(const ComplexField& q1, const ComplexField& q2,
                                    const ComplexField& q3, const FrequencySet& freqs,
                                    double eps_d0 = 1e-8);

enum class LeastSquaresMode { no_absorption, absorption };

/// Weighted fit; frequency k is weighted by 1 / RMS(|q_k|) over the grid.
Coefficients disentangle_least_squares(std::span<const ComplexField> q, const FrequencySet& freqs,
                                       LeastSquaresMode mode, double eps_d0 = 1e-8);

/// Least-squares fit at one node; q holds one sample per frequency. Residuals
/// of frequency k are scaled by weights[k] (uniform when empty).
AbsorptionPoint least_squares_at_point(std::span<const std::complex<double>> q,
                                       const FrequencySet& freqs, LeastSquaresMode mode,
                                       bool in_d1, bool* clamped = nullptr,
                                       std::span<const double> weights = {});

}  // namespace fluidrecon
