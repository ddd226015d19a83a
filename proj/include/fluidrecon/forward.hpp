#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fluidrecon/grid.hpp"
#include "fluidrecon/multifreq.hpp"

namespace fluidrecon {

// ---------------------------------------------------------------------------
// Closed-form primitives. Every primitive reports its value together with the
// derivatives the coefficient formulas need, so synthesized data never pass
// through the discrete operators under test.

struct ScalarJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double lap = 0.0;
};

struct ConstantTerm {
    double a = 0.0;
};
/// a exp(-b |x - center|^2)
struct GaussianTerm {
    double a = 0.0;
    double b = 1.0;
    Point center{};
};
/// a exp(k . x)
struct ExponentialTerm {
    double a = 1.0;
    Point k{};
};
/// c0 + c1 x1 + c2 x2 + c11 x1^2 + c12 x1 x2 + c22 x2^2
struct QuadraticTerm {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c11 = 0.0, c12 = 0.0, c22 = 0.0;
};
/// a max(0, n . x - offset)^power; C^(power-1), vanishes on a half-plane.
struct RampTerm {
    double a = 0.0;
    Point normal{1.0, 0.0};
    double offset = 0.0;
    int power = 3;
};

using ScalarTerm =
    std::variant<ConstantTerm, GaussianTerm, ExponentialTerm, QuadraticTerm, RampTerm>;

class SmoothScalar {
public:
    SmoothScalar() = default;
    SmoothScalar(std::initializer_list<ScalarTerm> terms) : terms_(terms) {}
    static SmoothScalar constant(double a) { return {ConstantTerm{a}}; }

    ScalarJet jet(Point x) const;
    double operator()(Point x) const { return jet(x).value; }

private:
    std::vector<ScalarTerm> terms_;
};

struct VectorJet {
    double v1 = 0.0;
    double v2 = 0.0;
    double div = 0.0;
    double curl = 0.0;
};

struct ConstantFlow {
    double a1 = 0.0;
    double a2 = 0.0;
};
/// sigma(|x|^2) (-x2, x1) with sigma(s) = a exp(-b (s - s0)^2); b = 0 is rigid rotation.
struct SwirlFlow {
    double a = 1.0;
    double b = 0.0;
    double s0 = 0.0;
};
/// grad of the quadratic c1 x1 + c2 x2 + c11 x1^2 + c12 x1 x2 + c22 x2^2.
struct GradientFlow {
    QuadraticTerm potential{};
};

using VectorTerm = std::variant<ConstantFlow, SwirlFlow, GradientFlow>;

class SmoothVector {
public:
    SmoothVector() = default;
    SmoothVector(std::initializer_list<VectorTerm> terms) : terms_(terms) {}

    VectorJet jet(Point x) const;

private:
    std::vector<VectorTerm> terms_;
};

/// Analytic ground truth for (c, v, rho, zeta, alpha0).
struct Scenario {
    std::string name;
    std::string description;
    SmoothScalar c = SmoothScalar::constant(1.0);
    SmoothVector v;
    SmoothScalar rho = SmoothScalar::constant(1.0);
    SmoothScalar zeta = SmoothScalar::constant(1.0);
    SmoothScalar alpha0 = SmoothScalar::constant(0.0);
};

/// Pointwise analytic coefficients of a scenario.
struct PointCoefficients {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    double F = 0.0;
    double zeta = 0.0;
    double alpha_ratio = 0.0;
};

PointCoefficients coefficients_at(const Scenario& s, Point x);

/// q_omega = f1 - w^2 f2 + i w f3 - 2 i w^(1+zeta) alpha0/c at one point.
std::complex<double> q_at(const PointCoefficients& k, double omega);

const std::vector<Scenario>& scenario_catalog();
/// Throws std::out_of_range for unknown names.
const Scenario& find_scenario(const std::string& name);
std::vector<std::string> scenario_names();

// ---------------------------------------------------------------------------
// Sampled states and measurement bundles.

struct FluidState {
    ScalarField c;
    VectorField v;
    ScalarField rho;
    ScalarField zeta;
    ScalarField alpha0;

    const GridPtr& grid_ptr() const { return c.grid_ptr(); }
    /// Throws std::domain_error unless c > 0 and rho > 0 everywhere.
    void validate() const;
};

/// Samples every scenario field on the interior nodes and the boundary ring.
FluidState sample_state(const Scenario& s, const GridPtr& grid);

struct CoefficientFields {
    ScalarField f1;
    ScalarField f2;
    ScalarField f3;
};

/// Analytic derivatives.
CoefficientFields eval_coefficients(const Scenario& s, const GridPtr& grid);
/// Discrete derivatives of the sampled fields.
CoefficientFields eval_coefficients(const FluidState& state);

ScalarField eval_F(const Scenario& s, const GridPtr& grid);
ScalarField eval_F(const FluidState& state);

ComplexField synth_q(const Scenario& s, const GridPtr& grid, double omega);
ComplexField synth_q(const FluidState& state, double omega);

struct MeasurementBundle {
    GridPtr grid;
    FrequencySet freqs{{1.0}};
    std::vector<ComplexField> q;
    ScalarField F;
    std::vector<double> boundary_c;
    std::vector<double> boundary_rho;
    std::vector<double> boundary_v1;
    std::vector<double> boundary_v2;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::string scenario;
};

/// Noise on q only: independent Gaussian perturbations of the real and
/// imaginary parts with standard deviation noise_sigma * RMS(|q_omega|).
/// When noise_on_F is set, F is perturbed the same way.
MeasurementBundle synthesize_bundle(const Scenario& s, const GridPtr& grid,
                                    const FrequencySet& freqs, double noise_sigma,
                                    std::uint64_t seed, bool noise_on_F = false);

/// Boundary traces of a state as a bundle would carry them.
void attach_boundary_traces(MeasurementBundle& bundle, const FluidState& state);

}  // namespace fluidrecon
