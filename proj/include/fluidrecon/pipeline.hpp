#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "fluidrecon/forward.hpp"
#include "fluidrecon/fredholm.hpp"
#include "fluidrecon/helmholtz.hpp"
#include "fluidrecon/multifreq.hpp"

namespace fluidrecon {

struct ErrorNorms {
    double sup_abs = 0.0;
    double sup_rel = 0.0;
    double l2_abs = 0.0;
    double l2_rel = 0.0;
};

/// Errors of one recovered parameter on the full disk and on |x| <= subdisk.
struct ParameterErrors {
    ErrorNorms full;
    ErrorNorms subdisk;
};

struct ReconstructionReport {
    FluidState recovered;
    bool absorption = false;
    std::vector<bool> mask_d1;
    /// Named scalar diagnostics; every executed stage adds at least one.
    std::map<std::string, double> diagnostics;
    /// Filled when ground truth is supplied.
    std::map<std::string, ParameterErrors> errors_vs_truth;
    /// Stages in execution order.
    std::vector<std::string> stages;
};

/// A pipeline stage failed; carries the partial report.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what, ReconstructionReport partial)
        : std::runtime_error(stage + ": " + what),
          stage_(std::move(stage)),
          partial_(std::move(partial)) {}
    const std::string& stage() const { return stage_; }
    const ReconstructionReport& partial() const { return partial_; }

private:
    std::string stage_;
    ReconstructionReport partial_;
};

struct PipelineOptions {
    Gauge gauge = Gauge::dirichlet_green;
    /// Relative tolerance of the D0 test.
    double eps_d0 = 1e-8;
    /// Two-frequency mode refuses data whose absorption signature
    /// max|Im q1/w1 - Im q2/w2| exceeds this times max(1, max|Im q1/w1|).
    double absorption_tolerance = 1e-6;
    double loop_tolerance = 1e-3;
    /// Use the least-squares formulas even with exactly three frequencies.
    bool least_squares = false;
    SolveOptions fredholm{};
    /// Harmonic function added to V (gauge-invariance checks).
    std::function<double(Point)> gauge_shift;
    /// Ground truth for errors_vs_truth.
    std::optional<FluidState> truth;
    double subdisk = 0.9;
};

struct DensityResult {
    ScalarField rho;
    /// g = rho^(-1/2), with its boundary ring.
    ScalarField g;
    double residual = 0.0;
    double condition = 0.0;
};

/// g = poisson_extend(rho~^(-1/2)) + G (f1 g); rho = g^(-2).
DensityResult recover_density(const ScalarField& f1, std::span<const double> rho_boundary,
                              const GreenMatrix& green, const SolveOptions& opts = {});

struct PhiResult {
    /// Phi - Phi(x0), with the boundary trace attached.
    ScalarField phi;
    double residual = 0.0;
};

/// eta = G(g (f3 - curl V . grad ln rho)) + poisson_extend(g~ (Phi - Phi(x0))) + G (f1 eta);
/// Phi - Phi(x0) = eta / g.
PhiResult recover_phi(const ScalarField& f1, const ScalarField& f3, const ScalarField& g,
                      const VectorField& curlV, std::span<const double> phi_boundary,
                      const GreenMatrix& green, const SolveOptions& opts = {});

struct AssembleResult {
    ScalarField c;
    VectorField v;
    /// min over nodes of f2 - |grad Phi - curl V|^2.
    double positivity_margin = 0.0;
};

/// 1/c^2 = f2 - |w|^2, v = c^2 w with w = grad Phi - curl V.
AssembleResult assemble_cv(const ScalarField& f2, const VectorField& grad_phi,
                           const VectorField& curlV);

ReconstructionReport reconstruct_theorem1(const MeasurementBundle& bundle,
                                          const PipelineOptions& opts = {});
ReconstructionReport reconstruct_theorem2(const MeasurementBundle& bundle,
                                          const PipelineOptions& opts = {});

ErrorNorms error_norms(std::span<const double> recovered, std::span<const double> truth,
                       const DiskGrid& grid, const std::vector<bool>& mask);
/// Fills report.errors_vs_truth against the given state.
void compare_with_truth(ReconstructionReport& report, const FluidState& truth, double subdisk);

}  // namespace fluidrecon
