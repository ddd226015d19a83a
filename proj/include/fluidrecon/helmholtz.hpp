#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "fluidrecon/grid.hpp"
#include "fluidrecon/potentials.hpp"

namespace fluidrecon {

/// How the stream-type potential V with Laplace(V) = F is fixed.
enum class Gauge {
    /// V = \int_D G(., y) F(y) dy, so V = 0 on the boundary.
    dirichlet_green,
    /// Free-space log kernel plus the single layer of nu x (v/c^2) on the boundary.
    freespace_corrected,
};

/// Samples of a planar vector on the boundary ring.
struct BoundaryVector {
    std::vector<double> x1;
    std::vector<double> x2;
};

/// v/c^2 on the boundary from the traces of v and c.
BoundaryVector boundary_flow(std::span<const double> v1, std::span<const double> v2,
                             std::span<const double> c);

/// V with Laplace(V) = F (up to discretization), carrying its boundary ring.
/// The boundary flow is only read by the free-space gauge.
ScalarField compute_vector_potential(const ScalarField& F, Gauge gauge, const GreenMatrix& green,
                                     const BoundaryVector& flow);

/// curl V = (d2 V, -d1 V), including boundary-ring values.
VectorField curl_of_potential(const ScalarField& V);

class LoopInconsistency : public std::runtime_error {
public:
    LoopInconsistency(const std::string& what, double defect)
        : std::runtime_error(what), defect_(defect) {}
    double defect() const { return defect_; }

private:
    double defect_;
};

struct PhiTrace {
    /// Phi - Phi(x0) at the boundary nodes, x0 = boundary node 0.
    std::vector<double> values;
    /// Circulation of the tangential field around the full circle.
    double loop_defect = 0.0;
};

/// Integrates the tangential component of (v/c^2 + curl V) along the
/// boundary circle from node 0. The circulation (loop defect) is removed
/// before integration so the trace is periodic; it is reported, and an
/// error is raised when |defect| > 10 * loop_tolerance.
PhiTrace phi_boundary_trace(const BoundaryVector& flow, const BoundaryVector& curl_v,
                            double loop_tolerance = 1e-3);

struct HelmholtzData {
    ScalarField V;
    VectorField curlV;
    std::vector<double> phi_boundary;
    double loop_defect = 0.0;
};

HelmholtzData helmholtz_decompose(const ScalarField& F, Gauge gauge, const GreenMatrix& green,
                                  const BoundaryVector& flow, double loop_tolerance = 1e-3,
                                  const ScalarField* gauge_shift = nullptr);

}  // namespace fluidrecon
