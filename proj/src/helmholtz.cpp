#include "fluidrecon/helmholtz.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ring_fft.hpp"

namespace fluidrecon {

BoundaryVector boundary_flow(std::span<const double> v1, std::span<const double> v2,
                             std::span<const double> c) {
    if (v1.size() != c.size() || v2.size() != c.size()) {
        throw std::invalid_argument("boundary_flow: trace lengths differ");
    }
    BoundaryVector out{std::vector<double>(c.size()), std::vector<double>(c.size())};
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!(c[j] > 0.0)) throw std::domain_error("boundary sound speed must be positive");
        const double inv = 1.0 / (c[j] * c[j]);
        out.x1[j] = v1[j] * inv;
        out.x2[j] = v2[j] * inv;
    }
    return out;
}

ScalarField compute_vector_potential(const ScalarField& F, Gauge gauge, const GreenMatrix& green,
                                     const BoundaryVector& flow) {
    require_same_grid(F.grid(), green.grid(), "compute_vector_potential");
    if (gauge == Gauge::dirichlet_green) return volume_potential(F, green);

    const GridPtr& grid = F.grid_ptr();
    const int nt = grid->n_theta();
    if (flow.x1.size() != static_cast<std::size_t>(nt) ||
        flow.x2.size() != static_cast<std::size_t>(nt)) {
        throw std::invalid_argument("compute_vector_potential: boundary flow length mismatch");
    }
    // -\int G0(x - y) F dy with G0 = -(1/2pi) ln|x| is the log-kernel volume integral.
    const GreenMatrix log_kernel(grid, KernelKind::free_space_log);
    ScalarField volume = log_kernel.apply(F);
    std::vector<double> volume_bnd(nt, 0.0);
    const auto w = grid->cell_weights();
    for (int k = 0; k < nt; ++k) {
        const Point b = grid->boundary_node(k);
        double sum = 0.0;
        for (std::size_t j = 0; j < grid->size(); ++j) {
            sum += std::log((b - grid->node(j)).norm()) * F[j] * w[j];
        }
        volume_bnd[k] = sum / (2.0 * std::numbers::pi);
    }
    volume.set_boundary(std::move(volume_bnd));

    // -\int_{S^1} G0(x - y) (nu x v/c^2) ds is the single layer of nu x (v/c^2).
    std::vector<double> density(nt);
    for (int k = 0; k < nt; ++k) {
        density[k] = grid->cos_theta(k) * flow.x2[k] - grid->sin_theta(k) * flow.x1[k];
    }
    return volume + single_layer_potential(density, grid);
}

VectorField curl_of_potential(const ScalarField& V) { return curl(V); }

PhiTrace phi_boundary_trace(const BoundaryVector& flow, const BoundaryVector& curl_v,
                            double loop_tolerance) {
    const std::size_t n = flow.x1.size();
    if (flow.x2.size() != n || curl_v.x1.size() != n || curl_v.x2.size() != n || n < 2) {
        throw std::invalid_argument("phi_boundary_trace: boundary samples have mismatched lengths");
    }
    const int nt = static_cast<int>(n);
    const double dtheta = 2.0 * std::numbers::pi / nt;
    std::vector<double> tangential(n);
    double mean = 0.0;
    for (int j = 0; j < nt; ++j) {
        const double th = j * dtheta;
        const double t1 = -std::sin(th);
        const double t2 = std::cos(th);
        tangential[j] = (flow.x1[j] + curl_v.x1[j]) * t1 + (flow.x2[j] + curl_v.x2[j]) * t2;
        mean += tangential[j];
    }
    mean /= nt;

    PhiTrace out;
    out.loop_defect = 2.0 * std::numbers::pi * mean;
    if (std::abs(out.loop_defect) > 10.0 * loop_tolerance) {
        std::ostringstream os;
        os << "boundary circulation of v/c^2 + curl V is " << out.loop_defect
           << " (tolerance " << 10.0 * loop_tolerance
           << "): F and the boundary traces are inconsistent";
        throw LoopInconsistency(os.str(), out.loop_defect);
    }

    // Antiderivative of the mean-free part, mode by mode.
    const detail::RingFFT fft(nt);
    auto spec = fft.forward(tangential);
    spec[0] = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
        spec[k] /= std::complex<double>(0.0, static_cast<double>(k));
    }
    if (nt % 2 == 0) spec.back() = 0.0;
    out.values = fft.inverse(spec);
    const double anchor = out.values[0];
    for (double& v : out.values) v -= anchor;
    out.values[0] = 0.0;
    return out;
}

namespace {

// curl V on the boundary ring from the potential's own representation: the
// normal derivative of the volume part comes from its smooth kernel, the
// single layer jumps by -sigma/2, and tangential derivatives are spectral.
BoundaryVector boundary_curl(const ScalarField& F, Gauge gauge, const BoundaryVector& flow,
                             const ScalarField& V, const ScalarField* gauge_shift) {
    const DiskGrid& g = F.grid();
    const int nt = g.n_theta();
    std::vector<double> radial;
    std::vector<double> tangential(nt, 0.0);
    if (gauge == Gauge::dirichlet_green) {
        radial = boundary_normal_derivative(F, KernelKind::disk_dirichlet);
    } else {
        radial = boundary_normal_derivative(F, KernelKind::free_space_log);
        double mean = 0.0;
        std::vector<double> density(nt);
        for (int k = 0; k < nt; ++k) {
            density[k] = g.cos_theta(k) * flow.x2[k] - g.sin_theta(k) * flow.x1[k];
            mean += density[k] / nt;
        }
        for (int k = 0; k < nt; ++k) radial[k] -= 0.5 * (density[k] - mean);

        // The shift is handled below; differentiate the unshifted boundary values.
        std::vector<double> vb(V.boundary().begin(), V.boundary().end());
        if (gauge_shift != nullptr) {
            for (int k = 0; k < nt; ++k) vb[k] -= gauge_shift->boundary()[k];
        }
        const detail::RingFFT fft(nt);
        auto spec = fft.forward(vb);
        for (std::size_t k = 0; k < spec.size(); ++k) {
            spec[k] *= std::complex<double>(0.0, static_cast<double>(k));
        }
        spec.back() = 0.0;
        tangential = fft.inverse(spec);
    }
    BoundaryVector out{std::vector<double>(nt), std::vector<double>(nt)};
    for (int k = 0; k < nt; ++k) {
        const double c = g.cos_theta(k);
        const double s = g.sin_theta(k);
        const double d1 = c * radial[k] - s * tangential[k];
        const double d2 = s * radial[k] + c * tangential[k];
        out.x1[k] = d2;
        out.x2[k] = -d1;
    }
    if (gauge_shift != nullptr) {
        const BoundaryPartials b = boundary_partials(*gauge_shift);
        for (int k = 0; k < nt; ++k) {
            out.x1[k] += b.d2[k];
            out.x2[k] -= b.d1[k];
        }
    }
    return out;
}

}  // namespace

HelmholtzData helmholtz_decompose(const ScalarField& F, Gauge gauge, const GreenMatrix& green,
                                  const BoundaryVector& flow, double loop_tolerance,
                                  const ScalarField* gauge_shift) {
    HelmholtzData out;
    out.V = compute_vector_potential(F, gauge, green, flow);
    if (gauge_shift != nullptr) {
        if (!gauge_shift->has_boundary()) {
            throw std::invalid_argument("gauge shift must carry boundary values");
        }
        out.V = out.V + *gauge_shift;
    }
    out.curlV = curl_of_potential(out.V);
    const BoundaryVector curl_bnd = boundary_curl(F, gauge, flow, out.V, gauge_shift);
    out.curlV.x1.set_boundary(curl_bnd.x1);
    out.curlV.x2.set_boundary(curl_bnd.x2);
    PhiTrace trace = phi_boundary_trace(flow, curl_bnd, loop_tolerance);
    out.phi_boundary = std::move(trace.values);
    out.loop_defect = trace.loop_defect;
    return out;
}

}  // namespace fluidrecon
