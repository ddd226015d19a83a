#include "fluidrecon/grid.hpp"

#include <algorithm>
#include <array>

namespace fluidrecon {

DiskGrid::DiskGrid(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta) {
    if (n_r < kMinRadial) {
        throw std::invalid_argument("n_r must be at least " + std::to_string(kMinRadial) +
                                    ", got " + std::to_string(n_r));
    }
    if (n_theta < kMinAngular || n_theta % 2 != 0) {
        throw std::invalid_argument("n_theta must be even and at least " +
                                    std::to_string(kMinAngular) + ", got " +
                                    std::to_string(n_theta));
    }
    dr_ = 1.0 / n_r;
    dtheta_ = 2.0 * std::numbers::pi / n_theta;
    r_.resize(n_r);
    ring_weight_.resize(n_r);
    for (int i = 0; i < n_r; ++i) {
        r_[i] = (i + 0.5) * dr_;
        ring_weight_[i] = r_[i] * dr_ * dtheta_;
    }
    theta_.resize(n_theta);
    cos_.resize(n_theta);
    sin_.resize(n_theta);
    for (int j = 0; j < n_theta; ++j) {
        theta_[j] = j * dtheta_;
        cos_[j] = std::cos(theta_[j]);
        sin_[j] = std::sin(theta_[j]);
    }
    // Exact values on the axes keep symmetric fields symmetric.
    cos_[n_theta / 2] = -1.0;
    sin_[n_theta / 2] = 0.0;
    if (n_theta % 4 == 0) {
        cos_[n_theta / 4] = 0.0;
        sin_[n_theta / 4] = 1.0;
        cos_[3 * n_theta / 4] = 0.0;
        sin_[3 * n_theta / 4] = -1.0;
    }
    weights_.resize(size());
    for (int i = 0; i < n_r; ++i) {
        std::fill_n(weights_.begin() + static_cast<std::ptrdiff_t>(index(i, 0)), n_theta,
                    ring_weight_[i]);
    }
}

Point DiskGrid::node(std::size_t i) const {
    const int ir = ring_of(i);
    const int it = angle_of(i);
    return {r_[ir] * cos_[it], r_[ir] * sin_[it]};
}

GridPtr build_disk_grid(int n_r, int n_theta) {
    return std::make_shared<const DiskGrid>(n_r, n_theta);
}

void require_same_grid(const DiskGrid& a, const DiskGrid& b, const char* what) {
    if (!(a == b)) {
        throw std::invalid_argument(std::string(what) + ": fields live on different grids (" +
                                    std::to_string(a.n_r()) + "x" + std::to_string(a.n_theta()) +
                                    " vs " + std::to_string(b.n_r()) + "x" +
                                    std::to_string(b.n_theta()) + ")");
    }
}

double integrate(const ScalarField& f) {
    const auto w = f.grid().cell_weights();
    const auto v = f.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[i] * w[i];
    return sum;
}

std::complex<double> integrate(const ComplexField& f) {
    const auto w = f.grid().cell_weights();
    const auto v = f.values();
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[i] * w[i];
    return sum;
}

namespace {

// Fornberg's recursion for finite-difference weights of derivatives 0..2 at
// z from arbitrary nodes x.
template <std::size_t N>
std::array<std::array<double, N>, 3> fd_weights(double z, const std::array<double, N>& x) {
    std::array<std::array<double, N>, 3> c{};
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < N; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 2);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

// A radial stencil: samples at ring offsets (relative to the evaluation
// ring) and optionally the boundary ring.
struct RadialStencil {
    std::array<int, 5> rings{};
    // Index into rings that stands for the boundary ring, or -1.
    int boundary_slot = -1;
    std::array<double, 5> d1{};
    std::array<double, 5> d2{};
};

RadialStencil make_stencil(double h, std::array<double, 5> offsets, int boundary_slot) {
    RadialStencil s;
    s.boundary_slot = boundary_slot;
    std::array<double, 5> x{};
    for (int k = 0; k < 5; ++k) {
        x[k] = offsets[k] * h;
        s.rings[k] = static_cast<int>(std::floor(offsets[k]));
    }
    const auto w = fd_weights<5>(0.0, x);
    s.d1 = w[1];
    s.d2 = w[2];
    return s;
}

struct RadialStencils {
    RadialStencil center;
    RadialStencil second_outer;
    RadialStencil second_outer_bnd;
    RadialStencil outer;
    RadialStencil outer_bnd;
    // Evaluation at r = 1 from rings at -h/2, -3h/2, -5h/2, -7h/2.
    std::array<double, 4> edge_value{};
    std::array<double, 4> edge_d1{};
    // Evaluation at r = 1 from the boundary plus rings at -h/2, -3h/2, -5h/2.
    std::array<double, 4> edge_bnd_d1{};
};

RadialStencils make_stencils(double h) {
    RadialStencils s;
    s.center = make_stencil(h, {-2, -1, 0, 1, 2}, -1);
    s.second_outer = make_stencil(h, {-3, -2, -1, 0, 1}, -1);
    s.second_outer_bnd = make_stencil(h, {-2, -1, 0, 1, 1.5}, 4);
    s.outer = make_stencil(h, {-4, -3, -2, -1, 0}, -1);
    s.outer_bnd = make_stencil(h, {-3, -2, -1, 0, 0.5}, 4);
    {
        auto w = fd_weights<4>(0.0, {-0.5 * h, -1.5 * h, -2.5 * h, -3.5 * h});
        s.edge_value = w[0];
        s.edge_d1 = w[1];
    }
    {
        auto w = fd_weights<4>(0.0, {0.0, -0.5 * h, -1.5 * h, -2.5 * h});
        s.edge_bnd_d1 = w[1];
    }
    return s;
}

// Fourth-order periodic differences in theta.
double theta_d1(double m2, double m1, double p1, double p2, double dt) {
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt);
}
double theta_d2(double m2, double m1, double f0, double p1, double p2, double dt) {
    return (-m2 + 16.0 * m1 - 30.0 * f0 + 16.0 * p1 - p2) / (12.0 * dt * dt);
}

struct PolarDerivatives {
    std::vector<double> dr;
    std::vector<double> drr;
    std::vector<double> dtheta;
    std::vector<double> dthetatheta;
};

PolarDerivatives polar_derivatives(const ScalarField& f, bool second_order_terms) {
    const DiskGrid& g = f.grid();
    const int nr = g.n_r();
    const int nt = g.n_theta();
    const double dt = g.dtheta();
    const RadialStencils st = make_stencils(g.dr());

    // Rings below 0 continue through the origin along the opposite ray.
    auto ring_value = [&](int ir, int it) {
        return ir >= 0 ? f.at(ir, it) : f.at(-ir - 1, g.opposite_angle(it));
    };

    PolarDerivatives d;
    d.dr.resize(g.size());
    d.dtheta.resize(g.size());
    if (second_order_terms) {
        d.drr.resize(g.size());
        d.dthetatheta.resize(g.size());
    }

    for (int ir = 0; ir < nr; ++ir) {
        const RadialStencil* s = &st.center;
        if (ir == nr - 2) s = f.has_boundary() ? &st.second_outer_bnd : &st.second_outer;
        if (ir == nr - 1) s = f.has_boundary() ? &st.outer_bnd : &st.outer;
        for (int it = 0; it < nt; ++it) {
            const std::size_t i = g.index(ir, it);
            double fr = 0.0;
            double frr = 0.0;
            for (int k = 0; k < 5; ++k) {
                const double v =
                    k == s->boundary_slot ? f.boundary()[it] : ring_value(ir + s->rings[k], it);
                fr += s->d1[k] * v;
                frr += s->d2[k] * v;
            }
            const double p1 = f.at(ir, (it + 1) % nt);
            const double p2 = f.at(ir, (it + 2) % nt);
            const double m1 = f.at(ir, (it + nt - 1) % nt);
            const double m2 = f.at(ir, (it + nt - 2) % nt);
            d.dr[i] = fr;
            d.dtheta[i] = theta_d1(m2, m1, p1, p2, dt);
            if (second_order_terms) {
                d.drr[i] = frr;
                d.dthetatheta[i] = theta_d2(m2, m1, f[i], p1, p2, dt);
            }
        }
    }
    return d;
}

ScalarField cartesian_partial(const ScalarField& f, int axis) {
    const DiskGrid& g = f.grid();
    const PolarDerivatives d = polar_derivatives(f, false);
    ScalarField out(f.grid_ptr());
    for (int ir = 0; ir < g.n_r(); ++ir) {
        const double r = g.radius(ir);
        for (int it = 0; it < g.n_theta(); ++it) {
            const std::size_t i = g.index(ir, it);
            const double c = g.cos_theta(it);
            const double s = g.sin_theta(it);
            out[i] = axis == 1 ? c * d.dr[i] - s * d.dtheta[i] / r
                               : s * d.dr[i] + c * d.dtheta[i] / r;
        }
    }
    return out;
}

}  // namespace

BoundaryPartials boundary_partials(const ScalarField& f) {
    const DiskGrid& g = f.grid();
    const int nr = g.n_r();
    const int nt = g.n_theta();
    const RadialStencils st = make_stencils(g.dr());

    BoundaryPartials out;
    out.values.resize(nt);
    std::vector<double> radial(nt);
    for (int it = 0; it < nt; ++it) {
        const double a = f.at(nr - 1, it);
        const double b = f.at(nr - 2, it);
        const double c = f.at(nr - 3, it);
        if (f.has_boundary()) {
            const double e = f.boundary()[it];
            out.values[it] = e;
            radial[it] = st.edge_bnd_d1[0] * e + st.edge_bnd_d1[1] * a + st.edge_bnd_d1[2] * b +
                         st.edge_bnd_d1[3] * c;
        } else {
            const double d = f.at(nr - 4, it);
            out.values[it] = st.edge_value[0] * a + st.edge_value[1] * b + st.edge_value[2] * c +
                             st.edge_value[3] * d;
            radial[it] = st.edge_d1[0] * a + st.edge_d1[1] * b + st.edge_d1[2] * c + st.edge_d1[3] * d;
        }
    }
    out.d1.resize(nt);
    out.d2.resize(nt);
    const double dt = g.dtheta();
    for (int it = 0; it < nt; ++it) {
        const double ft = theta_d1(out.values[(it + nt - 2) % nt], out.values[(it + nt - 1) % nt],
                                   out.values[(it + 1) % nt], out.values[(it + 2) % nt], dt);
        const double c = g.cos_theta(it);
        const double s = g.sin_theta(it);
        out.d1[it] = c * radial[it] - s * ft;
        out.d2[it] = s * radial[it] + c * ft;
    }
    return out;
}

ScalarField partial_x1(const ScalarField& f) { return cartesian_partial(f, 1); }
ScalarField partial_x2(const ScalarField& f) { return cartesian_partial(f, 2); }

VectorField gradient(const ScalarField& f) {
    VectorField out(partial_x1(f), partial_x2(f));
    BoundaryPartials b = boundary_partials(f);
    out.x1.set_boundary(std::move(b.d1));
    out.x2.set_boundary(std::move(b.d2));
    return out;
}

ScalarField divergence(const VectorField& w) {
    return partial_x1(w.x1) + partial_x2(w.x2);
}

ScalarField curl(const VectorField& w) {
    return partial_x1(w.x2) - partial_x2(w.x1);
}

VectorField curl(const ScalarField& f) {
    ScalarField d1 = partial_x1(f);
    ScalarField d2 = partial_x2(f);
    BoundaryPartials b = boundary_partials(f);
    for (double& v : b.d1) v = -v;
    for (double& v : d1.values()) v = -v;
    VectorField out(std::move(d2), std::move(d1));
    out.x1.set_boundary(std::move(b.d2));
    out.x2.set_boundary(std::move(b.d1));
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    const DiskGrid& g = f.grid();
    const PolarDerivatives d = polar_derivatives(f, true);
    ScalarField out(f.grid_ptr());
    for (int ir = 0; ir < g.n_r(); ++ir) {
        const double r = g.radius(ir);
        for (int it = 0; it < g.n_theta(); ++it) {
            const std::size_t i = g.index(ir, it);
            out[i] = d.drr[i] + d.dr[i] / r + d.dthetatheta[i] / (r * r);
        }
    }
    return out;
}

namespace {

template <typename Op>
ScalarField combine(const ScalarField& a, const ScalarField& b, Op op) {
    require_same_grid(a.grid(), b.grid(), "pointwise operation");
    ScalarField out(a.grid_ptr());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
    if (a.has_boundary() && b.has_boundary()) {
        std::vector<double> bnd(a.grid().n_theta());
        for (std::size_t j = 0; j < bnd.size(); ++j) bnd[j] = op(a.boundary()[j], b.boundary()[j]);
        out.set_boundary(std::move(bnd));
    }
    return out;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return combine(a, b, [](double x, double y) { return x * y; });
}
ScalarField operator*(double s, const ScalarField& a) {
    ScalarField out = a;
    for (double& v : out.values()) v *= s;
    if (a.has_boundary()) {
        std::vector<double> b(a.boundary().begin(), a.boundary().end());
        for (double& v : b) v *= s;
        out.set_boundary(std::move(b));
    }
    return out;
}
VectorField operator+(const VectorField& a, const VectorField& b) {
    return {a.x1 + b.x1, a.x2 + b.x2};
}
VectorField operator-(const VectorField& a, const VectorField& b) {
    return {a.x1 - b.x1, a.x2 - b.x2};
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const ScalarField& f) { return max_abs(f.values()); }

}  // namespace fluidrecon
