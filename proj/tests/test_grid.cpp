#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fluidrecon/grid.hpp"

using namespace fluidrecon;
using std::numbers::pi;

namespace {

double max_err_inside(const ScalarField& f, double radius, auto exact) {
    double e = 0.0;
    const DiskGrid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point p = g.node(i);
        if (p.norm() <= radius) e = std::max(e, std::abs(f[i] - exact(p)));
    }
    return e;
}

}  // namespace

TEST_CASE("build_disk_grid counts and preconditions") {
    const auto g = build_disk_grid(4, 8);
    CHECK(g->size() == 32);
    CHECK(g->n_theta() == 8);
    CHECK_THROWS_AS(build_disk_grid(3, 8), std::invalid_argument);
    CHECK_THROWS_AS(build_disk_grid(4, 6), std::invalid_argument);
    CHECK_THROWS_AS(build_disk_grid(4, 9), std::invalid_argument);
}

TEST_CASE("nodes lie strictly inside, boundary ring on the circle") {
    const auto g = build_disk_grid(16, 32);
    for (double r : g->r_nodes()) {
        CHECK(r > 0.0);
        CHECK(r < 1.0);
    }
    for (int j = 0; j < g->n_theta(); ++j) {
        CHECK(g->boundary_node(j).norm() == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(g->boundary_node(0).x1 == 1.0);
    CHECK(g->boundary_node(0).x2 == 0.0);
    CHECK(g->ring_of(g->index(3, 5)) == 3);
    CHECK(g->angle_of(g->index(3, 5)) == 5);
    CHECK(g->opposite_angle(1) == 17);
}

TEST_CASE("weights sum to pi") {
    for (auto [nr, nt] : {std::pair{4, 8}, {64, 256}, {13, 40}}) {
        const auto g = build_disk_grid(nr, nt);
        double s = 0.0;
        for (double w : g->cell_weights()) s += w;
        CHECK(std::abs(s - pi) <= pi * 2.0 / nr);
        CHECK(std::abs(s - pi) <= pi / 32.0);
    }
}

TEST_CASE("integrate") {
    const auto g = build_disk_grid(64, 256);
    CHECK(integrate(ScalarField(g, 0.0)) == 0.0);
    CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(pi).epsilon(1e-12));
    const auto r2 = sample(g, [](Point p) { return p.norm2(); });
    CHECK(std::abs(integrate(r2) - pi / 2) / (pi / 2) < 1e-2);
    const ComplexField z(g, std::complex<double>(0.0, 2.0));
    CHECK(std::abs(integrate(z) - std::complex<double>(0.0, 2.0 * pi)) < 1e-10);
}

TEST_CASE("fields reject wrong lengths") {
    const auto g = build_disk_grid(4, 8);
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(31)), std::invalid_argument);
    ScalarField f(g);
    CHECK_THROWS_AS(f.set_boundary(std::vector<double>(7)), std::invalid_argument);
    CHECK(f.all_finite());
    f[3] = std::nan("");
    CHECK_FALSE(f.all_finite());
    const auto other = build_disk_grid(5, 8);
    CHECK_THROWS_AS(f + ScalarField(other), std::invalid_argument);
}

TEST_CASE("gradient of linear field") {
    const auto g = build_disk_grid(64, 256);
    const auto f = sample(g, [](Point p) { return p.x1; });
    const VectorField grad = gradient(f);
    CHECK(max_err_inside(grad.x1, 0.95, [](Point) { return 1.0; }) < 1e-6);
    CHECK(max_err_inside(grad.x2, 0.95, [](Point) { return 0.0; }) < 1e-6);
    // One-sided stencils are exact for low-degree polynomials too.
    CHECK(max_err_inside(grad.x1, 1.0, [](Point) { return 1.0; }) < 1e-6);
}

TEST_CASE("curl of rigid rotation is 2") {
    const auto g = build_disk_grid(64, 256);
    const VectorField w(sample(g, [](Point p) { return -p.x2; }), sample(g, [](Point p) { return p.x1; }));
    CHECK(max_abs(curl(w) - ScalarField(g, 2.0)) < 1e-6);
    CHECK(max_abs(divergence(w)) < 1e-6);
}

TEST_CASE("laplacian of |x|^2 is 4") {
    const auto g = build_disk_grid(64, 256);
    const auto f = sample(g, [](Point p) { return p.norm2(); });
    CHECK(max_abs(laplacian(f) - ScalarField(g, 4.0)) < 1e-3);
}

TEST_CASE("curl_scalar conventions and vector identities") {
    const auto g = build_disk_grid(64, 256);
    auto fn = [](Point p) { return std::sin(p.x1) * std::exp(p.x2); };
    const auto f = sample_with_boundary(g, fn);
    const VectorField cs = curl(f);
    // (d2 f, -d1 f)
    double e = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const Point p = g->node(i);
        e = std::max(e, std::abs(cs.x1[i] - std::sin(p.x1) * std::exp(p.x2)));
        e = std::max(e, std::abs(cs.x2[i] + std::cos(p.x1) * std::exp(p.x2)));
    }
    CHECK(e < 1e-3);
    CHECK(max_err_inside(divergence(cs), 0.9, [](Point) { return 0.0; }) < 1e-3);
    // curl curl f = -laplacian f; for this f the laplacian is 0.
    const ScalarField cc = curl(cs);
    const ScalarField lap = laplacian(f);
    CHECK(max_err_inside(cc + lap, 0.9, [](Point) { return 0.0; }) < 1e-2);
}

TEST_CASE("operators converge at order >= 1.5") {
    auto fn = [](Point p) { return std::exp(0.7 * p.x1) * std::cos(1.3 * p.x2) + p.x1 * p.x2 * p.x2; };
    auto d1 = [](Point p) { return 0.7 * std::exp(0.7 * p.x1) * std::cos(1.3 * p.x2) + p.x2 * p.x2; };
    auto lap = [](Point p) {
        return (0.49 - 1.69) * std::exp(0.7 * p.x1) * std::cos(1.3 * p.x2) + 2.0 * p.x1;
    };
    double prev_grad = 0.0, prev_lap = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int nr = 16 << k;
        const auto g = build_disk_grid(nr, 4 * nr);
        const auto f = sample_with_boundary(g, fn);
        const double eg = max_err_inside(gradient(f).x1, 1.0, d1);
        const double el = max_err_inside(laplacian(f), 1.0, lap);
        if (k > 0) {
            CAPTURE(nr);
            CHECK(std::log2(prev_grad / eg) >= 1.5);
            CHECK(std::log2(prev_lap / el) >= 1.5);
        }
        prev_grad = eg;
        prev_lap = el;
    }
}

TEST_CASE("boundary partials") {
    const auto g = build_disk_grid(32, 256);
    auto fn = [](Point p) { return p.x1 * p.x1 - 0.5 * p.x2; };
    for (bool with_ring : {false, true}) {
        const auto f = with_ring ? sample_with_boundary(g, fn) : sample(g, fn);
        const BoundaryPartials b = boundary_partials(f);
        for (int j = 0; j < g->n_theta(); ++j) {
            const Point p = g->boundary_node(j);
            CHECK(b.values[j] == doctest::Approx(fn(p)).epsilon(1e-9));
            CHECK(b.d1[j] == doctest::Approx(2 * p.x1).epsilon(1e-6));
            CHECK(b.d2[j] == doctest::Approx(-0.5).epsilon(1e-6));
        }
    }
}
