#include <doctest.h>

#include <cmath>
#include <complex>

#include "fluidrecon/forward.hpp"
#include "fluidrecon/multifreq.hpp"

using namespace fluidrecon;

namespace {

double sup_diff(const ScalarField& a, const ScalarField& b) { return max_abs(a - b); }

double sup_const(const ScalarField& a, double v) {
    double e = 0.0;
    for (double x : a.values()) e = std::max(e, std::abs(x - v));
    return e;
}

Scenario rigid_swirl() { return find_scenario("rigid-swirl"); }

}  // namespace

TEST_CASE("catalog names are unique and resolvable") {
    const auto names = scenario_names();
    CHECK(names.size() >= 8);
    for (const auto& n : names) CHECK(find_scenario(n).name == n);
    CHECK_THROWS_AS(find_scenario("no-such-scenario"), std::out_of_range);
}

TEST_CASE("coefficient examples") {
    const auto g = build_disk_grid(16, 64);

    const CoefficientFields k0 = eval_coefficients(find_scenario("constant"), g);
    CHECK(sup_const(k0.f1, 0.0) < 1e-14);
    CHECK(sup_const(k0.f2, 1.0) < 1e-14);
    CHECK(sup_const(k0.f3, 0.0) < 1e-14);

    const CoefficientFields kd = eval_coefficients(find_scenario("density-exp"), g);
    CHECK(sup_const(kd.f1, 1.0) < 1e-12);

    const CoefficientFields ks = eval_coefficients(rigid_swirl(), g);
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(ks.f2[i] == doctest::Approx(1.0 + g->node(i).norm2()).epsilon(1e-13));
    }
    CHECK(sup_const(ks.f3, 0.0) < 1e-13);
}

TEST_CASE("invalid states are rejected") {
    Scenario s;
    s.name = "bad";
    s.c = SmoothScalar{QuadraticTerm{0.1, 1.0, 0.0, 0.0, 0.0, 0.0}};  // c < 0 for x1 < -0.1
    const auto g = build_disk_grid(8, 32);
    CHECK_THROWS_AS(eval_coefficients(s, g), std::domain_error);
    CHECK_THROWS_AS(sample_state(s, g).validate(), std::domain_error);

    Scenario r;
    r.name = "bad-rho";
    r.rho = SmoothScalar::constant(-1.0);
    CHECK_THROWS_AS(eval_coefficients(r, g), std::domain_error);
}

TEST_CASE("eval_F examples") {
    const auto g = build_disk_grid(16, 64);
    CHECK(sup_const(eval_F(find_scenario("constant"), g), 0.0) == 0.0);
    CHECK(sup_const(eval_F(rigid_swirl(), g), 2.0) < 1e-13);

    Scenario grad;
    grad.name = "grad";
    grad.v = {GradientFlow{QuadraticTerm{0.0, 0.0, 0.0, 0.0, 1.0, 0.0}}};
    CHECK(sup_const(eval_F(grad, g), 0.0) < 1e-14);
}

TEST_CASE("synth_q examples") {
    const auto g = build_disk_grid(8, 32);
    const ComplexField q = synth_q(find_scenario("constant"), g, 2.0);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(q[i] == std::complex<double>(-4.0, 0.0));

    PointCoefficients k;
    k.f1 = 2.0;
    k.f2 = 0.5;
    k.f3 = 3.0;
    const auto q1 = q_at(k, 1.0);
    CHECK(q1.real() == doctest::Approx(1.5));
    CHECK(q1.imag() == doctest::Approx(3.0));

    PointCoefficients a;
    a.f3 = 1.0;
    a.alpha_ratio = 0.2;
    a.zeta = 1.0;
    CHECK(q_at(a, 2.0).imag() == doctest::Approx(0.4).epsilon(1e-14));

    CHECK_THROWS_AS(synth_q(find_scenario("constant"), g, 0.0), std::invalid_argument);
}

TEST_CASE("synthesize_bundle is deterministic") {
    const auto g = build_disk_grid(16, 64);
    const FrequencySet freqs({1.0, 2.0, 4.0});
    const Scenario& s = find_scenario("absorption");
    for (double sigma : {0.0, 1e-3}) {
        const MeasurementBundle a = synthesize_bundle(s, g, freqs, sigma, 42);
        const MeasurementBundle b = synthesize_bundle(s, g, freqs, sigma, 42);
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            for (std::size_t i = 0; i < g->size(); ++i) CHECK(a.q[k][i] == b.q[k][i]);
        }
        CHECK(a.F.values().size() == b.F.values().size());
        for (std::size_t i = 0; i < g->size(); ++i) CHECK(a.F[i] == b.F[i]);
        CHECK(a.boundary_c == b.boundary_c);
        CHECK(a.boundary_v1 == b.boundary_v1);
    }
    const MeasurementBundle c = synthesize_bundle(s, g, freqs, 1e-3, 43);
    const MeasurementBundle d = synthesize_bundle(s, g, freqs, 1e-3, 42);
    CHECK(c.q[0][0] != d.q[0][0]);
    CHECK(c.F[0] == d.F[0]);  // F stays noiseless by default
    CHECK_THROWS_AS(synthesize_bundle(s, g, freqs, -1.0, 1), std::invalid_argument);
}

TEST_CASE("noise RMS matches the target") {
    const auto g = build_disk_grid(64, 256);  // 16384 nodes
    const FrequencySet freqs({1.0, 3.0});
    const Scenario& s = find_scenario("lens-swirl");
    const double sigma = 1e-3;
    const MeasurementBundle clean = synthesize_bundle(s, g, freqs, 0.0, 7);
    const MeasurementBundle noisy = synthesize_bundle(s, g, freqs, sigma, 7);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        double field2 = 0.0, re2 = 0.0, im2 = 0.0;
        const double n = static_cast<double>(g->size());
        for (std::size_t i = 0; i < g->size(); ++i) {
            field2 += std::norm(clean.q[k][i]);
            const auto d = noisy.q[k][i] - clean.q[k][i];
            re2 += d.real() * d.real();
            im2 += d.imag() * d.imag();
        }
        const double target = sigma * std::sqrt(field2 / n);
        CHECK(std::sqrt(re2 / n) == doctest::Approx(target).epsilon(0.1));
        CHECK(std::sqrt(im2 / n) == doctest::Approx(target).epsilon(0.1));
    }

    const MeasurementBundle with_f = synthesize_bundle(s, g, freqs, sigma, 7, true);
    double diff = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) diff = std::max(diff, std::abs(with_f.F[i] - clean.F[i]));
    CHECK(diff > 0.0);
}

TEST_CASE("oracle consistency across the catalog") {
    const auto g = build_disk_grid(16, 64);
    for (const Scenario& s : scenario_catalog()) {
        CAPTURE(s.name);
        const CoefficientFields truth = eval_coefficients(s, g);
        const bool absorbing = s.name.rfind("absorption", 0) == 0;
        if (!absorbing) {
            const FrequencySet freqs({1.0, 2.5});
            const MeasurementBundle b = synthesize_bundle(s, g, freqs, 0.0, 0);
            const Coefficients k = disentangle_two_freq(b.q[0], b.q[1], freqs[0], freqs[1]);
            CHECK(sup_diff(k.f1, truth.f1) < 1e-10);
            CHECK(sup_diff(k.f2, truth.f2) < 1e-10);
            CHECK(sup_diff(k.f3, truth.f3) < 1e-10);
            continue;
        }
        const FrequencySet freqs({1.0, 2.0, 4.0});
        const MeasurementBundle b = synthesize_bundle(s, g, freqs, 0.0, 0);
        const Coefficients k = disentangle_absorption(b.q[0], b.q[1], b.q[2], freqs, 1e-9);
        CHECK(sup_diff(k.f1, truth.f1) < 1e-10);
        CHECK(sup_diff(k.f2, truth.f2) < 1e-10);
        CHECK(sup_diff(k.f3, truth.f3) < 1e-10);
        for (std::size_t i = 0; i < g->size(); ++i) {
            const PointCoefficients p = coefficients_at(s, g->node(i));
            CHECK(k.mask_d1[i] == (p.alpha_ratio > 0.0));
            if (k.mask_d1[i]) {
                CHECK(std::abs(k.zeta[i] - p.zeta) < 1e-10);
                CHECK(std::abs(k.alpha_ratio[i] - p.alpha_ratio) < 1e-10);
            }
        }
    }
}

TEST_CASE("analytic and discrete coefficients agree under refinement") {
    for (const char* name : {"density-exp", "potential-flow", "lens-swirl", "absorption"}) {
        CAPTURE(name);
        const Scenario& s = find_scenario(name);
        double prev[4] = {0, 0, 0, 0};
        for (int k = 0; k < 3; ++k) {
            const auto g = build_disk_grid(16 << k, 64 << k);
            const CoefficientFields exact = eval_coefficients(s, g);
            const FluidState st = sample_state(s, g);
            const CoefficientFields disc = eval_coefficients(st);
            const double e[4] = {sup_diff(exact.f1, disc.f1), sup_diff(exact.f2, disc.f2),
                                 sup_diff(exact.f3, disc.f3),
                                 sup_diff(eval_F(s, g), eval_F(st))};
            for (int j = 0; j < 4; ++j) {
                // Ratio 2^-1.5 ~ 0.354 per halving of h, with slack.
                if (k > 0 && prev[j] > 1e-11) CHECK(e[j] < 0.45 * prev[j]);
                prev[j] = e[j];
            }
        }
    }
}

TEST_CASE("sampled state carries boundary traces") {
    const auto g = build_disk_grid(8, 32);
    const FluidState st = sample_state(rigid_swirl(), g);
    REQUIRE(st.v.x1.has_boundary());
    for (int k = 0; k < g->n_theta(); ++k) {
        CHECK(st.v.x1.boundary()[k] == doctest::Approx(-g->sin_theta(k)));
        CHECK(st.v.x2.boundary()[k] == doctest::Approx(g->cos_theta(k)));
    }
    MeasurementBundle b;
    attach_boundary_traces(b, st);
    CHECK(b.boundary_c.size() == 32u);
    CHECK(b.boundary_rho[3] == 1.0);
}
