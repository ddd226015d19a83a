#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "fluidrecon/forward.hpp"
#include "fluidrecon/multifreq.hpp"

using namespace fluidrecon;

namespace {

std::complex<double> q_point(double f1, double f2, double f3, double ar, double zeta, double w) {
    PointCoefficients k;
    k.f1 = f1;
    k.f2 = f2;
    k.f3 = f3;
    k.alpha_ratio = ar;
    k.zeta = zeta;
    return q_at(k, w);
}

ComplexField constant_q(const GridPtr& g, std::complex<double> v) { return ComplexField(g, v); }

}  // namespace

TEST_CASE("FrequencySet invariants") {
    CHECK_NOTHROW(FrequencySet({1.0, 2.0, 3.0}));
    CHECK_THROWS_AS(FrequencySet({2.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(FrequencySet({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(FrequencySet({-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(FrequencySet(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("two-frequency disentanglement") {
    const auto g = build_disk_grid(4, 8);
    SUBCASE("constant medium") {
        const Coefficients c = disentangle_two_freq(constant_q(g, -1.0), constant_q(g, -4.0), 1, 2);
        CHECK(max_abs(c.f1) == 0.0);
        CHECK(max_abs(c.f2 - ScalarField(g, 1.0)) == 0.0);
        CHECK(max_abs(c.f3) == 0.0);
        CHECK(c.d1_count() == 0);
    }
    SUBCASE("(2, 0.5, 3)") {
        const Coefficients c = disentangle_two_freq(constant_q(g, {1.5, 3.0}), constant_q(g, {0.0, 6.0}), 1, 2);
        CHECK(c.f1[5] == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(c.f2[5] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(c.f3[5] == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(c.consistency_residual == 0.0);
    }
    SUBCASE("equal frequencies") {
        CHECK_THROWS_AS(disentangle_two_freq(constant_q(g, -1.0), constant_q(g, -1.0), 1, 1),
                        std::invalid_argument);
    }
    SUBCASE("absorption refusal") {
        const auto q1 = constant_q(g, q_point(0, 1, 1, 0.2, 1, 1));
        const auto q2 = constant_q(g, q_point(0, 1, 1, 0.2, 1, 2));
        CHECK_THROWS_AS(disentangle_two_freq(q1, q2, 1, 2, 1e-6), AbsorptionDetected);
        const Coefficients c = disentangle_two_freq(q1, q2, 1, 2);
        CHECK(c.consistency_residual == doctest::Approx(0.4));
    }
}

TEST_CASE("partition_domain") {
    const auto g = build_disk_grid(4, 8);
    CHECK(partition_domain(constant_q(g, {-1, 2}), constant_q(g, {-4, 4}), 1, 2, 1e-8) ==
          std::vector<bool>(32, false));
    const auto q1 = constant_q(g, q_point(0, 1, 1, 0.2, 1, 1));
    const auto q2 = constant_q(g, q_point(0, 1, 1, 0.2, 1, 2));
    CHECK(q1[0].imag() == doctest::Approx(0.6));
    CHECK(q2[0].imag() / 2 == doctest::Approx(0.2));
    CHECK(partition_domain(q1, q2, 1, 2, 1e-8) == std::vector<bool>(32, true));
}

TEST_CASE("partition exact where alpha0 > 0") {
    const auto g = build_disk_grid(16, 32);
    const Scenario& s = find_scenario("absorption-halfdisk");
    const ComplexField q1 = synth_q(s, g, 1.0);
    const ComplexField q2 = synth_q(s, g, 2.0);
    const auto mask = partition_domain(q1, q2, 1.0, 2.0, 1e-9);
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(mask[i] == (s.alpha0(g->node(i)) > 0.0));
    }
}

TEST_CASE("solve_zeta examples") {
    CHECK(solve_zeta(1.0 / 3.0, 1, 2, 4) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(solve_zeta(0.2, 1, 2, 4) - 2.0) < 1e-10);
    try {
        solve_zeta(0.6, 1, 2, 4);
        FAIL("expected ZetaRangeError");
    } catch (const ZetaRangeError& e) {
        CHECK(e.upper() == doctest::Approx(0.5).epsilon(1e-6));
    }
    CHECK_THROWS_AS(solve_zeta(0.3, 2, 1, 4), std::invalid_argument);
}

TEST_CASE("zeta equation is strictly decreasing and invertible") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int t = 0; t < 20; ++t) {
        std::array<double, 3> w{u(rng), u(rng), u(rng)};
        std::sort(w.begin(), w.end());
        if (w[1] - w[0] < 1e-3 || w[2] - w[1] < 1e-3) continue;
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 200; ++k) {
            const double z = 1e-3 * std::pow(2e4, k / 199.0);
            const double v = zeta_ratio(z, w[0], w[1], w[2]);
            CHECK(v < prev);
            prev = v;
        }
        for (double z : {0.5, 1.0, 1.5, 2.0, 5.0}) {
            const double lhs = zeta_ratio(z, w[0], w[1], w[2]);
            CHECK(std::abs(solve_zeta(lhs, w[0], w[1], w[2]) - z) < 1e-10);
        }
    }
}

TEST_CASE("absorption formulas at a point") {
    const FrequencySet freqs({1.0, 2.0, 4.0});
    std::array<std::complex<double>, 3> q{};
    for (int k = 0; k < 3; ++k) q[k] = q_point(0.5, 1.0, 1.0, 0.2, 1.0, freqs[k]);
    CHECK(q[0].imag() == doctest::Approx(0.6));
    CHECK(q[1].imag() == doctest::Approx(0.4));
    const AbsorptionPoint p = absorption_at_point(q, freqs, true);
    CHECK(p.alpha_ratio == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(p.f3 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.zeta == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p.f1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.f2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disentangle_absorption") {
    const auto g = build_disk_grid(8, 16);
    const FrequencySet freqs({1.0, 2.0, 3.0});
    SUBCASE("constant medium") {
        const Coefficients c = disentangle_absorption(constant_q(g, -1.0), constant_q(g, -4.0),
                                                      constant_q(g, -9.0), freqs);
        CHECK(max_abs(c.f1) < 1e-14);
        CHECK(max_abs(c.f2 - ScalarField(g, 1.0)) < 1e-14);
        CHECK(max_abs(c.f3) == 0.0);
        CHECK(max_abs(c.alpha_ratio) == 0.0);
        CHECK(c.d1_count() == 0);
    }
    SUBCASE("alpha0 = 0 matches the two-frequency path") {
        const Scenario& s = find_scenario("lens-swirl");
        const ComplexField q1 = synth_q(s, g, 1), q2 = synth_q(s, g, 2), q3 = synth_q(s, g, 3);
        const Coefficients a = disentangle_absorption(q1, q2, q3, freqs);
        const Coefficients b = disentangle_two_freq(q1, q2, 1, 2);
        CHECK(a.d1_count() == 0);
        CHECK(max_abs(a.alpha_ratio) == 0.0);
        CHECK(max_abs(a.f3 - b.f3) == 0.0);
        CHECK(max_abs(a.f1 - b.f1) == 0.0);
        CHECK(max_abs(a.f2 - b.f2) == 0.0);
    }
    SUBCASE("node-level zeta failure") {
        // Im q that violates the zeta equation's range at every node.
        const ComplexField q1 = constant_q(g, {0.0, 1.0}), q2 = constant_q(g, {0.0, 0.0}),
                           q3 = constant_q(g, {0.0, 2.9});
        try {
            disentangle_absorption(q1, q2, q3, freqs);
            FAIL("expected NodeZetaError");
        } catch (const NodeZetaError& e) {
            CHECK(e.nodes().size() == g->size());
        }
    }
}

TEST_CASE("least squares reduces to the exact formulas") {
    const auto g = build_disk_grid(8, 16);
    const Scenario& s = find_scenario("potential-flow");
    const std::vector<ComplexField> q{synth_q(s, g, 1.0), synth_q(s, g, 2.0)};
    const Coefficients ls =
        disentangle_least_squares(q, FrequencySet({1.0, 2.0}), LeastSquaresMode::no_absorption);
    const Coefficients ex = disentangle_two_freq(q[0], q[1], 1.0, 2.0);
    CHECK(max_abs(ls.f1 - ex.f1) < 1e-12);
    CHECK(max_abs(ls.f2 - ex.f2) < 1e-12);
    CHECK(max_abs(ls.f3 - ex.f3) < 1e-12);

    const FrequencySet five({1.0, 1.5, 2.0, 2.5, 3.0});
    std::vector<ComplexField> qc;
    for (double w : five.values()) qc.emplace_back(g, std::complex<double>(-w * w, 0.0));
    const Coefficients c = disentangle_least_squares(qc, five, LeastSquaresMode::no_absorption);
    CHECK(max_abs(c.f1) < 1e-10);
    CHECK(max_abs(c.f2 - ScalarField(g, 1.0)) < 1e-10);

    CHECK_THROWS_AS(disentangle_least_squares(std::span(qc).first(2), FrequencySet({1.0, 1.5}),
                                              LeastSquaresMode::absorption),
                    std::invalid_argument);
}

TEST_CASE("least squares with absorption recovers exact data") {
    const auto g = build_disk_grid(8, 16);
    const Scenario& s = find_scenario("absorption");
    const FrequencySet five({1.0, 1.5, 2.0, 2.5, 3.0});
    std::vector<ComplexField> q;
    for (double w : five.values()) q.push_back(synth_q(s, g, w));
    const Coefficients c = disentangle_least_squares(q, five, LeastSquaresMode::absorption);
    const CoefficientFields truth = eval_coefficients(s, g);
    CHECK(max_abs(c.f1 - truth.f1) < 1e-10);
    CHECK(max_abs(c.f2 - truth.f2) < 1e-10);
    double ez = 0.0, ea = 0.0, e3 = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const PointCoefficients k = coefficients_at(s, g->node(i));
        CHECK(c.mask_d1[i]);
        ez = std::max(ez, std::abs(c.zeta[i] - k.zeta));
        ea = std::max(ea, std::abs(c.alpha_ratio[i] - k.alpha_ratio));
        e3 = std::max(e3, std::abs(c.f3[i] - k.f3));
    }
    CHECK(ez < 1e-6);
    CHECK(ea < 1e-8);
    CHECK(e3 < 1e-8);
}

TEST_CASE("least-squares fit clamps negative absorption") {
    const FrequencySet freqs({1.0, 2.0, 3.0, 4.0});
    // Im q = w f3 + 2 w^2 a with a > 0: an "active" medium, which is clamped.
    std::vector<std::complex<double>> q;
    for (double w : freqs.values()) q.emplace_back(0.0, w * 1.0 + 2.0 * w * w * 0.1);
    bool clamped = false;
    const AbsorptionPoint p =
        least_squares_at_point(q, freqs, LeastSquaresMode::absorption, true, &clamped);
    CHECK(clamped);
    CHECK(p.alpha_ratio == 0.0);
}

TEST_CASE("least-squares weights") {
    const FrequencySet freqs({1.0, 2.0, 3.0, 4.0});
    PointCoefficients k;
    k.f1 = 0.3;
    k.f2 = 1.2;
    k.f3 = -0.4;
    k.zeta = 1.3;
    k.alpha_ratio = 0.15;
    std::vector<std::complex<double>> q;
    for (double w : freqs.values()) q.push_back(q_at(k, w));
    const std::vector<double> skewed{1.0, 0.5, 0.1, 0.02};
    const std::vector<double> uniform3(4, 3.0);
    for (const auto* wts : {&skewed, &uniform3}) {
        const AbsorptionPoint p = least_squares_at_point(q, freqs, LeastSquaresMode::absorption, true,
                                                         nullptr, *wts);
        CHECK(p.f1 == doctest::Approx(k.f1).epsilon(1e-9));
        CHECK(p.f2 == doctest::Approx(k.f2).epsilon(1e-9));
        CHECK(p.zeta == doctest::Approx(k.zeta).epsilon(1e-6));
        CHECK(p.alpha_ratio == doctest::Approx(k.alpha_ratio).epsilon(1e-6));
    }

    // A corrupted high-frequency sample matters less when that frequency is down-weighted.
    auto bad = q;
    bad[3] += std::complex<double>(0.5, 0.0);
    const double heavy = std::abs(
        least_squares_at_point(bad, freqs, LeastSquaresMode::no_absorption, false).f2 - k.f2);
    const double light = std::abs(least_squares_at_point(bad, freqs, LeastSquaresMode::no_absorption,
                                                         false, nullptr, skewed)
                                      .f2 -
                                  k.f2);
    CHECK(light < heavy);

    const std::vector<double> short_w{1.0, 1.0};
    CHECK_THROWS_AS(least_squares_at_point(q, freqs, LeastSquaresMode::absorption, true, nullptr, short_w),
                    std::invalid_argument);
    const std::vector<double> zero_w{1.0, 0.0, 1.0, 1.0};
    CHECK_THROWS_AS(least_squares_at_point(q, freqs, LeastSquaresMode::absorption, true, nullptr, zero_w),
                    std::invalid_argument);
}

TEST_CASE("frequency scaling leaves coefficients unchanged") {
    const auto g = build_disk_grid(8, 16);
    const Scenario& s = find_scenario("absorption");
    const CoefficientFields truth = eval_coefficients(s, g);
    for (double scale : {0.5, 1.0, 3.0}) {
        const FrequencySet f({scale, 2 * scale, 3 * scale});
        const Coefficients c = disentangle_absorption(synth_q(s, g, f[0]), synth_q(s, g, f[1]),
                                                      synth_q(s, g, f[2]), f);
        CHECK(max_abs(c.f1 - truth.f1) < 1e-10);
        CHECK(max_abs(c.f2 - truth.f2) < 1e-10);
        CHECK(max_abs(c.f3 - truth.f3) < 1e-10);
        double ez = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) ez = std::max(ez, std::abs(c.zeta[i] - 1.5));
        CHECK(ez < 1e-10);
    }
}
