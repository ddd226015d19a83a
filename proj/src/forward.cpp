#include "fluidrecon/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fluidrecon {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ScalarJet jet_of(const ScalarTerm& term, Point x) {
    return std::visit(
        overloaded{
            [](const ConstantTerm& t) { return ScalarJet{t.a, 0.0, 0.0, 0.0}; },
            [&](const GaussianTerm& t) {
                const Point d = x - t.center;
                const double g = t.a * std::exp(-t.b * d.norm2());
                return ScalarJet{g, -2.0 * t.b * d.x1 * g, -2.0 * t.b * d.x2 * g,
                                 g * (4.0 * t.b * t.b * d.norm2() - 4.0 * t.b)};
            },
            [&](const ExponentialTerm& t) {
                const double e = t.a * std::exp(t.k.x1 * x.x1 + t.k.x2 * x.x2);
                return ScalarJet{e, t.k.x1 * e, t.k.x2 * e, t.k.norm2() * e};
            },
            [&](const QuadraticTerm& t) {
                return ScalarJet{t.c0 + t.c1 * x.x1 + t.c2 * x.x2 + t.c11 * x.x1 * x.x1 +
                                     t.c12 * x.x1 * x.x2 + t.c22 * x.x2 * x.x2,
                                 t.c1 + 2.0 * t.c11 * x.x1 + t.c12 * x.x2,
                                 t.c2 + t.c12 * x.x1 + 2.0 * t.c22 * x.x2,
                                 2.0 * (t.c11 + t.c22)};
            },
            [&](const RampTerm& t) {
                const double s = t.normal.x1 * x.x1 + t.normal.x2 * x.x2 - t.offset;
                if (s <= 0.0) return ScalarJet{};
                const int p = t.power;
                const double dv = t.a * p * std::pow(s, p - 1);
                const double lap = p >= 2 ? t.a * p * (p - 1) * std::pow(s, p - 2) * t.normal.norm2()
                                          : 0.0;
                return ScalarJet{t.a * std::pow(s, p), dv * t.normal.x1, dv * t.normal.x2, lap};
            },
        },
        term);
}

VectorJet jet_of(const VectorTerm& term, Point x) {
    return std::visit(
        overloaded{
            [](const ConstantFlow& f) { return VectorJet{f.a1, f.a2, 0.0, 0.0}; },
            [&](const SwirlFlow& f) {
                const double s = x.norm2();
                const double sigma = f.a * std::exp(-f.b * (s - f.s0) * (s - f.s0));
                const double dsigma = -2.0 * f.b * (s - f.s0) * sigma;
                return VectorJet{-sigma * x.x2, sigma * x.x1, 0.0, 2.0 * sigma + 2.0 * s * dsigma};
            },
            [&](const GradientFlow& f) {
                const QuadraticTerm& p = f.potential;
                return VectorJet{p.c1 + 2.0 * p.c11 * x.x1 + p.c12 * x.x2,
                                 p.c2 + p.c12 * x.x1 + 2.0 * p.c22 * x.x2,
                                 2.0 * (p.c11 + p.c22), 0.0};
            },
        },
        term);
}

}  // namespace

ScalarJet SmoothScalar::jet(Point x) const {
    ScalarJet out;
    for (const auto& t : terms_) {
        const ScalarJet j = jet_of(t, x);
        out.value += j.value;
        out.d1 += j.d1;
        out.d2 += j.d2;
        out.lap += j.lap;
    }
    return out;
}

VectorJet SmoothVector::jet(Point x) const {
    VectorJet out;
    for (const auto& t : terms_) {
        const VectorJet j = jet_of(t, x);
        out.v1 += j.v1;
        out.v2 += j.v2;
        out.div += j.div;
        out.curl += j.curl;
    }
    return out;
}

PointCoefficients coefficients_at(const Scenario& s, Point x) {
    const ScalarJet c = s.c.jet(x);
    const ScalarJet rho = s.rho.jet(x);
    const VectorJet v = s.v.jet(x);
    if (!(c.value > 0.0) || !(rho.value > 0.0)) {
        throw std::domain_error("scenario '" + s.name + "' has non-positive c or rho");
    }
    const double c2 = c.value * c.value;
    const double c3 = c2 * c.value;
    const double grad_rho2 = rho.d1 * rho.d1 + rho.d2 * rho.d2;
    PointCoefficients k;
    k.f1 = -0.5 * rho.lap / rho.value + 0.75 * grad_rho2 / (rho.value * rho.value);
    k.f2 = 1.0 / c2 + (v.v1 * v.v1 + v.v2 * v.v2) / (c2 * c2);
    const double v_dot_grad_c = v.v1 * c.d1 + v.v2 * c.d2;
    const double v_dot_grad_rho = v.v1 * rho.d1 + v.v2 * rho.d2;
    k.f3 = v.div / c2 - 2.0 * v_dot_grad_c / c3 - v_dot_grad_rho / (rho.value * c2);
    const double grad_c_cross_v = c.d1 * v.v2 - c.d2 * v.v1;
    k.F = v.curl / c2 - 2.0 * grad_c_cross_v / c3;
    k.zeta = s.zeta(x);
    k.alpha_ratio = s.alpha0(x) / c.value;
    return k;
}

std::complex<double> q_at(const PointCoefficients& k, double omega) {
    const double absorption = 2.0 * std::pow(omega, 1.0 + k.zeta) * k.alpha_ratio;
    return {k.f1 - omega * omega * k.f2, omega * k.f3 - absorption};
}

const std::vector<Scenario>& scenario_catalog() {
    static const std::vector<Scenario> catalog = [] {
        const SmoothScalar lens{ConstantTerm{1.0}, GaussianTerm{-0.3, 8.0, {0.0, 0.0}}};
        const SmoothVector annular{SwirlFlow{0.5, 8.0, 0.35}};
        std::vector<Scenario> out;

        Scenario constant;
        constant.name = "constant";
        constant.description = "c = 1, v = 0, rho = 1";
        out.push_back(constant);

        Scenario density;
        density.name = "density-exp";
        density.description = "c = 1, v = 0, rho = exp(2 x1) (f1 = 1)";
        density.rho = {ExponentialTerm{1.0, {2.0, 0.0}}};
        out.push_back(density);

        Scenario swirl;
        swirl.name = "rigid-swirl";
        swirl.description = "c = 1, v = (-x2, x1), rho = 1 (F = 2)";
        swirl.v = {SwirlFlow{1.0, 0.0, 0.0}};
        out.push_back(swirl);

        Scenario uniform;
        uniform.name = "uniform-flow";
        uniform.description = "c = 1, v = (1, 0), rho = 1 (v/c^2 is a gradient)";
        uniform.v = {ConstantFlow{1.0, 0.0}};
        out.push_back(uniform);

        Scenario potential;
        potential.name = "potential-flow";
        potential.description = "c = 1.2, v = 0.4 grad(x1 x2), rho = 1 + 0.2 x1 + 0.1 x2^2";
        potential.c = SmoothScalar::constant(1.2);
        potential.v = {GradientFlow{QuadraticTerm{0.0, 0.0, 0.0, 0.0, 0.4, 0.0}}};
        potential.rho = {QuadraticTerm{1.0, 0.2, 0.0, 0.0, 0.0, 0.1}};
        out.push_back(potential);

        Scenario lens_swirl;
        lens_swirl.name = "lens-swirl";
        lens_swirl.description =
            "c = 1 - 0.3 exp(-8|x|^2), annular swirl, rho = 1 + 0.4 exp(-6|x - (0.3, 0)|^2)";
        lens_swirl.c = lens;
        lens_swirl.v = annular;
        lens_swirl.rho = {ConstantTerm{1.0}, GaussianTerm{0.4, 6.0, {0.3, 0.0}}};
        out.push_back(lens_swirl);

        Scenario absorption;
        absorption.name = "absorption";
        absorption.description =
            "lens c, annular swirl, rho = 1 + 0.3 exp(-5|x - (0, -0.25)|^2), zeta = 1.5, "
            "alpha0 = 0.3 exp(-10|x - (-0.2, 0.1)|^2)";
        absorption.c = lens;
        absorption.v = annular;
        absorption.rho = {ConstantTerm{1.0}, GaussianTerm{0.3, 5.0, {0.0, -0.25}}};
        absorption.zeta = SmoothScalar::constant(1.5);
        absorption.alpha0 = {GaussianTerm{0.3, 10.0, {-0.2, 0.1}}};
        out.push_back(absorption);

        Scenario half;
        half.name = "absorption-halfdisk";
        half.description =
            "lens c, uniform drift, rho = 1, zeta = 1.2 + 0.3 x2, alpha0 = 0.5 max(0, x1)";
        half.c = lens;
        half.v = {ConstantFlow{0.2, 0.1}};
        half.zeta = {QuadraticTerm{1.2, 0.0, 0.3, 0.0, 0.0, 0.0}};
        half.alpha0 = {RampTerm{0.5, {1.0, 0.0}, 0.0, 1}};
        out.push_back(half);
        return out;
    }();
    return catalog;
}

const Scenario& find_scenario(const std::string& name) {
    for (const auto& s : scenario_catalog()) {
        if (s.name == name) return s;
    }
    throw std::out_of_range("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> names;
    for (const auto& s : scenario_catalog()) names.push_back(s.name);
    return names;
}

void FluidState::validate() const {
    auto positive = [](const ScalarField& f, const char* what) {
        auto check = [&](std::span<const double> vals) {
            for (double v : vals) {
                if (!(v > 0.0)) throw std::domain_error(std::string(what) + " must be positive");
            }
        };
        check(f.values());
        if (f.has_boundary()) check(f.boundary());
    };
    positive(c, "sound speed c");
    positive(rho, "density rho");
}

FluidState sample_state(const Scenario& s, const GridPtr& grid) {
    FluidState st;
    st.c = sample_with_boundary(grid, [&](Point x) { return s.c(x); });
    st.rho = sample_with_boundary(grid, [&](Point x) { return s.rho(x); });
    st.zeta = sample_with_boundary(grid, [&](Point x) { return s.zeta(x); });
    st.alpha0 = sample_with_boundary(grid, [&](Point x) { return s.alpha0(x); });
    st.v = VectorField(sample_with_boundary(grid, [&](Point x) { return s.v.jet(x).v1; }),
                       sample_with_boundary(grid, [&](Point x) { return s.v.jet(x).v2; }));
    st.validate();
    return st;
}

CoefficientFields eval_coefficients(const Scenario& s, const GridPtr& grid) {
    CoefficientFields out{ScalarField(grid), ScalarField(grid), ScalarField(grid)};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const PointCoefficients k = coefficients_at(s, grid->node(i));
        out.f1[i] = k.f1;
        out.f2[i] = k.f2;
        out.f3[i] = k.f3;
    }
    return out;
}

namespace {

template <typename Fn>
ScalarField map_field(const ScalarField& a, Fn fn) {
    ScalarField out(a.grid_ptr());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
    if (a.has_boundary()) {
        std::vector<double> b(a.boundary().size());
        for (std::size_t j = 0; j < b.size(); ++j) b[j] = fn(a.boundary()[j]);
        out.set_boundary(std::move(b));
    }
    return out;
}

VectorField velocity_over_c2(const FluidState& state) {
    const ScalarField inv_c2 = map_field(state.c, [](double c) { return 1.0 / (c * c); });
    return {inv_c2 * state.v.x1, inv_c2 * state.v.x2};
}

}  // namespace

CoefficientFields eval_coefficients(const FluidState& state) {
    state.validate();
    const ScalarField g = map_field(state.rho, [](double r) { return 1.0 / std::sqrt(r); });
    const ScalarField lap_g = laplacian(g);
    const VectorField w = velocity_over_c2(state);
    const ScalarField div_w = divergence(w);
    const VectorField grad_rho = gradient(state.rho);
    CoefficientFields out{ScalarField(state.grid_ptr()), ScalarField(state.grid_ptr()),
                          ScalarField(state.grid_ptr())};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double c2 = state.c[i] * state.c[i];
        const double v1 = state.v.x1[i], v2 = state.v.x2[i];
        out.f1[i] = lap_g[i] / g[i];
        out.f2[i] = 1.0 / c2 + (v1 * v1 + v2 * v2) / (c2 * c2);
        out.f3[i] = div_w[i] - (v1 * grad_rho.x1[i] + v2 * grad_rho.x2[i]) / (state.rho[i] * c2);
    }
    return out;
}

ScalarField eval_F(const Scenario& s, const GridPtr& grid) {
    return sample(grid, [&](Point x) { return coefficients_at(s, x).F; });
}

ScalarField eval_F(const FluidState& state) { return curl(velocity_over_c2(state)); }

ComplexField synth_q(const Scenario& s, const GridPtr& grid, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("synth_q: omega must be positive");
    ComplexField q(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        q[i] = q_at(coefficients_at(s, grid->node(i)), omega);
    }
    return q;
}

ComplexField synth_q(const FluidState& state, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("synth_q: omega must be positive");
    const CoefficientFields k = eval_coefficients(state);
    ComplexField q(state.grid_ptr());
    for (std::size_t i = 0; i < q.size(); ++i) {
        PointCoefficients p;
        p.f1 = k.f1[i];
        p.f2 = k.f2[i];
        p.f3 = k.f3[i];
        p.zeta = state.zeta[i];
        p.alpha_ratio = state.alpha0[i] / state.c[i];
        q[i] = q_at(p, omega);
    }
    return q;
}

void attach_boundary_traces(MeasurementBundle& bundle, const FluidState& state) {
    auto ring = [](const ScalarField& f) {
        return std::vector<double>(f.boundary().begin(), f.boundary().end());
    };
    bundle.boundary_c = ring(state.c);
    bundle.boundary_rho = ring(state.rho);
    bundle.boundary_v1 = ring(state.v.x1);
    bundle.boundary_v2 = ring(state.v.x2);
}

namespace {

// Box-Muller on top of mt19937_64, whose output sequence is fixed by the
// standard; std::normal_distribution is implementation-defined.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
        double u1 = 0.0;
        do {
            u1 = static_cast<double>(engine_() >> 11) * scale;
        } while (u1 <= 0.0);
        const double u2 = static_cast<double>(engine_() >> 11) * scale;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace

MeasurementBundle synthesize_bundle(const Scenario& s, const GridPtr& grid,
                                    const FrequencySet& freqs, double noise_sigma,
                                    std::uint64_t seed, bool noise_on_F) {
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
    MeasurementBundle b;
    b.grid = grid;
    b.freqs = freqs;
    b.noise_sigma = noise_sigma;
    b.seed = seed;
    b.scenario = s.name;

    std::vector<PointCoefficients> coeffs(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) coeffs[i] = coefficients_at(s, grid->node(i));

    GaussianSource noise(seed);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        ComplexField q(grid);
        double sum2 = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] = q_at(coeffs[i], freqs[k]);
            sum2 += std::norm(q[i]);
        }
        if (noise_sigma > 0.0) {
            const double sd = noise_sigma * std::sqrt(sum2 / static_cast<double>(q.size()));
            for (std::size_t i = 0; i < q.size(); ++i) {
                const double re = noise.next();
                const double im = noise.next();
                q[i] += std::complex<double>(sd * re, sd * im);
            }
        }
        b.q.push_back(std::move(q));
    }
    b.F = ScalarField(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) b.F[i] = coeffs[i].F;
    if (noise_on_F && noise_sigma > 0.0) {
        double sum2 = 0.0;
        for (double v : b.F.values()) sum2 += v * v;
        const double sd = noise_sigma * std::sqrt(sum2 / static_cast<double>(b.F.size()));
        for (double& v : b.F.values()) v += sd * noise.next();
    }

    const int nt = grid->n_theta();
    b.boundary_c.resize(nt);
    b.boundary_rho.resize(nt);
    b.boundary_v1.resize(nt);
    b.boundary_v2.resize(nt);
    for (int it = 0; it < nt; ++it) {
        const Point x = grid->boundary_node(it);
        const VectorJet v = s.v.jet(x);
        b.boundary_c[it] = s.c(x);
        b.boundary_rho[it] = s.rho(x);
        b.boundary_v1[it] = v.v1;
        b.boundary_v2[it] = v.v2;
    }
    return b;
}

}  // namespace fluidrecon
