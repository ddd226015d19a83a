#include "fluidrecon/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fluidrecon {

namespace {

template <typename Fn>
auto run_stage(ReconstructionReport& report, const std::string& name, Fn&& fn) {
    report.stages.push_back(name);
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), report);
    }
}

std::vector<double> ring_copy(std::span<const double> v) { return {v.begin(), v.end()}; }

template <typename DiffFn, typename TruthFn>
ErrorNorms norms_over(const DiskGrid& grid, const std::vector<bool>& mask, DiffFn diff,
                      TruthFn truth) {
    const auto w = grid.cell_weights();
    double sup_d = 0.0, sup_t = 0.0, l2_d = 0.0, l2_t = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!mask[i]) continue;
        const double d = diff(i);
        const double t = truth(i);
        sup_d = std::max(sup_d, d);
        sup_t = std::max(sup_t, t);
        l2_d += d * d * w[i];
        l2_t += t * t * w[i];
    }
    ErrorNorms e;
    e.sup_abs = sup_d;
    e.l2_abs = std::sqrt(l2_d);
    e.sup_rel = sup_t > 0.0 ? sup_d / sup_t : sup_d;
    e.l2_rel = l2_t > 0.0 ? e.l2_abs / std::sqrt(l2_t) : e.l2_abs;
    return e;
}

std::vector<bool> subdisk_mask(const DiskGrid& grid, double radius, const std::vector<bool>& base) {
    std::vector<bool> m(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        m[i] = base[i] && grid.radius(grid.ring_of(i)) <= radius;
    }
    return m;
}

void check_bundle(const MeasurementBundle& b) {
    if (!b.grid) throw std::invalid_argument("bundle has no grid");
    if (b.q.size() != b.freqs.size()) {
        throw std::invalid_argument("bundle has " + std::to_string(b.q.size()) +
                                    " q fields for " + std::to_string(b.freqs.size()) +
                                    " frequencies");
    }
    const std::size_t nt = static_cast<std::size_t>(b.grid->n_theta());
    if (b.boundary_c.size() != nt || b.boundary_rho.size() != nt || b.boundary_v1.size() != nt ||
        b.boundary_v2.size() != nt) {
        throw std::invalid_argument("bundle boundary traces do not match n_theta");
    }
    require_same_grid(*b.grid, b.F.grid(), "bundle F");
    for (const auto& q : b.q) require_same_grid(*b.grid, q.grid(), "bundle q");
}

// Steps shared by both reconstructions once f1, f2, f3 are known.
void reconstruct_from_coefficients(const MeasurementBundle& bundle, const Coefficients& coeffs,
                                   const PipelineOptions& opts, ReconstructionReport& report) {
    const GridPtr& grid = bundle.grid;
    const GreenMatrix green = run_stage(report, "green_matrix", [&] {
        GreenMatrix g = build_green_matrix(grid);
        report.diagnostics["green_row_norm"] = g.max_abs_row_sum();
        return g;
    });

    const BoundaryVector flow = boundary_flow(bundle.boundary_v1, bundle.boundary_v2, bundle.boundary_c);

    const HelmholtzData helm = run_stage(report, "helmholtz", [&] {
        std::optional<ScalarField> shift;
        if (opts.gauge_shift) shift = sample_with_boundary(grid, opts.gauge_shift);
        HelmholtzData h = helmholtz_decompose(bundle.F, opts.gauge, green, flow,
                                              opts.loop_tolerance, shift ? &*shift : nullptr);
        report.diagnostics["loop_defect"] = h.loop_defect;
        return h;
    });

    const DensityResult density = run_stage(report, "density", [&] {
        DensityResult d = recover_density(coeffs.f1, bundle.boundary_rho, green, opts.fredholm);
        report.diagnostics["fredholm_residual_density"] = d.residual;
        report.diagnostics["fredholm_condition_density"] = d.condition;
        return d;
    });
    report.recovered.rho = density.rho;

    const PhiResult phi = run_stage(report, "phi", [&] {
        PhiResult p = recover_phi(coeffs.f1, coeffs.f3, density.g, helm.curlV, helm.phi_boundary,
                                  green, opts.fredholm);
        report.diagnostics["fredholm_residual_phi"] = p.residual;
        return p;
    });

    const AssembleResult cv = run_stage(report, "assemble", [&] {
        AssembleResult a = assemble_cv(coeffs.f2, gradient(phi.phi), helm.curlV);
        report.diagnostics["positivity_margin"] = a.positivity_margin;
        return a;
    });
    report.recovered.c = cv.c;
    report.recovered.v = cv.v;
}

PipelineOptions validated(const PipelineOptions& opts) {
    if (!(opts.eps_d0 >= 0.0)) throw std::invalid_argument("eps_d0 must be non-negative");
    if (!(opts.subdisk > 0.0)) throw std::invalid_argument("subdisk radius must be positive");
    return opts;
}

}  // namespace

DensityResult recover_density(const ScalarField& f1, std::span<const double> rho_boundary,
                              const GreenMatrix& green, const SolveOptions& opts) {
    const GridPtr& grid = f1.grid_ptr();
    std::vector<double> g_boundary(rho_boundary.size());
    for (std::size_t j = 0; j < rho_boundary.size(); ++j) {
        if (!(rho_boundary[j] > 0.0)) {
            throw std::domain_error("boundary density must be positive (node " +
                                    std::to_string(j) + ")");
        }
        g_boundary[j] = 1.0 / std::sqrt(rho_boundary[j]);
    }
    const ScalarField g0 = poisson_extend(g_boundary, grid);
    SolveInfo info;
    const FredholmProblem<double> problem{green, f1, g0};
    ScalarField g = solve(problem, opts, &info);
    std::size_t bad = 0;
    for (double v : g.values()) {
        if (!(v > 0.0)) ++bad;
    }
    if (bad > 0) {
        throw std::domain_error("recovered g = rho^(-1/2) is non-positive at " +
                                std::to_string(bad) + " node(s)");
    }
    g.set_boundary(g_boundary);
    ScalarField rho(grid);
    for (std::size_t i = 0; i < g.size(); ++i) rho[i] = 1.0 / (g[i] * g[i]);
    rho.set_boundary(ring_copy(rho_boundary));
    return {std::move(rho), std::move(g), info.residual, info.condition_estimate};
}

PhiResult recover_phi(const ScalarField& f1, const ScalarField& f3, const ScalarField& g,
                      const VectorField& curlV, std::span<const double> phi_boundary,
                      const GreenMatrix& green, const SolveOptions& opts) {
    const GridPtr& grid = f1.grid_ptr();
    require_same_grid(*grid, f3.grid(), "recover_phi f3");
    require_same_grid(*grid, g.grid(), "recover_phi g");
    require_same_grid(*grid, curlV.grid(), "recover_phi curl V");
    if (!g.has_boundary()) throw std::invalid_argument("recover_phi: g needs its boundary trace");

    // grad ln rho = -2 grad g / g
    const VectorField grad_g = gradient(g);
    ScalarField source(grid);
    for (std::size_t i = 0; i < source.size(); ++i) {
        const double gl1 = -2.0 * grad_g.x1[i] / g[i];
        const double gl2 = -2.0 * grad_g.x2[i] / g[i];
        source[i] = g[i] * (f3[i] - (curlV.x1[i] * gl1 + curlV.x2[i] * gl2));
    }
    if (!source.all_finite()) throw std::domain_error("recover_phi: non-finite source term");
    const ScalarField eta0 = volume_potential(source, green);
    std::vector<double> eta_boundary(phi_boundary.size());
    for (std::size_t j = 0; j < eta_boundary.size(); ++j) {
        eta_boundary[j] = g.boundary()[j] * phi_boundary[j];
    }
    const ScalarField eta1 = poisson_extend(eta_boundary, grid);
    ScalarField rhs = eta0 + eta1;
    rhs.clear_boundary();
    SolveInfo info;
    const ScalarField eta = solve(FredholmProblem<double>{green, f1, rhs}, opts, &info);
    ScalarField phi(grid);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = eta[i] / g[i];
    phi.set_boundary(ring_copy(phi_boundary));
    return {std::move(phi), info.residual};
}

AssembleResult assemble_cv(const ScalarField& f2, const VectorField& grad_phi,
                           const VectorField& curlV) {
    const GridPtr& grid = f2.grid_ptr();
    require_same_grid(*grid, grad_phi.grid(), "assemble_cv");
    require_same_grid(*grid, curlV.grid(), "assemble_cv");
    AssembleResult out{ScalarField(grid), VectorField(grid), std::numeric_limits<double>::infinity()};
    std::vector<std::pair<double, std::size_t>> bad;
    for (std::size_t i = 0; i < f2.size(); ++i) {
        const double w1 = grad_phi.x1[i] - curlV.x1[i];
        const double w2 = grad_phi.x2[i] - curlV.x2[i];
        const double radicand = f2[i] - (w1 * w1 + w2 * w2);
        out.positivity_margin = std::min(out.positivity_margin, radicand);
        if (!(radicand > 0.0)) {
            bad.emplace_back(radicand, i);
            continue;
        }
        const double c2 = 1.0 / radicand;
        out.c[i] = std::sqrt(c2);
        out.v.x1[i] = c2 * w1;
        out.v.x2[i] = c2 * w2;
    }
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        std::ostringstream os;
        os << "f2 - |grad Phi - curl V|^2 is non-positive at " << bad.size()
           << " node(s); worst:";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 5); ++k) {
            const Point p = grid->node(bad[k].second);
            os << " (" << p.x1 << ", " << p.x2 << ") -> " << bad[k].first;
        }
        throw std::domain_error(os.str());
    }
    return out;
}

ReconstructionReport reconstruct_theorem1(const MeasurementBundle& bundle,
                                          const PipelineOptions& options) {
    const PipelineOptions opts = validated(options);
    check_bundle(bundle);
    if (bundle.freqs.size() != 2) {
        throw std::invalid_argument("two-frequency reconstruction needs exactly 2 frequencies, got " +
                                    std::to_string(bundle.freqs.size()));
    }
    ReconstructionReport report;
    const GridPtr& grid = bundle.grid;
    const double w1 = bundle.freqs[0], w2 = bundle.freqs[1];

    const Coefficients coeffs = run_stage(report, "disentangle", [&] {
        double scale = 1.0;
        for (const auto& q : bundle.q[0].values()) scale = std::max(scale, std::abs(q.imag() / w1));
        report.diagnostics["absorption_threshold"] = opts.absorption_tolerance * scale;
        try {
            Coefficients c = disentangle_two_freq(bundle.q[0], bundle.q[1], w1, w2,
                                                  opts.absorption_tolerance * scale);
            report.diagnostics["consistency_residual"] = c.consistency_residual;
            return c;
        } catch (const AbsorptionDetected& e) {
            report.diagnostics["consistency_residual"] = e.residual();
            throw;
        }
    });
    report.mask_d1 = coeffs.mask_d1;
    report.diagnostics["d0_nodes"] = static_cast<double>(grid->size());
    report.diagnostics["d1_nodes"] = 0.0;

    reconstruct_from_coefficients(bundle, coeffs, opts, report);
    report.recovered.zeta = ScalarField(grid);
    report.recovered.alpha0 = ScalarField(grid);
    report.absorption = false;
    if (opts.truth) compare_with_truth(report, *opts.truth, opts.subdisk);
    return report;
}

ReconstructionReport reconstruct_theorem2(const MeasurementBundle& bundle,
                                          const PipelineOptions& options) {
    const PipelineOptions opts = validated(options);
    check_bundle(bundle);
    if (bundle.freqs.size() < 3) {
        throw std::invalid_argument("absorption reconstruction needs at least 3 frequencies, got " +
                                    std::to_string(bundle.freqs.size()));
    }
    ReconstructionReport report;
    report.absorption = true;
    const GridPtr& grid = bundle.grid;
    const bool least_squares = opts.least_squares || bundle.freqs.size() > 3;

    const Coefficients coeffs = run_stage(report, "disentangle", [&] {
        Coefficients c =
            least_squares
                ? disentangle_least_squares(bundle.q, bundle.freqs, LeastSquaresMode::absorption,
                                            opts.eps_d0)
                : disentangle_absorption(bundle.q[0], bundle.q[1], bundle.q[2], bundle.freqs,
                                         opts.eps_d0);
        report.diagnostics["consistency_residual"] = c.consistency_residual;
        report.diagnostics["least_squares"] = least_squares ? 1.0 : 0.0;
        report.diagnostics["clamped_nodes"] = static_cast<double>(c.clamped_nodes);
        return c;
    });
    report.mask_d1 = coeffs.mask_d1;
    const auto d1 = static_cast<double>(coeffs.d1_count());
    report.diagnostics["d1_nodes"] = d1;
    report.diagnostics["d0_nodes"] = static_cast<double>(grid->size()) - d1;

    reconstruct_from_coefficients(bundle, coeffs, opts, report);

    run_stage(report, "absorption", [&] {
        report.recovered.zeta = coeffs.zeta;
        report.recovered.alpha0 = ScalarField(grid);
        for (std::size_t i = 0; i < grid->size(); ++i) {
            report.recovered.alpha0[i] =
                coeffs.mask_d1[i] ? coeffs.alpha_ratio[i] * report.recovered.c[i] : 0.0;
        }
        double zmin = std::numeric_limits<double>::infinity(), zmax = 0.0;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            if (!coeffs.mask_d1[i]) continue;
            zmin = std::min(zmin, coeffs.zeta[i]);
            zmax = std::max(zmax, coeffs.zeta[i]);
        }
        report.diagnostics["zeta_min"] = d1 > 0 ? zmin : 0.0;
        report.diagnostics["zeta_max"] = zmax;
        return 0;
    });
    if (opts.truth) compare_with_truth(report, *opts.truth, opts.subdisk);
    return report;
}

ErrorNorms error_norms(std::span<const double> recovered, std::span<const double> truth,
                       const DiskGrid& grid, const std::vector<bool>& mask) {
    return norms_over(
        grid, mask, [&](std::size_t i) { return std::abs(recovered[i] - truth[i]); },
        [&](std::size_t i) { return std::abs(truth[i]); });
}

void compare_with_truth(ReconstructionReport& report, const FluidState& truth, double subdisk) {
    const FluidState& rec = report.recovered;
    const DiskGrid& grid = truth.c.grid();
    require_same_grid(grid, rec.c.grid(), "truth comparison");
    const std::vector<bool> all(grid.size(), true);
    const std::vector<bool> inner = subdisk_mask(grid, subdisk, all);
    auto scalar = [&](const std::string& name, const ScalarField& r, const ScalarField& t,
                      const std::vector<bool>& full, const std::vector<bool>& sub) {
        report.errors_vs_truth[name] = {error_norms(r.values(), t.values(), grid, full),
                                        error_norms(r.values(), t.values(), grid, sub)};
    };
    scalar("c", rec.c, truth.c, all, inner);
    scalar("rho", rec.rho, truth.rho, all, inner);
    scalar("v1", rec.v.x1, truth.v.x1, all, inner);
    scalar("v2", rec.v.x2, truth.v.x2, all, inner);
    auto vdiff = [&](std::size_t i) {
        return std::hypot(rec.v.x1[i] - truth.v.x1[i], rec.v.x2[i] - truth.v.x2[i]);
    };
    auto vtrue = [&](std::size_t i) { return std::hypot(truth.v.x1[i], truth.v.x2[i]); };
    report.errors_vs_truth["v"] = {norms_over(grid, all, vdiff, vtrue),
                                   norms_over(grid, inner, vdiff, vtrue)};
    if (report.absorption) {
        const std::vector<bool>& d1 = report.mask_d1;
        const std::vector<bool> d1_inner = subdisk_mask(grid, subdisk, d1);
        scalar("zeta", rec.zeta, truth.zeta, d1, d1_inner);
        scalar("alpha0", rec.alpha0, truth.alpha0, all, inner);
        report.errors_vs_truth["alpha0_d1"] = {error_norms(rec.alpha0.values(), truth.alpha0.values(), grid, d1),
                                               error_norms(rec.alpha0.values(), truth.alpha0.values(), grid, d1_inner)};
    }
}

}  // namespace fluidrecon
