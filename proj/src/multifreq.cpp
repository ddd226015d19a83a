#include "fluidrecon/multifreq.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace fluidrecon {

FrequencySet::FrequencySet(std::vector<double> omegas) : omegas_(std::move(omegas)) {
    if (omegas_.empty()) throw std::invalid_argument("FrequencySet: no frequencies");
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
        if (!(omegas_[i] > 0.0) || !std::isfinite(omegas_[i])) {
            throw std::invalid_argument("FrequencySet: frequencies must be positive and finite");
        }
        if (i > 0 && !(omegas_[i] > omegas_[i - 1])) {
            throw std::invalid_argument("FrequencySet: frequencies must be strictly increasing");
        }
    }
}

std::size_t Coefficients::d1_count() const {
    return static_cast<std::size_t>(std::count(mask_d1.begin(), mask_d1.end(), true));
}

double zeta_ratio(double zeta, double w1, double w2, double w3) {
    return std::expm1(zeta * std::log(w2 / w1)) / std::expm1(zeta * std::log(w3 / w1));
}

double solve_zeta(double lhs, double w1, double w2, double w3) {
    if (!(w1 > 0.0 && w1 < w2 && w2 < w3)) {
        throw std::invalid_argument("solve_zeta: frequencies must satisfy 0 < w1 < w2 < w3");
    }
    const double upper = zeta_ratio(kZetaLower, w1, w2, w3);
    const double lower = zeta_ratio(kZetaUpper, w1, w2, w3);
    if (!(lhs > lower && lhs < upper)) {
        std::ostringstream os;
        os.precision(10);
        os << "zeta equation has no root for left side " << lhs << "; admissible interval is ("
           << lower << ", " << upper << ") for zeta in (" << kZetaLower << ", " << kZetaUpper
           << ")";
        throw ZetaRangeError(os.str(), lower, upper);
    }
    // zeta_ratio is strictly decreasing: grow the bracket until it drops below lhs.
    double lo = kZetaLower;
    double hi = 1.0;
    while (zeta_ratio(hi, w1, w2, w3) > lhs) {
        lo = hi;
        hi = std::min(2.0 * hi, kZetaUpper);
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (zeta_ratio(mid, w1, w2, w3) > lhs) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

void require_grids(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid(), b.grid(), "frequency data");
}

Coefficients empty_coefficients(const GridPtr& grid) {
    Coefficients c;
    c.f1 = ScalarField(grid);
    c.f2 = ScalarField(grid);
    c.f3 = ScalarField(grid);
    c.alpha_ratio = ScalarField(grid);
    c.zeta = ScalarField(grid);
    c.mask_d1.assign(grid->size(), false);
    return c;
}

double consistency(const ComplexField& q1, const ComplexField& q2, double w1, double w2) {
    double r = 0.0;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        r = std::max(r, std::abs(q1[i].imag() / w1 - q2[i].imag() / w2));
    }
    return r;
}

std::string describe_nodes(const DiskGrid& grid, const std::vector<std::size_t>& nodes) {
    std::ostringstream os;
    os << nodes.size() << " node(s) without an admissible zeta, e.g.";
    for (std::size_t k = 0; k < std::min<std::size_t>(nodes.size(), 5); ++k) {
        const Point p = grid.node(nodes[k]);
        os << " #" << nodes[k] << " (" << p.x1 << ", " << p.x2 << ")";
    }
    return os.str();
}

}  // namespace

Coefficients disentangle_two_freq(const ComplexField& q1, const ComplexField& q2, double w1,
                                  double w2, double absorption_threshold) {
    require_grids(q1, q2);
    if (!(w1 > 0.0 && w2 > 0.0)) throw std::invalid_argument("frequencies must be positive");
    if (w1 == w2) throw std::invalid_argument("disentangle_two_freq: w1 == w2 gives a singular system");
    Coefficients c = empty_coefficients(q1.grid_ptr());
    const double a = w1 * w1;
    const double b = w2 * w2;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        const double r1 = q1[i].real();
        const double r2 = q2[i].real();
        c.f1[i] = (b * r1 - a * r2) / (b - a);
        c.f2[i] = (r1 - r2) / (b - a);
        c.f3[i] = q1[i].imag() / w1;
    }
    c.consistency_residual = consistency(q1, q2, w1, w2);
    if (c.consistency_residual > absorption_threshold) {
        std::ostringstream os;
        os << "two-frequency data carry an absorption signature: max|Im q1/w1 - Im q2/w2| = "
           << c.consistency_residual << " exceeds " << absorption_threshold;
        throw AbsorptionDetected(os.str(), c.consistency_residual);
    }
    return c;
}

std::vector<bool> partition_domain(const ComplexField& q1, const ComplexField& q2, double w1,
                                   double w2, double eps_d0) {
    require_grids(q1, q2);
    double scale = 1.0;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        scale = std::max(scale, std::abs(q1[i].imag() / w1));
    }
    std::vector<bool> mask(q1.size());
    for (std::size_t i = 0; i < q1.size(); ++i) {
        mask[i] = std::abs(q1[i].imag() / w1 - q2[i].imag() / w2) > eps_d0 * scale;
    }
    return mask;
}

AbsorptionPoint absorption_at_point(std::span<const std::complex<double>, 3> q,
                                    const FrequencySet& freqs, bool in_d1) {
    const double w1 = freqs[0], w2 = freqs[1], w3 = freqs[2];
    AbsorptionPoint p;
    p.in_d1 = in_d1;
    p.f1 = (w2 * w2 * q[0].real() - w1 * w1 * q[1].real()) / (w2 * w2 - w1 * w1);
    p.f2 = (q[0].real() - q[1].real()) / (w2 * w2 - w1 * w1);
    const double a = q[0].imag() / w1;
    if (!in_d1) {
        p.f3 = a;
        return p;
    }
    const double b = q[1].imag() / w2;
    const double c = q[2].imag() / w3;
    p.zeta = solve_zeta((b - a) / (c - a), w1, w2, w3);
    const double p1 = std::pow(w1, p.zeta);
    const double p2 = std::pow(w2, p.zeta);
    p.f3 = (p1 * b - p2 * a) / (p1 - p2);
    p.alpha_ratio = 0.5 * (b - a) / (p1 - p2);
    return p;
}

Coefficients disentangle_absorption(const ComplexField& q1, const ComplexField& q2,
                                    const ComplexField& q3, const FrequencySet& freqs,
                                    double eps_d0) {
    if (freqs.size() != 3) {
        throw std::invalid_argument("disentangle_absorption needs exactly three frequencies");
    }
    require_grids(q1, q2);
    require_grids(q1, q3);
    Coefficients c = empty_coefficients(q1.grid_ptr());
    c.mask_d1 = partition_domain(q1, q2, freqs[0], freqs[1], eps_d0);
    c.consistency_residual = consistency(q1, q2, freqs[0], freqs[1]);
    std::vector<std::size_t> failed;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        const std::array<std::complex<double>, 3> q{q1[i], q2[i], q3[i]};
        try {
            const AbsorptionPoint p = absorption_at_point(q, freqs, c.mask_d1[i]);
            c.f1[i] = p.f1;
            c.f2[i] = p.f2;
            c.f3[i] = p.f3;
            c.alpha_ratio[i] = p.alpha_ratio;
            c.zeta[i] = p.zeta;
        } catch (const ZetaRangeError&) {
            failed.push_back(i);
        }
    }
    if (!failed.empty()) throw NodeZetaError(describe_nodes(q1.grid(), failed), std::move(failed));
    return c;
}

namespace {

struct ImagFit {
    double f3 = 0.0;
    double a = 0.0;
    double cost = 0.0;
    bool clamped = false;
};

// min over (f3, a >= 0) of sum_k s_k^2 (y_k - w_k f3 + 2 w_k^(1+zeta) a)^2; y arrives
// already scaled by s.
ImagFit fit_imaginary(std::span<const double> y, std::span<const double> w,
                      std::span<const double> s, double zeta) {
    const std::size_t n = y.size();
    double uu = 0.0, uy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double u = s[k] * w[k];
        uu += u * u;
        uy += u * y[k];
    }
    std::array<double, 16> v{};
    std::vector<double> vbuf;
    double* vp = v.data();
    if (n > v.size()) {
        vbuf.resize(n);
        vp = vbuf.data();
    }
    double vu = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        vp[k] = -2.0 * s[k] * std::pow(w[k], 1.0 + zeta);
        vu += vp[k] * s[k] * w[k];
    }
    // Component of v orthogonal to u.
    double perp2 = 0.0, perp_y = 0.0, v2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = vp[k] - vu / uu * s[k] * w[k];
        perp2 += p * p;
        perp_y += p * y[k];
        v2 += vp[k] * vp[k];
    }
    ImagFit fit;
    if (perp2 > 1e-24 * v2) fit.a = perp_y / perp2;
    if (fit.a < 0.0) {
        fit.a = 0.0;
        fit.clamped = true;
    }
    fit.f3 = (uy - fit.a * vu) / uu;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] - s[k] * w[k] * fit.f3 - vp[k] * fit.a;
        fit.cost += r * r;
    }
    return fit;
}

}  // namespace

AbsorptionPoint least_squares_at_point(std::span<const std::complex<double>> q,
                                       const FrequencySet& freqs, LeastSquaresMode mode,
                                       bool in_d1, bool* clamped,
                                       std::span<const double> weights) {
    const std::size_t m = freqs.size();
    if (q.size() != m) throw std::invalid_argument("least squares: one sample per frequency");
    if (!weights.empty() && weights.size() != m) {
        throw std::invalid_argument("least squares: one weight per frequency");
    }
    std::array<double, 16> sbuf{};
    std::vector<double> svec;
    double* sp = sbuf.data();
    if (m > sbuf.size()) {
        svec.resize(m);
        sp = svec.data();
    }
    for (std::size_t k = 0; k < m; ++k) {
        sp[k] = weights.empty() ? 1.0 : weights[k];
        if (!(sp[k] > 0.0) || !std::isfinite(sp[k])) {
            throw std::invalid_argument("least squares: weights must be positive and finite");
        }
    }
    const std::span<const double> sw8(sp, m);
    const std::size_t needed = mode == LeastSquaresMode::absorption ? 3 : 2;
    if (m < needed) {
        throw std::invalid_argument("least squares: rank-deficient design (" + std::to_string(m) +
                                    " distinct frequencies, need " + std::to_string(needed) + ")");
    }
    // Re q = f1 - w^2 f2 via the weighted 2x2 normal equations.
    double s1 = 0.0, sw = 0.0, sww = 0.0, sy = 0.0, swy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = -freqs[k] * freqs[k];
        const double y = q[k].real();
        const double s2 = sw8[k] * sw8[k];
        s1 += s2;
        sw += s2 * x;
        sww += s2 * x * x;
        sy += s2 * y;
        swy += s2 * x * y;
    }
    const double det = s1 * sww - sw * sw;
    AbsorptionPoint p;
    p.in_d1 = in_d1;
    p.f1 = (sww * sy - sw * swy) / det;
    p.f2 = (s1 * swy - sw * sy) / det;

    std::array<double, 16> ybuf{};
    std::vector<double> yvec;
    double* yp = ybuf.data();
    if (m > ybuf.size()) {
        yvec.resize(m);
        yp = yvec.data();
    }
    for (std::size_t k = 0; k < m; ++k) yp[k] = sw8[k] * q[k].imag();
    const std::span<const double> y(yp, m);
    const std::span<const double> w = freqs.values();

    if (mode == LeastSquaresMode::no_absorption || !in_d1) {
        double uu = 0.0, uy = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double u = sw8[k] * w[k];
            uu += u * u;
            uy += u * y[k];
        }
        p.f3 = uy / uu;
        return p;
    }

    // Coarse logarithmic scan, then golden-section refinement around the best sample.
    constexpr double lo_bound = 1e-3;
    constexpr double hi_bound = 20.0;
    constexpr int scan = 64;
    const double log_lo = std::log(lo_bound);
    const double step = (std::log(hi_bound) - log_lo) / (scan - 1);
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int s = 0; s < scan; ++s) {
        const double cost = fit_imaginary(y, w, sw8, std::exp(log_lo + s * step)).cost;
        if (cost < best_cost) {
            best_cost = cost;
            best = s;
        }
    }
    double a = std::exp(log_lo + std::max(0, best - 1) * step);
    double b = std::exp(log_lo + std::min(scan - 1, best + 1) * step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fit_imaginary(y, w, sw8, c).cost;
    double fd = fit_imaginary(y, w, sw8, d).cost;
    while (b - a > 1e-12 * (1.0 + b)) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fit_imaginary(y, w, sw8, c).cost;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fit_imaginary(y, w, sw8, d).cost;
        }
    }
    p.zeta = 0.5 * (a + b);
    const ImagFit fit = fit_imaginary(y, w, sw8, p.zeta);
    p.f3 = fit.f3;
    p.alpha_ratio = fit.a;
    if (clamped) *clamped = fit.clamped;
    return p;
}

Coefficients disentangle_least_squares(std::span<const ComplexField> q, const FrequencySet& freqs,
                                       LeastSquaresMode mode, double eps_d0) {
    if (q.size() != freqs.size()) {
        throw std::invalid_argument("least squares: one field per frequency required");
    }
    const std::size_t needed = mode == LeastSquaresMode::absorption ? 3 : 2;
    if (q.size() < needed) {
        throw std::invalid_argument("least squares: rank-deficient design (" +
                                    std::to_string(q.size()) + " frequencies, need " +
                                    std::to_string(needed) + ")");
    }
    for (const auto& f : q) require_grids(q[0], f);
    Coefficients c = empty_coefficients(q[0].grid_ptr());
    c.consistency_residual = consistency(q[0], q[1], freqs[0], freqs[1]);
    if (mode == LeastSquaresMode::absorption) {
        c.mask_d1 = partition_domain(q[0], q[1], freqs[0], freqs[1], eps_d0);
    }
    // Each frequency is weighted by the inverse RMS of its field, the scale of
    // the q perturbations in the synthesizer's noise model.
    std::vector<double> weights(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        double sum2 = 0.0;
        for (const auto& z : q[k].values()) sum2 += std::norm(z);
        const double rms = std::sqrt(sum2 / static_cast<double>(q[k].size()));
        weights[k] = rms > 0.0 ? 1.0 / rms : 1.0;
    }
    std::vector<std::complex<double>> sample(q.size());
    for (std::size_t i = 0; i < q[0].size(); ++i) {
        for (std::size_t k = 0; k < q.size(); ++k) sample[k] = q[k][i];
        bool clamped = false;
        const AbsorptionPoint p =
            least_squares_at_point(sample, freqs, mode, c.mask_d1[i], &clamped, weights);
        c.f1[i] = p.f1;
        c.f2[i] = p.f2;
        c.f3[i] = p.f3;
        c.alpha_ratio[i] = p.alpha_ratio;
        c.zeta[i] = p.zeta;
        if (clamped) ++c.clamped_nodes;
    }
    return c;
}

}  // namespace fluidrecon
