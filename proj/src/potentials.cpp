#include "fluidrecon/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ring_fft.hpp"

namespace fluidrecon {

namespace {

constexpr double kInv4Pi = 0.25 / std::numbers::pi;
constexpr double kInv2Pi = 0.5 / std::numbers::pi;

// Kernels in terms of radii and angle difference. For G the closed form
// reduces to (1/4pi) ln( |x - y|^2 / (1 + |x|^2|y|^2 - 2 x.y) ); the
// 1 - cos term is written as 2 sin^2 for accuracy at small angles.
double green_polar(double rx, double ry, double half_angle_sin) {
    const double s = 4.0 * rx * ry * half_angle_sin * half_angle_sin;
    const double num = (rx - ry) * (rx - ry) + s;
    const double den = (1.0 - rx * ry) * (1.0 - rx * ry) + s;
    return kInv4Pi * std::log(num / den);
}

double log_polar(double rx, double ry, double half_angle_sin) {
    const double s = 4.0 * rx * ry * half_angle_sin * half_angle_sin;
    return kInv4Pi * std::log((rx - ry) * (rx - ry) + s);
}

// \int over a disk of area w centered at x of (1/2pi) ln|y - x| dy.
double log_self_cell(double w) {
    const double eps = std::sqrt(w / std::numbers::pi);
    return 0.5 * eps * eps * (std::log(eps) - 0.5);
}

}  // namespace

double disk_green(Point x, Point y) {
    const double ry2 = y.norm2();
    if (ry2 >= 1.0) {
        throw std::domain_error("disk_green: source point must lie in the open unit disk");
    }
    const double dist2 = (y - x).norm2();
    if (dist2 == 0.0) {
        throw std::domain_error("disk_green: singular at x == y");
    }
    const double rx2 = x.norm2();
    if (rx2 == 0.0) {
        return kInv4Pi * std::log(ry2);
    }
    const double dot = x.x1 * y.x1 + x.x2 * y.x2;
    const double den = 1.0 + rx2 * ry2 - 2.0 * dot;
    if (rx2 == 1.0) return 0.0;
    return kInv4Pi * std::log(dist2 / den);
}

GreenMatrix::GreenMatrix(GridPtr grid, KernelKind kind, std::size_t node_cap)
    : grid_(std::move(grid)), kind_(kind) {
    if (grid_->size() > node_cap) {
        throw std::length_error("GreenMatrix: " + std::to_string(grid_->size()) +
                                " nodes exceeds the configured cap of " +
                                std::to_string(node_cap));
    }
    const int nr = grid_->n_r();
    const int nt = grid_->n_theta();
    fft_ = std::make_shared<detail::RingFFT>(nt);

    std::vector<double> half_sin(nt);
    for (int d = 0; d < nt; ++d) half_sin[d] = std::sin(0.5 * grid_->theta(d));

    kernel_.resize(static_cast<std::size_t>(nr) * nr * nt);
    for (int ir = 0; ir < nr; ++ir) {
        const double rx = grid_->radius(ir);
        for (int jr = 0; jr < nr; ++jr) {
            const double ry = grid_->radius(jr);
            const double w = grid_->ring_weight(jr);
            double* row = &kernel_[(static_cast<std::size_t>(ir) * nr + jr) * nt];
            for (int d = 0; d < nt; ++d) {
                if (ir == jr && d == 0) {
                    double v = log_self_cell(w);
                    if (kind_ == KernelKind::disk_dirichlet) {
                        v -= w * kInv2Pi * std::log(1.0 - rx * rx);
                    }
                    row[d] = v;
                    continue;
                }
                const double k = kind_ == KernelKind::disk_dirichlet
                                     ? green_polar(rx, ry, half_sin[d])
                                     : log_polar(rx, ry, half_sin[d]);
                row[d] = k * w;
            }
            // Even in d up to rounding; enforce it so the spectrum is real.
            for (int d = 1; d < nt / 2; ++d) {
                const double avg = 0.5 * (row[d] + row[nt - d]);
                row[d] = avg;
                row[nt - d] = avg;
            }
        }
    }

    const int nm = fft_->modes();
    spectrum_.assign(nm, Eigen::MatrixXd(nr, nr));
    std::vector<std::complex<double>> spec(nm);
    for (int ir = 0; ir < nr; ++ir) {
        for (int jr = 0; jr < nr; ++jr) {
            const double* row = &kernel_[(static_cast<std::size_t>(ir) * nr + jr) * nt];
            fft_->forward(std::span<const double>(row, nt), spec);
            for (int m = 0; m < nm; ++m) spectrum_[m](ir, jr) = spec[m].real();
        }
    }
}

double GreenMatrix::entry(std::size_t i, std::size_t j) const {
    const int nt = grid_->n_theta();
    const int ir = grid_->ring_of(i);
    const int jr = grid_->ring_of(j);
    const int d = (grid_->angle_of(j) - grid_->angle_of(i) + nt) % nt;
    return kernel_row(ir, jr, d);
}

void GreenMatrix::apply(std::span<const double> x, std::span<double> y) const {
    const int nr = grid_->n_r();
    const int nt = grid_->n_theta();
    const int nm = fft_->modes();
    // Column m holds mode m of every ring; real and imaginary parts side by side.
    Eigen::MatrixXd re(nr, nm), im(nr, nm);
    std::vector<std::complex<double>> spec(nm);
    for (int ir = 0; ir < nr; ++ir) {
        fft_->forward(x.subspan(static_cast<std::size_t>(ir) * nt, nt), spec);
        for (int m = 0; m < nm; ++m) {
            re(ir, m) = spec[m].real();
            im(ir, m) = spec[m].imag();
        }
    }
    Eigen::MatrixXd out_re(nr, nm), out_im(nr, nm);
    Eigen::MatrixXd pair(nr, 2), prod(nr, 2);
    for (int m = 0; m < nm; ++m) {
        pair.col(0) = re.col(m);
        pair.col(1) = im.col(m);
        prod.noalias() = spectrum_[m] * pair;
        out_re.col(m) = prod.col(0);
        out_im.col(m) = prod.col(1);
    }
    for (int ir = 0; ir < nr; ++ir) {
        for (int m = 0; m < nm; ++m) spec[m] = {out_re(ir, m), out_im(ir, m)};
        fft_->inverse(spec, y.subspan(static_cast<std::size_t>(ir) * nt, nt));
    }
}

ScalarField GreenMatrix::apply(const ScalarField& f) const {
    require_same_grid(f.grid(), *grid_, "GreenMatrix::apply");
    ScalarField out(grid_);
    apply(f.values(), out.values());
    return out;
}

ComplexField GreenMatrix::apply(const ComplexField& f) const {
    require_same_grid(f.grid(), *grid_, "GreenMatrix::apply");
    const std::size_t n = size();
    std::vector<double> re(n), im(n), out_re(n), out_im(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = f[i].real();
        im[i] = f[i].imag();
    }
    apply(re, out_re);
    apply(im, out_im);
    ComplexField out(grid_);
    for (std::size_t i = 0; i < n; ++i) out[i] = {out_re[i], out_im[i]};
    return out;
}

double GreenMatrix::max_abs_row_sum() const {
    const int nr = grid_->n_r();
    const int nt = grid_->n_theta();
    double best = 0.0;
    for (int ir = 0; ir < nr; ++ir) {
        double sum = 0.0;
        for (int jr = 0; jr < nr; ++jr) {
            for (int d = 0; d < nt; ++d) sum += std::abs(kernel_row(ir, jr, d));
        }
        best = std::max(best, sum);
    }
    return best;
}

std::vector<double> GreenMatrix::row_sums() const {
    const int nr = grid_->n_r();
    const int nt = grid_->n_theta();
    std::vector<double> out(grid_->size());
    for (int ir = 0; ir < nr; ++ir) {
        double sum = 0.0;
        for (int jr = 0; jr < nr; ++jr) {
            for (int d = 0; d < nt; ++d) sum += kernel_row(ir, jr, d);
        }
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(grid_->index(ir, 0)), nt, sum);
    }
    return out;
}

Eigen::MatrixXd GreenMatrix::dense(std::size_t dense_cap) const {
    const std::size_t n = size();
    if (n > dense_cap) {
        throw std::length_error("GreenMatrix::dense: " + std::to_string(n) +
                                " nodes exceeds the dense cap of " + std::to_string(dense_cap));
    }
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = entry(i, j);
    }
    return m;
}

GreenMatrix build_green_matrix(const GridPtr& grid, std::size_t node_cap) {
    return GreenMatrix(grid, KernelKind::disk_dirichlet, node_cap);
}

ScalarField poisson_extend(std::span<const double> boundary_data, const GridPtr& grid) {
    const int nt = grid->n_theta();
    if (boundary_data.size() != static_cast<std::size_t>(nt)) {
        throw std::invalid_argument("poisson_extend: expected " + std::to_string(nt) +
                                    " boundary samples, got " +
                                    std::to_string(boundary_data.size()));
    }
    for (double v : boundary_data) {
        if (!std::isfinite(v)) throw std::invalid_argument("poisson_extend: non-finite boundary data");
    }
    const detail::RingFFT fft(nt);
    const auto spec = fft.forward(boundary_data);
    ScalarField out(grid);
    std::vector<std::complex<double>> scaled(spec.size());
    for (int ir = 0; ir < grid->n_r(); ++ir) {
        const double r = grid->radius(ir);
        double rk = 1.0;
        for (std::size_t k = 0; k < spec.size(); ++k) {
            scaled[k] = spec[k] * rk;
            rk *= r;
        }
        fft.inverse(scaled, out.values().subspan(grid->index(ir, 0), nt));
    }
    out.set_boundary(std::vector<double>(boundary_data.begin(), boundary_data.end()));
    return out;
}

ScalarField volume_potential(const ScalarField& f, const GreenMatrix& green) {
    if (green.kind() != KernelKind::disk_dirichlet) {
        throw std::invalid_argument("volume_potential requires the disk Dirichlet kernel");
    }
    ScalarField u = green.apply(f);
    u.set_boundary(std::vector<double>(f.grid().n_theta(), 0.0));
    return u;
}

ScalarField volume_potential(const ScalarField& f, const GridPtr& grid) {
    return volume_potential(f, build_green_matrix(grid));
}

std::vector<double> boundary_normal_derivative(const ScalarField& f, KernelKind kind) {
    const DiskGrid& g = f.grid();
    const int nt = g.n_theta();
    const detail::RingFFT fft(nt);
    std::vector<std::complex<double>> acc(fft.modes(), 0.0);
    std::vector<std::complex<double>> ring(fft.modes());
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    for (int ir = 0; ir < g.n_r(); ++ir) {
        const double r = g.radius(ir);
        fft.forward(f.values().subspan(g.index(ir, 0), nt), ring);
        // d/dr_x of (1/2pi) ln|x - y| at |x| = 1 is (1/4pi)(1 + sum_k r^|k| e^{ik(.)}).
        const double scale = g.ring_weight(ir) * inv2pi;
        double rk = 1.0;
        for (int k = 0; k < fft.modes(); ++k) {
            double m = rk;
            if (kind == KernelKind::free_space_log) m = k == 0 ? 1.0 : 0.5 * rk;
            acc[k] += scale * m * ring[k];
            rk *= r;
        }
    }
    // acc holds unnormalized ring transforms; inverse() divides by nt.
    for (auto& a : acc) a *= static_cast<double>(nt);
    return fft.inverse(acc);
}

ScalarField single_layer_potential(std::span<const double> density, const GridPtr& grid) {
    const int nt = grid->n_theta();
    if (density.size() != static_cast<std::size_t>(nt)) {
        throw std::invalid_argument("single_layer_potential: density length mismatch");
    }
    const detail::RingFFT fft(nt);
    const auto spec = fft.forward(density);
    std::vector<std::complex<double>> scaled(spec.size());
    auto evaluate = [&](double r, std::span<double> out) {
        scaled[0] = 0.0;
        double rk = r;
        for (std::size_t k = 1; k < spec.size(); ++k) {
            scaled[k] = spec[k] * (-rk / (2.0 * static_cast<double>(k)));
            rk *= r;
        }
        fft.inverse(scaled, out);
    };
    ScalarField out(grid);
    for (int ir = 0; ir < grid->n_r(); ++ir) {
        evaluate(grid->radius(ir), out.values().subspan(grid->index(ir, 0), nt));
    }
    std::vector<double> bnd(nt);
    evaluate(1.0, bnd);
    out.set_boundary(std::move(bnd));
    return out;
}

}  // namespace fluidrecon
