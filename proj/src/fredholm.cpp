#include "fluidrecon/fredholm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace fluidrecon {

namespace {

using Vec = Eigen::VectorXd;

void validate(const GreenMatrix& green, const ScalarField& m, const DiskGrid& rhs_grid,
              const SolveOptions& opts) {
    require_same_grid(green.grid(), m.grid(), "Fredholm multiplier");
    require_same_grid(green.grid(), rhs_grid, "Fredholm right-hand side");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("SolveOptions: tol must be positive");
    if (!m.all_finite()) throw std::invalid_argument("Fredholm multiplier is not finite");
}

// y = x - G (m x)
void apply_operator(const GreenMatrix& green, std::span<const double> m,
                    std::span<const double> x, std::span<double> y, std::vector<double>& work) {
    work.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) work[i] = m[i] * x[i];
    green.apply(work, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - y[i];
}

double residual_inf(const GreenMatrix& green, std::span<const double> m,
                    std::span<const double> rhs, std::span<const double> u) {
    std::vector<double> au(u.size()), work;
    apply_operator(green, m, u, au, work);
    double r = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) r = std::max(r, std::abs(au[i] - rhs[i]));
    return r;
}

std::string condition_message(double cond, double limit) {
    std::ostringstream os;
    os << "Fredholm system is numerically singular (condition estimate " << cond
       << " exceeds " << limit
       << "): 0 is close to a discrete Dirichlet eigenvalue of -Laplace + m";
    return os.str();
}

class DenseNystrom {
public:
    DenseNystrom(const GreenMatrix& green, std::span<const double> m, const SolveOptions& opts) {
        Eigen::MatrixXd a = -green.dense(std::max(opts.dense_threshold, green.size()));
        for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) *= m[j];
        a.diagonal().array() += 1.0;
        lu_.compute(a);
        const double rcond = lu_.rcond();
        condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
        if (!(condition_ <= opts.max_condition)) {
            throw FredholmError(FredholmError::Kind::ill_conditioned,
                                condition_message(condition_, opts.max_condition));
        }
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        const Vec b = Eigen::Map<const Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
        const Vec x = lu_.solve(b);
        return {x.data(), x.data() + x.size()};
    }

    double condition() const { return condition_; }

private:
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double condition_ = 0.0;
};

// Restarted GMRES with modified Gram-Schmidt (one reorthogonalization pass)
// and Givens rotations. Each restart recomputes the true residual, so the
// final infinity-norm check is exact up to rounding of the operator.
std::vector<double> gmres(const GreenMatrix& green, std::span<const double> m,
                          std::span<const double> rhs, const SolveOptions& opts,
                          SolveInfo& info) {
    const std::size_t n = rhs.size();
    const int restart = std::max(10, std::min(opts.max_iter, 120));
    const int max_cycles = 30;
    const double target = opts.tol * (1.0 + max_abs(rhs));

    std::vector<double> x(rhs.begin(), rhs.end());
    std::vector<double> ax(n), work;
    int total_iterations = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    int stalled_cycles = 0;

    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        apply_operator(green, m, x, ax, work);
        Vec r(n);
        double rinf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = rhs[i] - ax[i];
            rinf = std::max(rinf, std::abs(r[i]));
        }
        info.residual = rinf;
        if (rinf <= target) {
            info.iterations = total_iterations;
            return x;
        }
        if (rinf < 0.5 * best_residual) {
            best_residual = rinf;
            stalled_cycles = 0;
        } else if (++stalled_cycles >= 3) {
            break;
        }

        const double beta = r.norm();
        Eigen::MatrixXd basis(n, restart + 1);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(restart + 1, restart);
        Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(restart + 1, restart);
        Vec cs = Vec::Zero(restart), sn = Vec::Zero(restart), g = Vec::Zero(restart + 1);
        basis.col(0) = r / beta;
        g[0] = beta;
        int k = 0;
        std::vector<double> w(n);
        for (; k < restart; ++k) {
            apply_operator(green, m, std::span<const double>(basis.col(k).data(), n), w, work);
            Eigen::Map<Vec> wv(w.data(), static_cast<Eigen::Index>(n));
            for (int pass = 0; pass < 2; ++pass) {
                for (int j = 0; j <= k; ++j) {
                    const double h = basis.col(j).dot(wv);
                    hess(j, k) += h;
                    wv -= h * basis.col(j);
                }
            }
            hess(k + 1, k) = wv.norm();
            if (hess(k + 1, k) > 0.0) basis.col(k + 1) = wv / hess(k + 1, k);

            raw.col(k) = hess.col(k);

            for (int j = 0; j < k; ++j) {
                const double t = cs[j] * hess(j, k) + sn[j] * hess(j + 1, k);
                hess(j + 1, k) = -sn[j] * hess(j, k) + cs[j] * hess(j + 1, k);
                hess(j, k) = t;
            }
            const double denom = std::hypot(hess(k, k), hess(k + 1, k));
            cs[k] = hess(k, k) / denom;
            sn[k] = hess(k + 1, k) / denom;
            hess(k, k) = denom;
            hess(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            ++total_iterations;
            if (std::abs(g[k + 1]) <= 0.25 * target || std::abs(g[k + 1]) <= 1e-13 * beta) {
                ++k;
                break;
            }
        }
        if (cycle == 0) {
            // Condition estimate from the projected (Hessenberg) operator.
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(raw.topLeftCorner(k + 1, k));
            const auto& s = svd.singularValues();
            info.condition_estimate = s[0] / s[s.size() - 1];
        }
        if (info.condition_estimate > opts.max_condition) {
            throw FredholmError(FredholmError::Kind::ill_conditioned,
                                condition_message(info.condition_estimate, opts.max_condition));
        }
        const Vec y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        const Vec dx = basis.leftCols(k) * y;
        for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
    }
    apply_operator(green, m, x, ax, work);
    double rinf = 0.0;
    for (std::size_t i = 0; i < n; ++i) rinf = std::max(rinf, std::abs(rhs[i] - ax[i]));
    info.residual = rinf;
    info.iterations = total_iterations;
    if (rinf <= target) return x;
    std::ostringstream os;
    os << "GMRES did not reach residual " << target << " (final " << rinf << " after "
       << total_iterations << " iterations)";
    throw FredholmError(FredholmError::Kind::not_converged, os.str());
}

std::vector<double> picard(const GreenMatrix& green, std::span<const double> m,
                           std::span<const double> rhs, const SolveOptions& opts,
                           SolveInfo& info) {
    const double sup_m = max_abs(m);
    const double norm = green.max_abs_row_sum();
    if (sup_m * norm >= 1.0) {
        std::ostringstream os;
        os << "successive approximations need sup|m| * ||G|| < 1; got sup|m| = " << sup_m
           << ", ||G|| = " << norm << " (admissible sup|m| < " << 1.0 / norm << ")";
        throw FredholmError(FredholmError::Kind::not_contractive, os.str());
    }
    const std::size_t n = rhs.size();
    const double target = opts.tol * (1.0 + max_abs(rhs));
    std::vector<double> u(rhs.begin(), rhs.end()), next(n), work(n);
    double previous = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) work[i] = m[i] * u[i];
        green.apply(work, next);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] += rhs[i];
            res = std::max(res, std::abs(next[i] - u[i]));
        }
        info.iterations = it;
        info.residual = res;
        if (res <= target) return u;
        growth = res > previous ? growth + 1 : 0;
        if (growth >= 5) {
            throw FredholmError(FredholmError::Kind::diverged,
                                "successive approximations diverged (residual grew for 5 "
                                "consecutive iterations)");
        }
        previous = res;
        u.swap(next);
    }
    std::ostringstream os;
    os << "successive approximations did not converge in " << opts.max_iter
       << " iterations (residual " << info.residual << ")";
    throw FredholmError(FredholmError::Kind::not_converged, os.str());
}

bool use_dense(const GreenMatrix& green, const SolveOptions& opts) {
    switch (opts.backend) {
        case NystromBackend::dense_lu: return true;
        case NystromBackend::krylov: return false;
        case NystromBackend::automatic: return green.size() <= opts.dense_threshold;
    }
    return false;
}

bool multiplier_is_zero(std::span<const double> m) {
    return std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; });
}

}  // namespace

ScalarField solve(const FredholmProblem<double>& problem, const SolveOptions& opts,
                  SolveInfo* info) {
    validate(problem.green, problem.multiplier, problem.rhs.grid(), opts);
    SolveInfo local;
    SolveInfo& out_info = info ? *info : local;
    out_info = {};
    const auto m = problem.multiplier.values();
    const auto rhs = problem.rhs.values();
    std::vector<double> u;
    if (multiplier_is_zero(m)) {
        u.assign(rhs.begin(), rhs.end());
        out_info.condition_estimate = 1.0;
    } else if (opts.method == FredholmMethod::picard) {
        u = picard(problem.green, m, rhs, opts, out_info);
    } else if (use_dense(problem.green, opts)) {
        DenseNystrom lu(problem.green, m, opts);
        u = lu.solve(rhs);
        out_info.condition_estimate = lu.condition();
        out_info.residual = residual_inf(problem.green, m, rhs, u);
    } else {
        u = gmres(problem.green, m, rhs, opts, out_info);
    }
    return ScalarField(problem.rhs.grid_ptr(), std::move(u));
}

ComplexField solve(const FredholmProblem<std::complex<double>>& problem,
                   const SolveOptions& opts, SolveInfo* info) {
    validate(problem.green, problem.multiplier, problem.rhs.grid(), opts);
    const std::size_t n = problem.rhs.size();
    ScalarField re(problem.rhs.grid_ptr()), im(problem.rhs.grid_ptr());
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = problem.rhs[i].real();
        im[i] = problem.rhs[i].imag();
    }
    SolveInfo info_re, info_im;
    ScalarField u_re, u_im;
    const auto m = problem.multiplier.values();
    if (opts.method == FredholmMethod::nystrom && !multiplier_is_zero(m) &&
        use_dense(problem.green, opts)) {
        DenseNystrom lu(problem.green, m, opts);
        u_re = ScalarField(re.grid_ptr(), lu.solve(re.values()));
        u_im = ScalarField(im.grid_ptr(), lu.solve(im.values()));
        info_re.condition_estimate = lu.condition();
    } else {
        u_re = solve(FredholmProblem<double>{problem.green, problem.multiplier, re}, opts, &info_re);
        u_im = solve(FredholmProblem<double>{problem.green, problem.multiplier, im}, opts, &info_im);
    }
    ComplexField u(problem.rhs.grid_ptr());
    for (std::size_t i = 0; i < n; ++i) u[i] = {u_re[i], u_im[i]};
    if (info) {
        info->iterations = std::max(info_re.iterations, info_im.iterations);
        info->condition_estimate = std::max(info_re.condition_estimate, info_im.condition_estimate);
        info->residual = residual(problem, u);
    }
    return u;
}

double residual(const FredholmProblem<double>& problem, const ScalarField& u) {
    require_same_grid(problem.green.grid(), u.grid(), "Fredholm residual");
    return residual_inf(problem.green, problem.multiplier.values(), problem.rhs.values(),
                        u.values());
}

double residual(const FredholmProblem<std::complex<double>>& problem, const ComplexField& u) {
    require_same_grid(problem.green.grid(), u.grid(), "Fredholm residual");
    const std::size_t n = u.size();
    std::vector<double> re(n), im(n), rre(n), rim(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = u[i].real();
        im[i] = u[i].imag();
        rre[i] = problem.rhs[i].real();
        rim[i] = problem.rhs[i].imag();
    }
    const auto m = problem.multiplier.values();
    std::vector<double> are(n), aim(n), work;
    apply_operator(problem.green, m, re, are, work);
    apply_operator(problem.green, m, im, aim, work);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r = std::max(r, std::abs(std::complex<double>(are[i] - rre[i], aim[i] - rim[i])));
    }
    return r;
}

}  // namespace fluidrecon
