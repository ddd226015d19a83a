#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include "fluidrecon/grid.hpp"
#include "fluidrecon/potentials.hpp"

namespace fluidrecon {

enum class FredholmMethod { nystrom, picard };

/// How the Nystrom system (I - G diag(m)) u = rhs is solved.
enum class NystromBackend {
    /// dense_lu up to dense_threshold nodes, krylov above.
    automatic,
    dense_lu,
    /// GMRES on the FFT-applied operator; the matrix is never formed.
    krylov,
};

struct SolveOptions {
    FredholmMethod method = FredholmMethod::nystrom;
    int max_iter = 200;
    double tol = 1e-12;
    NystromBackend backend = NystromBackend::automatic;
    std::size_t dense_threshold = 2048;
    double max_condition = 1e12;
};

/// u = rhs + \int_D G(x, y) m(y) u(y) dy.
template <typename T>
struct FredholmProblem {
    const GreenMatrix& green;
    ScalarField multiplier;
    BasicScalarField<T> rhs;
};

class FredholmError : public std::runtime_error {
public:
    enum class Kind { ill_conditioned, diverged, not_converged, not_contractive };
    FredholmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct SolveInfo {
    int iterations = 0;
    double residual = 0.0;
    /// Estimate of cond(I - G diag(m)); zero when not computed (picard).
    double condition_estimate = 0.0;
};

ScalarField solve(const FredholmProblem<double>& problem, const SolveOptions& opts = {},
                  SolveInfo* info = nullptr);
ComplexField solve(const FredholmProblem<std::complex<double>>& problem,
                   const SolveOptions& opts = {}, SolveInfo* info = nullptr);

/// ||u - rhs - G (m u)||_inf
double residual(const FredholmProblem<double>& problem, const ScalarField& u);
double residual(const FredholmProblem<std::complex<double>>& problem, const ComplexField& u);

}  // namespace fluidrecon
