#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "fluidrecon/grid.hpp"

namespace fluidrecon {

namespace detail {
class RingFFT;
}

/// Dirichlet Green's function of the Laplacian on the unit disk,
/// G(x, y) = (1/2pi) ln(|x||y - x| / |y|x|^2 - x|), non-positive, zero for |x| = 1.
/// Throws for x == y or |y| >= 1.
double disk_green(Point x, Point y);

enum class KernelKind {
    /// Disk Dirichlet Green's function.
    disk_dirichlet,
    /// Free-space logarithmic kernel (1/2pi) ln|x - y|.
    free_space_log,
};

/**
 * Quadrature discretization of u(x) = \int_D K(x, y) f(y) dy on a DiskGrid.
 *
 * Entry (i, j) is K(x_i, y_j) * weight_j. Because the grid is uniform in
 * theta and K is rotation invariant, the matrix is block circulant: it is
 * stored as one kernel row per pair of rings and applied with ring FFTs, so
 * storage is n_r^2 * n_theta rather than n^2. The self-cell entry integrates
 * the logarithmic singularity exactly over a disk of equal area,
 * (eps^2/2)(ln eps - 1/2) with eps = sqrt(weight/pi), and adds the smooth
 * image part at the node.
 */
class GreenMatrix {
public:
    static constexpr std::size_t kDefaultNodeCap = 262144;
    static constexpr std::size_t kDefaultDenseCap = 40000;

    explicit GreenMatrix(GridPtr grid, KernelKind kind = KernelKind::disk_dirichlet,
                         std::size_t node_cap = kDefaultNodeCap);

    const DiskGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    KernelKind kind() const { return kind_; }
    std::size_t size() const { return grid_->size(); }

    double entry(std::size_t i, std::size_t j) const;

    ScalarField apply(const ScalarField& f) const;
    ComplexField apply(const ComplexField& f) const;
    /// y = G x on raw node vectors (length size()).
    void apply(std::span<const double> x, std::span<double> y) const;

    /// max_i sum_j |entry(i, j)|; the infinity norm of the discrete operator.
    double max_abs_row_sum() const;
    /// sum_j entry(i, j) for every node i.
    std::vector<double> row_sums() const;

    /// Materializes the full matrix. Throws when size() exceeds dense_cap.
    Eigen::MatrixXd dense(std::size_t dense_cap = kDefaultDenseCap) const;

private:
    double kernel_row(int ir, int jr, int d) const {
        return kernel_[(static_cast<std::size_t>(ir) * grid_->n_r() + jr) * grid_->n_theta() + d];
    }

    GridPtr grid_;
    KernelKind kind_;
    // kernel_[(ir * n_r + jr) * n_theta + d] = K(x at (r_ir, 0), y at (r_jr, d*dtheta)) * w_jr
    std::vector<double> kernel_;
    // One n_r x n_r real matrix per Fourier mode (the kernel rows are even in d).
    std::vector<Eigen::MatrixXd> spectrum_;
    std::shared_ptr<const detail::RingFFT> fft_;
};

GreenMatrix build_green_matrix(const GridPtr& grid,
                               std::size_t node_cap = GreenMatrix::kDefaultNodeCap);

/// Harmonic extension of boundary samples into the disk. The samples are
/// read as a trigonometric interpolant and each Fourier mode k is extended
/// by r^|k|, which is the Poisson-kernel integral of that interpolant.
/// The result carries the data as its boundary ring.
ScalarField poisson_extend(std::span<const double> boundary_data, const GridPtr& grid);

/// u(x) = \int_D G(x, y) f(y) dy with the disk Green's function; solves
/// Laplace(u) = f with u = 0 on the boundary (attached as the boundary ring).
ScalarField volume_potential(const ScalarField& f, const GreenMatrix& green);
ScalarField volume_potential(const ScalarField& f, const GridPtr& grid);

/// Radial derivative, taken from inside, of u = \int_D K(., y) f(y) dy at the
/// boundary nodes. The kernel derivative is smooth for interior y; it is
/// integrated exactly in angle against the trigonometric interpolant of each
/// ring of f and by the midpoint rule in radius. For the disk kernel the
/// derivative is the Poisson kernel, so the boundary mean times 2pi equals
/// integrate(f).
std::vector<double> boundary_normal_derivative(const ScalarField& f, KernelKind kind);

/// Single-layer potential (1/2pi) \int_{S^1} ln|x - y| sigma(y) ds_y of
/// boundary samples sigma, evaluated on the interior nodes and on the
/// boundary ring. Uses the Fourier expansion of the logarithmic kernel on
/// the unit circle.
ScalarField single_layer_potential(std::span<const double> density, const GridPtr& grid);

}  // namespace fluidrecon
