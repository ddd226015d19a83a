#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace fluidrecon {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;

    double norm() const { return std::hypot(x1, x2); }
    double norm2() const { return x1 * x1 + x2 * x2; }
};

inline Point operator-(Point a, Point b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Point operator+(Point a, Point b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Point operator*(double s, Point a) { return {s * a.x1, s * a.x2}; }

/**
 * Midpoint polar discretization of the closed unit disk.
 *
 * Interior nodes sit at cell-center radii r_i = (i + 1/2) / n_r and angles
 * theta_j = j * 2pi / n_theta, ordered radial-major (index = i * n_theta + j).
 * The boundary ring carries n_theta nodes on |x| = 1 at the same angles.
 * n_theta must be even so that theta + pi is always a node.
 */
class DiskGrid {
public:
    static constexpr int kMinRadial = 4;
    static constexpr int kMinAngular = 8;

    DiskGrid(int n_r, int n_theta);

    int n_r() const { return n_r_; }
    int n_theta() const { return n_theta_; }
    std::size_t size() const { return static_cast<std::size_t>(n_r_) * n_theta_; }

    double dr() const { return dr_; }
    double dtheta() const { return dtheta_; }

    std::span<const double> r_nodes() const { return r_; }
    std::span<const double> theta_nodes() const { return theta_; }
    std::span<const double> cell_weights() const { return weights_; }

    double radius(int ir) const { return r_[ir]; }
    double theta(int it) const { return theta_[it]; }
    double cos_theta(int it) const { return cos_[it]; }
    double sin_theta(int it) const { return sin_[it]; }
    double ring_weight(int ir) const { return ring_weight_[ir]; }

    std::size_t index(int ir, int it) const {
        return static_cast<std::size_t>(ir) * n_theta_ + it;
    }
    int ring_of(std::size_t i) const { return static_cast<int>(i / n_theta_); }
    int angle_of(std::size_t i) const { return static_cast<int>(i % n_theta_); }
    int opposite_angle(int it) const { return (it + n_theta_ / 2) % n_theta_; }

    Point node(std::size_t i) const;
    Point boundary_node(int it) const { return {cos_[it], sin_[it]}; }
    double boundary_weight() const { return dtheta_; }

    bool operator==(const DiskGrid& other) const {
        return n_r_ == other.n_r_ && n_theta_ == other.n_theta_;
    }

private:
    int n_r_;
    int n_theta_;
    double dr_;
    double dtheta_;
    std::vector<double> r_;
    std::vector<double> theta_;
    std::vector<double> cos_;
    std::vector<double> sin_;
    std::vector<double> ring_weight_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const DiskGrid>;

GridPtr build_disk_grid(int n_r, int n_theta);

void require_same_grid(const DiskGrid& a, const DiskGrid& b, const char* what);

/// Samples of a scalar quantity on the interior nodes, with optional values
/// on the boundary ring.
template <typename T>
class BasicScalarField {
public:
    using value_type = T;

    BasicScalarField() = default;

    explicit BasicScalarField(GridPtr grid, T fill = T{})
        : grid_(std::move(grid)), values_(grid_->size(), fill) {}

    BasicScalarField(GridPtr grid, std::vector<T> values,
                     std::optional<std::vector<T>> boundary = std::nullopt)
        : grid_(std::move(grid)), values_(std::move(values)), boundary_(std::move(boundary)) {
        if (values_.size() != grid_->size()) {
            throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                        " does not match grid size " +
                                        std::to_string(grid_->size()));
        }
        if (boundary_ && boundary_->size() != static_cast<std::size_t>(grid_->n_theta())) {
            throw std::invalid_argument("boundary ring length does not match n_theta");
        }
    }

    const DiskGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const T> values() const { return values_; }
    std::span<T> values() { return values_; }
    T operator[](std::size_t i) const { return values_[i]; }
    T& operator[](std::size_t i) { return values_[i]; }
    T at(int ir, int it) const { return values_[grid_->index(ir, it)]; }

    bool has_boundary() const { return boundary_.has_value(); }
    std::span<const T> boundary() const { return *boundary_; }
    void set_boundary(std::vector<T> b) {
        if (b.size() != static_cast<std::size_t>(grid_->n_theta())) {
            throw std::invalid_argument("boundary ring length does not match n_theta");
        }
        boundary_ = std::move(b);
    }
    void clear_boundary() { boundary_.reset(); }

    bool all_finite() const {
        auto finite = [](const T& v) {
            if constexpr (std::is_same_v<T, double>) {
                return std::isfinite(v);
            } else {
                return std::isfinite(v.real()) && std::isfinite(v.imag());
            }
        };
        for (const T& v : values_) {
            if (!finite(v)) return false;
        }
        if (boundary_) {
            for (const T& v : *boundary_) {
                if (!finite(v)) return false;
            }
        }
        return true;
    }

private:
    GridPtr grid_;
    std::vector<T> values_;
    std::optional<std::vector<T>> boundary_;
};

using ScalarField = BasicScalarField<double>;
using ComplexField = BasicScalarField<std::complex<double>>;

/// Two real Cartesian components on a shared grid.
struct VectorField {
    ScalarField x1;
    ScalarField x2;

    VectorField() = default;
    explicit VectorField(GridPtr grid) : x1(grid), x2(grid) {}
    VectorField(ScalarField a, ScalarField b) : x1(std::move(a)), x2(std::move(b)) {
        require_same_grid(x1.grid(), x2.grid(), "vector components");
    }

    const DiskGrid& grid() const { return x1.grid(); }
    const GridPtr& grid_ptr() const { return x1.grid_ptr(); }
    bool has_boundary() const { return x1.has_boundary() && x2.has_boundary(); }
};

/// Samples a closed-form function at every interior node.
template <typename Fn>
ScalarField sample(const GridPtr& grid, Fn&& fn) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) out[i] = fn(grid->node(i));
    return out;
}

/// Same as sample() but also fills the boundary ring.
template <typename Fn>
ScalarField sample_with_boundary(const GridPtr& grid, Fn&& fn) {
    ScalarField out = sample(grid, fn);
    std::vector<double> b(grid->n_theta());
    for (int it = 0; it < grid->n_theta(); ++it) b[it] = fn(grid->boundary_node(it));
    out.set_boundary(std::move(b));
    return out;
}

double integrate(const ScalarField& f);
std::complex<double> integrate(const ComplexField& f);

// Discrete differential operators. Five-point centered differences in
// (r, theta); radial stencils near the origin continue along the opposite
// ray (theta + pi), the two outermost rings use shifted stencils that take
// the boundary ring when the field carries one. Cartesian partials are
// assembled from the polar ones.

ScalarField partial_x1(const ScalarField& f);
ScalarField partial_x2(const ScalarField& f);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& w);
/// curl W = d1 W2 - d2 W1.
ScalarField curl(const VectorField& w);
/// curl f = (d2 f, -d1 f).
VectorField curl(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);

/// Cartesian partials of f on the boundary ring: values and radial
/// derivative at r = 1 come from the boundary ring when present, otherwise
/// from quadratic extrapolation of the three outermost rings.
struct BoundaryPartials {
    std::vector<double> d1;
    std::vector<double> d2;
    std::vector<double> values;
};
BoundaryPartials boundary_partials(const ScalarField& f);

// Pointwise helpers used throughout.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);

double max_abs(std::span<const double> v);
double max_abs(const ScalarField& f);

}  // namespace fluidrecon
