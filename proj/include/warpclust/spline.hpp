#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace warpclust {

/// Ordered sample points on [0,1], shared by every curve of a run.
/// Also carries the composite trapezoid weights used for all integrals.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    static TimeGrid uniform(std::size_t n);

    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return points_[i]; }

    /// Trapezoid approximation of the integral of the sampled function over [0,1].
    [[nodiscard]] double integrate(std::span<const double> values) const;

private:
    std::vector<double> points_;
    std::vector<double> weights_;
};

/// Clamped B-spline on [0,1].
struct SplineRep {
    int degree = 3;
    std::vector<double> interior_knots;
    std::vector<double> coefficients;

    [[nodiscard]] std::size_t num_basis() const noexcept {
        return interior_knots.size() + static_cast<std::size_t>(degree) + 1;
    }
    /// Throws on malformed knots or a coefficient count mismatch.
    void validate() const;
};

/// `count` equally spaced interior knots: i/(count+1), i = 1..count.
std::vector<double> uniform_knots(std::size_t count);

/// Full clamped knot vector with degree+1 copies of 0 and 1.
std::vector<double> clamped_knot_vector(int degree, std::span<const double> interior_knots);

/// Dense design matrix: rows are sample points, columns basis functions.
Eigen::MatrixXd basis_matrix(std::span<const double> points, int degree,
                             std::span<const double> interior_knots);

/// Weighted least squares with a column-pivoting QR; throws singular_fit when the
/// design is rank deficient.
SplineRep fit_least_squares(std::span<const double> t, std::span<const double> y,
                            std::span<const double> weights, int degree,
                            std::span<const double> interior_knots);

/// Unweighted overload.
SplineRep fit_least_squares(std::span<const double> t, std::span<const double> y, int degree,
                            std::span<const double> interior_knots);

/// Precomputed least-squares map for repeated fits at fixed abscissae.
///
/// Optionally pins the first and last coefficient (value of the spline at 0 and
/// at 1) and solves only for the free ones.
class LeastSquaresProjector {
public:
    LeastSquaresProjector(std::span<const double> t, int degree, std::vector<double> interior_knots);

    static LeastSquaresProjector with_pinned_ends(std::span<const double> t, int degree,
                                                  std::vector<double> interior_knots,
                                                  double left, double right);

    [[nodiscard]] SplineRep fit(std::span<const double> y) const;
    void fit_into(std::span<const double> y, SplineRep& out) const;
    [[nodiscard]] std::size_t num_points() const noexcept { return num_points_; }

private:
    LeastSquaresProjector() = default;

    int degree_ = 3;
    std::vector<double> knots_;
    std::size_t num_points_ = 0;
    Eigen::MatrixXd projection_;   // free coefficients x points
    Eigen::VectorXd offset_;       // contribution of pinned coefficients to each point
    bool pinned_ = false;
    double left_ = 0.0;
    double right_ = 0.0;
};

/// de Boor evaluation at a single point; x is clamped to [0,1].
double evaluate(const SplineRep& spline, double x);

std::vector<double> evaluate(const SplineRep& spline, std::span<const double> xs);

/// Evaluation at nondecreasing points, walking the knot spans once.
void evaluate_sorted(const SplineRep& spline, std::span<const double> xs, std::span<double> out);

/// Derivative as a spline of degree - 1 on the same interior knots.
SplineRep derivative(const SplineRep& spline);

}  // namespace warpclust
