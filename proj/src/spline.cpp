#include "warpclust/spline.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace warpclust {

namespace {

constexpr int kMaxDegree = 7;
constexpr double kMaxCondition = 1e12;

void check_degree(int degree) {
    if (degree < 0 || degree > kMaxDegree) {
        throw Error(ErrorCode::unsupported_degree,
                    "spline degree " + std::to_string(degree) + " outside [0, 7]");
    }
}

void check_interior_knots(std::span<const double> knots) {
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double k = knots[i];
        if (!(k > 0.0 && k < 1.0)) {
            throw Error(ErrorCode::invalid_knots, "interior knot outside (0,1)");
        }
        if (i > 0 && !(k > knots[i - 1])) {
            throw Error(ErrorCode::invalid_knots, "interior knots must be strictly increasing");
        }
    }
}

/// Index of the knot span containing x, in [degree, n_basis - 1].
int find_span(const std::vector<double>& knots, int degree, int n_basis, double x) {
    if (x >= knots[n_basis]) return n_basis - 1;
    if (x <= knots[degree]) return degree;
    // first knot strictly greater than x, minus one
    auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n_basis + 1, x);
    return static_cast<int>(it - knots.begin()) - 1;
}

/// Nonzero basis values N[0..degree] on `span` (Cox-de Boor triangle).
void basis_funs(const std::vector<double>& knots, int degree, int span, double x,
                std::array<double, kMaxDegree + 1>& out) {
    std::array<double, kMaxDegree + 1> left{};
    std::array<double, kMaxDegree + 1> right{};
    out[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 4) {
        throw Error(ErrorCode::invalid_input, "time grid needs at least 4 points");
    }
    if (std::abs(points_.front()) > 1e-12 || std::abs(points_.back() - 1.0) > 1e-12) {
        throw Error(ErrorCode::invalid_input, "time grid must start at 0 and end at 1");
    }
    points_.front() = 0.0;
    points_.back() = 1.0;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1])) {
            throw Error(ErrorCode::invalid_input, "time grid must be strictly increasing");
        }
    }
    const std::size_t n = points_.size();
    weights_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = 0.5 * (points_[i + 1] - points_[i]);
        weights_[i] += h;
        weights_[i + 1] += h;
    }
}

TimeGrid TimeGrid::uniform(std::size_t n) {
    if (n < 4) throw Error(ErrorCode::invalid_input, "time grid needs at least 4 points");
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return TimeGrid(std::move(pts));
}

double TimeGrid::integrate(std::span<const double> values) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * values[i];
    return acc;
}

void SplineRep::validate() const {
    check_degree(degree);
    check_interior_knots(interior_knots);
    if (coefficients.size() != num_basis()) {
        std::ostringstream msg;
        msg << "expected " << num_basis() << " coefficients, got " << coefficients.size();
        throw Error(ErrorCode::invalid_parameter, msg.str());
    }
}

std::vector<double> uniform_knots(std::size_t count) {
    std::vector<double> knots(count);
    for (std::size_t i = 0; i < count; ++i) {
        knots[i] = static_cast<double>(i + 1) / static_cast<double>(count + 1);
    }
    return knots;
}

std::vector<double> clamped_knot_vector(int degree, std::span<const double> interior_knots) {
    std::vector<double> knots;
    knots.reserve(interior_knots.size() + 2 * static_cast<std::size_t>(degree) + 2);
    knots.insert(knots.end(), static_cast<std::size_t>(degree) + 1, 0.0);
    knots.insert(knots.end(), interior_knots.begin(), interior_knots.end());
    knots.insert(knots.end(), static_cast<std::size_t>(degree) + 1, 1.0);
    return knots;
}

Eigen::MatrixXd basis_matrix(std::span<const double> points, int degree,
                             std::span<const double> interior_knots) {
    check_degree(degree);
    if (degree < 1) throw Error(ErrorCode::unsupported_degree, "basis_matrix needs degree >= 1");
    check_interior_knots(interior_knots);
    const auto knots = clamped_knot_vector(degree, interior_knots);
    const int n_basis = static_cast<int>(interior_knots.size()) + degree + 1;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), n_basis);
    std::array<double, kMaxDegree + 1> values{};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double x = clamp01(points[i]);
        const int span = find_span(knots, degree, n_basis, x);
        basis_funs(knots, degree, span, x, values);
        for (int r = 0; r <= degree; ++r) out(static_cast<Eigen::Index>(i), span - degree + r) = values[r];
    }
    return out;
}

namespace {

Eigen::VectorXd solve_weighted(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const auto diag = qr.matrixR().diagonal().cwiseAbs();
    const double largest = diag.size() > 0 ? diag.maxCoeff() : 0.0;
    const double smallest = diag.size() > 0 ? diag.minCoeff() : 0.0;
    const double condition = smallest > 0.0 ? largest / smallest : INFINITY;
    if (qr.rank() < design.cols() || condition > kMaxCondition) {
        std::ostringstream msg;
        msg << "rank " << qr.rank() << " of " << design.cols()
            << " basis functions, condition estimate " << condition;
        throw Error(ErrorCode::singular_fit, msg.str());
    }
    return qr.solve(rhs);
}

}  // namespace

SplineRep fit_least_squares(std::span<const double> t, std::span<const double> y,
                            std::span<const double> weights, int degree,
                            std::span<const double> interior_knots) {
    if (t.size() != y.size() || t.size() != weights.size()) {
        throw Error(ErrorCode::invalid_input, "sample, value and weight counts differ");
    }
    Eigen::MatrixXd design = basis_matrix(t, degree, interior_knots);
    if (design.rows() < design.cols()) {
        throw Error(ErrorCode::singular_fit, "fewer samples than basis functions");
    }
    Eigen::VectorXd rhs(design.rows());
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const double w = weights[static_cast<std::size_t>(i)];
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::invalid_input, "weights must be positive and finite");
        }
        const double sw = std::sqrt(w);
        design.row(i) *= sw;
        rhs(i) = sw * y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd coef = solve_weighted(design, rhs);
    SplineRep out;
    out.degree = degree;
    out.interior_knots.assign(interior_knots.begin(), interior_knots.end());
    out.coefficients.assign(coef.data(), coef.data() + coef.size());
    return out;
}

SplineRep fit_least_squares(std::span<const double> t, std::span<const double> y, int degree,
                            std::span<const double> interior_knots) {
    const std::vector<double> ones(t.size(), 1.0);
    return fit_least_squares(t, y, ones, degree, interior_knots);
}

LeastSquaresProjector::LeastSquaresProjector(std::span<const double> t, int degree,
                                             std::vector<double> interior_knots)
    : degree_(degree), knots_(std::move(interior_knots)), num_points_(t.size()) {
    const Eigen::MatrixXd design = basis_matrix(t, degree_, knots_);
    if (design.rows() < design.cols()) {
        throw Error(ErrorCode::singular_fit, "fewer samples than basis functions");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) throw Error(ErrorCode::singular_fit, "rank-deficient projector");
    projection_ = qr.solve(Eigen::MatrixXd::Identity(design.rows(), design.rows()));
    offset_ = Eigen::VectorXd::Zero(design.rows());
}

LeastSquaresProjector LeastSquaresProjector::with_pinned_ends(std::span<const double> t, int degree,
                                                              std::vector<double> interior_knots,
                                                              double left, double right) {
    LeastSquaresProjector p;
    p.degree_ = degree;
    p.knots_ = std::move(interior_knots);
    p.num_points_ = t.size();
    p.pinned_ = true;
    p.left_ = left;
    p.right_ = right;
    const Eigen::MatrixXd design = basis_matrix(t, degree, p.knots_);
    const Eigen::Index cols = design.cols();
    if (cols < 3) throw Error(ErrorCode::invalid_parameter, "pinned fit needs at least 3 basis functions");
    const Eigen::MatrixXd free = design.middleCols(1, cols - 2);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(free);
    if (qr.rank() < free.cols()) throw Error(ErrorCode::singular_fit, "rank-deficient projector");
    p.projection_ = qr.solve(Eigen::MatrixXd::Identity(design.rows(), design.rows()));
    p.offset_ = left * design.col(0) + right * design.col(cols - 1);
    return p;
}

void LeastSquaresProjector::fit_into(std::span<const double> y, SplineRep& out) const {
    if (y.size() != num_points_) throw Error(ErrorCode::invalid_input, "projector sample count mismatch");
    const Eigen::Map<const Eigen::VectorXd> values(y.data(), static_cast<Eigen::Index>(y.size()));
    out.degree = degree_;
    out.interior_knots = knots_;
    if (pinned_) {
        const Eigen::VectorXd free = projection_ * (values - offset_);
        out.coefficients.resize(static_cast<std::size_t>(free.size()) + 2);
        out.coefficients.front() = left_;
        std::copy(free.data(), free.data() + free.size(), out.coefficients.begin() + 1);
        out.coefficients.back() = right_;
    } else {
        const Eigen::VectorXd coef = projection_ * values;
        out.coefficients.assign(coef.data(), coef.data() + coef.size());
    }
}

SplineRep LeastSquaresProjector::fit(std::span<const double> y) const {
    SplineRep out;
    fit_into(y, out);
    return out;
}

double evaluate(const SplineRep& spline, double x) {
    double out = 0.0;
    evaluate_sorted(spline, std::span<const double>(&x, 1), std::span<double>(&out, 1));
    return out;
}

std::vector<double> evaluate(const SplineRep& spline, std::span<const double> xs) {
    spline.validate();
    std::vector<double> out(xs.size());
    const auto knots = clamped_knot_vector(spline.degree, spline.interior_knots);
    const int p = spline.degree;
    const int n = static_cast<int>(spline.num_basis());
    std::array<double, kMaxDegree + 1> values{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = clamp01(xs[i]);
        const int span = find_span(knots, p, n, x);
        basis_funs(knots, p, span, x, values);
        double acc = 0.0;
        for (int r = 0; r <= p; ++r) acc += values[r] * spline.coefficients[span - p + r];
        out[i] = acc;
    }
    return out;
}

void evaluate_sorted(const SplineRep& spline, std::span<const double> xs, std::span<double> out) {
    const int p = spline.degree;
    const int n = static_cast<int>(spline.num_basis());
    if (static_cast<int>(spline.coefficients.size()) != n) {
        throw Error(ErrorCode::invalid_parameter, "coefficient count mismatch");
    }
    check_degree(p);
    // Clamped knot vector kept on the stack for the usual small splines.
    const std::size_t nk = spline.interior_knots.size() + 2 * static_cast<std::size_t>(p) + 2;
    thread_local std::vector<double> knots;
    knots.resize(nk);
    std::fill_n(knots.begin(), p + 1, 0.0);
    std::copy(spline.interior_knots.begin(), spline.interior_knots.end(), knots.begin() + p + 1);
    std::fill(knots.end() - (p + 1), knots.end(), 1.0);

    std::array<double, kMaxDegree + 1> values{};
    int span = p;
    double prev = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = clamp01(xs[i]);
        if (x < prev) {
            span = find_span(knots, p, n, x);
        } else {
            while (span < n - 1 && x >= knots[span + 1]) ++span;
        }
        prev = x;
        basis_funs(knots, p, span, x, values);
        double acc = 0.0;
        for (int r = 0; r <= p; ++r) acc += values[r] * spline.coefficients[span - p + r];
        out[i] = acc;
    }
}

SplineRep derivative(const SplineRep& spline) {
    spline.validate();
    if (spline.degree < 1) {
        throw Error(ErrorCode::unsupported_degree, "cannot differentiate a degree-0 spline");
    }
    const int p = spline.degree;
    const auto knots = clamped_knot_vector(p, spline.interior_knots);
    SplineRep out;
    out.degree = p - 1;
    out.interior_knots = spline.interior_knots;
    const std::size_t n = spline.num_basis();
    out.coefficients.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double span = knots[i + p + 1] - knots[i + 1];
        out.coefficients[i] =
            span > 0.0 ? p * (spline.coefficients[i + 1] - spline.coefficients[i]) / span : 0.0;
    }
    return out;
}

}  // namespace warpclust
