#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "ebm/linalg.hpp"

namespace ebm {

/// Quadrature rule on the reference interval [0, 1]; weights sum to one.
template <typename Scalar = double>
struct QuadratureRule {
  VectorX<Scalar> nodes;
  VectorX<Scalar> weights;

  Index size() const { return nodes.size(); }

  /// Nodes mapped to [a, b]; the matching weights are (b - a) * weights.
  VectorX<Scalar> mapped_nodes(Scalar a, Scalar b) const {
    return (VectorX<Scalar>::Constant(size(), a) + (b - a) * nodes).eval();
  }
};

/// n-point Gauss-Legendre rule on [0, 1], exact for degree <= 2n - 1.
/// Nodes come from Newton's method on the three-term Legendre recurrence.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_rule(Index n) {
  using std::abs;
  using std::cos;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "gauss_rule: n must be >= 1");
  QuadratureRule<Scalar> rule{VectorX<Scalar>(n), VectorX<Scalar>(n)};
  const Scalar pi = std::numbers::pi_v<double>;
  for (Index i = 0; i < n; ++i) {
    // Roots of P_n on [-1, 1] in decreasing order, so 1 - i-th root increases.
    Scalar x = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 1;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (Index m = 1; m < n; ++m) {
        const Scalar p2 = ((2 * Scalar(m) + 1) * x * p1 - Scalar(m) * p0) / (Scalar(m) + 1);
        p0 = p1;
        p1 = p2;
      }
      const Scalar pn = (n == 1) ? x : p1;
      const Scalar pnm1 = (n == 1) ? Scalar(1) : p0;
      dp = Scalar(n) * (x * pn - pnm1) / (x * x - 1);
      const Scalar dx = pn / dp;
      x -= dx;
      if (abs(dx) <= Scalar(1e-16) * (1 + abs(x))) break;
    }
    // Recompute the derivative at the converged root.
    Scalar p0 = 1, p1 = x;
    for (Index m = 1; m < n; ++m) {
      const Scalar p2 = ((2 * Scalar(m) + 1) * x * p1 - Scalar(m) * p0) / (Scalar(m) + 1);
      p0 = p1;
      p1 = p2;
    }
    const Scalar pn = (n == 1) ? x : p1;
    const Scalar pnm1 = (n == 1) ? Scalar(1) : p0;
    dp = Scalar(n) * (x * pn - pnm1) / (x * x - 1);
    rule.nodes(i) = (1 - x) / 2;
    rule.weights(i) = Scalar(1) / ((1 - x * x) * dp * dp);
  }
  // Exact symmetry around the midpoint.
  for (Index i = 0; i < n / 2; ++i) {
    const Scalar lo = (rule.nodes(i) + 1 - rule.nodes(n - 1 - i)) / 2;
    const Scalar w = (rule.weights(i) + rule.weights(n - 1 - i)) / 2;
    rule.nodes(i) = lo;
    rule.nodes(n - 1 - i) = 1 - lo;
    rule.weights(i) = rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = Scalar(0.5);
  return rule;
}

/// L2-orthonormal scaled Legendre polynomials phi_0, ..., phi_k on [a, b].
/// Index i is zero-based; phi_i has degree i.
template <typename Scalar = double>
class LegendreBasis {
 public:
  LegendreBasis(Index degree, Scalar a, Scalar b) : degree_(degree), a_(a), b_(b) {
    if (degree < 0) throw Error(ErrorCode::InvalidArgument, "LegendreBasis: negative degree");
    if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "LegendreBasis: empty interval");
  }

  Index degree() const { return degree_; }
  Index size() const { return degree_ + 1; }
  Scalar a() const { return a_; }
  Scalar b() const { return b_; }
  Scalar length() const { return b_ - a_; }

  Scalar value(Index i, Scalar t) const {
    check_index(i);
    check_point(t);
    return values(t)(i);
  }

  Scalar derivative(Index i, Scalar t) const {
    check_index(i);
    check_point(t);
    return derivatives(t)(i);
  }

  /// All k + 1 basis values at t (no range check).
  VectorX<Scalar> values(Scalar t) const {
    using std::sqrt;
    const Scalar x = 2 * (t - a_) / length() - 1;
    VectorX<Scalar> p(size());
    p(0) = 1;
    if (degree_ >= 1) p(1) = x;
    for (Index n = 1; n < degree_; ++n) {
      p(n + 1) = ((2 * Scalar(n) + 1) * x * p(n) - Scalar(n) * p(n - 1)) / (Scalar(n) + 1);
    }
    for (Index i = 0; i < size(); ++i) p(i) *= sqrt((2 * Scalar(i) + 1) / length());
    return p;
  }

  /// All k + 1 basis derivatives at t (no range check).
  VectorX<Scalar> derivatives(Scalar t) const {
    using std::sqrt;
    const Scalar x = 2 * (t - a_) / length() - 1;
    VectorX<Scalar> p(size()), dp(size());
    p(0) = 1;
    dp(0) = 0;
    if (degree_ >= 1) {
      p(1) = x;
      dp(1) = 1;
    }
    for (Index n = 1; n < degree_; ++n) {
      p(n + 1) = ((2 * Scalar(n) + 1) * x * p(n) - Scalar(n) * p(n - 1)) / (Scalar(n) + 1);
      dp(n + 1) = dp(n - 1) + (2 * Scalar(n) + 1) * p(n);
    }
    const Scalar chain = 2 / length();
    for (Index i = 0; i < size(); ++i) dp(i) *= chain * sqrt((2 * Scalar(i) + 1) / length());
    return dp;
  }

  /// Values at a set of points, one column per point.
  MatrixX<Scalar> value_table(const VectorX<Scalar>& points) const {
    MatrixX<Scalar> table(size(), points.size());
    for (Index j = 0; j < points.size(); ++j) table.col(j) = values(points(j));
    return table;
  }

  MatrixX<Scalar> derivative_table(const VectorX<Scalar>& points) const {
    MatrixX<Scalar> table(size(), points.size());
    for (Index j = 0; j < points.size(); ++j) table.col(j) = derivatives(points(j));
    return table;
  }

  /// k x (k+1) matrix D with (D c)_q = int phi_q * d/dt(sum_p c_p phi_p),
  /// i.e. the derivative's coefficients in the degree k-1 orthonormal basis.
  MatrixX<Scalar> derivative_matrix() const {
    if (degree_ == 0) throw Error(ErrorCode::DegreeZero, "derivative_matrix: degree 0");
    const auto rule = gauss_rule<Scalar>(degree_ + 1);
    const auto points = rule.mapped_nodes(a_, b_);
    const MatrixX<Scalar> vals = value_table(points).topRows(degree_);
    const MatrixX<Scalar> ders = derivative_table(points);
    return vals * (length() * rule.weights).asDiagonal() * ders.transpose();
  }

 private:
  void check_index(Index i) const {
    if (i < 0 || i > degree_) throw Error(ErrorCode::OutOfRange, "LegendreBasis: index " + std::to_string(i));
  }
  void check_point(Scalar t) const {
    const Scalar slack = Scalar(1e-14) * length();
    if (!(t >= a_ - slack && t <= b_ + slack)) throw Error(ErrorCode::OutOfRange, "LegendreBasis: point outside interval");
  }

  Index degree_;
  Scalar a_;
  Scalar b_;
};

/// Symmetric rule on the reference triangle. Rows of `barycentric` are
/// (lambda_1, lambda_2, lambda_3); weights sum to one, so integrals over a
/// triangle T are |T| * sum_g w_g f(x_g).
template <typename Scalar = double>
struct TriangleRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> barycentric;
  VectorX<Scalar> weights;
  int degree = 0;

  Index size() const { return weights.size(); }
};

template <typename Scalar = double>
TriangleRule<Scalar> triangle_rule(int degree) {
  TriangleRule<Scalar> rule;
  rule.degree = degree;
  auto add_orbit = [&](Scalar a, Scalar w) {
    const Scalar c = 1 - 2 * a;
    const Index n = rule.size();
    rule.barycentric.conservativeResize(n + 3, Eigen::NoChange);
    rule.weights.conservativeResize(n + 3);
    rule.barycentric.row(n) << a, a, c;
    rule.barycentric.row(n + 1) << a, c, a;
    rule.barycentric.row(n + 2) << c, a, a;
    rule.weights.segment(n, 3).setConstant(w);
  };
  switch (degree) {
    case 1:
      rule.barycentric.resize(1, 3);
      rule.barycentric << Scalar(1) / 3, Scalar(1) / 3, Scalar(1) / 3;
      rule.weights = VectorX<Scalar>::Ones(1);
      break;
    case 2:
      rule.barycentric.resize(0, 3);
      rule.weights.resize(0);
      add_orbit(Scalar(1) / 6, Scalar(1) / 3);
      break;
    case 4:
      rule.barycentric.resize(0, 3);
      rule.weights.resize(0);
      add_orbit(Scalar(0.4459484909159648863183292538830519883991),
                Scalar(0.2233815896780114656950070084331228043703));
      add_orbit(Scalar(0.0915762135097707434595714634022015078543),
                Scalar(0.1099517436553218676383263249002105289630));
      break;
    default:
      throw Error(ErrorCode::Unsupported, "triangle_rule: degree " + std::to_string(degree));
  }
  return rule;
}

}  // namespace ebm
