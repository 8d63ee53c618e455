#include "ebm/projection.hpp"

#include <algorithm>

namespace ebm {

ProjectedSignal project(const TimeSignal& f, Index dim, double a, double b, Index k, Index n_pi) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "project: k must be >= 1");
  if (n_pi < 1) throw Error(ErrorCode::InvalidArgument, "project: n_pi must be >= 1");
  const LegendreBasis<double> basis(k - 1, a, b);
  const auto rule = gauss_rule(n_pi);
  const Vector nodes = rule.mapped_nodes(a, b);
  ProjectedSignal out{PolySegment{a, b, Matrix::Zero(dim, k)}};
  for (Index m = 0; m < n_pi; ++m) {
    const Vector fm = f(nodes(m));
    if (fm.size() != dim) throw Error(ErrorCode::DimensionMismatch, "project: signal length");
    const Vector phi = basis.values(nodes(m));
    out.segment.coefficients.noalias() += ((b - a) * rule.weights(m)) * fm * phi.transpose();
  }
  return out;
}

double verify_projection_identity(const PolySegment& v, const TimeSignal& w, Index n_pi) {
  const Index k = v.degree();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "verify_projection_identity: degree >= 1");
  const ProjectedSignal projected = project(w, v.dim(), v.a, v.b, k, n_pi);
  const auto reference = gauss_rule(std::max<Index>(4 * k, n_pi + 1));
  const Vector nodes = reference.mapped_nodes(v.a, v.b);
  double integral = 0;
  for (Index m = 0; m < nodes.size(); ++m) {
    const double t = nodes(m);
    integral += (v.b - v.a) * reference.weights(m) * v.derivative(t).dot(w(t) - projected.value(t));
  }
  return std::abs(integral);
}

}  // namespace ebm
