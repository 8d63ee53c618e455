#pragma once

#include <functional>

#include "ebm/segment.hpp"

namespace ebm {

using TimeSignal = std::function<Vector(double)>;

/// L2-orthogonal projection of a time signal onto polynomials of degree
/// k - 1 on one interval, stored as coefficients in the orthonormal basis.
struct ProjectedSignal {
  PolySegment segment;

  Vector value(double t) const { return segment.value(t); }
  const Matrix& coefficients() const { return segment.coefficients; }
};

/// Coefficient q is the n_pi-point Gauss approximation of int f phi_q over
/// [a, b], q = 0..k-1. `dim` is the length of f's values.
ProjectedSignal project(const TimeSignal& f, Index dim, double a, double b, Index k, Index n_pi);

/// |int <d/dt v, w - P w>| for a degree k segment v, with P the n_pi-node
/// projection onto degree k - 1, evaluated with a 4k-point reference rule.
double verify_projection_identity(const PolySegment& v, const TimeSignal& w, Index n_pi);

}  // namespace ebm
