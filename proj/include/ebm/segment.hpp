#pragma once

#include "ebm/polybasis.hpp"

namespace ebm {

/// Vector-valued polynomial on [a, b] in the orthonormal Legendre basis.
/// Column p of `coefficients` multiplies phi_p.
struct PolySegment {
  double a = 0;
  double b = 1;
  Matrix coefficients;  // dim x (degree + 1)

  Index dim() const { return coefficients.rows(); }
  Index degree() const { return coefficients.cols() - 1; }
  LegendreBasis<double> basis() const { return {degree(), a, b}; }

  Vector value(double t) const {
    if (dim() == 0) return Vector(0);
    return coefficients * basis().values(t);
  }
  Vector derivative(double t) const {
    if (dim() == 0) return Vector(0);
    return coefficients * basis().derivatives(t);
  }
};

}  // namespace ebm
