#include "ebm/model.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <utility>

namespace ebm {

namespace {

Matrix scaling_diagonal_inverse(const LinearBlockOperators& ops) {
  if (ops.n2 == 0) return Matrix(0, 0);
  if (ops.M2.rows() != ops.n2 || ops.M2.cols() != ops.n2) {
    throw Error(ErrorCode::DimensionMismatch, "from_linear_blocks: M2 shape");
  }
  Eigen::LLT<Matrix> llt(ops.M2);
  if (llt.info() != Eigen::Success || (ops.M2 - ops.M2.transpose()).norm() > 1e-12 * ops.M2.norm()) {
    throw Error(ErrorCode::NotSPD, "from_linear_blocks: M2 not symmetric positive definite");
  }
  return llt.solve(Matrix::Identity(ops.n2, ops.n2));
}

}  // namespace

EnergyModel from_linear_blocks(const LinearBlockOperators& ops, EnergyModel::ScalarFn hamiltonian,
                               EnergyModel::GradientFn grad1, EnergyModel::GradientFn grad2,
                               EnergyModel::HessianFn hessian, std::string id) {
  const Index n = ops.n1 + ops.n2 + ops.n3;
  if (ops.Jbar.rows() != n || ops.Jbar.cols() != n || ops.Rbar.rows() != n || ops.Rbar.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "from_linear_blocks: J/R shape");
  }
  if (ops.Bbar.size() != 0 && ops.Bbar.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "from_linear_blocks: B rows");
  }

  SparseMatrix J = ops.Jbar;
  SparseMatrix R = ops.Rbar;
  Matrix B = ops.Bbar;
  if (ops.n2 > 0) {
    Matrix K = Matrix::Identity(n, n);
    K.block(ops.n1, ops.n1, ops.n2, ops.n2) = scaling_diagonal_inverse(ops);
    const SparseMatrix Ks = to_sparse(K);
    J = Ks * ops.Jbar * Ks;
    R = Ks * ops.Rbar * Ks;
    J.prune(0.0);
    R.prune(0.0);
    if (B.size() != 0) B = K * B;
  }

  EnergyModel model;
  model.id = std::move(id);
  model.n1 = ops.n1;
  model.n2 = ops.n2;
  model.n3 = ops.n3;
  model.input_dim = B.cols();
  model.hamiltonian = std::move(hamiltonian);
  model.grad1 = std::move(grad1);
  model.grad2 = std::move(grad2);
  model.hessian = std::move(hessian);
  model.apply_J = [J](const Vector& v) -> Vector { return J * v; };
  model.apply_R = [R](const Vector& v) -> Vector { return R * v; };
  model.apply_B = [B, n](const Vector& u, double) -> Vector {
    if (B.size() == 0) return Vector::Zero(n);
    return B * u;
  };
  model.J_matrix = std::move(J);
  model.R_matrix = std::move(R);
  return model;
}

Vector finite_difference_gradient(const EnergyModel& model, const Vector& c1, const Vector& c2, double step) {
  Vector grad(model.n12());
  Vector x1 = c1, x2 = c2;
  for (Index i = 0; i < model.n1; ++i) {
    const double h = step * (1 + std::abs(c1(i)));
    x1(i) = c1(i) + h;
    const double plus = model.hamiltonian(x1, x2);
    x1(i) = c1(i) - h;
    const double minus = model.hamiltonian(x1, x2);
    x1(i) = c1(i);
    grad(i) = (plus - minus) / (2 * h);
  }
  for (Index i = 0; i < model.n2; ++i) {
    const double h = step * (1 + std::abs(c2(i)));
    x2(i) = c2(i) + h;
    const double plus = model.hamiltonian(x1, x2);
    x2(i) = c2(i) - h;
    const double minus = model.hamiltonian(x1, x2);
    x2(i) = c2(i);
    grad(model.n1 + i) = (plus - minus) / (2 * h);
  }
  return grad;
}

ValidationReport validate_structure(const EnergyModel& model, Index n_samples, std::uint64_t seed,
                                    Index gradient_samples) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "validate_structure: n_samples >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&](Index size) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) v(i) = normal(rng);
    return v;
  };

  ValidationReport report;
  report.samples = n_samples;
  report.min_dissipation = std::numeric_limits<double>::infinity();
  const Index n = model.n();
  for (Index s = 0; s < n_samples; ++s) {
    Vector v = random_vector(n);
    const double norm = v.norm();
    if (norm > 0) v /= norm;
    report.max_abs_skew = std::max(report.max_abs_skew, std::abs(v.dot(model.apply_J(v))));
    report.min_dissipation = std::min(report.min_dissipation, v.dot(model.apply_R(v)));
  }
  if (n == 0) report.min_dissipation = 0;

  if (model.n12() > 0) {
    for (Index s = 0; s < gradient_samples; ++s) {
      const Vector c1 = random_vector(model.n1);
      const Vector c2 = random_vector(model.n2);
      Vector grad(model.n12());
      grad << model.grad1(c1, c2), model.grad2(c1, c2);
      const Vector fd = finite_difference_gradient(model, c1, c2, 1e-6);
      const double scale = std::max(grad.norm(), std::numeric_limits<double>::min());
      report.max_gradient_mismatch = std::max(report.max_gradient_mismatch, (grad - fd).norm() / scale);
    }
  }
  return report;
}

EnergyRate energy_rate(const EnergyModel& model, const Vector& v, const Vector& u, double t) {
  if (v.size() != model.n()) throw Error(ErrorCode::DimensionMismatch, "energy_rate: state length");
  return {v.dot(model.apply_R(v)), v.dot(model.input(u, t))};
}

}  // namespace ebm
