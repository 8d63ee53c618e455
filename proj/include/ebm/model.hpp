#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "ebm/linalg.hpp"

namespace ebm {

/// Finite-dimensional energy-based model
///
///   [ grad1 H(z1, z2) ]              [ d/dt z1       ]
///   [ d/dt z2         ] = (J - R)    [ grad2 H(z1,z2)] + B(u, t)
///   [ 0               ]              [ z3            ]
///
/// with <v, J v> = 0 and <v, R v> >= 0. Any block may have dimension zero.
/// All maps must be pure; models are shared read-only between threads.
struct EnergyModel {
  using ScalarFn = std::function<double(const Vector&, const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&, const Vector&)>;
  using OperatorFn = std::function<Vector(const Vector&)>;
  using InputFn = std::function<Vector(const Vector&, double)>;
  using HessianFn = std::function<SparseMatrix(const Vector&, const Vector&)>;

  std::string id;
  Index n1 = 0;
  Index n2 = 0;
  Index n3 = 0;
  Index input_dim = 0;

  ScalarFn hamiltonian;
  GradientFn grad1;
  GradientFn grad2;
  OperatorFn apply_J;
  OperatorFn apply_R;
  InputFn apply_B;

  // Optional derivative data for analytic Newton Jacobians. `hessian` is the
  // (n1+n2) x (n1+n2) Hessian of H; J_matrix / R_matrix are set when the
  // operators are linear.
  HessianFn hessian;
  std::optional<SparseMatrix> J_matrix;
  std::optional<SparseMatrix> R_matrix;

  Index n() const { return n1 + n2 + n3; }
  Index n12() const { return n1 + n2; }
  bool has_analytic_jacobian() const { return static_cast<bool>(hessian) && J_matrix && R_matrix; }

  Vector input(const Vector& u, double t) const {
    if (!apply_B || input_dim == 0) return Vector::Zero(n());
    return apply_B(u, t);
  }
};

/// Block matrices of a linear spatial discretization before the K scaling.
struct LinearBlockOperators {
  Index n1 = 0;
  Index n2 = 0;
  Index n3 = 0;
  SparseMatrix Jbar;  // n x n, skew-symmetric
  SparseMatrix Rbar;  // n x n, symmetric part PSD
  Matrix Bbar;        // n x input_dim
  Matrix M2;          // n2 x n2 SPD (empty when n2 == 0)
};

/// Casts a mass-matrix formulation into the plain coefficient form through
/// K = diag(I, M2^{-1}, I): J = K Jbar K, R = K Rbar K, B = K Bbar.
EnergyModel from_linear_blocks(const LinearBlockOperators& ops, EnergyModel::ScalarFn hamiltonian,
                               EnergyModel::GradientFn grad1, EnergyModel::GradientFn grad2,
                               EnergyModel::HessianFn hessian = {}, std::string id = "linear-blocks");

struct ValidationReport {
  Index samples = 0;
  double max_abs_skew = 0;            // max |v^T J v| over unit v
  double min_dissipation = 0;         // min v^T R v over unit v
  double max_gradient_mismatch = 0;   // relative, central differences
  double skew_tolerance = 1e-10;
  double psd_tolerance = 1e-10;
  double gradient_tolerance = 1e-5;

  bool skew_ok() const { return max_abs_skew <= skew_tolerance; }
  bool psd_ok() const { return min_dissipation >= -psd_tolerance; }
  bool gradient_ok() const { return max_gradient_mismatch <= gradient_tolerance; }
  bool ok() const { return skew_ok() && psd_ok() && gradient_ok(); }
};

/// Samples unit vectors to check the skew / dissipative operator properties
/// and compares the model gradients against central finite differences of H
/// (step 1e-6) at random states.
ValidationReport validate_structure(const EnergyModel& model, Index n_samples, std::uint64_t seed,
                                    Index gradient_samples = 8);

struct EnergyRate {
  double dissipation = 0;  // v^T R v
  double supply = 0;       // v^T B(u, t)
};

EnergyRate energy_rate(const EnergyModel& model, const Vector& v, const Vector& u, double t);

/// Central-difference gradient of the Hamiltonian, blocks (z1, z2) stacked.
Vector finite_difference_gradient(const EnergyModel& model, const Vector& c1, const Vector& c2, double step);

}  // namespace ebm
