#pragma once

#include <cstdint>
#include <iosfwd>

#include "ebm/model.hpp"
#include "ebm/timestepper.hpp"

namespace ebm {

/// Leading left singular vectors of a snapshot matrix.
struct PodBasis {
  Matrix V;                 // rows x r, orthonormal columns
  Vector singular_values;   // full spectrum, descending
};

/// First r left singular vectors. Each column is signed so that its entry of
/// largest magnitude is positive. Throws RankTooLow when s_r < 1e-14 s_1.
PodBasis pod_basis(const Matrix& snapshots, Index r);

/// Block-diagonal Galerkin basis V = diag(V1, V2, V3).
struct ReducedBasis {
  Matrix V1;
  Matrix V2;
  Matrix V3;

  Index r1() const { return V1.cols(); }
  Index r2() const { return V2.cols(); }
  Index r3() const { return V3.cols(); }

  /// Identity-sized basis for every block of the model.
  static ReducedBasis identity(const EnergyModel& model);
};

/// Checks block shapes against the model and orthonormality to 1e-12.
void check_basis(const EnergyModel& model, const ReducedBasis& basis);

/// Galerkin-reduced model: H~(x1, x2) = H(V1 x1, V2 x2), grad_i H~ = V_i^T
/// grad_i H, J~ v = V^T J (V v), R~ v = V^T R (V v), B~ = V^T B. Linear
/// operators and the Hessian are reduced as matrices when available.
EnergyModel reduce_model(const EnergyModel& model, const ReducedBasis& basis);

/// z~_i(0) = V_i^T z_i(0).
InitialState project_initial(const ReducedBasis& basis, const InitialState& initial);

/// V z~ blockwise.
StateValue lift(const ReducedBasis& basis, const StateValue& reduced);

/// States at the grid points of a solved trajectory, one column per t_j.
struct SnapshotSet {
  Matrix z1;
  Matrix z2;
  Matrix z3;
};

SnapshotSet collect_snapshots(const Trajectory& trajectory);

/// Per-block POD with r_i columns; blocks with r_i = 0 stay empty.
ReducedBasis pod_reduced_basis(const SnapshotSet& snapshots, Index r1, Index r2, Index r3);

/// Q factor of a seeded Gaussian matrix: a random n x n orthogonal matrix.
Matrix random_orthogonal(Index n, std::uint64_t seed);

/// Plain comma separated rows, 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

/// CSV rows (index, singular_value).
void write_spectrum_csv(std::ostream& out, const Vector& singular_values);

}  // namespace ebm
