#include "ebm/pod.hpp"

#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace ebm {

PodBasis pod_basis(const Matrix& snapshots, Index r) {
  if (r < 1 || r > std::min(snapshots.rows(), snapshots.cols())) {
    throw Error(ErrorCode::InvalidArgument, "pod_basis: need 1 <= r <= min(rows, cols)");
  }
  auto svd = thin_svd(snapshots);
  const Vector& s = svd.singular_values;
  if (!(s(0) > 0) || s(r - 1) < 1e-14 * s(0)) {
    throw Error(ErrorCode::RankTooLow, "pod_basis: singular value " + std::to_string(r) + " below 1e-14 s_1");
  }
  PodBasis out{svd.U.leftCols(r), s};
  for (Index j = 0; j < r; ++j) {
    Index imax = 0;
    out.V.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.V(imax, j) < 0) out.V.col(j) *= -1.0;
  }
  return out;
}

ReducedBasis ReducedBasis::identity(const EnergyModel& model) {
  return {Matrix::Identity(model.n1, model.n1), Matrix::Identity(model.n2, model.n2),
          Matrix::Identity(model.n3, model.n3)};
}

void check_basis(const EnergyModel& model, const ReducedBasis& basis) {
  auto check = [](const Matrix& V, Index n, const char* name) {
    if (V.rows() != n || V.cols() > n) {
      throw Error(ErrorCode::DimensionMismatch, std::string("reduced basis: block ") + name + " shape");
    }
    if (V.cols() > 0 && (V.transpose() * V - Matrix::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, std::string("reduced basis: block ") + name + " not orthonormal");
    }
  };
  check(basis.V1, model.n1, "1");
  check(basis.V2, model.n2, "2");
  check(basis.V3, model.n3, "3");
}

namespace {

Matrix block_diagonal(const ReducedBasis& b) {
  const Index n = b.V1.rows() + b.V2.rows() + b.V3.rows();
  const Index r = b.r1() + b.r2() + b.r3();
  Matrix V = Matrix::Zero(n, r);
  V.block(0, 0, b.V1.rows(), b.r1()) = b.V1;
  V.block(b.V1.rows(), b.r1(), b.V2.rows(), b.r2()) = b.V2;
  V.block(b.V1.rows() + b.V2.rows(), b.r1() + b.r2(), b.V3.rows(), b.r3()) = b.V3;
  return V;
}

}  // namespace

EnergyModel reduce_model(const EnergyModel& model, const ReducedBasis& basis) {
  check_basis(model, basis);
  const Matrix V = block_diagonal(basis);
  const Matrix V1 = basis.V1, V2 = basis.V2;
  Matrix V12 = Matrix::Zero(model.n12(), basis.r1() + basis.r2());
  V12.topLeftCorner(V1.rows(), V1.cols()) = V1;
  V12.bottomRightCorner(V2.rows(), V2.cols()) = V2;

  // Captures share the full model; reduced evaluations call full operators.
  auto full = std::make_shared<const EnergyModel>(model);

  EnergyModel red;
  red.id = model.id + "-reduced";
  red.n1 = basis.r1();
  red.n2 = basis.r2();
  red.n3 = basis.r3();
  red.input_dim = model.input_dim;
  red.hamiltonian = [full, V1, V2](const Vector& x1, const Vector& x2) { return full->hamiltonian(V1 * x1, V2 * x2); };
  red.grad1 = [full, V1, V2](const Vector& x1, const Vector& x2) -> Vector {
    return V1.transpose() * full->grad1(V1 * x1, V2 * x2);
  };
  red.grad2 = [full, V1, V2](const Vector& x1, const Vector& x2) -> Vector {
    return V2.transpose() * full->grad2(V1 * x1, V2 * x2);
  };
  red.apply_J = [full, V](const Vector& v) -> Vector { return V.transpose() * full->apply_J(V * v); };
  red.apply_R = [full, V](const Vector& v) -> Vector { return V.transpose() * full->apply_R(V * v); };
  red.apply_B = [full, V](const Vector& u, double t) -> Vector { return V.transpose() * full->input(u, t); };

  if (model.J_matrix) red.J_matrix = to_sparse(V.transpose() * (*model.J_matrix * V));
  if (model.R_matrix) red.R_matrix = to_sparse(V.transpose() * (*model.R_matrix * V));
  if (model.hessian) {
    red.hessian = [full, V1, V2, V12](const Vector& x1, const Vector& x2) -> SparseMatrix {
      const SparseMatrix H = full->hessian(V1 * x1, V2 * x2);
      return to_sparse(V12.transpose() * (H * V12));
    };
  }
  return red;
}

InitialState project_initial(const ReducedBasis& basis, const InitialState& initial) {
  if (initial.z1.size() != basis.V1.rows() || initial.z2.size() != basis.V2.rows() ||
      initial.z3.size() != basis.V3.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "project_initial: block sizes");
  }
  return {basis.V1.transpose() * initial.z1, basis.V2.transpose() * initial.z2, basis.V3.transpose() * initial.z3};
}

StateValue lift(const ReducedBasis& basis, const StateValue& reduced) {
  return {basis.V1 * reduced.z1, basis.V2 * reduced.z2, basis.V3 * reduced.z3};
}

SnapshotSet collect_snapshots(const Trajectory& trajectory) {
  const auto& pts = trajectory.grid().points();
  const auto first = trajectory.eval(pts.front());
  const Index m = static_cast<Index>(pts.size());
  SnapshotSet s{Matrix(first.z1.size(), m), Matrix(first.z2.size(), m), Matrix(first.z3.size(), m)};
  for (Index j = 0; j < m; ++j) {
    const auto x = trajectory.eval(pts[static_cast<std::size_t>(j)]);
    s.z1.col(j) = x.z1;
    s.z2.col(j) = x.z2;
    s.z3.col(j) = x.z3;
  }
  return s;
}

ReducedBasis pod_reduced_basis(const SnapshotSet& snapshots, Index r1, Index r2, Index r3) {
  auto block = [](const Matrix& S, Index r) -> Matrix {
    if (r == 0) return Matrix(S.rows(), 0);
    return pod_basis(S, r).V;
  };
  return {block(snapshots.z1, r1), block(snapshots.z2, r2), block(snapshots.z3, r3)};
}

Matrix random_orthogonal(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix A(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) A(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ() * Matrix::Identity(n, n);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  const auto old_precision = out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Io, "read_matrix_csv: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw Error(ErrorCode::Io, "read_matrix_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows.front().size()) : 0;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_spectrum_csv(std::ostream& out, const Vector& singular_values) {
  const auto old_precision = out.precision(17);
  out << "index,singular_value\n";
  for (Index i = 0; i < singular_values.size(); ++i) out << i + 1 << ',' << singular_values(i) << '\n';
  out.precision(old_precision);
}

}  // namespace ebm
