#include "ebm/fem2d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace ebm::fem {

double Mesh2D::triangle_area(Index t) const {
  const auto& tri = triangles[static_cast<std::size_t>(t)];
  const Eigen::Vector2d p0 = nodes.row(tri[0]).transpose();
  const Eigen::Vector2d p1 = nodes.row(tri[1]).transpose();
  const Eigen::Vector2d p2 = nodes.row(tri[2]).transpose();
  const Eigen::Vector2d e1 = p1 - p0, e2 = p2 - p0;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Mesh2D build_mesh(Index N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "build_mesh: N >= 1");
  Mesh2D mesh;
  mesh.N = N;
  const Index side = N + 1;
  mesh.nodes.resize(side * side, 2);
  for (Index j = 0; j <= N; ++j) {
    for (Index i = 0; i <= N; ++i) {
      mesh.nodes(j * side + i, 0) = static_cast<double>(i) / static_cast<double>(N);
      mesh.nodes(j * side + i, 1) = static_cast<double>(j) / static_cast<double>(N);
    }
  }
  auto id = [side](Index i, Index j) { return j * side + i; };
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i < N; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  for (Index i = 0; i < N; ++i) {
    mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0)});
    mesh.boundary_edges.push_back({id(N, i), id(N, i + 1)});
    mesh.boundary_edges.push_back({id(i + 1, N), id(i, N)});
    mesh.boundary_edges.push_back({id(0, i + 1), id(0, i)});
  }
  return mesh;
}

FemMatrices assemble_matrices(const Mesh2D& mesh) {
  std::vector<Triplet> mass, stiff, bmass;
  for (Index t = 0; t < static_cast<Index>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double area = mesh.triangle_area(t);
    double x[3], y[3];
    for (int v = 0; v < 3; ++v) {
      x[v] = mesh.nodes(tri[v], 0);
      y[v] = mesh.nodes(tri[v], 1);
    }
    const double bx[3] = {y[1] - y[2], y[2] - y[0], y[0] - y[1]};
    const double cy[3] = {x[2] - x[1], x[0] - x[2], x[1] - x[0]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        mass.emplace_back(tri[r], tri[c], area / 12.0 * (r == c ? 2.0 : 1.0));
        stiff.emplace_back(tri[r], tri[c], (bx[r] * bx[c] + cy[r] * cy[c]) / (4.0 * area));
      }
    }
  }
  for (const auto& edge : mesh.boundary_edges) {
    const double len = (mesh.nodes.row(edge[0]) - mesh.nodes.row(edge[1])).norm();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) bmass.emplace_back(edge[r], edge[c], len / 6.0 * (r == c ? 2.0 : 1.0));
  }
  const Index n = mesh.num_nodes();
  FemMatrices fem{SparseMatrix(n, n), SparseMatrix(n, n), SparseMatrix(n, n)};
  fem.M.setFromTriplets(mass.begin(), mass.end());
  fem.K.setFromTriplets(stiff.begin(), stiff.end());
  fem.Mb.setFromTriplets(bmass.begin(), bmass.end());
  return fem;
}

CahnHilliardEnergy::CahnHilliardEnergy(const Mesh2D& mesh, const FemMatrices& fem, CahnHilliardParams params)
    : triangles_(mesh.triangles),
      areas_(static_cast<Index>(mesh.triangles.size())),
      K_(fem.K),
      rule_(triangle_rule(4)),
      params_(params),
      n_(mesh.num_nodes()) {
  for (Index t = 0; t < areas_.size(); ++t) areas_(t) = mesh.triangle_area(t);
}

double CahnHilliardEnergy::value(const Vector& c) const {
  double potential = 0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Eigen::Vector3d local(c(tri[0]), c(tri[1]), c(tri[2]));
    double sum = 0;
    for (Index g = 0; g < rule_.size(); ++g) sum += rule_.weights(g) * double_well(rule_.barycentric.row(g).dot(local));
    potential += areas_(static_cast<Index>(t)) * sum;
  }
  return 0.5 * params_.eps * c.dot(K_ * c) + potential / params_.eps;
}

Vector CahnHilliardEnergy::gradient(const Vector& c) const {
  Vector f = Vector::Zero(n_);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Eigen::Vector3d local(c(tri[0]), c(tri[1]), c(tri[2]));
    Eigen::Vector3d contrib = Eigen::Vector3d::Zero();
    for (Index g = 0; g < rule_.size(); ++g) {
      const Eigen::Vector3d lam = rule_.barycentric.row(g).transpose();
      contrib += rule_.weights(g) * double_well_derivative(lam.dot(local)) * lam;
    }
    contrib *= areas_(static_cast<Index>(t));
    for (int v = 0; v < 3; ++v) f(tri[v]) += contrib(v);
  }
  return params_.eps * (K_ * c) + f / params_.eps;
}

SparseMatrix CahnHilliardEnergy::hessian(const Vector& c) const {
  std::vector<Triplet> triplets;
  triplets.reserve(triangles_.size() * 9 + static_cast<std::size_t>(K_.nonZeros()));
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Eigen::Vector3d local(c(tri[0]), c(tri[1]), c(tri[2]));
    Eigen::Matrix3d block = Eigen::Matrix3d::Zero();
    for (Index g = 0; g < rule_.size(); ++g) {
      const Eigen::Vector3d lam = rule_.barycentric.row(g).transpose();
      block += rule_.weights(g) * double_well_second(lam.dot(local)) * (lam * lam.transpose());
    }
    block *= areas_(static_cast<Index>(t)) / params_.eps;
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) triplets.emplace_back(tri[r], tri[s], block(r, s));
  }
  for (Index i = 0; i < K_.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(K_, i); it; ++it) triplets.emplace_back(i, it.col(), params_.eps * it.value());
  SparseMatrix H(n_, n_);
  H.setFromTriplets(triplets.begin(), triplets.end());
  return H;
}

Vector CahnHilliardModel::solve_mass(const Vector& rhs) const {
  Vector x = mass_solver->solve(rhs);
  if (mass_solver->info() != Eigen::Success) throw Error(ErrorCode::LinearSolveFailed, "mass matrix solve");
  return x;
}

CahnHilliardModel build_cahn_hilliard(const Mesh2D& mesh, CahnHilliardParams params) {
  if (!(params.eps > 0) || !(params.sigma >= 0)) {
    throw Error(ErrorCode::InvalidArgument, "build_cahn_hilliard: eps > 0 and sigma >= 0 required");
  }
  CahnHilliardModel ch;
  ch.mesh = mesh;
  ch.fem = assemble_matrices(mesh);
  ch.params = params;
  ch.energy = std::make_shared<const CahnHilliardEnergy>(mesh, ch.fem, params);
  auto solver = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  solver->compute(Eigen::SparseMatrix<double>(ch.fem.M));
  if (solver->info() != Eigen::Success) throw Error(ErrorCode::NotSPD, "mass matrix factorization");
  ch.mass_solver = solver;

  const Index n = mesh.num_nodes();
  std::vector<Triplet> jt, rt;
  for (Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(ch.fem.M, i); it; ++it) {
      jt.emplace_back(i, n + it.col(), it.value());
      jt.emplace_back(n + i, it.col(), -it.value());
    }
    for (SparseMatrix::InnerIterator it(ch.fem.K, i); it; ++it) rt.emplace_back(n + i, n + it.col(), params.sigma * it.value());
  }
  LinearBlockOperators ops;
  ops.n1 = n;
  ops.n2 = 0;
  ops.n3 = n;
  ops.Jbar.resize(2 * n, 2 * n);
  ops.Jbar.setFromTriplets(jt.begin(), jt.end());
  ops.Rbar.resize(2 * n, 2 * n);
  ops.Rbar.setFromTriplets(rt.begin(), rt.end());

  auto energy = ch.energy;
  auto hamiltonian = [energy](const Vector& c1, const Vector&) { return energy->value(c1); };
  auto grad1 = [energy](const Vector& c1, const Vector&) -> Vector { return energy->gradient(c1); };
  auto grad2 = [](const Vector&, const Vector&) -> Vector { return Vector(0); };
  auto hessian = [energy](const Vector& c1, const Vector&) -> SparseMatrix { return energy->hessian(c1); };
  ch.model = from_linear_blocks(ops, hamiltonian, grad1, grad2, hessian, "cahn-hilliard");

  // The boundary input is applied matrix-free: B u = (eps Mb u2, sigma Mb u1).
  const SparseMatrix Mb = ch.fem.Mb;
  const double eps = params.eps, sigma = params.sigma;
  ch.model.input_dim = 2 * n;
  ch.model.apply_B = [Mb, eps, sigma, n](const Vector& u, double) -> Vector {
    Vector out(2 * n);
    out.head(n) = eps * (Mb * u.tail(n));
    out.tail(n) = sigma * (Mb * u.head(n));
    return out;
  };
  return ch;
}

Excitation neumann_excitation(const CahnHilliardModel& ch, BoundaryData u1, BoundaryData u2) {
  const Matrix nodes = ch.mesh.nodes;
  Excitation exc;
  exc.input = [nodes, u1 = std::move(u1), u2 = std::move(u2)](double t) -> Vector {
    const Index n = nodes.rows();
    Vector u = Vector::Zero(2 * n);
    for (Index i = 0; i < n; ++i) {
      if (u1) u(i) = u1(t, nodes(i, 0), nodes(i, 1));
      if (u2) u(n + i) = u2(t, nodes(i, 0), nodes(i, 1));
    }
    return u;
  };
  return exc;
}

InitialState make_consistent_initial(const CahnHilliardModel& ch, const Vector& c1, const Vector& u2_nodal) {
  const Index n = ch.nodes();
  if (c1.size() != n) throw Error(ErrorCode::DimensionMismatch, "make_consistent_initial: c1 length");
  Vector rhs = ch.energy->gradient(c1);
  if (u2_nodal.size() == n) rhs -= ch.params.eps * (ch.fem.Mb * u2_nodal);
  return {c1, Vector(0), ch.solve_mass(rhs)};
}

namespace {

// Uniform double in [-1, 1) from the top 53 bits, independent of the
// standard library's distribution implementations.
double signed_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

}  // namespace

Vector fractal_noise_initial(const Mesh2D& mesh, std::uint64_t seed, int octaves, double amplitude) {
  if (octaves < 1) throw Error(ErrorCode::InvalidArgument, "fractal_noise_initial: octaves >= 1");
  std::mt19937_64 rng(seed);
  const Index n = mesh.num_nodes();
  Vector noise = Vector::Zero(n);
  for (int o = 0; o < octaves; ++o) {
    const Index freq = Index{1} << o;
    Matrix lattice(freq + 1, freq + 1);
    for (Index j = 0; j <= freq; ++j)
      for (Index i = 0; i <= freq; ++i) lattice(i, j) = signed_unit(rng);
    const double weight = std::ldexp(1.0, -o);
    for (Index v = 0; v < n; ++v) {
      const double gx = mesh.nodes(v, 0) * static_cast<double>(freq);
      const double gy = mesh.nodes(v, 1) * static_cast<double>(freq);
      const Index i0 = std::min<Index>(static_cast<Index>(std::floor(gx)), freq - 1);
      const Index j0 = std::min<Index>(static_cast<Index>(std::floor(gy)), freq - 1);
      const double tx = gx - static_cast<double>(i0), ty = gy - static_cast<double>(j0);
      const double value = (1 - tx) * (1 - ty) * lattice(i0, j0) + tx * (1 - ty) * lattice(i0 + 1, j0) +
                           (1 - tx) * ty * lattice(i0, j0 + 1) + tx * ty * lattice(i0 + 1, j0 + 1);
      noise(v) += weight * value;
    }
  }
  const double lo = noise.minCoeff(), hi = noise.maxCoeff();
  if (!(hi > lo) || amplitude == 0.0) return Vector::Zero(n);
  return ((noise.array() - lo) / (hi - lo) * 2.0 * amplitude - amplitude).matrix();
}

ManufacturedProblem manufactured_problem(const CahnHilliardModel& ch) {
  const Index n = ch.nodes();
  Vector base(n);
  for (Index i = 0; i < n; ++i) {
    const double dx = ch.mesh.nodes(i, 0) - 0.5, dy = ch.mesh.nodes(i, 1) - 0.5;
    base(i) = 2.0 * std::exp(-25.0 * dx * dx - 25.0 * dy * dy) - 1.0;
  }
  auto shared = std::make_shared<const CahnHilliardModel>(ch);
  StateSignal target = [shared, base](double t) -> StateValue {
    const Vector c1 = (std::sin(t) / 10.0 + 1.0) * base;
    return {c1, Vector(0), shared->solve_mass(shared->energy->gradient(c1))};
  };
  StateSignal rate = [base, n](double t) -> StateValue {
    return {(std::cos(t) / 10.0) * base, Vector(0), Vector::Zero(n)};
  };
  return make_manufactured(ch.model, target, rate, {});
}

void write_nodal_csv(std::ostream& out, const Mesh2D& mesh, const Vector& values) {
  if (values.size() != mesh.num_nodes()) throw Error(ErrorCode::DimensionMismatch, "write_nodal_csv: values length");
  const auto old_precision = out.precision(17);
  out << "x,y,value\n";
  for (Index i = 0; i < mesh.num_nodes(); ++i) out << mesh.nodes(i, 0) << ',' << mesh.nodes(i, 1) << ',' << values(i) << '\n';
  out.precision(old_precision);
}

}  // namespace ebm::fem
