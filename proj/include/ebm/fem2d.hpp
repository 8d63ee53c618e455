#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "ebm/manufactured.hpp"
#include "ebm/model.hpp"
#include "ebm/polybasis.hpp"

namespace ebm::fem {

/// Uniform triangulation of the unit square with N x N cells, each cut along
/// the lower-left to upper-right diagonal. Node (i, j) sits at (i/N, j/N)
/// with index j (N+1) + i.
struct Mesh2D {
  Index N = 0;
  Matrix nodes;                              // (N+1)^2 x 2
  std::vector<std::array<Index, 3>> triangles;  // counter-clockwise
  std::vector<std::array<Index, 2>> boundary_edges;

  Index num_nodes() const { return nodes.rows(); }
  double triangle_area(Index t) const;
};

Mesh2D build_mesh(Index N);

struct FemMatrices {
  SparseMatrix M;   // mass
  SparseMatrix K;   // stiffness
  SparseMatrix Mb;  // boundary mass
};

FemMatrices assemble_matrices(const Mesh2D& mesh);

struct CahnHilliardParams {
  double eps = 0.1;    // interaction length
  double sigma = 1.0;  // mobility
};

/// Double-well potential W(v) = (v^2 - 1)^2 / 4.
inline double double_well(double v) { return 0.25 * (v * v - 1) * (v * v - 1); }
inline double double_well_derivative(double v) { return v * v * v - v; }
inline double double_well_second(double v) { return 3 * v * v - 1; }

/// The discrete energy H(c) = eps/2 c^T K c + 1/eps int W(v_h) and its
/// derivatives, with the W terms integrated by the degree-4 triangle rule.
class CahnHilliardEnergy {
 public:
  CahnHilliardEnergy(const Mesh2D& mesh, const FemMatrices& fem, CahnHilliardParams params);

  double value(const Vector& c) const;
  Vector gradient(const Vector& c) const;
  SparseMatrix hessian(const Vector& c) const;

 private:
  std::vector<std::array<Index, 3>> triangles_;
  Vector areas_;
  SparseMatrix K_;
  TriangleRule<double> rule_;
  CahnHilliardParams params_;
  Index n_;
};

/// Cahn-Hilliard with z = (v, -, w): J = [[0, M], [-M, 0]],
/// R = [[0, 0], [0, sigma K]], B u = (eps Mb u2, sigma Mb u1).
/// The input vector stacks nodal values of u1 and u2.
struct CahnHilliardModel {
  Mesh2D mesh;
  FemMatrices fem;
  CahnHilliardParams params;
  std::shared_ptr<const CahnHilliardEnergy> energy;
  std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> mass_solver;
  EnergyModel model;

  Index nodes() const { return mesh.num_nodes(); }
  Vector solve_mass(const Vector& rhs) const;
};

CahnHilliardModel build_cahn_hilliard(const Mesh2D& mesh, CahnHilliardParams params);

using BoundaryData = std::function<double(double t, double x, double y)>;

/// Excitation sampling u1 (flux of w) and u2 (flux of v) at the nodes.
Excitation neumann_excitation(const CahnHilliardModel& ch, BoundaryData u1, BoundaryData u2);

/// c3 solving M c3 = grad H(c1) - eps Mb u2 (the algebraic row at t0).
InitialState make_consistent_initial(const CahnHilliardModel& ch, const Vector& c1, const Vector& u2_nodal = Vector());

/// Seeded multi-octave value noise at the nodes, affinely mapped onto
/// [-amplitude, amplitude].
Vector fractal_noise_initial(const Mesh2D& mesh, std::uint64_t seed, int octaves, double amplitude);

/// v(t, x) = (sin(t)/10 + 1)(2 exp(-25|x - (1/2, 1/2)|^2) - 1) interpolated at
/// the nodes; w follows from the algebraic row.
ManufacturedProblem manufactured_problem(const CahnHilliardModel& ch);

/// CSV rows (x, y, value).
void write_nodal_csv(std::ostream& out, const Mesh2D& mesh, const Vector& values);

}  // namespace ebm::fem
