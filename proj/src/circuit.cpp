#include "ebm/circuit.hpp"

#include <cmath>
#include <memory>

namespace ebm::circuit {

double capacitor_energy(double q) { return 0.5 * q * q + 0.5 * q * q * q * q; }
double capacitor_gradient(double q) { return q + 2 * q * q * q; }

CircuitModel build_circuit() {
  CircuitModel c;
  c.A_C.resize(4, 1);
  c.A_C << 0, -1, 0, 1;
  c.A_S.resize(4, 1);
  c.A_S << -1, 0, 0, 0;
  c.A_R.resize(4, 5);
  c.A_R << 1, 0, 0, 0, 0,
           0, 0, 1, 0, 1,
           0, 0, 0, -1, 0,
           0, -1, 0, 0, -1;
  c.G = Matrix::Identity(5, 5);

  c.A = Matrix::Zero(6, 6);
  c.A.block(0, 2, 1, 4) = c.A_C.transpose();
  c.A.block(1, 2, 1, 4) = c.A_S.transpose();
  c.A.block(2, 0, 4, 1) = -c.A_C;
  c.A.block(2, 1, 4, 1) = -c.A_S;
  c.A.block(2, 2, 4, 4) = -c.A_R * c.G * c.A_R.transpose();

  LinearBlockOperators ops;
  ops.n1 = 1;
  ops.n2 = 0;
  ops.n3 = 5;
  ops.Jbar = to_sparse(0.5 * (c.A - c.A.transpose()));
  ops.Rbar = to_sparse(-0.5 * (c.A + c.A.transpose()));
  ops.Bbar = Matrix::Zero(6, 1);
  ops.Bbar(1, 0) = -1;

  auto hamiltonian = [](const Vector& c1, const Vector&) { return capacitor_energy(c1(0)); };
  auto grad1 = [](const Vector& c1, const Vector&) -> Vector { return Vector::Constant(1, capacitor_gradient(c1(0))); };
  auto grad2 = [](const Vector&, const Vector&) -> Vector { return Vector(0); };
  auto hessian = [](const Vector& c1, const Vector&) -> SparseMatrix {
    SparseMatrix H(1, 1);
    H.insert(0, 0) = 1 + 6 * c1(0) * c1(0);
    return H;
  };
  c.model = from_linear_blocks(ops, hamiltonian, grad1, grad2, hessian, "acdc");
  return c;
}

namespace {

Matrix constraint_matrix(const CircuitModel& c) {
  Matrix A(2, 4);
  A.row(0) = c.A_C.transpose();
  A.row(1) = c.A_S.transpose();
  return A;
}

}  // namespace

InitialState consistent_initial(const CircuitModel& circuit, double q_C0, double i_S0, double u_S0) {
  const Vector rhs = (Vector(2) << capacitor_gradient(q_C0), u_S0).finished();
  const Vector phi0 = min_norm_solve(constraint_matrix(circuit), rhs);
  Vector z3(5);
  z3 << i_S0, phi0;
  return {Vector::Constant(1, q_C0), Vector(0), z3};
}

TimeSignal default_source() {
  return [](double t) -> Vector { return Vector::Constant(1, std::sin(t) - 1); };
}

ManufacturedProblem manufactured_problem(const CircuitModel& circuit) {
  auto constraints = std::make_shared<const Matrix>(constraint_matrix(circuit));
  StateSignal target = [constraints](double t) -> StateValue {
    const double q = std::cos(t);
    const Vector rhs = (Vector(2) << capacitor_gradient(q), std::sin(t) - 1).finished();
    Vector z3(5);
    z3 << std::sin(t), min_norm_solve(*constraints, rhs);
    return {Vector::Constant(1, q), Vector(0), z3};
  };
  // The minimum-norm solve is linear in its right-hand side, so the rate of
  // phi solves the same system with differentiated data.
  StateSignal rate = [constraints](double t) -> StateValue {
    const double q = std::cos(t);
    const double dq = -std::sin(t);
    const Vector rhs = (Vector(2) << (1 + 6 * q * q) * dq, std::cos(t)).finished();
    Vector z3(5);
    z3 << std::cos(t), min_norm_solve(*constraints, rhs);
    return {Vector::Constant(1, dq), Vector(0), z3};
  };
  return make_manufactured(circuit.model, target, rate, default_source());
}

}  // namespace ebm::circuit
