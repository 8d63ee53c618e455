#pragma once

#include "ebm/manufactured.hpp"
#include "ebm/model.hpp"

namespace ebm::circuit {

/// Nonlinear AC/DC converter: z1 = q_C, no z2 block, z3 = (i_S, phi) with
/// four node potentials. The capacitor stores H_C(q) = q^2/2 + q^4/2.
struct CircuitModel {
  EnergyModel model;
  Matrix A_C;  // 4 x 1
  Matrix A_S;  // 4 x 1
  Matrix A_R;  // 4 x 5
  Matrix G;    // 5 x 5 conductances
  Matrix A;    // 6 x 6 block operator, J = (A - A^T)/2, R = -(A + A^T)/2
};

double capacitor_energy(double q);
double capacitor_gradient(double q);

CircuitModel build_circuit();

/// (q_C0, i_S0, phi0) with phi0 the minimum-norm solution of
/// [A_C^T; A_S^T] phi0 = (H_C'(q_C0), u_S0).
InitialState consistent_initial(const CircuitModel& circuit, double q_C0, double i_S0, double u_S0);

/// Source voltage u_S(t) = sin(t) - 1.
TimeSignal default_source();

/// q_C = cos t, i_S = sin t, phi from the minimum-norm solve, u_S = sin t - 1.
ManufacturedProblem manufactured_problem(const CircuitModel& circuit);

}  // namespace ebm::circuit
