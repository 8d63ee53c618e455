#include "ebm/manufactured.hpp"

#include <memory>

namespace ebm {

TimeSignal manufactured_forcing(const EnergyModel& model, StateSignal target, StateSignal target_rate, TimeSignal input) {
  auto shared = std::make_shared<const EnergyModel>(model);
  return [shared, target = std::move(target), target_rate = std::move(target_rate),
          input = std::move(input)](double t) -> Vector {
    const EnergyModel& m = *shared;
    const StateValue z = target(t);
    const StateValue dz = target_rate(t);
    Vector lhs = Vector::Zero(m.n());
    Vector arg(m.n());
    if (m.n1 > 0) {
      lhs.head(m.n1) = m.grad1(z.z1, z.z2);
      arg.head(m.n1) = dz.z1;
    }
    if (m.n2 > 0) {
      lhs.segment(m.n1, m.n2) = dz.z2;
      arg.segment(m.n1, m.n2) = m.grad2(z.z1, z.z2);
    }
    if (m.n3 > 0) arg.tail(m.n3) = z.z3;
    const Vector u = input ? input(t) : Vector::Zero(m.input_dim);
    return lhs - (m.apply_J(arg) - m.apply_R(arg)) - m.input(u, t);
  };
}

ManufacturedProblem make_manufactured(const EnergyModel& model, StateSignal target, StateSignal target_rate,
                                      TimeSignal input, double t0) {
  ManufacturedProblem problem;
  problem.target = target;
  problem.target_rate = target_rate;
  problem.excitation.input = input;
  problem.excitation.forcing = manufactured_forcing(model, target, target_rate, input);
  const StateValue z0 = target(t0);
  problem.initial = {z0.z1, z0.z2, z0.z3};
  return problem;
}

}  // namespace ebm
