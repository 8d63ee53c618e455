#pragma once

#include <functional>

#include "ebm/timestepper.hpp"

namespace ebm {

using StateSignal = std::function<StateValue(double)>;

/// Target trajectory with the forcing that makes it an exact solution.
struct ManufacturedProblem {
  StateSignal target;       // (z1, z2, z3)(t)
  StateSignal target_rate;  // time derivatives (z3 entry unused)
  Excitation excitation;    // input u plus the forcing g
  InitialState initial;     // target at t0
};

/// g(t) = (grad1 H, d/dt z2, 0) - (J - R)(d/dt z1, grad2 H, z3) - B u(t)
/// evaluated along the target.
TimeSignal manufactured_forcing(const EnergyModel& model, StateSignal target, StateSignal target_rate, TimeSignal input);

/// Assembles the problem (forcing + initial state at t0) for a target.
ManufacturedProblem make_manufactured(const EnergyModel& model, StateSignal target, StateSignal target_rate,
                                      TimeSignal input, double t0 = 0.0);

}  // namespace ebm
