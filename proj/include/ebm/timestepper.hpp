#pragma once

#include <iosfwd>
#include <vector>

#include "ebm/model.hpp"
#include "ebm/projection.hpp"
#include "ebm/segment.hpp"

namespace ebm {

/// Time points t_0 < t_1 < ... < t_m.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  /// Uniform grid on [t0, t0 + T] with step tau; tau must divide T.
  static TimeGrid uniform(double T, double tau, double t0 = 0.0);

  const std::vector<double>& points() const { return points_; }
  Index intervals() const { return static_cast<Index>(points_.size()) - 1; }
  double start() const { return points_.front(); }
  double end() const { return points_.back(); }
  double max_step() const;

 private:
  std::vector<double> points_;
};

enum class FirstGuess {
  Ones,          // constant one vector for the algebraic block
  InitialState,  // the supplied initial z3
};

struct SchemeParams {
  Index k = 1;          // polynomial degree of the ansatz space
  Index n_q = 2;        // nodes of the right-hand side quadrature Q_j
  Index n_pi = 2;       // nodes of the projection quadrature
  Index newton_iters = 10;
  double newton_tol = 0.0;  // early exit once ||residual|| < newton_tol
  bool finite_difference_jacobian = false;
  FirstGuess first_guess = FirstGuess::Ones;

  /// n_q = k + 1, n_pi = 2k.
  static SchemeParams for_degree(Index k);
  void validate() const;
};

/// Input u(t) plus an optional additive forcing g(t) on the full residual.
struct Excitation {
  TimeSignal input;
  TimeSignal forcing;

  Vector u(const EnergyModel& model, double t) const;
  Vector rhs(const EnergyModel& model, double t) const;
};

struct Segment {
  PolySegment z1;
  PolySegment z2;
  PolySegment z3;

  double a() const { return z1.a; }
  double b() const { return z1.b; }
};

struct NewtonReport {
  Index iterations = 0;
  double initial_residual = 0;
  double final_residual = 0;
  // Residual left outside the range of the Jacobian (the step is then a
  // least-squares solution). Only set when final_residual is not small.
  double inconsistency = 0;
};

/// One row of the energy audit: lhs = H(t_j) - H(t_{j-1}) and
/// rhs = Q_j(-<R zeta, zeta> + <B u + g, zeta>).
struct EnergyAuditEntry {
  Index j = 0;
  double t = 0;
  double H = 0;
  double lhs = 0;
  double rhs = 0;
  double dissipation = 0;  // Q_j(<R zeta, zeta>)
  double supply = 0;       // Q_j(<B u + g, zeta>)
};

struct StepStart {
  Vector z1;
  Vector z2;
};

struct StepResult {
  Segment segment;
  NewtonReport newton;
  EnergyAuditEntry audit;
};

/// Number of free coefficients on one interval: k n1 + k n2 + (k+1) n3.
Index step_unknowns(const EnergyModel& model, Index k);

/// Residual of the localized scheme on [a, b]. The unknowns hold, in order,
/// the coefficients 1..k of z1 and of z2 (coefficient 0 follows from the
/// start value) and the coefficients 0..k of z3, each block column-major
/// with one column per basis index.
Vector assemble_residual(const EnergyModel& model, double a, double b, const StepStart& start,
                         const Vector& unknowns, const Excitation& excitation, const SchemeParams& params);

/// Unknown vector of the segment (inverse of the parameterization).
Vector segment_unknowns(const Segment& segment);

/// Solves one interval with Newton's method, starting from the start values
/// extended as constants and z3 = z3_guess.
StepResult step(const EnergyModel& model, double a, double b, const StepStart& start, const Vector& z3_guess,
                const Excitation& excitation, const SchemeParams& params);

struct StateValue {
  Vector z1;
  Vector z2;
  Vector z3;

  Vector stacked() const;
  Vector non_algebraic() const;
};

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(TimeGrid grid, std::vector<Segment> segments);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Evaluates the local polynomials; at interior grid points z3 takes the
  /// limit from the left interval.
  StateValue eval(double t) const;

 private:
  TimeGrid grid_{std::vector<double>{0.0, 1.0}};
  std::vector<Segment> segments_;
};

struct InitialState {
  Vector z1;
  Vector z2;
  Vector z3;
};

struct SolveResult {
  Trajectory trajectory;
  std::vector<EnergyAuditEntry> audit;
  std::vector<NewtonReport> newton;
  double H0 = 0;
};

/// Sequential time stepping over the whole grid.
SolveResult solve(const EnergyModel& model, const TimeGrid& grid, const InitialState& initial,
                  const Excitation& excitation, const SchemeParams& params);

/// CSV rows (t, block, component, value) on the given output times.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const std::vector<double>& times);

}  // namespace ebm
