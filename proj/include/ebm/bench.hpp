#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ebm/circuit.hpp"
#include "ebm/fem2d.hpp"
#include "ebm/manufactured.hpp"
#include "ebm/timestepper.hpp"

namespace ebm {

/// Relative state errors: max over the grid of ||z - z_ref||, divided by the
/// max of ||z_ref||, for the non-algebraic blocks (z1, z2) and for all blocks.
struct StateErrors {
  double nonalgebraic = 0;
  double full = 0;
};

StateErrors state_errors(const StateSignal& reference, const StateSignal& computed, const std::vector<double>& grid);
StateErrors state_errors(const StateSignal& reference, const Trajectory& computed, const std::vector<double>& grid);

/// Uniform points on [t0, t1] with step at most tau_min / 8.
std::vector<double> reference_grid(double t0, double t1, double tau_min);

struct SlopeFit {
  double slope = 0;
  double intercept = 0;        // log(e) = slope log(tau) + intercept
  Index points = 0;
  bool dropped_coarsest = false;
};

/// Least squares in log-log. The coarsest point is dropped when its error
/// exceeds 0.5. Needs at least three usable points.
SlopeFit fit_slope(std::vector<double> taus, std::vector<double> errors);

struct ConvergencePoint {
  double tau = 0;
  StateErrors errors;
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;  // ordered as the input taus
  SlopeFit nonalgebraic;
  SlopeFit full;
};

using RunOne = std::function<Trajectory(double tau)>;

/// Runs one solve per step size (concurrently when `parallel`) and fits both
/// error slopes against the target on the reference grid of the smallest
/// step. Failures are rethrown with the step size attached.
ConvergenceResult convergence_study(const RunOne& run, const StateSignal& target, double t0, double T,
                                    const std::vector<double>& taus, bool parallel = true);

struct EnergyAuditRow {
  Index j = 0;
  double t = 0;
  double H = 0;
  double lhs = 0;
  double rhs = 0;
  double abs_err = 0;
  double rel_err = 0;
};

/// Energy-balance errors |lhs - rhs| normalized by max_j |lhs_j|. When every
/// increment vanishes (below 1e-13 max(1, |H|)) the rows carry absolute
/// errors and `degenerate` is set.
struct EnergyAuditReport {
  std::vector<EnergyAuditRow> rows;
  double normalization = 0;
  double max_abs = 0;
  double max_rel = 0;
  bool degenerate = false;

  /// max_rel, or DegenerateNormalization when no normalization exists.
  double max_relative() const;
};

EnergyAuditReport energy_audit_report(const std::vector<EnergyAuditEntry>& audit);

/// Recomputes the audit from the trajectory alone with fresh quadrature and
/// projections, independent of the stepper's residual code.
std::vector<EnergyAuditEntry> recompute_audit(const EnergyModel& model, const Trajectory& trajectory,
                                              const Excitation& excitation, const SchemeParams& params);

/// Largest |difference| of lhs and rhs between two audits of the same grid.
double audit_discrepancy(const std::vector<EnergyAuditEntry>& a, const std::vector<EnergyAuditEntry>& b);

void write_audit_csv(std::ostream& out, const EnergyAuditReport& report);
void write_convergence_csv(std::ostream& out, const ConvergenceResult& result);

/// Model and run parameters, loadable from JSON.
struct RunConfig {
  std::string model = "acdc";

  // scheme; n_q / n_pi <= 0 select the model default
  Index k = 2;
  Index n_q = 0;
  Index n_pi = 0;
  Index newton_iters = 10;
  double newton_tol = 0.0;

  // grid
  double T = 1.0;
  double tau = 1e-2;
  std::vector<double> tau_list;

  // circuit
  double q0 = 1.0;
  double i0 = 1.0;

  // Cahn-Hilliard
  Index N = 10;
  double eps = 0.1;
  double sigma = 1.0;
  std::uint64_t seed = 42;
  int octaves = 4;
  double amplitude = 0.8;

  // reduction and validation
  Index r1 = 5;
  Index r2 = 0;
  Index r3 = 5;
  Index samples = 1000;

  std::string out = "out";

  SchemeParams scheme() const;
  void validate() const;
};

/// Reads a JSON object; unknown keys and wrong types raise InvalidArgument.
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {});
std::string to_json(const RunConfig& config);

/// Everything needed to run a registered model.
struct ModelSetup {
  EnergyModel model;
  InitialState initial;
  Excitation excitation;
  std::optional<ManufacturedProblem> manufactured;
  std::shared_ptr<const fem::CahnHilliardModel> cahn_hilliard;  // set for "cahn-hilliard"
};

/// "acdc" or "cahn-hilliard".
ModelSetup build_model_setup(const RunConfig& config);
std::vector<std::string> registered_models();

}  // namespace ebm
