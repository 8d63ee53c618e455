// Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
// the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ebm/bench.hpp"
#include "ebm/pod.hpp"
#include "oracles.hpp"

using namespace ebm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

Outcome guarded(const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

bool monotone(double H0, const std::vector<EnergyAuditEntry>& audit, double tol) {
  double prev = H0;
  for (const auto& e : audit) {
    if (e.H > prev + tol) return false;
    prev = e.H;
  }
  return true;
}

std::vector<double> dyadic(int first, int last) {
  std::vector<double> taus;
  for (int e = first; e <= last; ++e) taus.push_back(std::ldexp(1.0, -e));
  return taus;
}

// The Cahn-Hilliard setting shared by criteria 4, 6 and 7.
SchemeParams ch_scheme(Index k, Index n_q, Index n_pi) {
  SchemeParams p;
  p.k = k;
  p.n_q = n_q;
  p.n_pi = n_pi;
  p.newton_tol = 1e-13;
  return p;
}

RunConfig ch_config() {
  RunConfig c;
  c.model = "cahn-hilliard";
  return c;
}

struct ChRun {
  ModelSetup setup;
  SolveResult result;
  double seconds = 0;
};

// ---------------------------------------------------------------------------

Outcome oracle_equivalences() {
  double gauss = 0;
  for (int n = 1; n <= 24; ++n) {
    const auto rule = gauss_rule<double>(n);
    const auto ref = oracle::gauss_by_bisection(n);
    for (int i = 0; i < n; ++i) {
      gauss = std::max({gauss, std::abs(rule.nodes(i) - ref.nodes[i]), std::abs(rule.weights(i) - ref.weights[i])});
    }
  }

  double projection = 0;
  for (int k = 1; k <= 5; ++k) {
    for (int m = 0; m <= 2 * k; ++m) {
      const double a = 0.3, b = 0.8;
      TimeSignal f = [m](double t) { return Vector::Constant(1, std::pow(t, m)); };
      const auto p = project(f, 1, a, b, k, (m + k) / 2 + 1);
      for (double t : {0.3, 0.41, 0.55, 0.72, 0.8}) {
        projection = std::max(projection, std::abs(p.value(t)(0) - oracle::project_monomial(m, k, a, b, t)));
      }
    }
  }

  // lam z = -r z' + u as a one-block gradient system
  const double lam = 1.7, r = 0.6, tau = 0.05;
  const int steps = 20;
  LinearBlockOperators ops;
  ops.n1 = 1;
  ops.Jbar = SparseMatrix(1, 1);
  ops.Rbar = to_sparse(Matrix::Constant(1, 1, r));
  ops.Bbar = Matrix::Ones(1, 1);
  const EnergyModel m = from_linear_blocks(
      ops, [lam](const Vector& z, const Vector&) { return 0.5 * lam * z.squaredNorm(); },
      [lam](const Vector& z, const Vector&) -> Vector { return lam * z; },
      [](const Vector&, const Vector&) -> Vector { return Vector(0); },
      [lam](const Vector&, const Vector&) -> SparseMatrix { return to_sparse(Matrix::Constant(1, 1, lam)); });
  auto u = [](double t) { return std::cos(2 * t) + t; };
  Excitation exc;
  exc.input = [u](double t) { return Vector::Constant(1, u(t)); };
  double collocation = 0;
  for (Index k = 1; k <= 4; ++k) {
    SchemeParams p = SchemeParams::for_degree(k);
    p.n_q = k;
    const auto res = solve(m, TimeGrid::uniform(steps * tau, tau), {Vector::Constant(1, 0.4), Vector(0), Vector(0)}, exc, p);
    const auto ref = oracle::gauss_collocation(static_cast<int>(k), lam, r, u, 0.4, tau, steps);
    for (int j = 0; j <= steps; ++j) {
      collocation = std::max(collocation, std::abs(res.trajectory.eval(j * tau).z1(0) - ref.grid_values[j]));
    }
    for (std::size_t i = 0; i < ref.node_times.size(); ++i) {
      collocation = std::max(collocation, std::abs(res.trajectory.eval(ref.node_times[i]).z1(0) - ref.node_values[i]));
    }
  }
  const bool pass = gauss <= 1e-13 && projection <= 1e-12 && collocation <= 1e-10;
  return {pass, "gauss " + fmt("%.2e", gauss) + ", projection " + fmt("%.2e", projection) + ", collocation " +
                    fmt("%.2e", collocation)};
}

Outcome circuit_energy_balance() {
  Clock clock;
  const auto c = circuit::build_circuit();
  Excitation exc;
  exc.input = circuit::default_source();
  const InitialState init = circuit::consistent_initial(c, 1.0, 1.0, exc.input(0.0)(0));
  double worst = 0, discrepancy = 0;
  for (Index k = 1; k <= 3; ++k) {
    const auto p = SchemeParams::for_degree(k);
    const auto res = solve(c.model, TimeGrid::uniform(10.0, 0.01), init, exc, p);
    worst = std::max(worst, energy_audit_report(res.audit).max_relative());
    discrepancy = std::max(discrepancy, audit_discrepancy(res.audit, recompute_audit(c.model, res.trajectory, exc, p)));
  }
  const double s = clock.seconds();
  return {worst <= 1e-11 && s < 60, "max relative error " + fmt("%.2e", worst) + ", independent audit agrees to " +
                                        fmt("%.1e", discrepancy) + ", " + fmt("%.1f", s) + " s"};
}

Outcome circuit_convergence() {
  Clock clock;
  const auto c = circuit::build_circuit();
  const auto problem = circuit::manufactured_problem(c);
  bool pass = true;
  std::ostringstream detail;
  for (Index k = 1; k <= 3; ++k) {
    const auto p = SchemeParams::for_degree(k);
    RunOne run = [&](double tau) {
      return solve(c.model, TimeGrid::uniform(1.0, tau), problem.initial, problem.excitation, p).trajectory;
    };
    const auto result = convergence_study(run, problem.target, 0.0, 1.0, dyadic(3, 7));
    const double kk = static_cast<double>(k);
    pass = pass && std::abs(result.nonalgebraic.slope - (kk + 1)) <= 0.25 && std::abs(result.full.slope - kk) <= 0.25;
    detail << "k=" << k << " slopes " << fmt("%.2f", result.nonalgebraic.slope) << "/" << fmt("%.2f", result.full.slope)
           << "; ";
  }
  const double s = clock.seconds();
  detail << fmt("%.1f", s) << " s";
  return {pass && s < 300, detail.str()};
}

Outcome ch_dissipation(const ChRun& run) {
  const auto& fem = run.setup.cahn_hilliard->fem;
  const Vector one = Vector::Ones(run.setup.model.n1);
  const double mass0 = one.dot(fem.M * run.setup.initial.z1);
  double drift = 0;
  for (double t : run.result.trajectory.grid().points()) {
    drift = std::max(drift, std::abs(one.dot(fem.M * run.result.trajectory.eval(t).z1) - mass0));
  }
  const double audit = energy_audit_report(run.result.audit).max_relative();
  const bool mono = monotone(run.result.H0, run.result.audit, 1e-11);
  const bool pass = mono && audit <= 1e-10 && drift <= 1e-10 && run.seconds < 600;
  return {pass, std::string(mono ? "H nonincreasing" : "H increases") + ", max relative error " + fmt("%.2e", audit) +
                    ", mass drift " + fmt("%.1e", drift) + ", H " + fmt("%.4f", run.result.H0) + " -> " +
                    fmt("%.4f", run.result.audit.back().H) + ", " + fmt("%.1f", run.seconds) + " s"};
}

Outcome ch_convergence() {
  Clock clock;
  const ModelSetup setup = build_model_setup(ch_config());
  const auto& problem = *setup.manufactured;
  const double T = 0.25;
  bool pass = true;
  std::ostringstream detail;
  for (Index k = 1; k <= 2; ++k) {
    SchemeParams p = ch_scheme(k, 2 * k, 2 * k);
    p.newton_tol = 1e-12;
    RunOne run = [&](double tau) {
      return solve(setup.model, TimeGrid::uniform(T, tau), problem.initial, problem.excitation, p).trajectory;
    };
    const auto result = convergence_study(run, problem.target, 0.0, T, dyadic(6, 10));
    pass = pass && std::abs(result.nonalgebraic.slope - static_cast<double>(k + 1)) <= 0.25;
    detail << "k=" << k << " slope " << fmt("%.2f", result.nonalgebraic.slope) << "; ";
  }
  const double s = clock.seconds();
  detail << fmt("%.1f", s) << " s";
  return {pass && s < 600, detail.str()};
}

Outcome projection_sensitivity(const ChRun& reference_setup) {
  Clock clock;
  const ModelSetup& setup = reference_setup.setup;
  const TimeGrid grid = TimeGrid::uniform(1.5, 0.01);
  const auto coarse = solve(setup.model, grid, setup.initial, {}, ch_scheme(2, 4, 2));
  const auto fine = solve(setup.model, grid, setup.initial, {}, ch_scheme(2, 4, 4));
  const double e_coarse = energy_audit_report(coarse.audit).max_relative();
  const double e_fine = energy_audit_report(fine.audit).max_relative();
  const double ratio = e_coarse / e_fine;
  return {ratio >= 1e4, "n_pi=2 " + fmt("%.2e", e_coarse) + " vs n_pi=4 " + fmt("%.2e", e_fine) + " (ratio " +
                            fmt("%.1e", ratio) + "), " + fmt("%.1f", clock.seconds()) + " s"};
}

struct MorOutcome {
  Outcome outcome;
  EnergyModel reduced;
  EnergyModel full_basis;
};

MorOutcome model_reduction(const ChRun& run) {
  MorOutcome out;
  out.outcome = guarded([&]() -> Outcome {
    Clock clock;
    const ModelSetup& setup = run.setup;
    const SchemeParams p = ch_scheme(3, 6, 6);
    const ReducedBasis basis = pod_reduced_basis(collect_snapshots(run.result.trajectory), 5, 0, 5);
    out.reduced = reduce_model(setup.model, basis);
    const ValidationReport structure = validate_structure(out.reduced, 1000, 11);
    const auto red = solve(out.reduced, run.result.trajectory.grid(), project_initial(basis, setup.initial), {}, p);
    const double audit = energy_audit_report(red.audit).max_relative();
    const bool mono = monotone(red.H0, red.audit, 1e-11);
    const double gap = std::abs(red.H0 - run.result.H0) / std::abs(run.result.H0);

    // full basis: random orthogonal V of size n for both blocks
    const ReducedBasis full{random_orthogonal(setup.model.n1, 5), Matrix(0, 0), random_orthogonal(setup.model.n3, 6)};
    out.full_basis = reduce_model(setup.model, full);
    const TimeGrid short_grid = TimeGrid::uniform(0.1, 0.01);
    const auto a = solve(setup.model, short_grid, setup.initial, {}, p);
    const auto b = solve(out.full_basis, short_grid, project_initial(full, setup.initial), {}, p);
    double mismatch = 0;
    for (double t : short_grid.points()) {
      mismatch = std::max(mismatch, (a.trajectory.eval(t).stacked() - lift(full, b.trajectory.eval(t)).stacked())
                                        .cwiseAbs()
                                        .maxCoeff());
    }
    const bool pass = structure.ok() && audit <= 1e-10 && mono && gap <= 1e-2 && mismatch <= 1e-9;
    return {pass, std::string("r=5: structure ") + (structure.ok() ? "ok" : "violated") + ", max relative error " +
                      fmt("%.2e", audit) + (mono ? ", H~ nonincreasing" : ", H~ increases") + ", H0 gap " +
                      fmt("%.2e", gap) + "; full basis mismatch " + fmt("%.1e", mismatch) + ", " +
                      fmt("%.1f", clock.seconds()) + " s"};
  });
  return out;
}

Outcome structure_validation(const ModelSetup& ch, const MorOutcome& mor) {
  const auto c = circuit::build_circuit();
  const ReducedBasis circuit_basis{random_orthogonal(1, 3), Matrix(0, 0), random_orthogonal(5, 4)};
  const EnergyModel reduced_circuit = reduce_model(c.model, circuit_basis);

  std::vector<std::pair<std::string, const EnergyModel*>> models = {
      {"circuit", &c.model}, {"cahn-hilliard", &ch.model}, {"reduced circuit", &reduced_circuit}};
  if (mor.reduced.n() > 0) models.emplace_back("reduced cahn-hilliard r=5", &mor.reduced);
  if (mor.full_basis.n() > 0) models.emplace_back("reduced cahn-hilliard full basis", &mor.full_basis);
  if (models.size() < 5) return {false, "reduced Cahn-Hilliard models unavailable"};

  Clock clock;
  bool pass = true;
  double skew = 0, dissipation = 0, gradient = 0;
  std::string failing;
  for (const auto& [name, model] : models) {
    const ValidationReport r = validate_structure(*model, 1000, 2024);
    skew = std::max(skew, r.max_abs_skew);
    dissipation = std::min(dissipation, r.min_dissipation);
    gradient = std::max(gradient, r.max_gradient_mismatch);
    if (!r.ok()) {
      pass = false;
      failing += " " + name;
    }
  }
  const double s = clock.seconds();
  return {pass && s < 10, std::to_string(models.size()) + " models, max |v'Jv| " + fmt("%.1e", skew) + ", min v'Rv " +
                              fmt("%.1e", dissipation) + ", gradient mismatch " + fmt("%.1e", gradient) + ", " +
                              fmt("%.1f", s) + " s" + (failing.empty() ? "" : ", failing:" + failing)};
}

}  // namespace

int main() {
  std::vector<Outcome> outcomes(9);
  auto note = [](int id) { std::cerr << "running criterion " << id << "\n"; };

  note(8);
  outcomes[8] = guarded(oracle_equivalences);
  note(2);
  outcomes[2] = guarded(circuit_energy_balance);
  note(3);
  outcomes[3] = guarded(circuit_convergence);

  note(4);
  ChRun ch;
  outcomes[4] = guarded([&] {
    Clock clock;
    ch.setup = build_model_setup(ch_config());
    ch.result = solve(ch.setup.model, TimeGrid::uniform(1.5, 0.01), ch.setup.initial, {}, ch_scheme(3, 6, 6));
    ch.seconds = clock.seconds();
    return ch_dissipation(ch);
  });
  const bool have_ch = !ch.result.audit.empty();

  note(7);
  MorOutcome mor;
  if (have_ch) mor = model_reduction(ch);
  else mor.outcome = {false, "no full-order Cahn-Hilliard run"};
  outcomes[7] = mor.outcome;

  note(1);
  outcomes[1] = guarded([&] {
    const ModelSetup setup = have_ch ? ch.setup : build_model_setup(ch_config());
    return structure_validation(setup, mor);
  });

  note(5);
  outcomes[5] = guarded(ch_convergence);
  note(6);
  outcomes[6] = guarded([&] {
    if (!have_ch) ch.setup = build_model_setup(ch_config());
    return projection_sensitivity(ch);
  });

  const char* names[] = {"",
                         "structure validation",
                         "circuit energy balance",
                         "circuit convergence orders",
                         "Cahn-Hilliard dissipation",
                         "Cahn-Hilliard convergence",
                         "projection under-resolution",
                         "model reduction",
                         "oracle equivalences"};
  int failures = 0;
  for (int id = 1; id <= 8; ++id) {
    const Outcome& o = outcomes[id];
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << names[id] << "): " << o.detail << "\n";
  }
  return failures;
}
