// Command line front end: structure validation, single runs, convergence
// studies, POD reduction and energy audits. Results go to CSV and JSON.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebm/bench.hpp"
#include "ebm/pod.hpp"

namespace fs = std::filesystem;
using namespace ebm;

namespace {

struct Flags {
  std::string model;
  std::string config_file;
  Index k = 0, n_q = 0, n_pi = 0, newton_iters = 0, N = 0, r1 = 0, r3 = 0, samples = 0;
  double T = 0, tau = 0, newton_tol = 0, eps = 0, sigma = 0, amplitude = 0;
  std::uint64_t seed = 0;
  int octaves = 0;
  std::vector<double> tau_list;
  std::string out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("model", f.model, "acdc | cahn-hilliard")->required();
  cmd->add_option("--config", f.config_file, "JSON run configuration; flags override it");
  cmd->add_option("--k", f.k, "polynomial degree");
  cmd->add_option("--nq", f.n_q, "right-hand side quadrature nodes");
  cmd->add_option("--npi", f.n_pi, "projection quadrature nodes");
  cmd->add_option("--newton-iters", f.newton_iters, "Newton iterations per step");
  cmd->add_option("--newton-tol", f.newton_tol, "early exit residual");
  cmd->add_option("--T", f.T, "time horizon");
  cmd->add_option("--tau", f.tau, "step size");
  cmd->add_option("--tau-list", f.tau_list, "step sizes for convergence studies");
  cmd->add_option("--N", f.N, "mesh subdivisions (cahn-hilliard)");
  cmd->add_option("--eps", f.eps, "interaction length (cahn-hilliard)");
  cmd->add_option("--sigma", f.sigma, "mobility (cahn-hilliard)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--octaves", f.octaves, "noise octaves (cahn-hilliard)");
  cmd->add_option("--amplitude", f.amplitude, "noise amplitude (cahn-hilliard)");
  cmd->add_option("--r1", f.r1, "reduced dimension of block 1");
  cmd->add_option("--r3", f.r3, "reduced dimension of block 3");
  cmd->add_option("--samples", f.samples, "random samples for validation");
  cmd->add_option("--out", f.out, "output directory");
}

RunConfig resolve(const CLI::App* cmd, const Flags& f) {
  RunConfig c;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + f.config_file);
    std::stringstream ss;
    ss << in.rdbuf();
    c = parse_run_config(ss.str());
  }
  auto given = [cmd](const char* name) { return cmd->get_option(name)->count() > 0; };
  c.model = f.model;
  if (given("--k")) c.k = f.k;
  if (given("--nq")) c.n_q = f.n_q;
  if (given("--npi")) c.n_pi = f.n_pi;
  if (given("--newton-iters")) c.newton_iters = f.newton_iters;
  if (given("--newton-tol")) c.newton_tol = f.newton_tol;
  if (given("--T")) c.T = f.T;
  if (given("--tau")) c.tau = f.tau;
  if (given("--tau-list")) c.tau_list = f.tau_list;
  if (given("--N")) c.N = f.N;
  if (given("--eps")) c.eps = f.eps;
  if (given("--sigma")) c.sigma = f.sigma;
  if (given("--seed")) c.seed = f.seed;
  if (given("--octaves")) c.octaves = f.octaves;
  if (given("--amplitude")) c.amplitude = f.amplitude;
  if (given("--r1")) c.r1 = f.r1;
  if (given("--r3")) c.r3 = f.r3;
  if (given("--samples")) c.samples = f.samples;
  if (given("--out")) c.out = f.out;
  c.validate();
  return c;
}

std::ofstream open_out(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  std::ofstream out(fs::path(c.out) / name);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (fs::path(c.out) / name).string());
  return out;
}

nlohmann::json metadata(const RunConfig& c) {
  const SchemeParams p = c.scheme();
  return {{"model", c.model}, {"k", p.k}, {"n_q", p.n_q}, {"n_pi", p.n_pi}, {"newton_iters", p.newton_iters},
          {"newton_tol", p.newton_tol}, {"T", c.T}, {"tau", c.tau}, {"seed", c.seed}};
}

void write_energy_csv(std::ostream& out, double t0, double H0, const std::vector<EnergyAuditEntry>& audit) {
  out.precision(17);
  out << "t,H\n" << t0 << ',' << H0 << '\n';
  for (const auto& e : audit) out << e.t << ',' << e.H << '\n';
}

int cmd_validate(const RunConfig& c) {
  const ModelSetup setup = build_model_setup(c);
  const ValidationReport r = validate_structure(setup.model, c.samples, c.seed);
  nlohmann::json j = {{"model", c.model},
                      {"samples", r.samples},
                      {"max_abs_skew", r.max_abs_skew},
                      {"min_dissipation", r.min_dissipation},
                      {"max_gradient_mismatch", r.max_gradient_mismatch},
                      {"ok", r.ok()}};
  std::cout << j.dump(2) << '\n';
  return r.ok() ? 0 : 1;
}

int cmd_run(const RunConfig& c, bool audit_only) {
  const ModelSetup setup = build_model_setup(c);
  const SchemeParams p = c.scheme();
  const TimeGrid grid = TimeGrid::uniform(c.T, c.tau);
  const SolveResult res = solve(setup.model, grid, setup.initial, setup.excitation, p);
  const EnergyAuditReport report = energy_audit_report(res.audit);
  {
    auto out = open_out(c, "audit.csv");
    write_audit_csv(out, report);
  }
  if (!audit_only) {
    auto traj = open_out(c, "trajectory.csv");
    write_trajectory_csv(traj, res.trajectory, grid.points());
    auto energy = open_out(c, "energy.csv");
    write_energy_csv(energy, grid.start(), res.H0, res.audit);
    if (setup.cahn_hilliard) {
      auto field = open_out(c, "final_field.csv");
      fem::write_nodal_csv(field, setup.cahn_hilliard->mesh, res.trajectory.eval(grid.end()).z1);
    }
  }
  nlohmann::json j = metadata(c);
  j["max_energy_error_abs"] = report.max_abs;
  j["max_energy_error_rel"] = report.max_rel;
  j["degenerate_normalization"] = report.degenerate;
  j["H0"] = res.H0;
  j["H_end"] = res.audit.back().H;
  auto summary = open_out(c, "summary.json");
  summary << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_converge(const RunConfig& c) {
  const ModelSetup setup = build_model_setup(c);
  if (!setup.manufactured) throw Error(ErrorCode::Unsupported, "model has no manufactured solution");
  const ManufacturedProblem& mp = *setup.manufactured;
  std::vector<double> taus = c.tau_list;
  if (taus.empty()) {
    // coarser steps are pre-asymptotic for the stiff Cahn-Hilliard system
    const int first = c.model == "cahn-hilliard" ? 6 : 3;
    for (int e = first; e < first + 5; ++e) taus.push_back(std::ldexp(1.0, -e));
  }
  const SchemeParams p = c.scheme();
  RunOne run = [&](double tau) {
    return solve(setup.model, TimeGrid::uniform(c.T, tau), mp.initial, mp.excitation, p).trajectory;
  };
  const ConvergenceResult result = convergence_study(run, mp.target, 0.0, c.T, taus);
  {
    auto out = open_out(c, "convergence.csv");
    write_convergence_csv(out, result);
  }
  nlohmann::json j = metadata(c);
  j["tau_list"] = taus;
  j["slope_nonalgebraic"] = result.nonalgebraic.slope;
  j["slope_full"] = result.full.slope;
  j["dropped_coarsest"] = result.nonalgebraic.dropped_coarsest || result.full.dropped_coarsest;
  auto summary = open_out(c, "convergence.json");
  summary << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_mor(const RunConfig& c) {
  const ModelSetup setup = build_model_setup(c);
  const SchemeParams p = c.scheme();
  const TimeGrid grid = TimeGrid::uniform(c.T, c.tau);
  const SolveResult full = solve(setup.model, grid, setup.initial, setup.excitation, p);
  const SnapshotSet snaps = collect_snapshots(full.trajectory);
  const Index r2 = setup.model.n2 == 0 ? 0 : c.r2;
  const ReducedBasis basis = pod_reduced_basis(snaps, std::min(c.r1, setup.model.n1), r2, std::min(c.r3, setup.model.n3));
  const EnergyModel reduced = reduce_model(setup.model, basis);
  const SolveResult red = solve(reduced, grid, project_initial(basis, setup.initial), setup.excitation, p);
  const EnergyAuditReport report = energy_audit_report(red.audit);
  const ValidationReport structure = validate_structure(reduced, c.samples, c.seed);

  {
    auto out = open_out(c, "energies.csv");
    out.precision(17);
    out << "t,H_full,H_reduced\n" << grid.start() << ',' << full.H0 << ',' << red.H0 << '\n';
    for (std::size_t i = 0; i < full.audit.size(); ++i) {
      out << full.audit[i].t << ',' << full.audit[i].H << ',' << red.audit[i].H << '\n';
    }
  }
  {
    auto out = open_out(c, "reduced_audit.csv");
    write_audit_csv(out, report);
  }
  const char* names[] = {"1", "2", "3"};
  const Matrix* snapshot_blocks[] = {&snaps.z1, &snaps.z2, &snaps.z3};
  const Matrix* bases[] = {&basis.V1, &basis.V2, &basis.V3};
  for (int b = 0; b < 3; ++b) {
    if (bases[b]->cols() == 0) continue;
    auto sv = open_out(c, std::string("singular_values_") + names[b] + ".csv");
    write_spectrum_csv(sv, thin_svd(*snapshot_blocks[b]).singular_values);
    auto V = open_out(c, std::string("basis_") + names[b] + ".csv");
    write_matrix_csv(V, *bases[b]);
  }
  {
    auto traj = open_out(c, "reduced_trajectory.csv");
    traj.precision(17);
    traj << "t,block,component,value\n";
    for (double t : grid.points()) {
      const StateValue x = lift(basis, red.trajectory.eval(t));
      const Vector* blocks[] = {&x.z1, &x.z2, &x.z3};
      for (int b = 0; b < 3; ++b)
        for (Index i = 0; i < blocks[b]->size(); ++i) traj << t << ',' << b + 1 << ',' << i << ',' << (*blocks[b])(i) << '\n';
    }
  }
  nlohmann::json j = metadata(c);
  j["r1"] = basis.r1();
  j["r3"] = basis.r3();
  j["H0_full"] = full.H0;
  j["H0_reduced"] = red.H0;
  j["reduced_max_energy_error_rel"] = report.max_rel;
  j["reduced_structure_ok"] = structure.ok();
  auto summary = open_out(c, "mor.json");
  summary << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving time integration and model reduction for energy-based models"};
  app.require_subcommand(1);
  Flags f;
  auto* validate = app.add_subcommand("validate", "check skew-symmetry, dissipativity and gradients");
  auto* run = app.add_subcommand("run", "solve and write trajectory, energy and audit CSVs");
  auto* converge = app.add_subcommand("converge", "manufactured-solution convergence study");
  auto* mor = app.add_subcommand("mor", "POD reduction, full vs reduced run");
  auto* audit = app.add_subcommand("energy-audit", "energy balance table only");
  for (auto* cmd : {validate, run, converge, mor, audit}) add_common(cmd, f);

  CLI11_PARSE(app, argc, argv);
  try {
    if (validate->parsed()) return cmd_validate(resolve(validate, f));
    if (run->parsed()) return cmd_run(resolve(run, f), false);
    if (converge->parsed()) return cmd_converge(resolve(converge, f));
    if (mor->parsed()) return cmd_mor(resolve(mor, f));
    if (audit->parsed()) return cmd_run(resolve(audit, f), true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
