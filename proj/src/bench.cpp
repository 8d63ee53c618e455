#include "ebm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "ebm/projection.hpp"

namespace ebm {

StateErrors state_errors(const StateSignal& reference, const StateSignal& computed, const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "state_errors: empty evaluation grid");
  double err_nonalg = 0, err_full = 0, ref_nonalg = 0, ref_full = 0;
  for (double t : grid) {
    const StateValue r = reference(t);
    const StateValue c = computed(t);
    const Vector rn = r.non_algebraic(), rf = r.stacked();
    if (c.z1.size() != r.z1.size() || c.z2.size() != r.z2.size() || c.z3.size() != r.z3.size()) {
      throw Error(ErrorCode::DimensionMismatch, "state_errors: block sizes differ");
    }
    err_nonalg = std::max(err_nonalg, (c.non_algebraic() - rn).norm());
    err_full = std::max(err_full, (c.stacked() - rf).norm());
    ref_nonalg = std::max(ref_nonalg, rn.norm());
    ref_full = std::max(ref_full, rf.norm());
  }
  if (ref_full == 0.0) throw Error(ErrorCode::DivisionByZero, "state_errors: reference vanishes on the grid");
  StateErrors out;
  out.full = err_full / ref_full;
  if (ref_nonalg > 0) {
    out.nonalgebraic = err_nonalg / ref_nonalg;
  } else if (err_nonalg > 0) {
    throw Error(ErrorCode::DivisionByZero, "state_errors: non-algebraic reference vanishes");
  }
  return out;
}

StateErrors state_errors(const StateSignal& reference, const Trajectory& computed, const std::vector<double>& grid) {
  return state_errors(reference, [&computed](double t) { return computed.eval(t); }, grid);
}

std::vector<double> reference_grid(double t0, double t1, double tau_min) {
  if (!(t1 > t0) || !(tau_min > 0)) throw Error(ErrorCode::InvalidArgument, "reference_grid: need t1 > t0, tau > 0");
  const auto m = static_cast<Index>(std::ceil((t1 - t0) / (tau_min / 8.0) - 1e-9));
  std::vector<double> grid(static_cast<std::size_t>(m + 1));
  for (Index i = 0; i <= m; ++i) grid[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(m);
  return grid;
}

SlopeFit fit_slope(std::vector<double> taus, std::vector<double> errors) {
  if (taus.size() != errors.size()) throw Error(ErrorCode::DimensionMismatch, "fit_slope: lengths differ");
  std::vector<std::size_t> order(taus.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] > taus[b]; });
  SlopeFit fit;
  if (!order.empty() && errors[order.front()] > 0.5) {
    order.erase(order.begin());
    fit.dropped_coarsest = true;
  }
  if (order.size() < 3) throw Error(ErrorCode::InvalidArgument, "fit_slope: need at least three step sizes");
  Eigen::MatrixX2d A(order.size(), 2);
  Vector y(static_cast<Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double tau = taus[order[i]], e = errors[order[i]];
    if (!(tau > 0) || !(e > 0)) throw Error(ErrorCode::InvalidArgument, "fit_slope: steps and errors must be positive");
    A(static_cast<Index>(i), 0) = std::log(tau);
    A(static_cast<Index>(i), 1) = 1.0;
    y(static_cast<Index>(i)) = std::log(e);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
  fit.slope = coef(0);
  fit.intercept = coef(1);
  fit.points = static_cast<Index>(order.size());
  return fit;
}

ConvergenceResult convergence_study(const RunOne& run, const StateSignal& target, double t0, double T,
                                    const std::vector<double>& taus, bool parallel) {
  if (taus.size() < 3) throw Error(ErrorCode::InvalidArgument, "convergence_study: need at least three step sizes");
  const double tau_min = *std::min_element(taus.begin(), taus.end());
  const auto grid = reference_grid(t0, t0 + T, tau_min);

  auto one = [&](double tau) -> ConvergencePoint {
    try {
      const Trajectory traj = run(tau);
      return {tau, state_errors(target, traj, grid)};
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (tau = " + std::to_string(tau) + ")");
    }
  };

  ConvergenceResult result;
  if (parallel) {
    std::vector<std::future<ConvergencePoint>> jobs;
    for (double tau : taus) jobs.push_back(std::async(std::launch::async, one, tau));
    for (auto& job : jobs) result.points.push_back(job.get());
  } else {
    for (double tau : taus) result.points.push_back(one(tau));
  }
  std::vector<double> e_nonalg, e_full;
  for (const auto& p : result.points) {
    e_nonalg.push_back(p.errors.nonalgebraic);
    e_full.push_back(p.errors.full);
  }
  result.nonalgebraic = fit_slope(taus, e_nonalg);
  result.full = fit_slope(taus, e_full);
  return result;
}

double EnergyAuditReport::max_relative() const {
  if (degenerate) throw Error(ErrorCode::DegenerateNormalization, "energy audit: all increments vanish");
  return max_rel;
}

EnergyAuditReport energy_audit_report(const std::vector<EnergyAuditEntry>& audit) {
  if (audit.empty()) throw Error(ErrorCode::EmptyGrid, "energy_audit_report: empty audit");
  EnergyAuditReport report;
  double H_scale = 0;
  for (const auto& e : audit) {
    report.normalization = std::max(report.normalization, std::abs(e.lhs));
    H_scale = std::max(H_scale, std::abs(e.H));
  }
  // Increments at round-off level of H count as zero (conservative runs).
  report.degenerate = report.normalization <= 1e-13 * std::max(1.0, H_scale);
  const double scale = report.degenerate ? 1.0 : report.normalization;
  for (const auto& e : audit) {
    EnergyAuditRow row{e.j, e.t, e.H, e.lhs, e.rhs, std::abs(e.lhs - e.rhs), 0.0};
    row.rel_err = row.abs_err / scale;
    report.max_abs = std::max(report.max_abs, row.abs_err);
    report.max_rel = std::max(report.max_rel, row.rel_err);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<EnergyAuditEntry> recompute_audit(const EnergyModel& model, const Trajectory& trajectory,
                                              const Excitation& excitation, const SchemeParams& params) {
  params.validate();
  const QuadratureRule<double> rule = gauss_rule<double>(params.n_q);
  std::vector<EnergyAuditEntry> out;
  Index j = 0;
  for (const Segment& seg : trajectory.segments()) {
    const double a = seg.a(), b = seg.b(), h = b - a;
    const Vector z1a = seg.z1.value(a), z2a = seg.z2.value(a);
    const Vector z1b = seg.z1.value(b), z2b = seg.z2.value(b);

    TimeSignal grad2 = [&seg, &model](double t) -> Vector { return model.grad2(seg.z1.value(t), seg.z2.value(t)); };
    const ProjectedSignal pg = project(grad2, model.n2, a, b, seg.z1.degree(), params.n_pi);

    EnergyAuditEntry e;
    e.j = ++j;
    e.t = b;
    e.H = model.hamiltonian(z1b, z2b);
    e.lhs = e.H - model.hamiltonian(z1a, z2a);
    for (Index l = 0; l < rule.size(); ++l) {
      const double t = a + h * rule.nodes(l);
      Vector zeta(model.n());
      zeta << seg.z1.derivative(t), pg.value(t), seg.z3.value(t);
      e.dissipation += h * rule.weights(l) * zeta.dot(model.apply_R(zeta));
      e.supply += h * rule.weights(l) * zeta.dot(excitation.rhs(model, t));
    }
    e.rhs = -e.dissipation + e.supply;
    out.push_back(e);
  }
  return out;
}

double audit_discrepancy(const std::vector<EnergyAuditEntry>& a, const std::vector<EnergyAuditEntry>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "audit_discrepancy: lengths differ");
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max({d, std::abs(a[i].lhs - b[i].lhs), std::abs(a[i].rhs - b[i].rhs)});
  }
  return d;
}

void write_audit_csv(std::ostream& out, const EnergyAuditReport& report) {
  const auto old_precision = out.precision(17);
  out << "j,t_j,H,lhs,rhs,abs_err,rel_err\n";
  for (const auto& r : report.rows) {
    out << r.j << ',' << r.t << ',' << r.H << ',' << r.lhs << ',' << r.rhs << ',' << r.abs_err << ',' << r.rel_err << '\n';
  }
  out.precision(old_precision);
}

void write_convergence_csv(std::ostream& out, const ConvergenceResult& result) {
  const auto old_precision = out.precision(17);
  out << "tau,e_nonalgebraic,e_full\n";
  for (const auto& p : result.points) out << p.tau << ',' << p.errors.nonalgebraic << ',' << p.errors.full << '\n';
  out.precision(old_precision);
}

// ---------------------------------------------------------------------------
// configuration

SchemeParams RunConfig::scheme() const {
  SchemeParams p = SchemeParams::for_degree(k);
  if (model == "cahn-hilliard") p.n_q = 2 * k;  // better Newton behaviour
  if (n_q > 0) p.n_q = n_q;
  if (n_pi > 0) p.n_pi = n_pi;
  p.newton_iters = newton_iters;
  p.newton_tol = newton_tol;
  return p;
}

void RunConfig::validate() const {
  const auto models = registered_models();
  if (std::find(models.begin(), models.end(), model) == models.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + model + "'");
  }
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("config: ") + what);
  };
  require(k >= 1, "k >= 1");
  require(newton_iters >= 1, "newton_iters >= 1");
  require(newton_tol >= 0, "newton_tol >= 0");
  require(T > 0, "T > 0");
  require(tau > 0, "tau > 0");
  for (double t : tau_list) require(t > 0, "tau_list entries > 0");
  require(N >= 1, "N >= 1");
  require(eps > 0, "eps > 0");
  require(sigma >= 0, "sigma >= 0");
  require(octaves >= 1, "octaves >= 1");
  require(amplitude >= 0, "amplitude >= 0");
  require(r1 >= 0 && r2 >= 0 && r3 >= 0, "reduced dimensions >= 0");
  require(samples >= 1, "samples >= 1");
  scheme().validate();
}

namespace {

using nlohmann::json;

template <typename T>
T read_value(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "config: wrong type for '" + key + "'");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, RunConfig c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config: top level must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "model") c.model = read_value<std::string>(v, key);
    else if (key == "k") c.k = read_value<Index>(v, key);
    else if (key == "n_q") c.n_q = read_value<Index>(v, key);
    else if (key == "n_pi") c.n_pi = read_value<Index>(v, key);
    else if (key == "newton_iters") c.newton_iters = read_value<Index>(v, key);
    else if (key == "newton_tol") c.newton_tol = read_value<double>(v, key);
    else if (key == "T") c.T = read_value<double>(v, key);
    else if (key == "tau") c.tau = read_value<double>(v, key);
    else if (key == "tau_list") c.tau_list = read_value<std::vector<double>>(v, key);
    else if (key == "q0") c.q0 = read_value<double>(v, key);
    else if (key == "i0") c.i0 = read_value<double>(v, key);
    else if (key == "N") c.N = read_value<Index>(v, key);
    else if (key == "eps") c.eps = read_value<double>(v, key);
    else if (key == "sigma") c.sigma = read_value<double>(v, key);
    else if (key == "seed") c.seed = read_value<std::uint64_t>(v, key);
    else if (key == "octaves") c.octaves = read_value<int>(v, key);
    else if (key == "amplitude") c.amplitude = read_value<double>(v, key);
    else if (key == "r1") c.r1 = read_value<Index>(v, key);
    else if (key == "r2") c.r2 = read_value<Index>(v, key);
    else if (key == "r3") c.r3 = read_value<Index>(v, key);
    else if (key == "samples") c.samples = read_value<Index>(v, key);
    else if (key == "out") c.out = read_value<std::string>(v, key);
    else throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string to_json(const RunConfig& c) {
  json j = {{"model", c.model}, {"k", c.k}, {"n_q", c.n_q}, {"n_pi", c.n_pi},
            {"newton_iters", c.newton_iters}, {"newton_tol", c.newton_tol}, {"T", c.T}, {"tau", c.tau},
            {"tau_list", c.tau_list}, {"q0", c.q0}, {"i0", c.i0}, {"N", c.N}, {"eps", c.eps},
            {"sigma", c.sigma}, {"seed", c.seed}, {"octaves", c.octaves}, {"amplitude", c.amplitude},
            {"r1", c.r1}, {"r2", c.r2}, {"r3", c.r3}, {"samples", c.samples}, {"out", c.out}};
  return j.dump(2);
}

std::vector<std::string> registered_models() { return {"acdc", "cahn-hilliard"}; }

ModelSetup build_model_setup(const RunConfig& config) {
  config.validate();
  ModelSetup setup;
  if (config.model == "acdc") {
    const auto circuit = circuit::build_circuit();
    const TimeSignal source = circuit::default_source();
    setup.model = circuit.model;
    setup.initial = circuit::consistent_initial(circuit, config.q0, config.i0, source(0.0)(0));
    setup.excitation.input = source;
    setup.manufactured = circuit::manufactured_problem(circuit);
  } else {
    auto ch = std::make_shared<fem::CahnHilliardModel>(
        fem::build_cahn_hilliard(fem::build_mesh(config.N), {config.eps, config.sigma}));
    const Vector c1 = fem::fractal_noise_initial(ch->mesh, config.seed, config.octaves, config.amplitude);
    setup.model = ch->model;
    setup.initial = fem::make_consistent_initial(*ch, c1);
    setup.manufactured = fem::manufactured_problem(*ch);
    setup.cahn_hilliard = ch;
  }
  return setup;
}

}  // namespace ebm
