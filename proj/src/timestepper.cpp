#include "ebm/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/QR>
#include <Eigen/SparseQR>

namespace ebm {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw Error(ErrorCode::InvalidArgument, "TimeGrid: need at least one interval");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) throw Error(ErrorCode::InvalidArgument, "TimeGrid: points not increasing");
  }
}

TimeGrid TimeGrid::uniform(double T, double tau, double t0) {
  if (!(T > 0) || !(tau > 0)) throw Error(ErrorCode::InvalidArgument, "TimeGrid::uniform: T, tau > 0");
  const double ratio = T / tau;
  const auto m = static_cast<Index>(std::llround(ratio));
  if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * ratio) {
    throw Error(ErrorCode::InvalidArgument, "TimeGrid::uniform: tau does not divide T");
  }
  std::vector<double> points(static_cast<std::size_t>(m) + 1);
  for (Index j = 0; j <= m; ++j) points[static_cast<std::size_t>(j)] = t0 + T * static_cast<double>(j) / static_cast<double>(m);
  return TimeGrid(std::move(points));
}

double TimeGrid::max_step() const {
  double tau = 0;
  for (std::size_t i = 1; i < points_.size(); ++i) tau = std::max(tau, points_[i] - points_[i - 1]);
  return tau;
}

SchemeParams SchemeParams::for_degree(Index k) {
  SchemeParams params;
  params.k = k;
  params.n_q = k + 1;
  params.n_pi = 2 * k;
  return params;
}

void SchemeParams::validate() const {
  if (k < 1 || n_q < 1 || n_pi < 1 || newton_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "SchemeParams: k, n_q, n_pi, newton_iters must be >= 1");
  }
}

Vector Excitation::u(const EnergyModel& model, double t) const {
  if (input) return input(t);
  return Vector::Zero(model.input_dim);
}

Vector Excitation::rhs(const EnergyModel& model, double t) const {
  Vector out = model.input(u(model, t), t);
  if (forcing) out += forcing(t);
  return out;
}

Index step_unknowns(const EnergyModel& model, Index k) { return k * model.n1 + k * model.n2 + (k + 1) * model.n3; }

namespace {

using ColMajorSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// The nonlinear system of one interval [a, b]. Test functions of the first
// two blocks are phi_0..phi_{k-1}; those of the algebraic block phi_0..phi_k.
class IntervalSystem {
 public:
  IntervalSystem(const EnergyModel& model, double a, double b, const StepStart& start, const Excitation& excitation,
                 const SchemeParams& params)
      : model_(model),
        excitation_(excitation),
        params_(params),
        a_(a),
        b_(b),
        k_(params.k),
        n1_(model.n1),
        n2_(model.n2),
        n3_(model.n3),
        basis_(params.k, a, b),
        start_(start) {
    params.validate();
    if (start.z1.size() != n1_ || start.z2.size() != n2_) {
      throw Error(ErrorCode::DimensionMismatch, "step: start value length");
    }
    const double h = b - a;
    const auto rule_q = gauss_rule(params.n_q);
    const auto rule_pi = gauss_rule(params.n_pi);
    tq_ = rule_q.mapped_nodes(a, b);
    wq_ = h * rule_q.weights;
    tpi_ = rule_pi.mapped_nodes(a, b);
    wpi_ = h * rule_pi.weights;
    phi_q_ = basis_.value_table(tq_);
    dphi_q_ = basis_.derivative_table(tq_);
    phi_pi_ = basis_.value_table(tpi_);
    phi_a_ = basis_.values(a);
    phi_b_ = basis_.values(b);
    theta_pi_ = phi_pi_.colwise() - phi_a_;
    D_ = basis_.derivative_matrix();

    off_a2_ = k_ * n1_;
    off_c3_ = off_a2_ + k_ * n2_;
    size_ = off_c3_ + (k_ + 1) * n3_;
  }

  Index size() const { return size_; }

  Matrix full_coefficients(const Vector& x, Index block) const {
    const Index dim = block == 1 ? n1_ : n2_;
    const Index off = block == 1 ? 0 : off_a2_;
    const Vector& s = block == 1 ? start_.z1 : start_.z2;
    Matrix c(dim, k_ + 1);
    if (dim == 0) return c;
    c.rightCols(k_) = Eigen::Map<const Matrix>(x.data() + off, dim, k_);
    c.col(0) = (s - c.rightCols(k_) * phi_a_.tail(k_)) / phi_a_(0);
    return c;
  }

  Matrix algebraic_coefficients(const Vector& x) const {
    if (n3_ == 0) return Matrix(0, k_ + 1);
    return Eigen::Map<const Matrix>(x.data() + off_c3_, n3_, k_ + 1);
  }

  Segment segment(const Vector& x) const {
    return {PolySegment{a_, b_, full_coefficients(x, 1)}, PolySegment{a_, b_, full_coefficients(x, 2)},
            PolySegment{a_, b_, algebraic_coefficients(x)}};
  }

  Vector guess(const Vector& z3) const {
    Vector x = Vector::Zero(size_);
    if (n3_ > 0) x.segment(off_c3_, n3_) = z3 / phi_a_(0);
    return x;
  }

  struct Evaluation {
    Vector residual;
    Matrix zeta;  // n x n_q, columns are zeta at the Q_j nodes
    Matrix drive; // n x n_q, B u + g at the Q_j nodes
  };

  Evaluation evaluate(const Vector& x) const {
    const Matrix C1 = full_coefficients(x, 1);
    const Matrix C2 = full_coefficients(x, 2);
    const Matrix C3 = algebraic_coefficients(x);
    const Index npi = tpi_.size();
    const Index nq = tq_.size();

    Matrix R1 = Matrix::Zero(n1_, k_);
    Matrix proj = Matrix::Zero(n2_, k_);
    if (n1_ + n2_ > 0) {
      const Matrix Z1 = C1 * phi_pi_;
      const Matrix Z2 = C2 * phi_pi_;
      for (Index m = 0; m < npi; ++m) {
        const Vector z1 = Z1.col(m);
        const Vector z2 = Z2.col(m);
        const auto test = phi_pi_.col(m).head(k_).transpose();
        if (n1_ > 0) R1.noalias() += (wpi_(m) * model_.grad1(z1, z2)) * test;
        if (n2_ > 0) proj.noalias() += (wpi_(m) * model_.grad2(z1, z2)) * test;
      }
    }
    Matrix R2 = Matrix::Zero(n2_, k_);
    if (n2_ > 0) R2 = C2 * D_.transpose();
    Matrix R3 = Matrix::Zero(n3_, k_ + 1);

    Evaluation out;
    out.zeta.resize(model_.n(), nq);
    out.drive.resize(model_.n(), nq);
    for (Index l = 0; l < nq; ++l) {
      Vector zeta(model_.n());
      if (n1_ > 0) zeta.head(n1_) = C1 * dphi_q_.col(l);
      if (n2_ > 0) zeta.segment(n1_, n2_) = proj * phi_q_.col(l).head(k_);
      if (n3_ > 0) zeta.tail(n3_) = C3 * phi_q_.col(l);
      const Vector drive = excitation_.rhs(model_, tq_(l));
      const Vector F = model_.apply_J(zeta) - model_.apply_R(zeta) + drive;
      const double w = wq_(l);
      if (n1_ > 0) R1.noalias() -= (w * F.head(n1_)) * phi_q_.col(l).head(k_).transpose();
      if (n2_ > 0) R2.noalias() -= (w * F.segment(n1_, n2_)) * phi_q_.col(l).head(k_).transpose();
      if (n3_ > 0) R3.noalias() -= (w * F.tail(n3_)) * phi_q_.col(l).transpose();
      out.zeta.col(l) = zeta;
      out.drive.col(l) = drive;
    }

    out.residual.resize(size_);
    if (n1_ > 0) out.residual.head(off_a2_) = Eigen::Map<const Vector>(R1.data(), R1.size());
    if (n2_ > 0) out.residual.segment(off_a2_, k_ * n2_) = Eigen::Map<const Vector>(R2.data(), R2.size());
    if (n3_ > 0) out.residual.tail(size_ - off_c3_) = Eigen::Map<const Vector>(R3.data(), R3.size());
    return out;
  }

  Vector residual(const Vector& x) const { return evaluate(x).residual; }

  EnergyAuditEntry audit(const Vector& x) const {
    const Evaluation ev = evaluate(x);
    const Segment seg = segment(x);
    EnergyAuditEntry entry;
    const double H_start = model_.hamiltonian(start_.z1, start_.z2);
    entry.t = b_;
    entry.H = model_.hamiltonian(seg.z1.coefficients * phi_b_, seg.z2.coefficients * phi_b_);
    entry.lhs = entry.H - H_start;
    for (Index l = 0; l < tq_.size(); ++l) {
      const Vector zeta = ev.zeta.col(l);
      entry.dissipation += wq_(l) * zeta.dot(model_.apply_R(zeta));
      entry.supply += wq_(l) * zeta.dot(ev.drive.col(l));
    }
    entry.rhs = -entry.dissipation + entry.supply;
    return entry;
  }

  // Residual row of component i (of the stacked n-vector) for test index q.
  Index row(Index i, Index q) const {
    if (i < n1_) return q * n1_ + i;
    if (i < n1_ + n2_) return off_a2_ + q * n2_ + (i - n1_);
    return off_c3_ + q * n3_ + (i - n1_ - n2_);
  }
  Index tests_for(Index i) const { return i < n1_ + n2_ ? k_ : k_ + 1; }

  // Unknown column of the p-th coefficient (p >= 1) of component j of (z1, z2).
  Index col12(Index j, Index p) const {
    if (j < n1_) return (p - 1) * n1_ + j;
    return off_a2_ + (p - 1) * n2_ + (j - n1_);
  }
  Index col3(Index j, Index p) const { return off_c3_ + p * n3_ + j; }

  ColMajorSparse analytic_jacobian(const Vector& x) const {
    const SparseMatrix L = (*model_.J_matrix - *model_.R_matrix).pruned();
    const Matrix C1 = full_coefficients(x, 1);
    const Matrix C2 = full_coefficients(x, 2);
    const Index npi = tpi_.size();
    const Index n12 = n1_ + n2_;

    // Scalar weights of the right-hand side quadrature.
    const Matrix A1 = phi_q_ * wq_.asDiagonal() * dphi_q_.transpose();  // (k+1) x (k+1)
    const Matrix A3 = phi_q_ * wq_.asDiagonal() * phi_q_.transpose();   // (k+1) x (k+1)

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(L.nonZeros() * (k_ + 1) * (k_ + 1) * 2 + 16));

    for (Index i = 0; i < L.outerSize(); ++i) {
      const Index nt = tests_for(i);
      for (SparseMatrix::InnerIterator it(L, i); it; ++it) {
        const Index j = it.col();
        const double val = it.value();
        if (j < n1_) {
          for (Index q = 0; q < nt; ++q)
            for (Index p = 1; p <= k_; ++p) triplets.emplace_back(row(i, q), col12(j, p), -A1(q, p) * val);
        } else if (j >= n12) {
          for (Index q = 0; q < nt; ++q)
            for (Index p = 0; p <= k_; ++p) triplets.emplace_back(row(i, q), col3(j - n12, p), -A3(q, p) * val);
        }
      }
    }

    if (n12 > 0) {
      const Matrix Z1 = C1 * phi_pi_;
      const Matrix Z2 = C2 * phi_pi_;
      SparseMatrix Lcol2;
      Matrix E;  // E(q, m) = sum_q' A2(q, q') w_m phi_q'(sigma_m)
      if (n2_ > 0) {
        std::vector<Triplet> sel;
        for (Index i = 0; i < n2_; ++i) sel.emplace_back(n1_ + i, i, 1.0);
        SparseMatrix S(model_.n(), n2_);
        S.setFromTriplets(sel.begin(), sel.end());
        Lcol2 = L * S;
        const Matrix A2 = phi_q_ * wq_.asDiagonal() * phi_q_.topRows(k_).transpose();  // (k+1) x k
        E = A2 * phi_pi_.topRows(k_) * wpi_.asDiagonal();
      }
      for (Index m = 0; m < npi; ++m) {
        const Vector z1 = Z1.col(m);
        const Vector z2 = Z2.col(m);
        const SparseMatrix Hm = model_.hessian(z1, z2);
        if (Hm.rows() != n12 || Hm.cols() != n12) throw Error(ErrorCode::DimensionMismatch, "hessian shape");
        // Left-hand side of the first block.
        for (Index i = 0; i < n1_; ++i) {
          for (SparseMatrix::InnerIterator it(Hm, i); it; ++it) {
            for (Index q = 0; q < k_; ++q) {
              const double wq = wpi_(m) * phi_pi_(q, m) * it.value();
              for (Index p = 1; p <= k_; ++p) triplets.emplace_back(row(i, q), col12(it.col(), p), wq * theta_pi_(p, m));
            }
          }
        }
        if (n2_ > 0) {
          const SparseMatrix T = Lcol2 * Hm.middleRows(n1_, n2_);
          for (Index i = 0; i < T.outerSize(); ++i) {
            const Index nt = tests_for(i);
            for (SparseMatrix::InnerIterator it(T, i); it; ++it) {
              for (Index q = 0; q < nt; ++q) {
                const double c = -E(q, m) * it.value();
                for (Index p = 1; p <= k_; ++p) triplets.emplace_back(row(i, q), col12(it.col(), p), c * theta_pi_(p, m));
              }
            }
          }
        }
      }
    }
    for (Index i = 0; i < n2_; ++i)
      for (Index q = 0; q < k_; ++q)
        for (Index p = 1; p <= k_; ++p)
          if (D_(q, p) != 0.0) triplets.emplace_back(row(n1_ + i, q), col12(n1_ + i, p), D_(q, p));

    ColMajorSparse jac(size_, size_);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
  }

  Matrix finite_difference_jacobian(const Vector& x, const Vector& r) const {
    Matrix jac(size_, size_);
    Vector xp = x;
    for (Index j = 0; j < size_; ++j) {
      const double h = 1e-7 * (1 + std::abs(x(j)));
      xp(j) = x(j) + h;
      jac.col(j) = (residual(xp) - r) / h;
      xp(j) = x(j);
    }
    return jac;
  }

  struct LinearizedStep {
    Vector dx;         // least-squares solution of J dx = r
    double reachable;  // ||J dx||, the part of r Newton can remove
  };

  // Rank-revealing QR on both paths: some models leave a gauge direction of
  // the top z3 coefficient free (constants in the kernel of a stiffness
  // matrix), and with some forcings the matching residual component is out
  // of reach. The basic least-squares solution keeps the gauge from drifting.
  LinearizedStep linearized_step(const Vector& x, const Vector& r) const {
    LinearizedStep out;
    if (!params_.finite_difference_jacobian && model_.has_analytic_jacobian()) {
      ColMajorSparse jac = analytic_jacobian(x);
      jac.makeCompressed();
      Eigen::SparseQR<ColMajorSparse, Eigen::COLAMDOrdering<int>> qr;
      qr.compute(jac);
      if (qr.info() != Eigen::Success) throw Error(ErrorCode::LinearSolveFailed, "step: sparse QR failed");
      out.dx = qr.solve(r);
      if (qr.info() != Eigen::Success) throw Error(ErrorCode::LinearSolveFailed, "step: sparse solve failed");
      out.reachable = (jac * out.dx).norm();
    } else {
      const Matrix jac = finite_difference_jacobian(x, r);
      Eigen::ColPivHouseholderQR<Matrix> qr(jac);
      out.dx = qr.solve(r);
      out.reachable = (jac * out.dx).norm();
    }
    if (!out.dx.allFinite()) throw Error(ErrorCode::LinearSolveFailed, "step: non-finite Newton update");
    return out;
  }

 private:
  const EnergyModel& model_;
  const Excitation& excitation_;
  const SchemeParams& params_;
  double a_, b_;
  Index k_, n1_, n2_, n3_;
  LegendreBasis<double> basis_;
  StepStart start_;

  Vector tq_, wq_, tpi_, wpi_;
  Matrix phi_q_, dphi_q_, phi_pi_, theta_pi_, D_;
  Vector phi_a_, phi_b_;
  Index off_a2_ = 0, off_c3_ = 0, size_ = 0;
};

}  // namespace

Vector assemble_residual(const EnergyModel& model, double a, double b, const StepStart& start,
                         const Vector& unknowns, const Excitation& excitation, const SchemeParams& params) {
  const IntervalSystem system(model, a, b, start, excitation, params);
  if (unknowns.size() != system.size()) throw Error(ErrorCode::DimensionMismatch, "assemble_residual: unknowns");
  return system.residual(unknowns);
}

Vector segment_unknowns(const Segment& segment) {
  const Index k = segment.z1.degree();
  const Index n1 = segment.z1.dim(), n2 = segment.z2.dim(), n3 = segment.z3.dim();
  Vector x(k * n1 + k * n2 + (k + 1) * n3);
  Index off = 0;
  for (const PolySegment* poly : {&segment.z1, &segment.z2}) {
    const Matrix tail = poly->coefficients.rightCols(k);
    x.segment(off, tail.size()) = Eigen::Map<const Vector>(tail.data(), tail.size());
    off += tail.size();
  }
  x.tail(segment.z3.coefficients.size()) =
      Eigen::Map<const Vector>(segment.z3.coefficients.data(), segment.z3.coefficients.size());
  return x;
}

StepResult step(const EnergyModel& model, double a, double b, const StepStart& start, const Vector& z3_guess,
                const Excitation& excitation, const SchemeParams& params) {
  const IntervalSystem system(model, a, b, start, excitation, params);
  if (z3_guess.size() != model.n3) throw Error(ErrorCode::DimensionMismatch, "step: z3 guess length");
  Vector x = system.guess(z3_guess);

  StepResult result;
  Vector r = system.residual(x);
  result.newton.initial_residual = r.norm();
  for (Index it = 0; it < params.newton_iters; ++it) {
    if (r.norm() < params.newton_tol) break;
    const auto lin = system.linearized_step(x, r);
    x -= lin.dx;
    r = system.residual(x);
    ++result.newton.iterations;
    // Converged up to a component no update can remove.
    if (lin.reachable < params.newton_tol) break;
  }
  result.newton.final_residual = r.norm();
  if (!std::isfinite(result.newton.final_residual)) throw Error(ErrorCode::NewtonDiverged, "step: non-finite residual");
  const double limit = 1e-6 * (1 + result.newton.initial_residual);
  if (result.newton.final_residual > limit) {
    // Only the part of the residual in the range of the Jacobian counts
    // towards divergence; the rest is reported as inconsistency.
    const double reachable = system.linearized_step(x, r).reachable;
    const double r2 = result.newton.final_residual;
    result.newton.inconsistency = std::sqrt(std::max(0.0, r2 * r2 - reachable * reachable));
    if (reachable > limit) {
      throw Error(ErrorCode::NewtonDiverged, "step: residual " + std::to_string(result.newton.final_residual));
    }
  }
  result.segment = system.segment(x);
  result.audit = system.audit(x);
  return result;
}

Vector StateValue::stacked() const {
  Vector v(z1.size() + z2.size() + z3.size());
  v << z1, z2, z3;
  return v;
}

Vector StateValue::non_algebraic() const {
  Vector v(z1.size() + z2.size());
  v << z1, z2;
  return v;
}

Trajectory::Trajectory(TimeGrid grid, std::vector<Segment> segments)
    : grid_(std::move(grid)), segments_(std::move(segments)) {
  if (static_cast<Index>(segments_.size()) != grid_.intervals()) {
    throw Error(ErrorCode::DimensionMismatch, "Trajectory: one segment per interval");
  }
}

StateValue Trajectory::eval(double t) const {
  const auto& pts = grid_.points();
  const double slack = 1e-12 * (grid_.end() - grid_.start());
  if (segments_.empty() || t < pts.front() - slack || t > pts.back() + slack) {
    throw Error(ErrorCode::OutOfRange, "Trajectory::eval: t outside grid");
  }
  const auto upper = std::lower_bound(pts.begin(), pts.end(), t);
  auto j = static_cast<std::size_t>(std::distance(pts.begin(), upper));
  j = std::clamp<std::size_t>(j, 1, segments_.size());
  const Segment& seg = segments_[j - 1];
  const double tc = std::clamp(t, seg.a(), seg.b());
  return {seg.z1.value(tc), seg.z2.value(tc), seg.z3.value(tc)};
}

SolveResult solve(const EnergyModel& model, const TimeGrid& grid, const InitialState& initial,
                  const Excitation& excitation, const SchemeParams& params) {
  params.validate();
  if (initial.z1.size() != model.n1 || initial.z2.size() != model.n2 || initial.z3.size() != model.n3) {
    throw Error(ErrorCode::DimensionMismatch, "solve: initial state length");
  }
  SolveResult result;
  result.H0 = model.hamiltonian(initial.z1, initial.z2);
  std::vector<Segment> segments;
  segments.reserve(static_cast<std::size_t>(grid.intervals()));

  StepStart start{initial.z1, initial.z2};
  Vector z3_guess = params.first_guess == FirstGuess::Ones ? Vector::Ones(model.n3) : initial.z3;
  const auto& pts = grid.points();
  for (Index j = 1; j <= grid.intervals(); ++j) {
    const double a = pts[static_cast<std::size_t>(j - 1)];
    const double b = pts[static_cast<std::size_t>(j)];
    StepResult res;
    try {
      res = step(model, a, b, start, z3_guess, excitation, params);
    } catch (const Error& e) {
      throw Error(e.code(), "interval " + std::to_string(j) + ": " + e.what());
    }
    res.audit.j = j;
    start = {res.segment.z1.value(b), res.segment.z2.value(b)};
    z3_guess = res.segment.z3.value(b);
    segments.push_back(std::move(res.segment));
    result.audit.push_back(res.audit);
    result.newton.push_back(res.newton);
  }
  result.trajectory = Trajectory(grid, std::move(segments));
  return result;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const std::vector<double>& times) {
  const auto old_precision = out.precision(17);
  out << "t,block,component,value\n";
  for (const double t : times) {
    const StateValue v = trajectory.eval(t);
    const Vector* blocks[] = {&v.z1, &v.z2, &v.z3};
    for (int b = 0; b < 3; ++b) {
      for (Index i = 0; i < blocks[b]->size(); ++i) out << t << ',' << (b + 1) << ',' << i << ',' << (*blocks[b])(i) << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace ebm
