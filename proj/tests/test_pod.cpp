#include <doctest.h>

#include <sstream>

#include "ebm/fem2d.hpp"
#include "ebm/pod.hpp"
#include "sample_models.hpp"

using namespace ebm;

TEST_CASE("rank one snapshots") {
  Matrix S = Matrix::Zero(3, 2);
  S(0, 0) = 1;
  S(0, 1) = 2;
  const auto pod = pod_basis(S, 1);
  CHECK((pod.V - Matrix::Identity(3, 1)).norm() <= 1e-15);
  CHECK(pod.singular_values(0) == doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(pod_basis(S, 2), Error);
  try {
    pod_basis(S, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankTooLow);
  }
}

TEST_CASE("orthogonal columns come out ordered by norm") {
  Matrix S(3, 2);
  S << 0, 3,
       -2, 0,
       0, 0;
  const auto pod = pod_basis(S, 2);
  Matrix expected = Matrix::Zero(3, 2);
  expected(0, 0) = 1;
  expected(1, 1) = 1;  // sign fixed by the largest entry
  CHECK((pod.V - expected).norm() <= 1e-15);
  CHECK(pod.singular_values(0) == doctest::Approx(3.0));
  CHECK(pod.singular_values(1) == doctest::Approx(2.0));
}

TEST_CASE("rank r capture reconstructs the snapshots") {
  oracle::Gen gen(81);
  const Matrix S = gen.matrix(10, 3) * gen.matrix(3, 8);
  const auto pod = pod_basis(S, 3);
  CHECK((pod.V * pod.V.transpose() * S - S).norm() <= 1e-10 * S.norm());
  CHECK((pod.V.transpose() * pod.V - Matrix::Identity(3, 3)).norm() <= 1e-13);
  CHECK_THROWS_AS(pod_basis(S, 0), Error);
  CHECK_THROWS_AS(pod_basis(S, 9), Error);
}

TEST_CASE("full basis reduction reproduces every evaluation") {
  oracle::Gen gen(82);
  const EnergyModel m = samples::random_quartic_model(gen, 2, 2, 1);
  const EnergyModel r = reduce_model(m, ReducedBasis::identity(m));
  REQUIRE(r.has_analytic_jacobian());
  for (int trial = 0; trial < 5; ++trial) {
    const Vector a = gen.vector(2), b = gen.vector(2), v = gen.vector(5);
    CHECK(std::abs(r.hamiltonian(a, b) - m.hamiltonian(a, b)) <= 1e-14);
    CHECK((r.grad1(a, b) - m.grad1(a, b)).norm() <= 1e-14);
    CHECK((r.grad2(a, b) - m.grad2(a, b)).norm() <= 1e-14);
    CHECK((r.apply_J(v) - m.apply_J(v)).norm() <= 1e-14);
    CHECK((r.apply_R(v) - m.apply_R(v)).norm() <= 1e-14);
    CHECK((r.input(Vector::Ones(1), 0.3) - m.input(Vector::Ones(1), 0.3)).norm() <= 1e-14);
  }
}

TEST_CASE("reduction keeps skew and dissipative structure") {
  oracle::Gen gen(83);
  for (int trial = 0; trial < 5; ++trial) {
    const EnergyModel m = samples::random_quartic_model(gen, 4, 3, 3);
    ReducedBasis basis;
    basis.V1 = random_orthogonal(4, 10 + trial).leftCols(2);
    basis.V2 = random_orthogonal(3, 20 + trial).leftCols(2);
    basis.V3 = random_orthogonal(3, 30 + trial).leftCols(1);
    const EnergyModel r = reduce_model(m, basis);
    CHECK(r.n() == 5);
    for (int s = 0; s < 10; ++s) {
      const Vector v = gen.unit(5);
      CHECK(std::abs(v.dot(r.apply_J(v))) <= 1e-12);
      CHECK(v.dot(r.apply_R(v)) >= -1e-12);
    }
    CHECK(validate_structure(r, 100, 4).ok());
  }
}

TEST_CASE("random orthogonal full basis gives the same trajectory") {
  oracle::Gen gen(84);
  const EnergyModel m = samples::random_quartic_model(gen, 3, 2, 2);
  ReducedBasis basis{random_orthogonal(3, 1), random_orthogonal(2, 2), random_orthogonal(2, 3)};
  const EnergyModel r = reduce_model(m, basis);
  const InitialState init{gen.vector(3, 0.5), gen.vector(2, 0.5), gen.vector(2, 0.5)};
  SchemeParams p = SchemeParams::for_degree(2);
  p.newton_tol = 1e-13;
  const auto full = solve(m, TimeGrid::uniform(1.0, 0.1), init, samples::sine_input(), p);
  const auto red = solve(r, TimeGrid::uniform(1.0, 0.1), project_initial(basis, init), samples::sine_input(), p);
  for (double t : {0.0, 0.35, 0.8, 1.0}) {
    const StateValue a = full.trajectory.eval(t);
    const StateValue b = lift(basis, red.trajectory.eval(t));
    CHECK((a.stacked() - b.stacked()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("projected initial values") {
  oracle::Gen gen(85);
  ReducedBasis basis{random_orthogonal(6, 4).leftCols(3), Matrix(0, 0), random_orthogonal(4, 5).leftCols(2)};
  const InitialState inside{basis.V1 * gen.vector(3), Vector(0), basis.V3 * gen.vector(2)};
  const StateValue back = lift(basis, [&] {
    const auto p = project_initial(basis, inside);
    return StateValue{p.z1, p.z2, p.z3};
  }());
  CHECK((back.z1 - inside.z1).norm() <= 1e-12);
  CHECK((back.z3 - inside.z3).norm() <= 1e-12);
  const auto zero = project_initial(basis, {Vector::Zero(6), Vector(0), Vector::Zero(4)});
  CHECK(zero.z1.norm() == 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    const InitialState any{gen.vector(6), Vector(0), gen.vector(4)};
    const auto p = project_initial(basis, any);
    CHECK(p.z1.norm() <= any.z1.norm() + 1e-14);
    CHECK(p.z3.norm() <= any.z3.norm() + 1e-14);
  }
}

TEST_CASE("basis checks") {
  oracle::Gen gen(86);
  const EnergyModel m = samples::random_quartic_model(gen, 3, 0, 2);
  ReducedBasis wrong{Matrix::Identity(4, 2), Matrix(0, 0), Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(reduce_model(m, wrong), Error);
  ReducedBasis skewed{Matrix::Ones(3, 1), Matrix(0, 0), Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(check_basis(m, skewed), Error);
}

TEST_CASE("reduced Cahn-Hilliard keeps the structure") {
  const auto ch = fem::build_cahn_hilliard(fem::build_mesh(4), {0.1, 1.0});
  const auto init = fem::make_consistent_initial(ch, fem::fractal_noise_initial(ch.mesh, 9, 2, 0.8));
  SchemeParams p = SchemeParams::for_degree(2);
  p.n_q = 4;
  p.newton_tol = 1e-12;
  const auto full = solve(ch.model, TimeGrid::uniform(0.2, 0.02), init, {}, p);
  const auto snaps = collect_snapshots(full.trajectory);
  CHECK(snaps.z1.rows() == ch.nodes());
  CHECK(snaps.z1.cols() == 11);
  CHECK(snaps.z2.rows() == 0);
  const ReducedBasis basis = pod_reduced_basis(snaps, 3, 0, 3);
  const EnergyModel r = reduce_model(ch.model, basis);
  CHECK(validate_structure(r, 200, 5).ok());
  const auto red = solve(r, TimeGrid::uniform(0.2, 0.02), project_initial(basis, init), {}, p);
  double prev = red.H0;
  for (const auto& e : red.audit) {
    CHECK(e.H <= prev + 1e-11);
    prev = e.H;
  }
}

TEST_CASE("matrix csv round trip") {
  oracle::Gen gen(87);
  const Matrix A = gen.matrix(4, 3) * 1e3;
  std::stringstream io;
  write_matrix_csv(io, A);
  CHECK(read_matrix_csv(io) == A);
  std::stringstream bad("1,2\n3\n");
  CHECK_THROWS_AS(read_matrix_csv(bad), Error);
  std::ostringstream spectrum;
  write_spectrum_csv(spectrum, (Vector(2) << 2.0, 0.5).finished());
  CHECK(spectrum.str() == "index,singular_value\n1,2\n2,0.5\n");
}
