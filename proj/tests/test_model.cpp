#include <doctest.h>

#include "ebm/model.hpp"
#include "oracles.hpp"

using namespace ebm;

namespace {

// Quadratic energy H = 1/2 c^T Q c on (z1, z2) with random structure.
EnergyModel random_linear_model(oracle::Gen& gen, Index n1, Index n2, Index n3) {
  const Index n = n1 + n2 + n3, n12 = n1 + n2;
  LinearBlockOperators ops;
  ops.n1 = n1;
  ops.n2 = n2;
  ops.n3 = n3;
  ops.Jbar = to_sparse(gen.skew(n));
  ops.Rbar = to_sparse(gen.psd(n, std::max<Index>(1, n / 2)));
  ops.Bbar = gen.matrix(n, 2);
  ops.M2 = n2 ? gen.spd(n2) : Matrix();
  const Matrix Q = gen.spd(n12);
  auto stack = [n1, n2](const Vector& a, const Vector& b) {
    Vector c(n1 + n2);
    c << a, b;
    return c;
  };
  return from_linear_blocks(
      ops, [Q, stack](const Vector& a, const Vector& b) { const Vector c = stack(a, b); return 0.5 * c.dot(Q * c); },
      [Q, stack, n1](const Vector& a, const Vector& b) -> Vector { return (Q * stack(a, b)).head(n1); },
      [Q, stack, n2](const Vector& a, const Vector& b) -> Vector { return (Q * stack(a, b)).tail(n2); },
      [Q](const Vector&, const Vector&) -> SparseMatrix { return to_sparse(Q); });
}

}  // namespace

TEST_CASE("random linear block models pass structure validation") {
  oracle::Gen gen(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n1 = gen.integer(0, 3), n2 = gen.integer(0, 3), n3 = gen.integer(0, 3);
    if (n1 + n2 + n3 == 0) continue;
    const EnergyModel m = random_linear_model(gen, n1, n2, n3);
    const auto report = validate_structure(m, 200, 7);
    CHECK(report.skew_ok());
    CHECK(report.psd_ok());
    CHECK(report.gradient_ok());
    CHECK(m.has_analytic_jacobian());
  }
}

TEST_CASE("mass matrix scaling keeps J skew and R symmetric") {
  oracle::Gen gen(42);
  const EnergyModel m = random_linear_model(gen, 1, 3, 2);
  const Matrix J = Matrix(*m.J_matrix), R = Matrix(*m.R_matrix);
  CHECK((J + J.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((R - R.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (int i = 0; i < 20; ++i) {
    const Vector v = gen.unit(6);
    CHECK(v.dot(m.apply_R(v)) >= -1e-12);
  }
}

TEST_CASE("non-SPD mass matrix is rejected") {
  LinearBlockOperators ops;
  ops.n2 = 2;
  ops.Jbar = SparseMatrix(2, 2);
  ops.Rbar = SparseMatrix(2, 2);
  ops.M2 = -Matrix::Identity(2, 2);
  auto h = [](const Vector&, const Vector&) { return 0.0; };
  auto g = [](const Vector& a, const Vector&) -> Vector { return a; };
  try {
    from_linear_blocks(ops, h, g, g);
    FAIL("expected NotSPD");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSPD);
  }
}

TEST_CASE("validation detects broken structure") {
  EnergyModel m;
  m.n1 = 2;
  m.hamiltonian = [](const Vector& a, const Vector&) { return a.squaredNorm(); };
  m.grad1 = [](const Vector& a, const Vector&) -> Vector { return a; };  // should be 2a
  m.grad2 = [](const Vector&, const Vector&) -> Vector { return Vector(0); };
  m.apply_J = [](const Vector& v) -> Vector { return v; };  // not skew
  m.apply_R = [](const Vector& v) -> Vector { return -v; };  // not dissipative
  const auto r = validate_structure(m, 50, 1);
  CHECK_FALSE(r.skew_ok());
  CHECK_FALSE(r.psd_ok());
  CHECK_FALSE(r.gradient_ok());
  CHECK_FALSE(r.ok());
}

TEST_CASE("energy rate splits into dissipation and supply") {
  oracle::Gen gen(43);
  const EnergyModel m = random_linear_model(gen, 2, 0, 2);
  const Vector v = gen.vector(4), u = gen.vector(2);
  const EnergyRate rate = energy_rate(m, v, u, 0.0);
  CHECK(rate.dissipation == doctest::Approx(v.dot(m.apply_R(v))));
  CHECK(rate.supply == doctest::Approx(v.dot(m.input(u, 0.0))));
  CHECK(rate.dissipation >= -1e-12);
}
