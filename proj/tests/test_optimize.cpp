#include <doctest.h>

#include <cmath>
#include <random>

#include "qfiwit/channels.hpp"
#include "qfiwit/fisher.hpp"
#include "qfiwit/optimize.hpp"
#include "qfiwit/qmat.hpp"

using namespace qfiwit;

namespace {

GStarOptions fast_opts() {
  GStarOptions o;
  o.restarts = 6;
  return o;
}

// Shift-model tangent at theta = 0: drho = i[A, rho].
ComplexMatrix shift_tangent(const ComplexMatrix& a, const ComplexMatrix& rho) {
  return Complex(0, 1) * (a * rho - rho * a);
}

}  // namespace

TEST_CASE("gstar of the rotation channel is 1") {
  GStarResult r = gstar(rotation_channel({0, 0, 1}), 0.6, fast_opts());
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(is_density(r.argmax_state).valid);
}

TEST_CASE("gstar reproduces the depolarizing closed form") {
  for (double theta : {0.3, 0.6, 0.9}) {
    GStarResult r = gstar(depolarizing_channel(), theta, fast_opts());
    CHECK(r.value == doctest::Approx(1.0 / (1 - theta * theta)).epsilon(1e-6));
  }
}

TEST_CASE("gstar reproduces the transpose closed form") {
  for (double theta : {0.25, 0.5, 0.8}) {
    GStarResult r = gstar(transpose_channel(), theta, fast_opts());
    CHECK(r.value == doctest::Approx(1.0 / (theta * (1 - theta))).epsilon(1e-6));
  }
}

TEST_CASE("transpose optimum sits on the sigma_y eigenstates") {
  GStarResult r = gstar(transpose_channel(), 0.5, fast_opts());
  BlochVector s = bloch_of(r.argmax_state);
  CHECK(std::abs(s.s[1]) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(s.s[0]) < 1e-3);
  CHECK(std::abs(s.s[2]) < 1e-3);
}

TEST_CASE("gstar is deterministic for a fixed seed") {
  GStarResult a = gstar(depolarizing_channel(), 0.7, fast_opts());
  GStarResult b = gstar(depolarizing_channel(), 0.7, fast_opts());
  CHECK(a.value == b.value);
  CHECK((a.argmax_state - b.argmax_state).norm() == doctest::Approx(0.0));
}

TEST_CASE("gstar rejects theta outside the channel domain") {
  CHECK_THROWS_AS(gstar(depolarizing_channel(), 1.5, fast_opts()), std::domain_error);
}

TEST_CASE("unitary gstar is the squared spectral span") {
  ComplexMatrix a = 0.5 * sigma_z();
  UnitaryGStar r = gstar_unitary(a);
  CHECK(r.value == doctest::Approx(1.0));
  // argmax is the equal superposition: variance = span^2 / 4
  CHECK(variance(r.argmax_state, a) == doctest::Approx(0.25).epsilon(1e-12));
  // qfi of the generated model matches 4 * variance
  CHECK(qfi(r.argmax_state, shift_tangent(a, r.argmax_state)) ==
        doctest::Approx(1.0).epsilon(1e-8));

  ComplexMatrix b(3, 3);
  b.setZero();
  b(0, 0) = -1.0;
  b(1, 1) = 0.2;
  b(2, 2) = 3.0;
  CHECK(gstar_unitary(b).value == doctest::Approx(16.0));
}

TEST_CASE("variance basics") {
  ComplexMatrix rho = identity(2) / 2.0;
  CHECK(variance(rho, sigma_z()) == doctest::Approx(1.0));
  ComplexMatrix pure = ComplexMatrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  CHECK(variance(pure, sigma_z()) == doctest::Approx(0.0));
  CHECK_THROWS_AS(variance(rho, identity(3)), std::invalid_argument);
}

TEST_CASE("shift-model qfi never exceeds four times the variance") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ComplexMatrix m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = Complex(g(rng), g(rng));
    ComplexMatrix rho = m * m.adjoint();
    rho /= rho.trace().real();
    ComplexMatrix a = hermitize(m + m.adjoint());
    CHECK(qfi(rho, shift_tangent(a, rho)) <= 4 * variance(rho, a) + 1e-8);
  }
}

TEST_CASE("variance-bound equality: pure states and the rank-2 dim-3 family") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    // pure state, arbitrary Hermitian generator
    ComplexVector psi(3);
    for (int i = 0; i < 3; ++i) psi(i) = Complex(g(rng), g(rng));
    psi.normalize();
    ComplexMatrix rho = psi * psi.adjoint();
    ComplexMatrix m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = Complex(g(rng), g(rng));
    ComplexMatrix a = hermitize(m + m.adjoint());
    CHECK(variance_bound_equality_check(rho, a).equality);
    CHECK(qfi(rho, shift_tangent(a, rho)) ==
          doctest::Approx(4 * variance(rho, a)).epsilon(1e-8));

    // mixed rank-2 counterexample: rho = diag(l, 1-l, 0),
    // A = [[a,0,c*],[0,a,d*],[c,d,b]] with the same diagonal entry a twice
    const double l = u(rng), av = g(rng), bv = g(rng);
    const Complex c(g(rng), g(rng)), d(g(rng), g(rng));
    ComplexMatrix rho2 = ComplexMatrix::Zero(3, 3);
    rho2(0, 0) = l;
    rho2(1, 1) = 1 - l;
    ComplexMatrix a2 = ComplexMatrix::Zero(3, 3);
    a2(0, 0) = av;
    a2(1, 1) = av;
    a2(2, 2) = bv;
    a2(0, 2) = std::conj(c);
    a2(2, 0) = c;
    a2(1, 2) = std::conj(d);
    a2(2, 1) = d;
    CHECK(variance_bound_equality_check(rho2, a2).equality);
    CHECK(qfi(rho2, shift_tangent(a2, rho2)) ==
          doctest::Approx(4 * variance(rho2, a2)).epsilon(1e-8));

    // generic mixed states break equality
    ComplexMatrix full = m * m.adjoint();
    full /= full.trace().real();
    CHECK_FALSE(variance_bound_equality_check(full, a).equality);
  }
}

TEST_CASE("open system gstar: unitary limit and t=0") {
  GStarOptions o = fast_opts();
  CHECK(open_system_gstar({0, 0, 0}, 1.0, 0.0, o).value == doctest::Approx(0.0));
  // gamma = 0 reduces to the unitary model with generator t J_z: g* = t^2
  for (double t : {0.5, 1.5}) {
    GStarResult r = open_system_gstar({0, 0, 0}, 1.0, t, o);
    CHECK(r.value == doctest::Approx(t * t).epsilon(1e-5));
  }
}

TEST_CASE("open system gstar decays under isotropic damping") {
  GStarOptions o = fast_opts();
  const double g1 = open_system_gstar({0.3, 0.3, 0.3}, 1.0, 0.8, o).value;
  const double g2 = open_system_gstar({0.6, 0.6, 0.6}, 1.0, 0.8, o).value;
  CHECK(g1 < 0.8 * 0.8);
  CHECK(g2 < g1);
  CHECK_THROWS_AS(open_system_gstar({0.1, 0.1, 0.1}, 1.0, -1.0, o), std::invalid_argument);
}
