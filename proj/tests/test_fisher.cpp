#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qfiwit/fisher.hpp"
#include "qfiwit/qmat.hpp"

using namespace qfiwit;

namespace {

// Independent qubit oracle: for rho = (I + s.sigma)/2, drho = (ds.sigma)/2,
// the SLD Fisher information is |ds|^2 + (s.ds)^2 / (1 - |s|^2).
double qubit_qfi_oracle(const std::array<double, 3>& s, const std::array<double, 3>& ds) {
  double s2 = 0, sds = 0, ds2 = 0;
  for (int i = 0; i < 3; ++i) {
    s2 += s[i] * s[i];
    sds += s[i] * ds[i];
    ds2 += ds[i] * ds[i];
  }
  return ds2 + sds * sds / (1.0 - s2);
}

ComplexMatrix bloch_op(const std::array<double, 3>& v) {
  return 0.5 * (v[0] * sigma_x() + v[1] * sigma_y() + v[2] * sigma_z());
}

}  // namespace

TEST_CASE("sld solves the Lyapunov equation and matches the qubit oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 3> s{u(rng), u(rng), u(rng)};
    std::array<double, 3> ds{u(rng), u(rng), u(rng)};
    ComplexMatrix rho = identity(2) / 2.0 + bloch_op(s);
    ComplexMatrix drho = bloch_op(ds);
    SldResult r = sld_operator(rho, drho);
    CHECK((0.5 * (rho * r.sld + r.sld * rho) - drho).norm() < 1e-10);
    CHECK(herm_residual(r.sld) < 1e-10);
    CHECK(r.qfi == doctest::Approx(qubit_qfi_oracle(s, ds)).epsilon(1e-9));
    CHECK(r.qfi == doctest::Approx(qfi(rho, drho)).epsilon(1e-12));
    CHECK(r.support_rank == 2);
  }
}

TEST_CASE("pure state qfi is 4 x overlap variance") {
  // rho = |0><0|, drho = i[G, rho] with G = sigma_x/2: qfi = 4 Var(G) = 1
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  ComplexMatrix g = 0.5 * sigma_x();
  ComplexMatrix drho = Complex(0, 1) * (g * rho - rho * g);
  CHECK(qfi(rho, drho) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rank change raises") {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  // tangent with weight in the null space |1><1|
  CHECK_THROWS_AS(qfi(rho, sigma_z()), RankChangeError);
  // tangent inside the support block is fine
  CHECK(qfi(rho, ComplexMatrix::Zero(2, 2)) == doctest::Approx(0.0));
}

TEST_CASE("classical fisher frozen value and guards") {
  std::vector<double> p{0.2, 0.3, 0.5}, dp{0.1, -0.3, 0.2};
  CHECK(classical_fisher(p, dp) == doctest::Approx(0.43).epsilon(1e-12));
  // vanishing outcome with vanishing derivative is dropped
  CHECK(classical_fisher({0.5, 0.5, 0.0}, {0.2, -0.2, 0.0}) ==
        doctest::Approx(0.08 / 0.5).epsilon(1e-12));
  // vanishing outcome with live derivative is unbounded
  CHECK_THROWS_AS(classical_fisher({0.5, 0.5, 0.0}, {0.1, -0.3, 0.2}), UnboundedFisherError);
  CHECK_THROWS_AS(classical_fisher({0.5, 0.5}, {0.1, -0.3, 0.2}), std::invalid_argument);
}

TEST_CASE("povm validation") {
  Povm good;
  good.effects = {ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  good.effects[0](0, 0) = 1.0;
  good.effects[1](1, 1) = 1.0;
  CHECK_NOTHROW(validate_povm(good, 2));
  Povm bad = good;
  bad.effects[1](1, 1) = 0.5;  // does not resolve identity
  CHECK_THROWS_AS(validate_povm(bad, 2), std::domain_error);
  Povm neg;
  neg.effects = {2.0 * identity(2), -identity(2)};
  CHECK_THROWS_AS(validate_povm(neg, 2), std::domain_error);
}

TEST_CASE("optimal povm attains the quantum fisher information") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 3> s{u(rng), u(rng), u(rng)};
    std::array<double, 3> ds{u(rng), u(rng), u(rng)};
    ComplexMatrix rho = identity(2) / 2.0 + bloch_op(s);
    ComplexMatrix drho = bloch_op(ds);
    Povm povm = optimal_povm(rho, drho);
    validate_povm(povm, 2);
    const double g = qfi(rho, drho);
    CHECK(povm_fisher(rho, drho, povm) >= g - 1e-8);
    CHECK(povm_fisher(rho, drho, povm) <= g + 1e-8);
  }
}

TEST_CASE("povm fisher is monotone: coarse graining loses information") {
  ComplexMatrix rho = identity(2) / 2.0 + bloch_op({0.3, 0.1, 0.2});
  ComplexMatrix drho = bloch_op({0.1, -0.2, 0.3});
  Povm trivial;
  trivial.effects = {identity(2)};
  CHECK(povm_fisher(rho, drho, trivial) == doctest::Approx(0.0));
  Povm zbasis;
  zbasis.effects = {ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  zbasis.effects[0](0, 0) = 1.0;
  zbasis.effects[1](1, 1) = 1.0;
  const double fz = povm_fisher(rho, drho, zbasis);
  CHECK(fz >= 0.0);
  CHECK(fz <= qfi(rho, drho) + 1e-12);
}

TEST_CASE("f divergences: frozen values, zero at p=q, curvature factors") {
  std::vector<double> p{0.2, 0.3, 0.5}, q{0.25, 0.35, 0.4};
  CHECK(f_divergence(p, q, DivergenceKind::RelativeEntropy).value ==
        doctest::Approx(0.020697861446085472).epsilon(1e-12));
  CHECK(f_divergence(p, q, DivergenceKind::Hellinger).value ==
        doctest::Approx(0.0051425718296700396).epsilon(1e-12));
  CHECK(f_divergence(p, q, DivergenceKind::Renyi, 1.5).value ==
        doctest::Approx(0.015322580994565183).epsilon(1e-12));
  for (auto kind : {DivergenceKind::RelativeEntropy, DivergenceKind::Hellinger})
    CHECK(f_divergence(p, p, kind).value == doctest::Approx(0.0));
  // KL blows up on support mismatch
  CHECK(f_divergence({0.5, 0.5}, {1.0, 0.0}, DivergenceKind::RelativeEntropy).infinite);
  CHECK(divergence_curvature(DivergenceKind::RelativeEntropy) == doctest::Approx(1.0));
  CHECK(divergence_curvature(DivergenceKind::Hellinger) == doctest::Approx(0.25));
  CHECK(divergence_curvature(DivergenceKind::Renyi, 1.5) == doctest::Approx(0.75));
}

TEST_CASE("fisher_from_divergence recovers the classical fisher information") {
  // binomial family p_theta = (theta, 1-theta): F = 1/(theta(1-theta))
  const double theta = 0.3;
  const double fisher = 1.0 / (theta * (1 - theta));
  for (auto kind : {DivergenceKind::RelativeEntropy, DivergenceKind::Hellinger,
                    DivergenceKind::Renyi}) {
    auto curve = [&](double th) {
      return f_divergence({theta, 1 - theta}, {th, 1 - th}, kind, 1.5).value;
    };
    auto ladder = fisher_from_divergence(curve, theta, 1e-2, divergence_curvature(kind, 1.5));
    REQUIRE(ladder.size() == 4);
    CHECK(ladder.back().symmetric == doctest::Approx(fisher).epsilon(1e-4));
    // error shrinks down the ladder
    CHECK(std::abs(ladder.back().symmetric - fisher) <=
          std::abs(ladder.front().symmetric - fisher) + 1e-12);
  }
}

TEST_CASE("commutation superop solves rho D + D rho = -i[rho, x]") {
  ComplexMatrix rho = identity(2) / 2.0 + bloch_op({0.2, -0.1, 0.3});
  ComplexMatrix x = sigma_x() + 0.3 * sigma_z();
  ComplexMatrix d = commutation_superop(rho, x);
  ComplexMatrix lhs = rho * d + d * rho;
  ComplexMatrix rhs = (rho * x - x * rho) / Complex(0, 1);
  CHECK((lhs - rhs).norm() < 1e-10);
  CHECK(herm_residual(d) < 1e-10);
}
