#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "qfiwit/channels.hpp"
#include "qfiwit/qmat.hpp"

using namespace qfiwit;

namespace {

ComplexMatrix random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("rotation channel conjugates by the axis unitary") {
  ParamChannelFamily ch = rotation_channel({0, 0, 1});
  const double theta = 0.7;
  ComplexMatrix rho = (identity(2) + 0.4 * sigma_x() + 0.2 * sigma_z()) / 2.0;
  ComplexMatrix u(2, 2);
  u << std::exp(Complex(0, theta / 2)), 0, 0, std::exp(Complex(0, -theta / 2));
  CHECK((ch.apply(theta, rho) - u * rho * u.adjoint()).norm() < 1e-12);
  CHECK(ch.gstar_analytic(theta) == doctest::Approx(1.0));
  // trace and spectrum preserved
  CHECK(ch.apply(theta, rho).trace().real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(rotation_channel({1, 1, 0}), std::invalid_argument);
}

TEST_CASE("rotation derivative matches finite differences") {
  std::mt19937_64 rng(3);
  ParamChannelFamily ch = rotation_channel({1, 0, 0});
  ComplexMatrix rho = random_state(2, rng);
  ComplexMatrix fd = finite_difference_derivative(ch, 0.4, rho).mat();
  CHECK((ch.derivative(0.4, rho) - fd).norm() < 1e-8);
}

TEST_CASE("depolarizing channel: action, ptm, derivative, domain") {
  ParamChannelFamily ch = depolarizing_channel();
  ComplexMatrix rho = (identity(2) + 0.6 * sigma_y()) / 2.0;
  const double theta = 0.35;
  CHECK((ch.apply(theta, rho) - (theta * rho + (1 - theta) * identity(2) / 2.0)).norm() <
        1e-14);
  Eigen::Matrix4d m = ptm(ch, theta);
  Eigen::Vector4d expect(1.0, theta, theta, theta);
  CHECK((m - Eigen::Matrix4d(expect.asDiagonal())).norm() < 1e-12);
  CHECK(ch.gstar_analytic(theta) == doctest::Approx(1.0 / (1 - theta * theta)));
  CHECK_THROWS_AS(ch.apply(1.2, rho), std::domain_error);
  CHECK_THROWS_AS(ch.require_domain(-0.1), std::domain_error);
  std::mt19937_64 rng(5);
  ComplexMatrix r2 = random_state(2, rng);
  CHECK((ch.derivative(theta, r2) - finite_difference_derivative(ch, theta, r2).mat()).norm() <
        1e-8);
}

TEST_CASE("transpose channel is 1-positive but not CP") {
  ParamChannelFamily ch = transpose_channel();
  CHECK_FALSE(ch.completely_positive);
  CHECK(ch.one_positive);
  const double theta = 0.3;
  ComplexMatrix rho = (identity(2) + 0.5 * sigma_y()) / 2.0;
  ComplexMatrix out = ch.apply(theta, rho);
  // transpose flips sigma_y, so the y component shrinks by 2 theta - 1
  CHECK(bloch_of(out).s[1] == doctest::Approx(0.5 * (2 * theta - 1)).epsilon(1e-12));
  CHECK(is_density(out).valid);  // single-system outputs stay states
  Eigen::Matrix4d m = ptm(ch, theta);
  Eigen::Vector4d expect(1.0, 1.0, 2 * theta - 1, 1.0);
  CHECK((m - Eigen::Matrix4d(expect.asDiagonal())).norm() < 1e-12);
  CHECK(ch.gstar_analytic(0.25) == doctest::Approx(1.0 / (0.25 * 0.75)));
}

TEST_CASE("two-copy transpose leaves the state set on a Bell input") {
  ParamChannelFamily two = iid_extend(transpose_channel(), 2);
  CHECK_FALSE(two.one_positive);
  ComplexVector psi = bell_psi(+1);
  ComplexMatrix out = two.apply(0.9, psi * psi.adjoint());
  CHECK_FALSE(is_density(out).valid);
  CHECK(out.trace().real() == doctest::Approx(1.0));
}

TEST_CASE("iid extension matches explicit tensor products") {
  std::mt19937_64 rng(7);
  ParamChannelFamily base = depolarizing_channel();
  ParamChannelFamily two = iid_extend(base, 2);
  const double theta = 0.6;
  ComplexMatrix a = random_state(2, rng);
  ComplexMatrix b = random_state(2, rng);
  ComplexMatrix out = two.apply(theta, kron(a, b));
  CHECK((out - kron(base.apply(theta, a), base.apply(theta, b))).norm() < 1e-12);
  // product rule on the derivative
  ComplexMatrix expect = kron(base.derivative(theta, a), base.apply(theta, b)) +
                         kron(base.apply(theta, a), base.derivative(theta, b));
  CHECK((two.derivative(theta, kron(a, b)) - expect).norm() < 1e-12);
  CHECK_THROWS_AS(iid_extend(base, 7), std::invalid_argument);
  CHECK_THROWS_AS(iid_extend(base, 0), std::invalid_argument);
}

TEST_CASE("linearization reproduces apply and derivative") {
  std::mt19937_64 rng(9);
  for (const auto& ch : {depolarizing_channel(), transpose_channel(),
                         rotation_channel({0, 1, 0})}) {
    const double theta = 0.45;
    ChannelLinearization lin = linearize_channel(ch, theta);
    ComplexMatrix rho = random_state(2, rng);
    CHECK((apply_linearized(lin.s_apply, rho) - ch.apply(theta, rho)).norm() < 1e-12);
    CHECK((tangent_linearized(lin, rho) - channel_tangent(ch, theta, rho)).norm() < 1e-10);
  }
}

TEST_CASE("lindblad rk4 matches the analytic isotropic solution") {
  // isotropic damping: s(t) = exp(-2 gamma t) R_z(theta t) s(0)
  const double gamma = 0.4, theta = 0.9;
  LindbladSpec spec{theta, {gamma, gamma, gamma}, 0.0, 1};
  BlochVector s0{{0.3, -0.4, 0.5}};
  DensityMatrix rho0 = bloch_to_density(s0);
  for (double t : {0.2, 1.0, 2.5}) {
    spec.t = t;
    BlochVector s = bloch_of(lindblad_evolve(spec, rho0));
    const double decay = std::exp(-2 * gamma * t);
    const double c = std::cos(theta * t), sn = std::sin(theta * t);
    CHECK(s.s[0] == doctest::Approx(decay * (c * s0.s[0] - sn * s0.s[1])).epsilon(1e-8));
    CHECK(s.s[1] == doctest::Approx(decay * (sn * s0.s[0] + c * s0.s[1])).epsilon(1e-8));
    CHECK(s.s[2] == doctest::Approx(decay * s0.s[2]).epsilon(1e-8));
  }
}

TEST_CASE("lindblad rk4 agrees with the closed-form ptm route") {
  LindbladSpec spec{0.8, {0.3, 0.1, 0.05}, 1.7, 1};
  std::mt19937_64 rng(13);
  ComplexMatrix rho0 = random_state(2, rng);
  CHECK((lindblad_evolve(spec, rho0) - lindblad_ptm_evolve(spec, rho0)).norm() < 1e-7);

  // two qubits, entangled input
  LindbladSpec spec2{0.8, {0.3, 0.1, 0.05}, 1.1, 2};
  ComplexVector phi = bell_phi(+1);
  CHECK((lindblad_evolve(spec2, phi * phi.adjoint()) -
         lindblad_ptm_evolve(spec2, phi * phi.adjoint()))
            .norm() < 1e-7);
}

TEST_CASE("lindblad semigroup property") {
  LindbladSpec half{0.6, {0.2, 0.2, 0.1}, 0.7, 1};
  LindbladSpec full = half;
  full.t = 1.4;
  std::mt19937_64 rng(17);
  ComplexMatrix rho0 = random_state(2, rng);
  ComplexMatrix once = lindblad_evolve(full, rho0);
  ComplexMatrix twice = lindblad_evolve(half, lindblad_evolve(half, rho0));
  CHECK((once - twice).norm() < 1e-8);
}

TEST_CASE("lindblad edge cases and validation") {
  LindbladSpec spec{0.5, {0.1, 0.1, 0.1}, 0.0, 1};
  ComplexMatrix rho0 = (identity(2) + 0.3 * sigma_x()) / 2.0;
  CHECK((lindblad_evolve(spec, rho0) - rho0).norm() == doctest::Approx(0.0));
  LindbladSpec bad = spec;
  bad.gamma[1] = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.t = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.n_qubits = 9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("lindblad derivative matches an independent finite difference") {
  LindbladSpec spec{0.7, {0.2, 0.1, 0.3}, 1.2, 1};
  ComplexMatrix rho0 = (identity(2) + 0.5 * sigma_x() - 0.2 * sigma_z()) / 2.0;
  ComplexMatrix d = lindblad_evolve_derivative(spec, rho0);
  const double h = 1e-5;
  LindbladSpec up = spec, dn = spec;
  up.theta += h;
  dn.theta -= h;
  ComplexMatrix fd = (lindblad_evolve(up, rho0) - lindblad_evolve(dn, rho0)) / (2 * h);
  CHECK((d - fd).norm() < 1e-6);
  CHECK(std::abs(d.trace().real()) < 1e-12);
}

TEST_CASE("channel json round trip") {
  for (const auto& ch : {rotation_channel({0, 0, 1}), depolarizing_channel(),
                         transpose_channel(), lindblad_channel({0.2, 0.1, 0.0}, 1.5, 2)}) {
    nlohmann::json j = channel_to_json(ch);
    ParamChannelFamily back = channel_from_json(j);
    CHECK(back.kind == ch.kind);
    CHECK(back.dim_in == ch.dim_in);
    CHECK(back.completely_positive == ch.completely_positive);
    CHECK(back.theta_min == doctest::Approx(ch.theta_min));
  }
  CHECK_THROWS_AS(channel_from_json(nlohmann::json{{"kind", "bogus"}}), std::invalid_argument);
}
