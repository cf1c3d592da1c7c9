#include "qfiwit/optimize.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "qfiwit/fisher.hpp"

namespace qfiwit {

namespace {

ComplexVector chart_to_state(const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size() / 2);
  ComplexVector psi(d);
  for (int i = 0; i < d; ++i) psi(i) = Complex(v(2 * i), v(2 * i + 1));
  const double n = psi.norm();
  if (n < 1e-12) throw std::runtime_error("gstar: degenerate chart point");
  return psi / n;
}

double output_qfi(const ChannelLinearization& lin, const ComplexVector& psi) {
  ComplexMatrix rho = psi * psi.adjoint();
  ComplexMatrix out = hermitize(apply_linearized(lin.s_apply, rho));
  return qfi(out, tangent_linearized(lin, rho));
}

struct AscentResult {
  double value = -1.0;
  Eigen::VectorXd point;
  bool converged = false;
  double gradient_norm = 0.0;
};

AscentResult ascend(const ChannelLinearization& lin, Eigen::VectorXd v, const GStarOptions& opts) {
  auto cost = [&](const Eigen::VectorXd& x) { return output_qfi(lin, chart_to_state(x)); };
  v.normalize();
  double f = cost(v);
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd grad(n);
  AscentResult res;
  double alpha = 1.0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd vp = v, vm = v;
      vp(i) += opts.gradient_step;
      vm(i) -= opts.gradient_step;
      grad(i) = (cost(vp) - cost(vm)) / (2.0 * opts.gradient_step);
    }
    grad -= grad.dot(v) * v;  // tangent to the sphere
    res.gradient_norm = grad.norm();
    if (res.gradient_norm <= opts.tol) {
      res.converged = true;
      break;
    }
    // Armijo backtracking along the projected gradient; the accepted step is
    // carried over (and grown) so progress stays linear near the optimum
    bool improved = false;
    while (alpha > 1e-14) {
      Eigen::VectorXd cand = (v + alpha * grad).normalized();
      const double fc = cost(cand);
      if (fc >= f + 1e-4 * alpha * res.gradient_norm * res.gradient_norm) {
        v = cand;
        f = fc;
        improved = true;
        alpha = std::min(alpha * 2.0, 1e3);
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;  // stalled at machine precision
  }
  res.value = f;
  res.point = v;
  return res;
}

}  // namespace

GStarResult gstar(const ParamChannelFamily& channel, double theta, const GStarOptions& opts) {
  channel.require_domain(theta);
  const int d = channel.dim_in;
  const ChannelLinearization lin = linearize_channel(channel, theta);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GStarResult best;
  best.value = -1.0;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd v(2 * d);
    for (int i = 0; i < 2 * d; ++i) v(i) = gauss(rng);
    AscentResult res = ascend(lin, v, opts);
    if (res.value > best.value) {
      ComplexVector psi = chart_to_state(res.point);
      best.value = res.value;
      best.argmax_state = psi * psi.adjoint();
      best.converged = res.converged;
      best.gradient_norm = res.gradient_norm;
    }
  }
  best.restarts_used = opts.restarts;
  return best;
}

UnitaryGStar gstar_unitary(const ComplexMatrix& generator) {
  EigResult eig = eig_hermitian(generator);
  const int d = static_cast<int>(generator.rows());
  const double amin = eig.values(0), amax = eig.values(d - 1);
  UnitaryGStar res;
  res.value = (amax - amin) * (amax - amin);
  if (d == 1 || res.value == 0.0) {
    res.argmax_state = eig.vectors.col(0) * eig.vectors.col(0).adjoint();
    return res;
  }
  ComplexVector psi = (eig.vectors.col(0) + eig.vectors.col(d - 1)) / std::sqrt(2.0);
  res.argmax_state = psi * psi.adjoint();
  return res;
}

double variance(const ComplexMatrix& rho, const ComplexMatrix& a) {
  if (rho.rows() != a.rows() || rho.cols() != a.cols())
    throw std::invalid_argument("variance: dimension mismatch");
  const double mean = (rho * a).trace().real();
  const double second = (rho * a * a).trace().real();
  return second - mean * mean;
}

VarianceBoundCheck variance_bound_equality_check(const ComplexMatrix& rho0, const ComplexMatrix& a,
                                  double tol) {
  const double abar = (rho0 * a).trace().real();
  VarianceBoundCheck chk;
  chk.residual = (rho0 * a * rho0 - abar * rho0 * rho0).norm();
  chk.equality = chk.residual <= tol * std::max(1.0, a.norm());
  return chk;
}

GStarResult open_system_gstar(const std::array<double, 3>& gamma, double theta, double t,
                              const GStarOptions& opts) {
  if (t < 0.0) throw std::invalid_argument("open_system_gstar: t must be >= 0");
  if (t == 0.0) {
    GStarResult res;
    res.value = 0.0;
    ComplexVector psi = ComplexVector::Zero(2);
    psi(0) = 1.0;
    res.argmax_state = psi * psi.adjoint();
    res.converged = true;
    res.restarts_used = 0;
    return res;
  }
  return gstar(lindblad_channel(gamma, t, 1), theta, opts);
}

}  // namespace qfiwit
