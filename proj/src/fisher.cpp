#include "qfiwit/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qfiwit {

namespace {

struct SldContext {
  EigResult eig;
  ComplexMatrix drho_eb;  // dρ in the eigenbasis of ρ
  double cutoff = 0.0;
};

SldContext prepare(const ComplexMatrix& rho, const ComplexMatrix& drho) {
  if (rho.rows() != drho.rows() || rho.cols() != drho.cols())
    throw std::invalid_argument("sld_operator: dimension mismatch");
  SldContext ctx;
  ctx.eig = eig_hermitian(rho);
  const int d = static_cast<int>(rho.rows());
  ctx.cutoff = support_cutoff(d, ctx.eig.values(d - 1));
  ctx.drho_eb = ctx.eig.vectors.adjoint() * hermitize(drho) * ctx.eig.vectors;

  // Weight connecting null space to null space: the model changes rank.
  double null_weight = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (ctx.eig.values(i) + ctx.eig.values(j) <= ctx.cutoff)
        null_weight += std::norm(ctx.drho_eb(i, j));
  const double tol = 1e-8 * (1.0 + drho.norm());
  if (std::sqrt(null_weight) > tol)
    throw RankChangeError("sld_operator: tangent has null-space-to-null-space weight; "
                          "the model rank is not constant");
  return ctx;
}

}  // namespace

SldResult sld_operator(const ComplexMatrix& rho, const ComplexMatrix& drho) {
  SldContext ctx = prepare(rho, drho);
  const int d = static_cast<int>(rho.rows());
  ComplexMatrix l_eb = ComplexMatrix::Zero(d, d);
  double g = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double s = ctx.eig.values(i) + ctx.eig.values(j);
      if (s > ctx.cutoff) {
        l_eb(i, j) = 2.0 * ctx.drho_eb(i, j) / s;
        g += 2.0 * std::norm(ctx.drho_eb(i, j)) / s;
      }
    }
  SldResult res;
  res.sld = ctx.eig.vectors * l_eb * ctx.eig.vectors.adjoint();
  res.qfi = g;
  res.support_rank = 0;
  res.dropped_weight = 0.0;
  for (int i = 0; i < d; ++i) {
    if (ctx.eig.values(i) > ctx.cutoff)
      ++res.support_rank;
    else
      res.dropped_weight += std::max(ctx.eig.values(i), 0.0);
  }
  return res;
}

double qfi(const ComplexMatrix& rho, const ComplexMatrix& drho) {
  SldContext ctx = prepare(rho, drho);
  const int d = static_cast<int>(rho.rows());
  double g = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double s = ctx.eig.values(i) + ctx.eig.values(j);
      if (s > ctx.cutoff) g += 2.0 * std::norm(ctx.drho_eb(i, j)) / s;
    }
  return g;
}

void validate_povm(const Povm& povm, int dim) {
  if (povm.effects.empty()) throw std::invalid_argument("Povm: no effects");
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const auto& e : povm.effects) {
    if (e.rows() != dim || e.cols() != dim)
      throw std::invalid_argument("Povm: effect dimension mismatch");
    if (herm_residual(e) > kTolHerm * std::max(1.0, e.norm()))
      throw std::domain_error("Povm: effect not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(e), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kTolPsd)
      throw std::domain_error("Povm: effect not positive semidefinite");
    sum += e;
  }
  if ((sum - identity(dim)).norm() > kTolHerm * dim)
    throw std::domain_error("Povm: effects do not sum to identity");
}

double classical_fisher(const std::vector<double>& p, const std::vector<double>& dp) {
  if (p.size() != dp.size())
    throw std::invalid_argument("classical_fisher: length mismatch");
  const double dsum = std::accumulate(dp.begin(), dp.end(), 0.0);
  if (std::abs(dsum) > 1e-8)
    throw std::invalid_argument("classical_fisher: dp does not sum to zero");
  double g = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] > kEpsProb) {
      g += dp[x] * dp[x] / p[x];
    } else if (std::abs(dp[x]) > std::sqrt(kEpsProb)) {
      throw UnboundedFisherError(
          "classical_fisher: vanishing probability with non-vanishing derivative");
    }
  }
  return g;
}

std::vector<double> povm_probabilities(const ComplexMatrix& rho, const Povm& povm) {
  std::vector<double> p;
  p.reserve(povm.effects.size());
  for (const auto& e : povm.effects) p.push_back((rho * e).trace().real());
  return p;
}

double povm_fisher(const ComplexMatrix& rho, const ComplexMatrix& drho, const Povm& povm) {
  validate_povm(povm, static_cast<int>(rho.rows()));
  return classical_fisher(povm_probabilities(rho, povm),
                          povm_probabilities(drho, povm));
}

Povm optimal_povm(const ComplexMatrix& rho, const ComplexMatrix& drho) {
  SldResult res = sld_operator(rho, drho);
  EigResult eig = eig_hermitian(res.sld);
  const int d = static_cast<int>(rho.rows());
  const double span = eig.values(d - 1) - eig.values(0);
  const double gap_tol = 1e-8 * std::max(1.0, span);

  Povm povm;
  int start = 0;
  for (int i = 1; i <= d; ++i) {
    if (i == d || eig.values(i) - eig.values(i - 1) > gap_tol) {
      ComplexMatrix proj = ComplexMatrix::Zero(d, d);
      for (int k = start; k < i; ++k)
        proj += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
      povm.effects.push_back(std::move(proj));
      start = i;
    }
  }
  return povm;
}

Divergence f_divergence(const std::vector<double>& p, const std::vector<double>& q,
                        DivergenceKind kind, double alpha) {
  if (p.size() != q.size())
    throw std::invalid_argument("f_divergence: outcome sets differ");
  Divergence d;
  switch (kind) {
    case DivergenceKind::RelativeEntropy: {
      for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] <= 0.0) continue;  // 0·f(0/0) = 0
        if (q[x] <= 0.0) {
          d.infinite = true;
          continue;
        }
        d.value += p[x] * std::log(p[x] / q[x]);
      }
      break;
    }
    case DivergenceKind::Hellinger: {
      double s = 0.0;
      for (std::size_t x = 0; x < p.size(); ++x) s += std::sqrt(p[x] * q[x]);
      d.value = 1.0 - s;
      break;
    }
    case DivergenceKind::Renyi: {
      if (!((alpha > 0.0 && alpha < 1.0) || (alpha > 1.0 && alpha <= 2.0)))
        throw std::invalid_argument("f_divergence: Renyi alpha outside (0,1)∪(1,2]");
      double s = 0.0;
      for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] <= 0.0) continue;
        if (q[x] <= 0.0) {
          if (alpha > 1.0) d.infinite = true;
          continue;
        }
        s += std::pow(p[x], 1.0 - alpha) * std::pow(q[x], alpha);
      }
      d.value = s - 1.0;  // f(t) = t^α shifted so f(1) = 0
      break;
    }
    default:
      throw std::invalid_argument("f_divergence: unsupported kind");
  }
  if (d.infinite) d.value = std::numeric_limits<double>::infinity();
  return d;
}

double divergence_curvature(DivergenceKind kind, double alpha) {
  switch (kind) {
    case DivergenceKind::RelativeEntropy: return 1.0;
    case DivergenceKind::Hellinger: return 0.25;
    case DivergenceKind::Renyi: return alpha * (alpha - 1.0);
    default: throw std::invalid_argument("divergence_curvature: unsupported kind");
  }
}

std::vector<DivergenceLadderRow> fisher_from_divergence(
    const std::function<double(double)>& curve, double theta, double eps,
    double curvature, int rungs) {
  if (eps <= 0.0) throw std::invalid_argument("fisher_from_divergence: eps must be positive");
  if (curvature == 0.0)
    throw std::invalid_argument("fisher_from_divergence: zero curvature");
  std::vector<DivergenceLadderRow> rows;
  double e = eps;
  for (int r = 0; r < rungs; ++r, e *= 0.5) {
    DivergenceLadderRow row;
    row.eps = e;
    row.forward = 2.0 * curve(theta + e) / (curvature * e * e);
    row.backward = 2.0 * curve(theta - e) / (curvature * e * e);
    row.symmetric = 0.5 * (row.forward + row.backward);
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix commutation_superop(const ComplexMatrix& rho, const ComplexMatrix& x) {
  if (rho.rows() != x.rows() || rho.cols() != x.cols())
    throw std::invalid_argument("commutation_superop: dimension mismatch");
  EigResult eig = eig_hermitian(rho);
  const int d = static_cast<int>(rho.rows());
  const double cutoff = support_cutoff(d, eig.values(d - 1));
  const ComplexMatrix x_eb = eig.vectors.adjoint() * hermitize(x) * eig.vectors;
  ComplexMatrix d_eb = ComplexMatrix::Zero(d, d);
  const Complex inv_i(0, -1);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double s = eig.values(i) + eig.values(j);
      if (s > cutoff)
        d_eb(i, j) = inv_i * (eig.values(i) - eig.values(j)) * x_eb(i, j) / s;
    }
  return eig.vectors * d_eb * eig.vectors.adjoint();
}

}  // namespace qfiwit
