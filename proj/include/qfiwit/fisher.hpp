#ifndef QFIWIT_FISHER_HPP
#define QFIWIT_FISHER_HPP

#include <functional>
#include <vector>

#include "qfiwit/qmat.hpp"

namespace qfiwit {

struct SldResult {
  ComplexMatrix sld;      // Hermitian L
  double qfi = 0.0;       // tr{L dρ}
  int support_rank = 0;   // eigenvalues of ρ above the support cutoff
  double dropped_weight = 0.0;  // spectral weight of ρ below the cutoff
};

// Raised when a tangent carries weight inside the null space of the state,
// i.e. the model leaves the fixed-rank assumption.
class RankChangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when an outcome has vanishing probability but non-vanishing
// probability derivative.
class UnboundedFisherError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Support cutoff for the SLD eigenbasis formula.
inline double support_cutoff(int dim, double lambda_max) {
  return 1e-12 * dim * std::max(lambda_max, 0.0);
}

SldResult sld_operator(const ComplexMatrix& rho, const ComplexMatrix& drho);
inline SldResult sld_operator(const DensityMatrix& rho, const TangentMatrix& drho) {
  return sld_operator(rho.mat(), drho.mat());
}

double qfi(const ComplexMatrix& rho, const ComplexMatrix& drho);
inline double qfi(const DensityMatrix& rho, const TangentMatrix& drho) {
  return qfi(rho.mat(), drho.mat());
}

struct Povm {
  std::vector<ComplexMatrix> effects;
};

// Checks PSD effects summing to identity; throws on violation.
void validate_povm(const Povm& povm, int dim);

inline constexpr double kEpsProb = 1e-14;

double classical_fisher(const std::vector<double>& p, const std::vector<double>& dp);

std::vector<double> povm_probabilities(const ComplexMatrix& rho, const Povm& povm);

double povm_fisher(const ComplexMatrix& rho, const ComplexMatrix& drho, const Povm& povm);
inline double povm_fisher(const DensityMatrix& rho, const TangentMatrix& drho,
                          const Povm& povm) {
  return povm_fisher(rho.mat(), drho.mat(), povm);
}

// SLD eigenprojectors, degenerate eigenvalues merged into one effect.
Povm optimal_povm(const ComplexMatrix& rho, const ComplexMatrix& drho);
inline Povm optimal_povm(const DensityMatrix& rho, const TangentMatrix& drho) {
  return optimal_povm(rho.mat(), drho.mat());
}

enum class DivergenceKind { RelativeEntropy, Hellinger, Renyi };

struct Divergence {
  double value = 0.0;
  bool infinite = false;
};

Divergence f_divergence(const std::vector<double>& p, const std::vector<double>& q,
                        DivergenceKind kind, double alpha = 1.5);

// f''(1) for the implemented kinds; the Fisher limit of 2 D_f/ε² carries this
// factor, so protocol estimates divide by it.
double divergence_curvature(DivergenceKind kind, double alpha = 1.5);

struct DivergenceLadderRow {
  double eps = 0.0;
  double forward = 0.0;    // 2 D(p_θ ‖ p_{θ+ε}) / ε²
  double backward = 0.0;   // 2 D(p_θ ‖ p_{θ-ε}) / ε²
  double symmetric = 0.0;  // mean of the two
};

// Estimates the Fisher information from a divergence curve θ' ↦ D(p_θ ‖ p_θ')
// at ε, ε/2, ε/4, ε/8. `curvature` rescales for kinds with f''(1) ≠ 1.
std::vector<DivergenceLadderRow> fisher_from_divergence(
    const std::function<double(double)>& curve, double theta, double eps,
    double curvature = 1.0, int rungs = 4);

// Holevo commutation super-operator: D solving ρD + Dρ = (1/i)[ρ, x],
// restricted to the support of ρ.
ComplexMatrix commutation_superop(const ComplexMatrix& rho, const ComplexMatrix& x);
inline ComplexMatrix commutation_superop(const DensityMatrix& rho, const ComplexMatrix& x) {
  return commutation_superop(rho.mat(), x);
}

}  // namespace qfiwit

#endif  // QFIWIT_FISHER_HPP
