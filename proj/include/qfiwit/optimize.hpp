#ifndef QFIWIT_OPTIMIZE_HPP
#define QFIWIT_OPTIMIZE_HPP

#include <cstdint>

#include "qfiwit/channels.hpp"
#include "qfiwit/qmat.hpp"

namespace qfiwit {

struct GStarResult {
  double value = 0.0;
  ComplexMatrix argmax_state;  // pure density matrix
  int restarts_used = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

struct GStarOptions {
  int restarts = 32;
  double tol = 1e-9;           // projected gradient norm
  int max_iterations = 5000;
  double gradient_step = 1e-6;  // central-difference step on the chart
  std::uint64_t seed = 20240817;
};

// Single-copy maximal output QFI over pure input states, projected gradient
// ascent on the unit sphere of 2d real coordinates.
GStarResult gstar(const ParamChannelFamily& channel, double theta,
                  const GStarOptions& opts = {});

// Closed form for a unitary family: value = (a_max - a_min)², argmax the
// equal superposition of extreme eigenvectors.
struct UnitaryGStar {
  double value = 0.0;
  ComplexMatrix argmax_state;
};
UnitaryGStar gstar_unitary(const ComplexMatrix& generator);

double variance(const ComplexMatrix& rho, const ComplexMatrix& a);
inline double variance(const DensityMatrix& rho, const ComplexMatrix& a) {
  return variance(rho.mat(), a);
}

struct VarianceBoundCheck {
  bool equality = false;
  double residual = 0.0;  // ‖ρ₀Aρ₀ - tr{ρ₀A} ρ₀²‖_F
};
VarianceBoundCheck variance_bound_equality_check(const ComplexMatrix& rho0, const ComplexMatrix& a,
                                  double tol = 1e-9);
inline VarianceBoundCheck variance_bound_equality_check(const DensityMatrix& rho0, const ComplexMatrix& a,
                                         double tol = 1e-9) {
  return variance_bound_equality_check(rho0.mat(), a, tol);
}

// Maximal single-qubit QFI of the Lindblad evolution at (θ, t) over pure
// initial states.
GStarResult open_system_gstar(const std::array<double, 3>& gamma, double theta, double t,
                              const GStarOptions& opts = {});

}  // namespace qfiwit

#endif  // QFIWIT_OPTIMIZE_HPP
