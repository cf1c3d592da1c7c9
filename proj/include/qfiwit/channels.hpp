#ifndef QFIWIT_CHANNELS_HPP
#define QFIWIT_CHANNELS_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qfiwit/qmat.hpp"

namespace qfiwit {

// One-parameter family of linear maps on operators. `apply` returns a raw
// matrix: 1-positive channels may legitimately leave the state set on
// entangled inputs, so validity is the caller's concern.
struct ParamChannelFamily {
  std::string kind;  // "rotation", "depolarizing", "transpose", "iid", "lindblad"
  int dim_in = 0;
  int dim_out = 0;
  double theta_min = 0.0;
  double theta_max = 0.0;  // open interval (theta_min, theta_max)
  bool trace_preserving = true;
  bool completely_positive = true;
  bool one_positive = true;
  std::function<ComplexMatrix(double, const ComplexMatrix&)> apply;
  // Analytic θ-derivative of the output; null when only the finite-difference
  // fallback is available.
  std::function<ComplexMatrix(double, const ComplexMatrix&)> derivative;
  // Closed-form single-copy optimum g*_θ when known.
  std::function<double(double)> gstar_analytic;
  // Serializable parameters (axis, gamma, ...).
  std::array<double, 3> axis{0, 0, 0};
  std::array<double, 3> gamma{0, 0, 0};
  double time = 0.0;
  int n_sites = 1;

  bool in_domain(double theta) const { return theta > theta_min && theta < theta_max; }
  void require_domain(double theta) const;
};

ParamChannelFamily rotation_channel(const std::array<double, 3>& axis);
ParamChannelFamily depolarizing_channel();
ParamChannelFamily transpose_channel();

// N-fold i.i.d. tensor extension, derivative by the product rule.
ParamChannelFamily iid_extend(const ParamChannelFamily& base, int n);

// Single-qubit Pauli transfer matrix: M_ab = tr{σ_a Γ_θ(σ_b)}/2.
Eigen::Matrix4d ptm(const ParamChannelFamily& channel, double theta);

struct LindbladSpec {
  double theta = 0.0;              // rotation rate about z
  std::array<double, 3> gamma{0, 0, 0};  // damping rates, all >= 0
  double t = 0.0;                  // evolution time
  int n_qubits = 1;

  void validate() const;
  int default_steps() const;
};

// Raised when the RK4 local-error estimate exceeds the refinement threshold.
class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-step RK4 for the N-qubit master equation
//   dρ/dt = i[ρ, H_θ] - (1/4) Σ_i Σ_j γ_j [[ρ, σ_j^(i)], σ_j^(i)],
// H_θ = (θ/2) Σ_i σ_z^(i). steps <= 0 selects the default heuristic.
ComplexMatrix lindblad_evolve(const LindbladSpec& spec, const ComplexMatrix& rho0,
                              int steps = 0);
inline ComplexMatrix lindblad_evolve(const LindbladSpec& spec, const DensityMatrix& rho0,
                                     int steps = 0) {
  return lindblad_evolve(spec, rho0.mat(), steps);
}

// θ-derivative of the evolved state by central difference.
ComplexMatrix lindblad_evolve_derivative(const LindbladSpec& spec,
                                         const ComplexMatrix& rho0, int steps = 0);

// Single-qubit Pauli transfer matrix of the Lindblad evolution, from the
// closed-form exponential of the Bloch generator. Independent of the RK4 path.
Eigen::Matrix4d lindblad_ptm(const LindbladSpec& spec);

// N-qubit evolution by per-site PTM composition. Exact for the site-local
// generator, entangled inputs included.
ComplexMatrix lindblad_ptm_evolve(const LindbladSpec& spec, const ComplexMatrix& rho0);

// Channel family in θ for fixed (γ, t, N); derivative is the central
// difference above.
ParamChannelFamily lindblad_channel(const std::array<double, 3>& gamma, double t,
                                    int n_qubits);

TangentMatrix finite_difference_derivative(const ParamChannelFamily& channel, double theta,
                                           const ComplexMatrix& rho);
inline TangentMatrix finite_difference_derivative(const ParamChannelFamily& channel,
                                                  double theta, const DensityMatrix& rho) {
  return finite_difference_derivative(channel, theta, rho.mat());
}

// Output tangent for a channel at (θ, ρ): analytic when available, otherwise
// central difference. Hermitized; trace-zeroed for trace-preserving families.
ComplexMatrix channel_tangent(const ParamChannelFamily& channel, double theta,
                              const ComplexMatrix& rho);

// Channels and their θ-derivatives are linear in ρ; tabulating both on matrix
// units once makes repeated evaluations at a fixed θ cheap.
struct ChannelLinearization {
  ComplexMatrix s_apply;  // d² x d², column (c·d+e) holds vec of Γ_θ(E_ce)
  ComplexMatrix s_deriv;  // same layout for ∂_θ Γ_θ
  int d = 0;
  bool trace_preserving = false;
};

ChannelLinearization linearize_channel(const ParamChannelFamily& channel, double theta);
ComplexMatrix apply_linearized(const ComplexMatrix& s, const ComplexMatrix& rho);
// Hermitized (and trace-zeroed, for trace-preserving families) output tangent.
ComplexMatrix tangent_linearized(const ChannelLinearization& lin, const ComplexMatrix& rho);

// JSON descriptor {kind, parameters, domain, flags}.
nlohmann::json channel_to_json(const ParamChannelFamily& channel);
ParamChannelFamily channel_from_json(const nlohmann::json& j);

}  // namespace qfiwit

#endif  // QFIWIT_CHANNELS_HPP
