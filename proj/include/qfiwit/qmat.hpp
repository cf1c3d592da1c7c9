#ifndef QFIWIT_QMAT_HPP
#define QFIWIT_QMAT_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfiwit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Default tolerances used throughout.
inline constexpr double kTolHerm = 1e-10;   // Hermiticity residual
inline constexpr double kTolPsd = 1e-9;     // eigenvalue floor
inline constexpr double kTolTrace = 1e-10;  // trace residual

ComplexMatrix identity(int d);
const ComplexMatrix& sigma_x();
const ComplexMatrix& sigma_y();
const ComplexMatrix& sigma_z();
// pauli(0) = I, pauli(1..3) = sigma_{x,y,z}
const ComplexMatrix& pauli(int j);

double herm_residual(const ComplexMatrix& m);
ComplexMatrix hermitize(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors);

// Unit-trace PSD Hermitian matrix with an explicit subsystem factorization.
// Subsystem 1 is the leftmost Kronecker factor.
class DensityMatrix {
 public:
  DensityMatrix(std::vector<int> dims, ComplexMatrix mat);
  explicit DensityMatrix(ComplexMatrix mat);  // single subsystem

  const std::vector<int>& dims() const { return dims_; }
  const ComplexMatrix& mat() const { return mat_; }
  int total_dim() const { return static_cast<int>(mat_.rows()); }
  int num_subsystems() const { return static_cast<int>(dims_.size()); }

 private:
  std::vector<int> dims_;
  ComplexMatrix mat_;
};

// Hermitian trace-zero tangent dρ/dθ (trace checked only when requested;
// non-trace-preserving families produce tangents with nonzero trace).
class TangentMatrix {
 public:
  explicit TangentMatrix(ComplexMatrix mat, bool require_traceless = true);
  const ComplexMatrix& mat() const { return mat_; }

 private:
  ComplexMatrix mat_;
};

struct BlochVector {
  std::array<double, 3> s{0.0, 0.0, 0.0};
  double norm() const;
};

// Reduced state over the kept subsystems (1-based indices, any order given
// is normalized to ascending).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

struct EigResult {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // orthonormal columns, vectors.col(i) <-> values(i)
};

// Eigendecomposition of (h + h†)/2. Throws if h is non-Hermitian beyond
// tolerance.
EigResult eig_hermitian(const ComplexMatrix& h);

// Two-qubit state (I + Σ c_j σ_j⊗σ_j)/4. Throws std::domain_error naming the
// violated positivity inequality.
DensityMatrix bell_diagonal(double c1, double c2, double c3);

DensityMatrix bloch_to_density(const BlochVector& s);
BlochVector density_to_bloch(const DensityMatrix& rho);
BlochVector bloch_of(const ComplexMatrix& rho);

struct DensityCheck {
  bool valid = false;
  double herm_residual = 0.0;
  double min_eigenvalue = 0.0;
  double trace_residual = 0.0;
};

DensityCheck is_density(const ComplexMatrix& m, double tol_herm = kTolHerm,
                        double tol_psd = kTolPsd, double tol_trace = kTolTrace);

// Bell states in the conventions used by the Bell-diagonal family:
// |ψ±⟩ = (|01⟩±|10⟩)/√2, |Φ±⟩ = (|00⟩±|11⟩)/√2.
ComplexVector bell_psi(int sign);
ComplexVector bell_phi(int sign);

}  // namespace qfiwit

#endif  // QFIWIT_QMAT_HPP
