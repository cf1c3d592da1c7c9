#include "qfiwit/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qfiwit {

namespace {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

}  // namespace

ComplexMatrix identity(int d) { return ComplexMatrix::Identity(d, d); }

const ComplexMatrix& sigma_x() {
  static const ComplexMatrix m = [] {
    ComplexMatrix s(2, 2);
    s << 0, 1, 1, 0;
    return s;
  }();
  return m;
}

const ComplexMatrix& sigma_y() {
  static const ComplexMatrix m = [] {
    ComplexMatrix s(2, 2);
    s << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return s;
  }();
  return m;
}

const ComplexMatrix& sigma_z() {
  static const ComplexMatrix m = [] {
    ComplexMatrix s(2, 2);
    s << 1, 0, 0, -1;
    return s;
  }();
  return m;
}

const ComplexMatrix& pauli(int j) {
  static const ComplexMatrix id = identity(2);
  switch (j) {
    case 0: return id;
    case 1: return sigma_x();
    case 2: return sigma_y();
    case 3: return sigma_z();
    default: throw std::invalid_argument("pauli index must be in 0..3");
  }
}

double herm_residual(const ComplexMatrix& m) {
  return (m - m.adjoint()).norm();
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint().eval());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  ComplexMatrix out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i)
    for (Eigen::Index j = 0; j < ac; ++j)
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all: empty factor list");
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

DensityMatrix::DensityMatrix(std::vector<int> dims, ComplexMatrix mat)
    : dims_(std::move(dims)), mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw std::invalid_argument("DensityMatrix: not square");
  long prod = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("DensityMatrix: nonpositive subsystem dimension");
    prod *= d;
  }
  if (prod != mat_.rows())
    throw std::invalid_argument("DensityMatrix: dims product does not match matrix size");
  if (!all_finite(mat_)) throw std::invalid_argument("DensityMatrix: non-finite entries");
  DensityCheck chk = is_density(mat_);
  if (!chk.valid) {
    std::ostringstream os;
    os << "DensityMatrix: invalid state (herm residual " << chk.herm_residual
       << ", min eigenvalue " << chk.min_eigenvalue << ", trace residual "
       << chk.trace_residual << ")";
    throw std::domain_error(os.str());
  }
}

DensityMatrix::DensityMatrix(ComplexMatrix mat) {
  // read rows() before the move: argument evaluation order is unspecified in
  // a delegating constructor call
  const int d = static_cast<int>(mat.rows());
  *this = DensityMatrix(std::vector<int>{d}, std::move(mat));
}

TangentMatrix::TangentMatrix(ComplexMatrix mat, bool require_traceless) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw std::invalid_argument("TangentMatrix: not square");
  const double scale = std::max(1.0, mat_.norm());
  if (herm_residual(mat_) > kTolHerm * scale)
    throw std::domain_error("TangentMatrix: not Hermitian within tolerance");
  if (require_traceless && std::abs(mat_.trace()) > kTolTrace * scale)
    throw std::domain_error("TangentMatrix: trace not zero within tolerance");
}

double BlochVector::norm() const {
  return std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int n = rho.num_subsystems();
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::vector<int> ks = keep;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks)
    if (k < 1 || k > n) throw std::invalid_argument("partial_trace: subsystem index out of range");

  const std::vector<int>& dims = rho.dims();
  std::vector<bool> kept(n, false);
  for (int k : ks) kept[k - 1] = true;

  std::vector<int> keep_dims, trace_dims;
  for (int i = 0; i < n; ++i) (kept[i] ? keep_dims : trace_dims).push_back(dims[i]);
  const long dk = std::accumulate(keep_dims.begin(), keep_dims.end(), 1L, std::multiplies<>());
  const long dt = std::accumulate(trace_dims.begin(), trace_dims.end(), 1L, std::multiplies<>());

  // Index helpers: full index = Σ idx[i] * stride[i], factor 1 leftmost.
  std::vector<long> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  auto full_index = [&](long ik, long it) {
    long idx = 0;
    long rk = ik, rt = it;
    // decode kept part (row-major over kept subsystems) and traced part
    std::vector<long> sub(n, 0);
    for (int i = n - 1; i >= 0; --i) {
      if (kept[i]) {
        sub[i] = rk % dims[i];
        rk /= dims[i];
      } else {
        sub[i] = rt % dims[i];
        rt /= dims[i];
      }
    }
    for (int i = 0; i < n; ++i) idx += sub[i] * stride[i];
    return idx;
  };

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  const ComplexMatrix& m = rho.mat();
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      Complex acc(0, 0);
      for (long t = 0; t < dt; ++t) acc += m(full_index(a, t), full_index(b, t));
      out(a, b) = acc;
    }
  return DensityMatrix(keep_dims, std::move(out));
}

EigResult eig_hermitian(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("eig_hermitian: not square");
  const double scale = std::max(1.0, h.norm());
  if (herm_residual(h) > kTolHerm * scale)
    throw std::domain_error("eig_hermitian: input not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(h));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: decomposition failed");
  return EigResult{es.eigenvalues(), es.eigenvectors()};
}

DensityMatrix bell_diagonal(double c1, double c2, double c3) {
  struct Cons {
    double value;
    const char* label;
  };
  const Cons cons[4] = {
      {1 - c1 - c2 - c3, "1 - c1 - c2 - c3 >= 0"},
      {1 - c1 + c2 + c3, "1 - c1 + c2 + c3 >= 0"},
      {1 + c1 - c2 + c3, "1 + c1 - c2 + c3 >= 0"},
      {1 + c1 + c2 - c3, "1 + c1 + c2 - c3 >= 0"},
  };
  for (const auto& c : cons)
    if (c.value < -4.0 * kTolPsd)
      throw std::domain_error(std::string("bell_diagonal: positivity constraint violated: ") +
                              c.label);
  ComplexMatrix m = 0.25 * (identity(4) + c1 * kron(sigma_x(), sigma_x()) +
                            c2 * kron(sigma_y(), sigma_y()) + c3 * kron(sigma_z(), sigma_z()));
  return DensityMatrix({2, 2}, std::move(m));
}

DensityMatrix bloch_to_density(const BlochVector& s) {
  if (s.norm() > 1.0 + kTolPsd)
    throw std::domain_error("bloch_to_density: Bloch vector outside unit ball");
  ComplexMatrix m =
      0.5 * (identity(2) + s.s[0] * sigma_x() + s.s[1] * sigma_y() + s.s[2] * sigma_z());
  return DensityMatrix({2}, std::move(m));
}

BlochVector bloch_of(const ComplexMatrix& rho) {
  if (rho.rows() != 2 || rho.cols() != 2)
    throw std::invalid_argument("bloch_of: expected 2x2 matrix");
  BlochVector s;
  for (int j = 0; j < 3; ++j) s.s[j] = (rho * pauli(j + 1)).trace().real();
  return s;
}

BlochVector density_to_bloch(const DensityMatrix& rho) { return bloch_of(rho.mat()); }

DensityCheck is_density(const ComplexMatrix& m, double tol_herm, double tol_psd,
                        double tol_trace) {
  DensityCheck chk;
  if (m.rows() != m.cols() || !all_finite(m)) {
    chk.valid = false;
    chk.herm_residual = std::numeric_limits<double>::infinity();
    return chk;
  }
  chk.herm_residual = herm_residual(m);
  chk.trace_residual = std::abs(m.trace() - Complex(1, 0));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  chk.min_eigenvalue = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, m.norm());
  chk.valid = chk.herm_residual <= tol_herm * scale && chk.min_eigenvalue >= -tol_psd &&
              chk.trace_residual <= tol_trace * scale;
  return chk;
}

ComplexVector bell_psi(int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("bell_psi: sign must be ±1");
  ComplexVector v = ComplexVector::Zero(4);
  const double r = 1.0 / std::sqrt(2.0);
  v(1) = r;            // |01>
  v(2) = sign * r;     // |10>
  return v;
}

ComplexVector bell_phi(int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("bell_phi: sign must be ±1");
  ComplexVector v = ComplexVector::Zero(4);
  const double r = 1.0 / std::sqrt(2.0);
  v(0) = r;            // |00>
  v(3) = sign * r;     // |11>
  return v;
}

}  // namespace qfiwit
