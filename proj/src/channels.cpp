#include "qfiwit/channels.hpp"

#include <cfloat>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qfiwit {

namespace {

// Superoperator of a linear map on d x d operators, column (c,e) holding the
// image of the matrix unit E_ce.
ComplexMatrix superop_of(const std::function<ComplexMatrix(const ComplexMatrix&)>& map, int d) {
  ComplexMatrix s(d * d, d * d);
  for (int c = 0; c < d; ++c)
    for (int e = 0; e < d; ++e) {
      ComplexMatrix unit = ComplexMatrix::Zero(d, d);
      unit(c, e) = 1.0;
      ComplexMatrix img = map(unit);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s(a * d + b, c * d + e) = img(a, b);
    }
  return s;
}

// Applies a single-site superoperator at `site` (1-based, leftmost factor
// first) of an n-site operator with local dimension d.
ComplexMatrix apply_superop_at_site(const ComplexMatrix& s, const ComplexMatrix& rho, int site,
                                    int n, int d) {
  const long dim = rho.rows();
  long stride = 1;
  for (int k = 0; k < n - site; ++k) stride *= d;
  const long hi = dim / (d * stride);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (long hr = 0; hr < hi; ++hr)
    for (long lr = 0; lr < stride; ++lr)
      for (long hc = 0; hc < hi; ++hc)
        for (long lc = 0; lc < stride; ++lc)
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
              Complex acc(0, 0);
              for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e)
                  acc += s(a * d + b, c * d + e) *
                         rho(hr * d * stride + c * stride + lr,
                             hc * d * stride + e * stride + lc);
              out(hr * d * stride + a * stride + lr, hc * d * stride + b * stride + lc) = acc;
            }
  return out;
}

double fd_step(double theta) { return std::cbrt(DBL_EPSILON) * std::max(1.0, std::abs(theta)); }

}  // namespace

void ParamChannelFamily::require_domain(double theta) const {
  if (!in_domain(theta)) {
    std::ostringstream os;
    os << kind << " channel: theta " << theta << " outside domain (" << theta_min << ", "
       << theta_max << ")";
    throw std::domain_error(os.str());
  }
}

ParamChannelFamily rotation_channel(const std::array<double, 3>& axis) {
  const double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (std::abs(norm - 1.0) > 1e-9)
    throw std::invalid_argument("rotation_channel: axis must be a unit vector");
  ComplexMatrix gen = 0.5 * (axis[0] * sigma_x() + axis[1] * sigma_y() + axis[2] * sigma_z());

  ParamChannelFamily ch;
  ch.kind = "rotation";
  ch.dim_in = ch.dim_out = 2;
  ch.theta_min = -M_PI;
  ch.theta_max = M_PI;
  ch.axis = axis;
  ch.apply = [gen](double theta, const ComplexMatrix& rho) {
    // exp(i θ n·σ/2) = cos(θ/2) I + 2i sin(θ/2) (n·σ/2)
    ComplexMatrix u = std::cos(theta / 2) * identity(2) +
                      Complex(0, 2.0 * std::sin(theta / 2)) * gen;
    return ComplexMatrix(u * rho * u.adjoint());
  };
  ch.derivative = [ch_apply = ch.apply, gen](double theta, const ComplexMatrix& rho) {
    ComplexMatrix out = ch_apply(theta, rho);
    return ComplexMatrix(Complex(0, 1) * (gen * out - out * gen));
  };
  ch.gstar_analytic = [](double) { return 1.0; };  // (a_max - a_min)² of n·σ/2
  return ch;
}

ParamChannelFamily depolarizing_channel() {
  ParamChannelFamily ch;
  ch.kind = "depolarizing";
  ch.dim_in = ch.dim_out = 2;
  ch.theta_min = 0.0;
  ch.theta_max = 1.0;
  ch.apply = [](double theta, const ComplexMatrix& rho) {
    if (theta <= 0.0 || theta >= 1.0)
      throw std::domain_error("depolarizing: theta outside (0, 1)");
    if (rho.rows() != 2) throw std::invalid_argument("depolarizing: qubit channel");
    return ComplexMatrix(theta * rho + 0.5 * (1.0 - theta) * rho.trace() * identity(2));
  };
  ch.derivative = [](double, const ComplexMatrix& rho) {
    return ComplexMatrix(rho - 0.5 * rho.trace() * identity(2));
  };
  ch.gstar_analytic = [](double theta) { return 1.0 / (1.0 - theta * theta); };
  return ch;
}

ParamChannelFamily transpose_channel() {
  ParamChannelFamily ch;
  ch.kind = "transpose";
  ch.dim_in = ch.dim_out = 2;
  ch.theta_min = 0.0;
  ch.theta_max = 1.0;
  ch.completely_positive = false;
  ch.one_positive = true;
  ch.apply = [](double theta, const ComplexMatrix& rho) {
    if (theta <= 0.0 || theta >= 1.0)
      throw std::domain_error("transpose: theta outside (0, 1)");
    if (rho.rows() != 2) throw std::invalid_argument("transpose: qubit channel");
    return ComplexMatrix(theta * rho + (1.0 - theta) * rho.transpose());
  };
  ch.derivative = [](double, const ComplexMatrix& rho) {
    return ComplexMatrix(rho - rho.transpose());
  };
  ch.gstar_analytic = [](double theta) { return 1.0 / (theta * (1.0 - theta)); };
  return ch;
}

ParamChannelFamily iid_extend(const ParamChannelFamily& base, int n) {
  if (n < 1) throw std::invalid_argument("iid_extend: n must be >= 1");
  if (n == 1) return base;
  long dim = 1;
  for (int k = 0; k < n; ++k) {
    dim *= base.dim_in;
    if (dim > 64) throw std::invalid_argument("iid_extend: total dimension exceeds 64");
  }
  const int d = base.dim_in;

  ParamChannelFamily ch;
  ch.kind = "iid";
  ch.dim_in = ch.dim_out = static_cast<int>(dim);
  ch.theta_min = base.theta_min;
  ch.theta_max = base.theta_max;
  ch.trace_preserving = base.trace_preserving;
  ch.completely_positive = base.completely_positive;
  // A merely 1-positive factor loses positivity under tensor extension.
  ch.one_positive = base.completely_positive;
  ch.n_sites = n;
  ch.axis = base.axis;

  auto site_superop = [base, d](double theta) {
    base.require_domain(theta);
    return superop_of([&](const ComplexMatrix& x) { return base.apply(theta, x); }, d);
  };
  auto site_superop_deriv = [base, d](double theta) {
    if (base.derivative)
      return superop_of([&](const ComplexMatrix& x) { return base.derivative(theta, x); }, d);
    const double h = fd_step(theta);
    if (!(base.in_domain(theta - h) && base.in_domain(theta + h)))
      throw std::domain_error("iid_extend: theta too close to the domain boundary for "
                              "finite differences");
    ComplexMatrix sp =
        superop_of([&](const ComplexMatrix& x) { return base.apply(theta + h, x); }, d);
    ComplexMatrix sm =
        superop_of([&](const ComplexMatrix& x) { return base.apply(theta - h, x); }, d);
    return ComplexMatrix((sp - sm) / (2.0 * h));
  };

  ch.apply = [site_superop, n, d](double theta, const ComplexMatrix& rho) {
    ComplexMatrix s = site_superop(theta);
    ComplexMatrix out = rho;
    for (int k = 1; k <= n; ++k) out = apply_superop_at_site(s, out, k, n, d);
    return out;
  };
  ch.derivative = [site_superop, site_superop_deriv, n, d](double theta,
                                                           const ComplexMatrix& rho) {
    ComplexMatrix s = site_superop(theta);
    ComplexMatrix ds = site_superop_deriv(theta);
    ComplexMatrix sum = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (int k = 1; k <= n; ++k) {
      ComplexMatrix out = rho;
      for (int m = 1; m <= n; ++m)
        out = apply_superop_at_site(m == k ? ds : s, out, m, n, d);
      sum += out;
    }
    return sum;
  };
  return ch;
}

Eigen::Matrix4d ptm(const ParamChannelFamily& channel, double theta) {
  if (channel.dim_in != 2)
    throw std::invalid_argument("ptm: single-qubit channels only");
  channel.require_domain(theta);
  Eigen::Matrix4d m;
  for (int b = 0; b < 4; ++b) {
    ComplexMatrix img = channel.apply(theta, pauli(b));
    for (int a = 0; a < 4; ++a) m(a, b) = 0.5 * (pauli(a) * img).trace().real();
  }
  return m;
}

void LindbladSpec::validate() const {
  for (double g : gamma)
    if (g < 0.0) throw std::invalid_argument("LindbladSpec: damping rates must be >= 0");
  if (t < 0.0) throw std::invalid_argument("LindbladSpec: time must be >= 0");
  if (n_qubits < 1 || n_qubits > 6)
    throw std::invalid_argument("LindbladSpec: qubit count outside 1..6");
}

int LindbladSpec::default_steps() const {
  const double rate = std::abs(theta) + gamma[0] + gamma[1] + gamma[2];
  return std::max(200, static_cast<int>(std::ceil(1000.0 * t * rate)));
}

namespace {

struct LindbladOps {
  ComplexMatrix h;                       // H_θ
  std::vector<ComplexMatrix> jumps;      // σ_j^(i) with γ_j > 0
  std::vector<double> rates;             // matching γ_j
};

LindbladOps build_ops(const LindbladSpec& spec) {
  const int n = spec.n_qubits;
  const long dim = 1L << n;
  LindbladOps ops;
  ops.h = ComplexMatrix::Zero(dim, dim);
  for (int i = 1; i <= n; ++i) {
    std::vector<ComplexMatrix> factors(n, identity(2));
    factors[i - 1] = sigma_z();
    ops.h += 0.5 * spec.theta * kron_all(factors);
    for (int j = 1; j <= 3; ++j) {
      if (spec.gamma[j - 1] == 0.0) continue;
      factors[i - 1] = pauli(j);
      ops.jumps.push_back(kron_all(factors));
      ops.rates.push_back(spec.gamma[j - 1]);
      factors[i - 1] = identity(2);
    }
  }
  return ops;
}

ComplexMatrix lindblad_rhs(const LindbladOps& ops, const ComplexMatrix& rho) {
  // i[ρ,H] - (1/4) Σ γ [[ρ,σ],σ] with σ² = I, i.e. -(γ/2)(ρ - σρσ)
  ComplexMatrix out = Complex(0, 1) * (rho * ops.h - ops.h * rho);
  for (std::size_t k = 0; k < ops.jumps.size(); ++k) {
    const ComplexMatrix& s = ops.jumps[k];
    out -= 0.5 * ops.rates[k] * (rho - s * rho * s);
  }
  return out;
}

ComplexMatrix rk4_step(const LindbladOps& ops, const ComplexMatrix& rho, double h) {
  ComplexMatrix k1 = lindblad_rhs(ops, rho);
  ComplexMatrix k2 = lindblad_rhs(ops, rho + 0.5 * h * k1);
  ComplexMatrix k3 = lindblad_rhs(ops, rho + 0.5 * h * k2);
  ComplexMatrix k4 = lindblad_rhs(ops, rho + h * k3);
  return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

ComplexMatrix lindblad_evolve(const LindbladSpec& spec, const ComplexMatrix& rho0, int steps) {
  spec.validate();
  const long dim = 1L << spec.n_qubits;
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("lindblad_evolve: state dimension mismatch");
  if (spec.t == 0.0) return rho0;
  if (steps <= 0) steps = spec.default_steps();

  const LindbladOps ops = build_ops(spec);
  const double h = spec.t / steps;
  ComplexMatrix rho = rho0;
  for (int k = 0; k < steps; ++k) {
    // local error check by step halving on a sparse sample of steps
    if (k % 64 == 0) {
      ComplexMatrix full = rk4_step(ops, rho, h);
      ComplexMatrix half = rk4_step(ops, rk4_step(ops, rho, 0.5 * h), 0.5 * h);
      if ((full - half).norm() > 1e-8)
        throw IntegratorError("lindblad_evolve: estimated local error above 1e-8; "
                              "increase the step count");
      rho = half;
    } else {
      rho = rk4_step(ops, rho, h);
    }
  }
  return rho;
}

ComplexMatrix lindblad_evolve_derivative(const LindbladSpec& spec, const ComplexMatrix& rho0,
                                         int steps) {
  (void)steps;
  // Central difference over the closed-form transfer-matrix evolution: it is
  // analytic in theta, so the quotient carries no integrator noise that could
  // leak weight into the null space of pure outputs.
  const double h = fd_step(spec.theta);
  LindbladSpec plus = spec, minus = spec;
  plus.theta += h;
  minus.theta -= h;
  // No symmetrization here: the quotient must stay linear in rho0 so it can
  // be tabulated on (non-Hermitian) matrix units.
  return (lindblad_ptm_evolve(plus, rho0) - lindblad_ptm_evolve(minus, rho0)) / (2.0 * h);
}

Eigen::Matrix4d lindblad_ptm(const LindbladSpec& spec) {
  spec.validate();
  const double t = spec.t;
  const double g1 = spec.gamma[0], g2 = spec.gamma[1], g3 = spec.gamma[2];
  // Bloch generator: ds/dt = B s with
  //   B = [[-(g2+g3), -θ, 0], [θ, -(g1+g3), 0], [0, 0, -(g1+g2)]]
  const double p = -(g2 + g3), q = -(g1 + g3);
  const double mu = 0.5 * (p + q), r = 0.5 * (p - q);
  const Complex omega = std::sqrt(Complex(r * r - spec.theta * spec.theta, 0.0));
  Complex ch, shc;  // cosh(ωt), sinh(ωt)/ω
  if (std::abs(omega) < 1e-150) {
    ch = 1.0;
    shc = t;
  } else {
    ch = std::cosh(omega * t);
    shc = std::sinh(omega * t) / omega;
  }
  const double em = std::exp(mu * t);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = em * (ch + shc * r).real();
  m(1, 2) = em * (-spec.theta * shc).real();
  m(2, 1) = em * (spec.theta * shc).real();
  m(2, 2) = em * (ch - shc * r).real();
  m(3, 3) = std::exp(-(g1 + g2) * t);
  return m;
}

ComplexMatrix lindblad_ptm_evolve(const LindbladSpec& spec, const ComplexMatrix& rho0) {
  spec.validate();
  const long dim = 1L << spec.n_qubits;
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("lindblad_ptm_evolve: state dimension mismatch");
  const Eigen::Matrix4d m = lindblad_ptm(spec);
  // Superoperator on matrix units: Γ(X) = (1/2) Σ_ab M_ab σ_a tr(σ_b X)
  ComplexMatrix s = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (m(a, b) == 0.0) continue;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
              s(i * 2 + j, k * 2 + l) +=
                  0.5 * m(a, b) * pauli(a)(i, j) * pauli(b)(l, k);
    }
  ComplexMatrix out = rho0;
  for (int site = 1; site <= spec.n_qubits; ++site)
    out = apply_superop_at_site(s, out, site, spec.n_qubits, 2);
  return out;
}

ParamChannelFamily lindblad_channel(const std::array<double, 3>& gamma, double t,
                                    int n_qubits) {
  LindbladSpec probe{0.0, gamma, t, n_qubits};
  probe.validate();

  ParamChannelFamily ch;
  ch.kind = "lindblad";
  ch.dim_in = ch.dim_out = 1 << n_qubits;
  ch.theta_min = -10.0;
  ch.theta_max = 10.0;
  ch.gamma = gamma;
  ch.time = t;
  ch.n_sites = n_qubits;
  ch.apply = [gamma, t, n_qubits](double theta, const ComplexMatrix& rho) {
    return lindblad_evolve(LindbladSpec{theta, gamma, t, n_qubits}, rho);
  };
  ch.derivative = [gamma, t, n_qubits](double theta, const ComplexMatrix& rho) {
    return lindblad_evolve_derivative(LindbladSpec{theta, gamma, t, n_qubits}, rho);
  };
  return ch;
}

TangentMatrix finite_difference_derivative(const ParamChannelFamily& channel, double theta,
                                           const ComplexMatrix& rho) {
  const double h = fd_step(theta);
  if (!(channel.in_domain(theta - h) && channel.in_domain(theta + h)))
    throw std::domain_error(
        "finite_difference_derivative: theta within h of the domain boundary");
  ComplexMatrix diff =
      (channel.apply(theta + h, rho) - channel.apply(theta - h, rho)) / (2.0 * h);
  diff = hermitize(diff);
  if (channel.trace_preserving) {
    const long d = diff.rows();
    diff -= (diff.trace() / static_cast<double>(d)) * identity(static_cast<int>(d));
  }
  return TangentMatrix(std::move(diff), /*require_traceless=*/false);
}

ComplexMatrix channel_tangent(const ParamChannelFamily& channel, double theta,
                              const ComplexMatrix& rho) {
  channel.require_domain(theta);
  if (channel.derivative) {
    ComplexMatrix d = hermitize(channel.derivative(theta, rho));
    if (channel.trace_preserving) {
      const long n = d.rows();
      d -= (d.trace() / static_cast<double>(n)) * identity(static_cast<int>(n));
    }
    return d;
  }
  return finite_difference_derivative(channel, theta, rho).mat();
}

ChannelLinearization linearize_channel(const ParamChannelFamily& channel, double theta) {
  channel.require_domain(theta);
  const int d = channel.dim_in;
  ChannelLinearization lin;
  lin.d = d;
  lin.trace_preserving = channel.trace_preserving;
  lin.s_apply.resize(d * d, d * d);
  lin.s_deriv.resize(d * d, d * d);
  const double h = fd_step(theta);
  const bool fd = !channel.derivative;
  if (fd && !(channel.in_domain(theta - h) && channel.in_domain(theta + h)))
    throw std::domain_error(
        "linearize_channel: theta within the finite-difference step of the boundary");
  for (int c = 0; c < d; ++c)
    for (int e = 0; e < d; ++e) {
      ComplexMatrix unit = ComplexMatrix::Zero(d, d);
      unit(c, e) = 1.0;
      ComplexMatrix img = channel.apply(theta, unit);
      ComplexMatrix dimg =
          fd ? ComplexMatrix((channel.apply(theta + h, unit) - channel.apply(theta - h, unit)) /
                             (2.0 * h))
             : channel.derivative(theta, unit);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          lin.s_apply(a * d + b, c * d + e) = img(a, b);
          lin.s_deriv(a * d + b, c * d + e) = dimg(a, b);
        }
    }
  return lin;
}

ComplexMatrix apply_linearized(const ComplexMatrix& s, const ComplexMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  ComplexVector v(d * d);
  for (int c = 0; c < d; ++c)
    for (int e = 0; e < d; ++e) v(c * d + e) = rho(c, e);
  ComplexVector w = s * v;
  ComplexMatrix out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out(a, b) = w(a * d + b);
  return out;
}

ComplexMatrix tangent_linearized(const ChannelLinearization& lin, const ComplexMatrix& rho) {
  ComplexMatrix dout = hermitize(apply_linearized(lin.s_deriv, rho));
  if (lin.trace_preserving)
    dout -= (dout.trace() / static_cast<double>(lin.d)) * identity(lin.d);
  return dout;
}

nlohmann::json channel_to_json(const ParamChannelFamily& channel) {
  nlohmann::json j;
  j["kind"] = channel.kind;
  j["domain"] = {channel.theta_min, channel.theta_max};
  j["flags"] = {{"trace_preserving", channel.trace_preserving},
                {"completely_positive", channel.completely_positive},
                {"one_positive", channel.one_positive}};
  nlohmann::json params = nlohmann::json::object();
  if (channel.kind == "rotation") params["axis"] = channel.axis;
  if (channel.kind == "lindblad") {
    params["gamma"] = channel.gamma;
    params["time"] = channel.time;
    params["n_qubits"] = channel.n_sites;
  }
  if (channel.kind == "iid") params["copies"] = channel.n_sites;
  j["parameters"] = params;
  return j;
}

ParamChannelFamily channel_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rotation") {
    std::array<double, 3> axis = j.at("parameters").at("axis").get<std::array<double, 3>>();
    return rotation_channel(axis);
  }
  if (kind == "depolarizing") return depolarizing_channel();
  if (kind == "transpose") return transpose_channel();
  if (kind == "lindblad") {
    const auto& p = j.at("parameters");
    return lindblad_channel(p.at("gamma").get<std::array<double, 3>>(),
                            p.at("time").get<double>(), p.at("n_qubits").get<int>());
  }
  throw std::invalid_argument("channel_from_json: unknown kind '" + kind + "'");
}

}  // namespace qfiwit
