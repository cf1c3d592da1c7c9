#include "qfiwit/witness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfiwit/fisher.hpp"

namespace qfiwit {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Entangled: return "entangled";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::InvalidOutput: return "invalid-output";
  }
  return "?";
}

StateFamily rho_plus_family() {
  StateFamily f;
  f.label = "rho_plus";
  f.builder = [](double lam) { return bell_diagonal(lam, lam, -lam); };
  f.lambda_min = -1.0 / 3.0;
  f.lambda_max = 1.0;
  return f;
}

StateFamily rho_minus_family() {
  StateFamily f;
  f.label = "rho_minus";
  f.builder = [](double lam) { return bell_diagonal(-lam, -lam, -lam); };
  f.lambda_min = -1.0 / 3.0;
  f.lambda_max = 1.0;
  return f;
}

StateFamily family_by_label(const std::string& label) {
  if (label == "rho_plus") return rho_plus_family();
  if (label == "rho_minus") return rho_minus_family();
  throw std::invalid_argument("family_by_label: unknown family '" + label + "'");
}

double gstar_value(const ParamChannelFamily& channel, double theta, GStarMode mode,
                   const GStarOptions& opts) {
  if (channel.kind == "lindblad")
    return open_system_gstar(channel.gamma, theta, channel.time, opts).value;
  if (mode == GStarMode::Analytic) {
    if (!channel.gstar_analytic)
      throw std::invalid_argument("gstar_value: no analytic g* for channel kind '" +
                                  channel.kind + "'");
    return channel.gstar_analytic(theta);
  }
  return gstar(channel, theta, opts).value;
}

namespace {

// Extended channel matching an n-party input. A lindblad channel already acts
// on its full register; everything else is i.i.d.-extended.
ParamChannelFamily extend_for(const ParamChannelFamily& channel, int n) {
  if (channel.kind == "lindblad") {
    if (channel.n_sites != n)
      throw std::invalid_argument("witness: lindblad channel qubit count differs from n");
    return channel;
  }
  return iid_extend(channel, n);
}

WitnessReport report_from(const ChannelLinearization& lin, double theta,
                          const ComplexMatrix& rho, int n, double gstar,
                          GStarMode gstar_source) {
  WitnessReport rep;
  rep.theta = theta;
  rep.n_copies = n;
  rep.threshold = n * gstar;
  rep.gstar_source = gstar_source;
  ComplexMatrix out = hermitize(apply_linearized(lin.s_apply, rho));
  DensityCheck chk = is_density(out);
  if (!chk.valid) {
    rep.verdict = Verdict::InvalidOutput;
    rep.qfi_value = std::numeric_limits<double>::quiet_NaN();
    rep.margin = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.qfi_value = qfi(out, tangent_linearized(lin, rho));
  rep.margin = rep.qfi_value - rep.threshold;
  rep.verdict = rep.margin > kMarginGuard ? Verdict::Entangled : Verdict::Inconclusive;
  return rep;
}

}  // namespace

WitnessReport witness_value(const ParamChannelFamily& channel, double theta,
                            const ComplexMatrix& rho, int n, GStarMode gstar_mode,
                            const GStarOptions& opts) {
  ParamChannelFamily ext = extend_for(channel, n);
  if (rho.rows() != ext.dim_in)
    throw std::invalid_argument("witness_value: state dimension mismatch");
  const double gs = gstar_value(channel, theta, gstar_mode, opts);
  return report_from(linearize_channel(ext, theta), theta, rho, n, gs, gstar_mode);
}

EntRegion r_ent_interval(const ParamChannelFamily& channel, double theta,
                         const StateFamily& family, int n, const RegionOptions& opts) {
  ParamChannelFamily ext = extend_for(channel, n);
  const ChannelLinearization lin = linearize_channel(ext, theta);
  const double gs = gstar_value(channel, theta, opts.gstar_mode, opts.gstar_opts);
  const double threshold = n * gs;

  auto output_of = [&](double lam) {
    return hermitize(apply_linearized(lin.s_apply, family.builder(lam).mat()));
  };
  // Strictly-interior validity: the SLD formula needs the output spectrum
  // bounded away from zero, so the scan demands min eigenvalue >= 1e-10.
  auto valid_at = [&](double lam) {
    return is_density(output_of(lam), kTolHerm, -1e-10, kTolTrace).valid;
  };
  auto margin_at = [&](double lam) {
    ComplexMatrix rho = family.builder(lam).mat();
    ComplexMatrix out = hermitize(apply_linearized(lin.s_apply, rho));
    return qfi(out, tangent_linearized(lin, rho)) - threshold;
  };

  // Scan domain, slightly inside the open lower endpoint.
  const double lo = family.lambda_min + 1e-6;
  const double hi = family.lambda_max;
  const int m = opts.grid_points;
  std::vector<double> grid(m);
  for (int i = 0; i < m; ++i) grid[i] = lo + (hi - lo) * i / (m - 1);

  // Truncate to the prefix where the extended output stays a density matrix
  // (the 1-positive transpose channel leaves the state set at large λ).
  int last_valid = -1;
  for (int i = 0; i < m; ++i) {
    if (!valid_at(grid[i])) break;
    last_valid = i;
  }
  EntRegion region;
  region.theta = theta;
  if (last_valid < 0) return region;
  double hi_valid = grid[last_valid];
  if (last_valid + 1 < m) {
    double bad = grid[last_valid + 1];
    while (bad - hi_valid > 1e-9) {
      double mid = 0.5 * (hi_valid + bad);
      (valid_at(mid) ? hi_valid : bad) = mid;
    }
  }

  auto bisect_zero = [&](double a, double b) {
    // sign(margin(a)) != sign(margin(b))
    double fa = margin_at(a);
    while (b - a > opts.bisect_tol) {
      double mid = 0.5 * (a + b);
      double fm = margin_at(mid);
      if ((fa > 0.0) == (fm > 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<double> pts;
  for (int i = 0; i <= last_valid; ++i) pts.push_back(grid[i]);
  if (hi_valid > pts.back() + 1e-12) pts.push_back(hi_valid);

  bool open_interval = false;
  double start = 0.0;
  double prev_margin = margin_at(pts.front());
  if (prev_margin > 0.0) {
    open_interval = true;
    start = pts.front();
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double cur = margin_at(pts[i]);
    if ((cur > 0.0) != (prev_margin > 0.0)) {
      const double root = bisect_zero(pts[i - 1], pts[i]);
      if (cur > 0.0) {
        open_interval = true;
        start = root;
      } else {
        region.intervals.push_back({start, root});
        open_interval = false;
      }
    }
    prev_margin = cur;
  }
  if (open_interval) region.intervals.push_back({start, hi_valid});
  return region;
}

namespace {

std::vector<Interval> merge_intervals(std::vector<Interval> xs) {
  std::sort(xs.begin(), xs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& x : xs) {
    if (!out.empty() && x.lo <= out.back().hi + 1e-9)
      out.back().hi = std::max(out.back().hi, x.hi);
    else
      out.push_back(x);
  }
  return out;
}

}  // namespace

RegionUnion r_ent_union(const ParamChannelFamily& channel, const std::vector<double>& theta_grid,
                        const StateFamily& family, int n, const RegionOptions& opts) {
  RegionUnion u;
  u.theta_grid = theta_grid;
  std::vector<Interval> all;
  for (double theta : theta_grid) {
    EntRegion r = r_ent_interval(channel, theta, family, n, opts);
    all.insert(all.end(), r.intervals.begin(), r.intervals.end());
  }
  u.union_intervals = merge_intervals(std::move(all));
  return u;
}

std::vector<double> default_theta_grid(const ParamChannelFamily& channel, int points) {
  const double lo = channel.theta_min + 1e-4;
  const double hi = channel.theta_max - 1e-4;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

namespace {

bool regions_differ(const EntRegion& a, const EntRegion& b) {
  if (a.intervals.size() != b.intervals.size()) return true;
  for (std::size_t i = 0; i < a.intervals.size(); ++i)
    if (std::abs(a.intervals[i].lo - b.intervals[i].lo) > 1e-6 ||
        std::abs(a.intervals[i].hi - b.intervals[i].hi) > 1e-6)
      return true;
  return false;
}

}  // namespace

Table1Report table1(const std::vector<double>& unitary_grid,
                    const std::vector<double>& noise_grid, const RegionOptions& opts) {
  const StateFamily fam = rho_plus_family();
  struct Entry {
    std::string name;
    ParamChannelFamily channel;
    const std::vector<double>* grid;
    double rep_theta;
    double probe_theta;
  };
  std::vector<Entry> entries;
  entries.push_back({"U_z", rotation_channel({0, 0, 1}), &unitary_grid, M_PI / 2, 1.0});
  entries.push_back({"U_x", rotation_channel({1, 0, 0}), &unitary_grid, M_PI / 2, 1.0});
  entries.push_back({"DPC", depolarizing_channel(), &noise_grid, 0.8, 0.9});
  entries.push_back({"TPC", transpose_channel(), &noise_grid, 0.8, 0.9});

  Table1Report rep;
  for (const auto& e : entries) {
    Table1Row row;
    row.channel = e.name;
    row.representative_theta = e.rep_theta;
    row.representative = r_ent_interval(e.channel, e.rep_theta, fam, 2, opts);
    row.theta_dependent =
        regions_differ(row.representative, r_ent_interval(e.channel, e.probe_theta, fam, 2, opts));
    row.unioned = r_ent_union(e.channel, *e.grid, fam, 2, opts);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

Table1Report table1(const RegionOptions& opts) {
  return table1(default_theta_grid(rotation_channel({1, 0, 0}), 64),
                default_theta_grid(depolarizing_channel(), 64), opts);
}

WitnessReport open_system_witness(const ComplexMatrix& rho0, const LindbladSpec& spec,
                                  OpenSystemMode mode, const GStarOptions& opts) {
  spec.validate();
  WitnessReport rep;
  rep.theta = spec.theta;
  rep.n_copies = spec.n_qubits;
  const double threshold_unit =
      mode == OpenSystemMode::Sharp
          ? open_system_gstar(spec.gamma, spec.theta, spec.t, opts).value
          : spec.t * spec.t;
  rep.threshold = spec.n_qubits * threshold_unit;
  ComplexMatrix out = lindblad_evolve(spec, rho0);
  DensityCheck chk = is_density(out);
  if (!chk.valid) {
    rep.verdict = Verdict::InvalidOutput;
    rep.qfi_value = std::numeric_limits<double>::quiet_NaN();
    rep.margin = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.qfi_value = qfi(out, lindblad_evolve_derivative(spec, rho0));
  rep.margin = rep.qfi_value - rep.threshold;
  rep.verdict = rep.margin > kMarginGuard ? Verdict::Entangled : Verdict::Inconclusive;
  rep.gstar_source = GStarMode::Optimizer;
  return rep;
}

double convexity_gap(const std::array<double, 3>& axis, const BlochVector& s1,
                     const BlochVector& s2, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("convexity_gap: lambda outside [0,1]");
  if (s1.norm() > 1.0 + kTolPsd || s2.norm() > 1.0 + kTolPsd)
    throw std::invalid_argument("convexity_gap: Bloch vector outside unit ball");
  const double dx = s1.s[0] - s2.s[0], dy = s1.s[1] - s2.s[1], dz = s1.s[2] - s2.s[2];
  const double cx = axis[1] * dz - axis[2] * dy;
  const double cy = axis[2] * dx - axis[0] * dz;
  const double cz = axis[0] * dy - axis[1] * dx;
  return lambda * (1.0 - lambda) * (cx * cx + cy * cy + cz * cz);
}

DensityMatrix random_separable_state(int n_parties, int local_dim, std::mt19937_64& rng,
                                     int max_mixture) {
  std::uniform_int_distribution<int> mix(1, max_mixture);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  const int k = mix(rng);
  std::vector<double> w(k);
  double wsum = 0.0;
  for (double& x : w) {
    x = expo(rng);  // Dirichlet(1) weights
    wsum += x;
  }
  long dim = 1;
  for (int i = 0; i < n_parties; ++i) dim *= local_dim;
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  for (int j = 0; j < k; ++j) {
    std::vector<ComplexMatrix> factors;
    factors.reserve(n_parties);
    for (int p = 0; p < n_parties; ++p) {
      ComplexVector psi(local_dim);
      for (int i = 0; i < local_dim; ++i) psi(i) = Complex(gauss(rng), gauss(rng));
      psi.normalize();
      factors.push_back(psi * psi.adjoint());
    }
    rho += (w[j] / wsum) * kron_all(factors);
  }
  return DensityMatrix(std::vector<int>(n_parties, local_dim), std::move(rho));
}

double separable_sampler_check(const ParamChannelFamily& channel, double theta, int n,
                               int samples, std::uint64_t seed, GStarMode gstar_mode,
                               const GStarOptions& opts) {
  ParamChannelFamily ext = extend_for(channel, n);
  const ChannelLinearization lin = linearize_channel(ext, theta);
  const double threshold = n * gstar_value(channel, theta, gstar_mode, opts);
  std::mt19937_64 rng(seed);
  double max_margin = -std::numeric_limits<double>::infinity();
  const int local_dim = channel.kind == "lindblad" ? 2 : channel.dim_in;
  for (int s = 0; s < samples; ++s) {
    DensityMatrix rho = random_separable_state(n, local_dim, rng);
    ComplexMatrix out = hermitize(apply_linearized(lin.s_apply, rho.mat()));
    const double g = qfi(out, tangent_linearized(lin, rho.mat()));
    max_margin = std::max(max_margin, g - threshold);
  }
  return max_margin;
}

namespace {

nlohmann::json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

nlohmann::json intervals_json(const std::vector<Interval>& xs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& x : xs) arr.push_back({x.lo, x.hi});
  return arr;
}

std::string intervals_text(const std::vector<Interval>& xs) {
  if (xs.empty()) return "No";
  std::ostringstream os;
  os << std::setprecision(6);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << " ∪ ";
    os << "(" << xs[i].lo << ", " << xs[i].hi << ")";
  }
  return os.str();
}

}  // namespace

nlohmann::json to_json(const WitnessReport& r) {
  return {{"theta", r.theta},
          {"n_copies", r.n_copies},
          {"qfi", finite_or_null(r.qfi_value)},
          {"threshold", r.threshold},
          {"margin", finite_or_null(r.margin)},
          {"verdict", to_string(r.verdict)},
          {"gstar_source", r.gstar_source == GStarMode::Analytic ? "analytic" : "optimizer"}};
}

nlohmann::json to_json(const EntRegion& r) {
  return {{"theta", r.theta}, {"lambda_intervals", intervals_json(r.intervals)}};
}

nlohmann::json to_json(const RegionUnion& r) {
  return {{"theta_grid", r.theta_grid}, {"union_intervals", intervals_json(r.union_intervals)}};
}

nlohmann::json to_json(const Table1Report& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"channel", row.channel},
                    {"theta_dependent", row.theta_dependent},
                    {"representative_theta", row.representative_theta},
                    {"r_ent", to_json(row.representative)},
                    {"R_ent", to_json(row.unioned)}});
  return {{"rows", rows}};
}

std::string table1_text(const Table1Report& r) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "chan" << std::setw(14) << "theta-dep"
     << std::setw(34) << "r_ent(theta)" << "R_ent\n";
  for (const auto& row : r.rows) {
    os << std::left << std::setw(6) << row.channel << std::setw(14)
       << (row.theta_dependent ? "Yes" : "No") << std::setw(34)
       << intervals_text(row.representative.intervals)
       << intervals_text(row.unioned.union_intervals) << "\n";
  }
  return os.str();
}

}  // namespace qfiwit
