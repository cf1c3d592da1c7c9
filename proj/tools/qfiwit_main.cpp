// qfiwit: channel QFI scans, entanglement witness regions, open-system
// time series, and measurement-protocol Fisher estimates.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qfiwit/channels.hpp"
#include "qfiwit/fisher.hpp"
#include "qfiwit/optimize.hpp"
#include "qfiwit/qmat.hpp"
#include "qfiwit/witness.hpp"

namespace {

using nlohmann::json;
using namespace qfiwit;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal representation.
std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_grid(const std::string& s) {
  double lo = 0, hi = 0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1)
    throw ConfigError("bad grid spec '" + s + "' (expected lo:hi:count)");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i)
    g[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return g;
}

std::array<double, 3> parse_triple(const std::string& s, const char* what) {
  std::array<double, 3> v{};
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> v[0] >> c1 >> v[1] >> c2 >> v[2]) || c1 != ',' || c2 != ',')
    throw ConfigError(std::string("bad ") + what + " '" + s + "' (expected a,b,c)");
  return v;
}

ParamChannelFamily channel_by_name(const std::string& name) {
  if (name == "uz") return rotation_channel({0, 0, 1});
  if (name == "ux") return rotation_channel({1, 0, 0});
  if (name == "uy") return rotation_channel({0, 1, 0});
  if (name == "dpc" || name == "depolarizing") return depolarizing_channel();
  if (name == "tpc" || name == "transpose") return transpose_channel();
  throw ConfigError("unknown channel '" + name +
                    "' (expected uz|ux|uy|dpc|tpc or a --config descriptor)");
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in '" + path + "': " + e.what());
  }
  return j;
}

// Dense complex matrix as nested [re, im] pairs, optional "dims".
DensityMatrix state_from_json(const json& j) {
  const json& m = j.contains("matrix") ? j.at("matrix") : j;
  const int d = static_cast<int>(m.size());
  ComplexMatrix rho(d, d);
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(m.at(r).size()) != d) throw ConfigError("state matrix is not square");
    for (int c = 0; c < d; ++c) {
      const json& e = m.at(r).at(c);
      rho(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  std::vector<int> dims{d};
  if (j.contains("dims")) dims = j.at("dims").get<std::vector<int>>();
  try {
    return DensityMatrix(dims, std::move(rho));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid state: ") + e.what());
  }
}

struct CommonOpts {
  std::string channel_name;
  std::string config_path;
  std::string family = "rho_plus";
  double lambda = 0.95;
  std::string state_file;
  int copies = 2;
  std::string mode = "analytic";
  std::uint64_t seed = 20240817;
  std::string out_path;
  std::string format = "csv";
};

void add_output_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out_path, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

ParamChannelFamily resolve_channel(const CommonOpts& o) {
  if (!o.config_path.empty()) {
    json j = load_json_file(o.config_path);
    try {
      return channel_from_json(j.contains("channel") ? j.at("channel") : j);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad channel descriptor: ") + e.what());
    }
  }
  if (o.channel_name.empty()) throw ConfigError("no channel given (--channel or --config)");
  return channel_by_name(o.channel_name);
}

DensityMatrix resolve_state(const CommonOpts& o) {
  if (!o.state_file.empty()) return state_from_json(load_json_file(o.state_file));
  StateFamily fam = family_by_label(o.family);
  if (o.lambda <= fam.lambda_min || o.lambda > fam.lambda_max)
    throw ConfigError("lambda outside the family domain");
  return fam.builder(o.lambda);
}

GStarMode resolve_mode(const CommonOpts& o) {
  if (o.mode == "analytic") return GStarMode::Analytic;
  if (o.mode == "optimizer") return GStarMode::Optimizer;
  throw ConfigError("mode must be analytic or optimizer");
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + o.out_path + "'");
  out << text;
}

std::string rows_to_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

json wrap_schema(const char* command, json payload) {
  return {{"schema", "qfiwit/1"}, {"command", command}, {"data", std::move(payload)}};
}

// ---------------------------------------------------------------- qfi -------

int cmd_qfi(const CommonOpts& o, const std::vector<double>& thetas) {
  ParamChannelFamily channel = resolve_channel(o);
  DensityMatrix rho = resolve_state(o);
  GStarMode mode = resolve_mode(o);
  GStarOptions gopts;
  gopts.seed = o.seed;

  std::vector<std::vector<std::string>> rows;
  json jrows = json::array();
  for (double theta : thetas) {
    if (channel.kind != "lindblad" && !channel.in_domain(theta))
      throw ConfigError("theta " + fmt(theta) + " outside the channel domain");
    WitnessReport r = witness_value(channel, theta, rho, o.copies, mode, gopts);
    const double gs = r.threshold / r.n_copies;
    rows.push_back({fmt(r.theta), fmt(r.qfi_value), fmt(gs), fmt(r.threshold),
                    fmt(r.margin), to_string(r.verdict)});
    json row = to_json(r);
    row["gstar"] = std::isfinite(gs) ? json(gs) : json(nullptr);
    jrows.push_back(std::move(row));
  }
  if (o.format == "csv")
    emit(o, rows_to_csv({"theta", "qfi", "gstar", "threshold", "margin", "verdict"}, rows));
  else
    emit(o, wrap_schema("qfi", jrows).dump(2) + "\n");
  return kExitOk;
}

// ------------------------------------------------------------- region -------

int cmd_region(const CommonOpts& o, std::optional<double> theta,
               const std::string& theta_grid) {
  ParamChannelFamily channel = resolve_channel(o);
  StateFamily fam = family_by_label(o.family);
  RegionOptions ropts;
  ropts.gstar_mode = resolve_mode(o);
  ropts.gstar_opts.seed = o.seed;

  json payload;
  if (theta) {
    if (!channel.in_domain(*theta)) throw ConfigError("theta outside the channel domain");
    payload = to_json(r_ent_interval(channel, *theta, fam, o.copies, ropts));
  } else {
    std::vector<double> grid = theta_grid.empty() ? default_theta_grid(channel, 64)
                                                  : parse_grid(theta_grid);
    for (double th : grid)
      if (!channel.in_domain(th)) throw ConfigError("theta grid leaves the channel domain");
    payload = to_json(r_ent_union(channel, grid, fam, o.copies, ropts));
  }
  emit(o, wrap_schema("region", payload).dump(2) + "\n");
  return kExitOk;
}

int cmd_table1(const CommonOpts& o) {
  RegionOptions ropts;
  ropts.gstar_mode = resolve_mode(o);
  ropts.gstar_opts.seed = o.seed;
  Table1Report rep = table1(ropts);
  if (o.format == "csv")
    emit(o, table1_text(rep));
  else
    emit(o, wrap_schema("table1", to_json(rep)).dump(2) + "\n");
  return kExitOk;
}

// -------------------------------------------------------- open-system -------

int cmd_open_system(const CommonOpts& o, double theta, const std::array<double, 3>& gamma,
                    const std::vector<double>& times) {
  DensityMatrix rho = o.state_file.empty()
                          ? DensityMatrix({2, 2}, bell_phi(+1) * bell_phi(+1).adjoint())
                          : state_from_json(load_json_file(o.state_file));
  const int n = rho.num_subsystems();
  for (int d : rho.dims())
    if (d != 2) throw ConfigError("open-system input must be a qubit register");
  GStarOptions gopts;
  gopts.seed = o.seed;

  std::vector<std::vector<std::string>> rows;
  json jrows = json::array();
  for (double t : times) {
    LindbladSpec spec{theta, gamma, t, n};
    spec.validate();
    WitnessReport sharp = open_system_witness(rho, spec, OpenSystemMode::Sharp, gopts);
    WitnessReport weak = open_system_witness(rho, spec, OpenSystemMode::Weak, gopts);
    rows.push_back({fmt(t), fmt(sharp.qfi_value), fmt(sharp.threshold),
                    to_string(sharp.verdict), fmt(weak.threshold), to_string(weak.verdict)});
    jrows.push_back({{"t", t},
                     {"qfi", std::isfinite(sharp.qfi_value) ? json(sharp.qfi_value) : json(nullptr)},
                     {"sharp_threshold", sharp.threshold},
                     {"sharp_verdict", to_string(sharp.verdict)},
                     {"weak_threshold", weak.threshold},
                     {"weak_verdict", to_string(weak.verdict)}});
  }
  if (o.format == "csv")
    emit(o, rows_to_csv({"t", "qfi", "sharp_threshold", "sharp_verdict", "weak_threshold",
                         "weak_verdict"},
                        rows));
  else
    emit(o, wrap_schema("open-system", jrows).dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------- fisher-protocol -------

int cmd_fisher_protocol(const CommonOpts& o, double theta, double eps,
                        const std::string& kind_name, double alpha,
                        const std::string& povm_name) {
  ParamChannelFamily channel = resolve_channel(o);
  if (!channel.in_domain(theta)) throw ConfigError("theta outside the channel domain");
  DensityMatrix rho = resolve_state(o);
  ParamChannelFamily ext =
      rho.total_dim() == channel.dim_in ? channel : iid_extend(channel, rho.num_subsystems());
  if (rho.total_dim() != ext.dim_in) throw ConfigError("state dimension mismatch");
  if (eps <= 0 || !ext.in_domain(theta + eps) || !ext.in_domain(theta - eps))
    throw ConfigError("epsilon ladder leaves the channel domain");

  DivergenceKind kind;
  if (kind_name == "rel-entropy")
    kind = DivergenceKind::RelativeEntropy;
  else if (kind_name == "hellinger")
    kind = DivergenceKind::Hellinger;
  else if (kind_name == "renyi")
    kind = DivergenceKind::Renyi;
  else
    throw ConfigError("kind must be rel-entropy, hellinger, or renyi");

  ComplexMatrix out = hermitize(ext.apply(theta, rho.mat()));
  ComplexMatrix dout = channel_tangent(ext, theta, rho.mat());
  Povm povm;
  if (povm_name == "optimal") {
    povm = optimal_povm(out, dout);
  } else if (povm_name == "identity") {
    povm.effects.push_back(identity(ext.dim_out));
  } else {
    throw ConfigError("povm must be optimal or identity");
  }

  std::vector<double> p = povm_probabilities(out, povm);
  std::vector<double> dp(p.size());
  for (std::size_t k = 0; k < povm.effects.size(); ++k)
    dp[k] = (povm.effects[k] * dout).trace().real();
  const double reference = classical_fisher(p, dp);
  const double quantum = qfi(out, dout);

  auto curve = [&](double th) {
    ComplexMatrix sigma = hermitize(ext.apply(th, rho.mat()));
    Divergence d = f_divergence(p, povm_probabilities(sigma, povm), kind, alpha);
    if (d.infinite) throw std::domain_error("divergence curve is infinite");
    return d.value;
  };
  std::vector<DivergenceLadderRow> ladder = fisher_from_divergence(
      curve, theta, eps, divergence_curvature(kind, alpha));

  std::vector<std::vector<std::string>> rows;
  json jrows = json::array();
  for (const auto& r : ladder) {
    rows.push_back({fmt(r.eps), fmt(r.symmetric), fmt(reference), fmt(quantum)});
    jrows.push_back({{"eps", r.eps},
                     {"estimate", r.symmetric},
                     {"forward", r.forward},
                     {"backward", r.backward},
                     {"classical_fisher", reference},
                     {"qfi", quantum}});
  }
  if (o.format == "csv")
    emit(o, rows_to_csv({"eps", "estimate", "classical_fisher", "qfi"}, rows));
  else
    emit(o, wrap_schema("fisher-protocol", jrows).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLD quantum Fisher information and channel-based entanglement witnesses"};
  app.require_subcommand(1);

  CommonOpts o;
  std::optional<double> theta;
  std::string theta_grid;
  std::string gamma_str = "0,0,0";
  std::string time_grid = "0.1:2:20";
  double eps = 1e-2;
  double alpha = 1.5;
  std::string kind_name = "rel-entropy";
  std::string povm_name = "optimal";

  auto add_channel_flags = [&](CLI::App* cmd) {
    cmd->add_option("--channel", o.channel_name, "uz|ux|uy|dpc|tpc");
    cmd->add_option("--config", o.config_path, "JSON config with a channel descriptor");
    cmd->add_option("--family", o.family, "state family: rho_plus|rho_minus");
    cmd->add_option("--lambda", o.lambda, "family parameter");
    cmd->add_option("--state-file", o.state_file, "explicit state (JSON matrix)");
    cmd->add_option("--copies", o.copies, "number of i.i.d. copies")->check(CLI::PositiveNumber);
    cmd->add_option("--mode", o.mode, "g* source: analytic|optimizer");
  };

  CLI::App* qfi_cmd = app.add_subcommand("qfi", "per-theta QFI, threshold, and verdict rows");
  add_channel_flags(qfi_cmd);
  qfi_cmd->add_option("--theta", theta, "single theta");
  qfi_cmd->add_option("--theta-grid", theta_grid, "lo:hi:count");
  add_output_flags(qfi_cmd, o);

  CLI::App* region_cmd =
      app.add_subcommand("region", "entanglement region r_ent(theta) or the union over a grid");
  add_channel_flags(region_cmd);
  region_cmd->add_option("--theta", theta, "single theta (interval mode)");
  region_cmd->add_option("--theta-grid", theta_grid, "lo:hi:count (union mode)");
  add_output_flags(region_cmd, o);

  CLI::App* table_cmd = app.add_subcommand("table1", "region summary for Uz, Ux, DPC, TPC");
  table_cmd->add_option("--mode", o.mode, "g* source: analytic|optimizer");
  add_output_flags(table_cmd, o);

  CLI::App* open_cmd = app.add_subcommand("open-system", "master-equation witness time series");
  double os_theta = 1.0;
  open_cmd->add_option("--theta", os_theta, "rotation rate");
  open_cmd->add_option("--gamma", gamma_str, "damping rates g1,g2,g3");
  open_cmd->add_option("--time-grid", time_grid, "lo:hi:count");
  open_cmd->add_option("--state-file", o.state_file, "input state (default: Bell)");
  add_output_flags(open_cmd, o);

  CLI::App* proto_cmd =
      app.add_subcommand("fisher-protocol", "divergence-ladder Fisher estimates for a POVM");
  add_channel_flags(proto_cmd);
  double proto_theta = 0.8;
  proto_cmd->add_option("--theta", proto_theta, "evaluation point");
  proto_cmd->add_option("--eps", eps, "largest ladder step")->check(CLI::PositiveNumber);
  proto_cmd->add_option("--kind", kind_name, "rel-entropy|hellinger|renyi");
  proto_cmd->add_option("--alpha", alpha, "Renyi order in (0,1) or (1,2]");
  proto_cmd->add_option("--povm", povm_name, "optimal|identity");
  add_output_flags(proto_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (qfi_cmd->parsed()) {
      std::vector<double> thetas;
      if (theta) thetas.push_back(*theta);
      if (!theta_grid.empty()) thetas = parse_grid(theta_grid);
      if (thetas.empty()) throw ConfigError("qfi needs --theta or --theta-grid");
      return cmd_qfi(o, thetas);
    }
    if (region_cmd->parsed()) return cmd_region(o, theta, theta_grid);
    if (table_cmd->parsed()) return cmd_table1(o);
    if (open_cmd->parsed())
      return cmd_open_system(o, os_theta, parse_triple(gamma_str, "gamma"),
                             parse_grid(time_grid));
    if (proto_cmd->parsed())
      return cmd_fisher_protocol(o, proto_theta, eps, kind_name, alpha, povm_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
