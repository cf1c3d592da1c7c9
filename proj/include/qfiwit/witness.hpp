#ifndef QFIWIT_WITNESS_HPP
#define QFIWIT_WITNESS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfiwit/channels.hpp"
#include "qfiwit/optimize.hpp"
#include "qfiwit/qmat.hpp"

namespace qfiwit {

// Strict-inequality guard: numerical noise must never certify entanglement.
inline constexpr double kMarginGuard = 1e-7;

enum class Verdict { Entangled, Inconclusive, InvalidOutput };
std::string to_string(Verdict v);

enum class GStarMode { Analytic, Optimizer };

struct WitnessReport {
  double theta = 0.0;
  int n_copies = 0;
  double qfi_value = 0.0;
  double threshold = 0.0;  // N · g*
  double margin = 0.0;     // qfi − threshold
  Verdict verdict = Verdict::Inconclusive;
  GStarMode gstar_source = GStarMode::Analytic;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct EntRegion {
  double theta = 0.0;
  std::vector<Interval> intervals;  // sorted, disjoint, open
};

struct RegionUnion {
  std::vector<double> theta_grid;
  std::vector<Interval> union_intervals;
};

struct StateFamily {
  std::string label;
  std::function<DensityMatrix(double)> builder;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

StateFamily rho_plus_family();   // ρ_λ⁺ = bell_diagonal(λ, λ, −λ)
StateFamily rho_minus_family();  // ρ_λ⁻ = bell_diagonal(−λ, −λ, −λ)
StateFamily family_by_label(const std::string& label);

// g* for the single-copy channel, analytic when the family carries a closed
// form, otherwise by the optimizer.
double gstar_value(const ParamChannelFamily& channel, double theta, GStarMode mode,
                   const GStarOptions& opts = {});

WitnessReport witness_value(const ParamChannelFamily& channel, double theta,
                            const ComplexMatrix& rho, int n,
                            GStarMode gstar_mode = GStarMode::Analytic,
                            const GStarOptions& opts = {});
inline WitnessReport witness_value(const ParamChannelFamily& channel, double theta,
                                   const DensityMatrix& rho, int n,
                                   GStarMode gstar_mode = GStarMode::Analytic,
                                   const GStarOptions& opts = {}) {
  return witness_value(channel, theta, rho.mat(), n, gstar_mode, opts);
}

struct RegionOptions {
  int grid_points = 2048;
  double bisect_tol = 1e-8;
  GStarMode gstar_mode = GStarMode::Analytic;
  GStarOptions gstar_opts{};
};

EntRegion r_ent_interval(const ParamChannelFamily& channel, double theta,
                         const StateFamily& family, int n = 2,
                         const RegionOptions& opts = {});

RegionUnion r_ent_union(const ParamChannelFamily& channel, const std::vector<double>& theta_grid,
                        const StateFamily& family, int n = 2, const RegionOptions& opts = {});

// Default θ grid: uniform points over Θ shrunk by 1e−4 at each boundary.
std::vector<double> default_theta_grid(const ParamChannelFamily& channel, int points = 512);

struct Table1Row {
  std::string channel;
  bool theta_dependent = false;
  double representative_theta = 0.0;
  EntRegion representative;  // empty intervals = "No"
  RegionUnion unioned;
};

struct Table1Report {
  std::vector<Table1Row> rows;
};

Table1Report table1(const std::vector<double>& unitary_grid,
                    const std::vector<double>& noise_grid, const RegionOptions& opts = {});
Table1Report table1(const RegionOptions& opts = {});

enum class OpenSystemMode { Sharp, Weak };

// Separability witness for the N-qubit master-equation channel: threshold is
// N · open_system_gstar in sharp mode and N · t² in weak mode.
WitnessReport open_system_witness(const ComplexMatrix& rho0, const LindbladSpec& spec,
                                  OpenSystemMode mode, const GStarOptions& opts = {});
inline WitnessReport open_system_witness(const DensityMatrix& rho0, const LindbladSpec& spec,
                                         OpenSystemMode mode, const GStarOptions& opts = {}) {
  return open_system_witness(rho0.mat(), spec, mode, opts);
}

// Convexity gap λ(1−λ)|n×(s1−s2)|² of the qubit rotation family.
double convexity_gap(const std::array<double, 3>& axis, const BlochVector& s1,
                     const BlochVector& s2, double lambda);

struct SeparableSampler {
  int max_mixture = 8;
  std::uint64_t seed = 7;
};

DensityMatrix random_separable_state(int n_parties, int local_dim, std::mt19937_64& rng,
                                     int max_mixture = 8);

// Maximum witness margin over random separable inputs; soundness of the
// criterion says it never exceeds numerical noise.
double separable_sampler_check(const ParamChannelFamily& channel, double theta, int n,
                               int samples, std::uint64_t seed,
                               GStarMode gstar_mode = GStarMode::Analytic,
                               const GStarOptions& opts = {});

nlohmann::json to_json(const WitnessReport& r);
nlohmann::json to_json(const EntRegion& r);
nlohmann::json to_json(const RegionUnion& r);
nlohmann::json to_json(const Table1Report& r);
std::string table1_text(const Table1Report& r);

}  // namespace qfiwit

#endif  // QFIWIT_WITNESS_HPP
