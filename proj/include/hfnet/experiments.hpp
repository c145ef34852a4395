#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfnet/comm_graph.hpp"
#include "hfnet/map_core.hpp"
#include "hfnet/regression.hpp"
#include "hfnet/routing.hpp"

namespace hfnet {

enum class RhoRule : std::uint8_t { kEqualN, kFixed };

inline const std::vector<std::string> kAllMetrics = {"relay_count",  "min_energy_curve", "power_cap_curve",
                                                     "giant_fraction", "diverted_scaling", "hops_scaling",
                                                     "throughput"};

struct SweepConfig {
  std::vector<std::size_t> n_grid = {200, 400, 800, 1600, 3200};
  RhoRule rho_rule = RhoRule::kEqualN;
  double rho = 1000.0;  // kFixed only
  int replicates = 20;
  double d_F = 4.33;
  double d_r = 3.0;
  double delta = 2.0;
  double alpha = 0.5;
  double gamma = 0.5;
  double c_E = 0.0;  // <= 0: calibrated at the smallest n
  double v_E = 7.0;
  std::vector<std::string> metrics = {"relay_count"};
  std::uint64_t seed = 1;

  int pairs = 100;
  int k_max = 30;
  int power_cap_steps = 8;
  int diverted_relays = 3;
  int relay_limit = 1;
  double rate = 1.0;
  HopPolicy throughput_policy = HopPolicy::kPowerCapped;
  double calibration_quantile = 0.9;
  double tolerance = 0.25;
  double diverted_tolerance = 0.3;
  int max_level = 20;
  NodeMode node_mode = NodeMode::kExactN;
  EnergyKind energy = EnergyKind::kNominalPerStreet;
  PowerLaw power_law = PowerLaw::kNominal;
  bool count_relays_in_population = false;
  double map_length = 1000.0;
  int threads = 0;  // 0: hardware concurrency

  bool wants(const std::string& metric) const;
  MapParams map_params(std::size_t n, std::uint64_t map_seed) const;
  EnergyModel energy_model() const;
  void validate() const;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& cfg);

struct SweepRow {
  std::size_t n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct SlopeVerdict {
  std::string metric;
  SlopeReport fit;
  std::optional<double> expected;
  double tolerance = 0.0;
  std::string verdict;  // pass | fail | n/a
  std::vector<std::pair<double, double>> means;  // (n, mean value)
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;  // sorted by (n, replicate, metric)
  std::optional<double> c_E;
  std::vector<SlopeVerdict> slopes;

  bool all_pass() const;
  // Mean of `metric` per n, skipping NaN.
  std::vector<std::pair<double, double>> means(const std::string& metric) const;
};

SweepResult run_sweep(const SweepConfig& cfg);

// Per-map seed for grid value n and replicate r.
std::uint64_t map_seed(std::uint64_t master, std::size_t n, int replicate);

struct GeneratedMap {
  MapParams params;
  std::vector<MobileNode> nodes;
  std::vector<Relay> relays;
};

GeneratedMap generate_map(const MapParams& params);

void write_nodes_csv(const std::vector<MobileNode>& nodes, std::ostream& out);
void write_relays_csv(const std::vector<Relay>& relays, std::ostream& out);
void write_sweep_csv(const SweepResult& result, std::ostream& out);
nlohmann::json slopes_json(const SweepResult& result);

// Node entities on the horizontal and the vertical arm of the central cross.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> cross_arms(const CommGraph& graph);

enum class PairConstraint : std::uint8_t { kEnergy, kPower };

struct PairQueryConfig {
  int pairs = 100;
  int k_max = 30;
  PairConstraint constraint = PairConstraint::kEnergy;
  // Fraction of P_max; <= 0 means unset.
  double budget = 0.0;
  int power_cap_steps = 8;
};

struct PairRow {
  int pair_id = 0;
  std::size_t s = 0;
  std::size_t t = 0;
  double k_or_m = 0.0;
  std::optional<double> exact_energy;
  std::optional<double> upto_energy;
  long hops = 0;
  double max_power = 0.0;
  bool feasible = false;
};

std::vector<PairRow> simulate_pairs(const CommGraph& graph, const PairQueryConfig& cfg, Rng& rng);
void write_pairs_csv(const std::vector<PairRow>& rows, std::ostream& out);

struct PairPreset {
  std::string name;
  double d_F;
  double d_r;
  std::size_t n;
};

// (d_F, d_r, n) setups of the published energy/hop figures.
const std::vector<PairPreset>& pair_presets();

}  // namespace hfnet
