#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hfnet/comm_graph.hpp"
#include "hfnet/regression.hpp"
#include "hfnet/rng.hpp"

// Constrained path queries on a CommGraph. Energies are accumulated left to
// right from the source, so every optimum reported here equals the minimum of
// the same left-fold sums over the enumerated walks or paths.
//
// Among equal-cost answers the witness is the lexicographically smallest vertex
// sequence of the fewest hops that realizes the optimum along tight edges.

namespace hfnet {

struct PathResult {
  bool feasible = false;
  long hops = 0;
  double accumulated_energy = 0.0;
  double max_power = 0.0;
  long relay_count = 0;
  std::vector<std::size_t> vertices;
};

// Builds the result for an explicit vertex sequence; throws if two consecutive
// vertices are not adjacent.
PathResult path_from_vertices(const CommGraph& graph, std::vector<std::size_t> vertices);

std::optional<double> min_energy_exact_hops(const CommGraph& graph, std::size_t s, std::size_t t, int k);

// Exact-k minimum energies for k = 0..k_max in one pass (entry 0 is s == t).
std::vector<std::optional<double>> exact_hops_profile(const CommGraph& graph, std::size_t s, std::size_t t,
                                                      int k_max);

PathResult min_energy_within_hops(const CommGraph& graph, std::size_t s, std::size_t t, int k);

// Unconstrained minimum-energy path (Dijkstra).
PathResult min_energy_path(const CommGraph& graph, std::size_t s, std::size_t t);

// Fewest hops over edges of power <= cap.
PathResult min_hops_power_capped(const CommGraph& graph, std::size_t s, std::size_t t, double cap);

// Fewest hops with accumulated energy <= budget; the minimum-energy walk of that
// hop count is returned.
PathResult min_hops_energy_capped(const CommGraph& graph, std::size_t s, std::size_t t, double budget);

enum class ComponentKind : std::uint8_t { kAccumulatedEnergy, kMaxPower };

struct ComponentSpec {
  ComponentKind kind = ComponentKind::kAccumulatedEnergy;
  double budget = 0.0;
  // Maximum number of relays at which the path to the cross changes street.
  // Passing a relay along one street does not count. Empty means unlimited.
  std::optional<int> relay_limit;

  static ComponentSpec energy(double budget) { return {ComponentKind::kAccumulatedEnergy, budget, std::nullopt}; }
  static ComponentSpec energy_relays(double budget, int k) { return {ComponentKind::kAccumulatedEnergy, budget, k}; }
  static ComponentSpec power(double cap) { return {ComponentKind::kMaxPower, cap, std::nullopt}; }
  static ComponentSpec power_relays(double cap, int k) { return {ComponentKind::kMaxPower, cap, k}; }
};

struct ComponentResult {
  // Node entity ids in the component, ascending.
  std::vector<std::size_t> members;
  // Per entity: optimum accumulated energy (or bottleneck power) from the
  // central cross, +inf when unreachable.
  std::vector<double> optimum;

  std::size_t size() const { return members.size(); }
  bool contains(std::size_t id) const;
};

ComponentResult giant_component(const CommGraph& graph, const ComponentSpec& spec);

struct DivertedConfig {
  int relays = 3;  // 3 or 5
  double alpha = 0.5;
};

// Level of the low-population streets used by the detour.
int diverted_level(std::size_t n, double p_r, double alpha);
int diverted_inner_level(std::size_t n, double p_r, double alpha);

// s must lie on one arm of the central cross and t on the other. Among all
// detours of the requested shape the one of least energy is returned.
PathResult diverted_path(const CommGraph& graph, std::size_t s, std::size_t t, const DivertedConfig& cfg,
                         std::size_t n, double p_r);

enum class HopPolicy : std::uint8_t { kMinHops, kMinEnergy, kPowerCapped, kEnergyCapped };

HopPolicy parse_hop_policy(const std::string& name);
const char* to_string(HopPolicy p);

struct ThroughputConfig {
  double rate = 1.0;  // C, packets per slot per node
  int pair_samples = 100;
  ComponentSpec component;
  HopPolicy policy = HopPolicy::kPowerCapped;
  double policy_budget = 0.0;  // cap or energy budget for the capped policies
};

struct ThroughputEstimate {
  double zeta = 0.0;
  double stderr_ = 0.0;
  double mean_hops = 0.0;
  std::size_t component_size = 0;
  long pairs = 0;
  long infeasible = 0;
};

ThroughputEstimate throughput_lower_bound(const CommGraph& graph, const ThroughputConfig& cfg, Rng& rng);

}  // namespace hfnet
