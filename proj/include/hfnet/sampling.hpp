#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hfnet/map_core.hpp"
#include "hfnet/rng.hpp"

namespace hfnet {

struct MobileNode {
  std::size_t id = 0;
  StreetId street;
  std::uint64_t pos_fixed = 0;  // abscissa along the street, value / 2^64

  double pos() const { return fixed_to_unit(pos_fixed); }
  Point point() const;
};

struct Relay {
  std::size_t id = 0;
  Crossing crossing;
};

enum class TypicalKind : std::uint8_t { kUser, kAuxiliary, kRelay };

struct TypicalSample {
  TypicalKind kind = TypicalKind::kUser;
  Point location;
  // User: the street and level L. Auxiliary/relay: the crossing and (U, W).
  std::optional<StreetId> street;
  std::optional<Crossing> crossing;
  int level = 0;
  int h_level = 0;
  int v_level = 0;
  // Relay samples only: extra auxiliary mass K co-located with x_*.
  long colocated = 0;
  double weight = 1.0;
};

// Mass of one crossing of levels (h, v) under the auxiliary process, per unit rho:
// p_r^2 ((1 - p_r)/2)^(h+v). Sums to 1 over all crossings.
double crossing_mass(double p_r, int h, int v);

// 1 - exp(-rho * crossing_mass).
double relay_presence_probability(double rho, double p_r, int h, int v);

// Probability that one node lands on one particular street of the given level,
// accounting for the max_level truncation used by the sampler.
double node_street_probability(const MapParams& params, int level);

// Probability mass of node levels beyond params.max_level (redrawn by the sampler).
double node_truncated_mass(const MapParams& params);

// Upper bound on the expected number of auxiliary points dropped because one of
// their levels exceeds params.relay_max_level.
double relay_truncated_mass(const MapParams& params);

std::vector<MobileNode> sample_nodes(const MapParams& params, Rng& rng);

// The auxiliary process as a multiset: one entry per point, crossings repeat.
// Points beyond relay_max_level are dropped.
std::vector<Crossing> sample_auxiliary_points(const MapParams& params, Rng& rng);

// Support of an auxiliary multiset, ordered by (h_level, h_index, v_level, v_index).
std::vector<Relay> relays_from_auxiliary(const std::vector<Crossing>& points);

std::vector<Relay> sample_relays(const MapParams& params, Rng& rng);

TypicalSample sample_typical_user(const MapParams& params, Rng& rng);
TypicalSample sample_typical_auxiliary(const MapParams& params, Rng& rng);
// x_* from the typical auxiliary law, K ~ Poisson(rho * crossing_mass(U, W)),
// weight 1/(1+K). Estimators must self-normalize by the mean weight.
TypicalSample sample_typical_relay(const MapParams& params, Rng& rng);

// Building blocks shared with the typical-point samplers.
int sample_node_level(const MapParams& params, Rng& rng);
StreetId sample_street_at_level(int level, Rng& rng);
std::uint64_t sample_index_at_level(int level, Rng& rng);

}  // namespace hfnet
