#include "hfnet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <spdlog/spdlog.h>

namespace hfnet {

namespace {

// Failures before the first success, saturated at `cap + 1`.
int draw_geometric(double p, int cap, Rng& rng) {
  if (p >= 1.0) return 0;
  std::geometric_distribution<long long> dist(p);
  return static_cast<int>(std::min<long long>(dist(rng), cap + 1LL));
}

long draw_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(rng);
}

auto crossing_key(const Crossing& c) {
  return std::make_tuple(c.h_street.level, c.h_street.index, c.v_street.level, c.v_street.index);
}

}  // namespace

Point MobileNode::point() const {
  const double along = pos();
  const double axis = street.axis();
  return street.orientation == Orientation::kHorizontal ? Point{along, axis} : Point{axis, along};
}

double crossing_mass(double p_r, int h, int v) {
  return p_r * p_r * std::pow((1.0 - p_r) / 2.0, h + v);
}

double relay_presence_probability(double rho, double p_r, int h, int v) {
  return -std::expm1(-rho * crossing_mass(p_r, h, v));
}

double node_truncated_mass(const MapParams& params) {
  return std::pow(params.q(), params.max_level + 1);
}

double node_street_probability(const MapParams& params, int level) {
  if (level < 0 || level > params.max_level) return 0.0;
  const double level_mass = params.p * std::pow(params.q(), level) / (1.0 - node_truncated_mass(params));
  return level_mass * std::exp2(-(level + 1));
}

double relay_truncated_mass(const MapParams& params) {
  // P(U > L or W > L) <= 2 (1 - p_r)^(L+1)
  return params.rho * std::min(1.0, 2.0 * std::pow(1.0 - params.p_r, params.relay_max_level + 1));
}

std::uint64_t sample_index_at_level(int level, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << level) - 1);
  return 2 * pick(rng) + 1;
}

StreetId sample_street_at_level(int level, Rng& rng) {
  std::bernoulli_distribution vertical(0.5);
  const Orientation o = vertical(rng) ? Orientation::kVertical : Orientation::kHorizontal;
  return StreetId{o, level, sample_index_at_level(level, rng)};
}

int sample_node_level(const MapParams& params, Rng& rng) {
  if (!(params.p > 0.0)) throw InvalidParameter("node sampling needs p > 0 (d_F > 2)");
  for (;;) {
    const int level = draw_geometric(params.p, params.max_level, rng);
    if (level <= params.max_level) return level;
  }
}

std::vector<MobileNode> sample_nodes(const MapParams& params, Rng& rng) {
  params.validate();
  const std::size_t count = params.node_mode == NodeMode::kExactN
                                ? params.n
                                : static_cast<std::size_t>(draw_poisson(static_cast<double>(params.n), rng));
  const double dropped = node_truncated_mass(params);
  if (dropped > 1e-6) {
    spdlog::debug("node levels above {} carry mass {:.3g}; redrawn", params.max_level, dropped);
  }
  std::vector<MobileNode> nodes;
  nodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int level = sample_node_level(params, rng);
    MobileNode node;
    node.id = i;
    node.street = sample_street_at_level(level, rng);
    node.pos_fixed = rng();
    nodes.push_back(node);
  }
  return nodes;
}

std::vector<Crossing> sample_auxiliary_points(const MapParams& params, Rng& rng) {
  params.validate();
  const long total = draw_poisson(params.rho, rng);
  std::vector<Crossing> points;
  if (total == 0 || !(params.p_r > 0.0)) return points;
  points.reserve(static_cast<std::size_t>(total));
  const int cap = params.relay_max_level;
  long dropped = 0;
  for (long i = 0; i < total; ++i) {
    const int u = draw_geometric(params.p_r, params.relay_max_level, rng);
    const int w = draw_geometric(params.p_r, params.relay_max_level, rng);
    if (u > cap || w > cap) {
      ++dropped;
      continue;
    }
    const StreetId h{Orientation::kHorizontal, u, sample_index_at_level(u, rng)};
    const StreetId v{Orientation::kVertical, w, sample_index_at_level(w, rng)};
    points.push_back(Crossing{h, v, Point{v.axis(), h.axis()}});
  }
  if (dropped > 0) {
    spdlog::debug("dropped {} auxiliary points beyond level {} (expected <= {:.3g})", dropped, cap,
                  relay_truncated_mass(params));
  }
  return points;
}

std::vector<Relay> relays_from_auxiliary(const std::vector<Crossing>& points) {
  std::vector<Crossing> sorted = points;
  std::sort(sorted.begin(), sorted.end(),
            [](const Crossing& a, const Crossing& b) { return crossing_key(a) < crossing_key(b); });
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const Crossing& a, const Crossing& b) { return crossing_key(a) == crossing_key(b); }),
               sorted.end());
  std::vector<Relay> relays;
  relays.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) relays.push_back(Relay{i, sorted[i]});
  return relays;
}

std::vector<Relay> sample_relays(const MapParams& params, Rng& rng) {
  return relays_from_auxiliary(sample_auxiliary_points(params, rng));
}

TypicalSample sample_typical_user(const MapParams& params, Rng& rng) {
  TypicalSample s;
  s.kind = TypicalKind::kUser;
  s.level = sample_node_level(params, rng);
  MobileNode node;
  node.street = sample_street_at_level(s.level, rng);
  node.pos_fixed = rng();
  s.street = node.street;
  s.location = node.point();
  return s;
}

TypicalSample sample_typical_auxiliary(const MapParams& params, Rng& rng) {
  if (!(params.p_r > 0.0)) throw InvalidParameter("typical auxiliary point needs p_r > 0 (d_r > 2)");
  TypicalSample s;
  s.kind = TypicalKind::kAuxiliary;
  // Levels beyond the exact range are redrawn; their mass is relay_truncated_mass / rho.
  do {
    s.h_level = draw_geometric(params.p_r, params.relay_max_level, rng);
    s.v_level = draw_geometric(params.p_r, params.relay_max_level, rng);
  } while (s.h_level > params.relay_max_level || s.v_level > params.relay_max_level);
  const StreetId h{Orientation::kHorizontal, s.h_level, sample_index_at_level(s.h_level, rng)};
  const StreetId v{Orientation::kVertical, s.v_level, sample_index_at_level(s.v_level, rng)};
  s.crossing = Crossing{h, v, Point{v.axis(), h.axis()}};
  s.location = s.crossing->point;
  s.level = std::min(s.h_level, s.v_level);
  return s;
}

TypicalSample sample_typical_relay(const MapParams& params, Rng& rng) {
  TypicalSample s = sample_typical_auxiliary(params, rng);
  s.kind = TypicalKind::kRelay;
  s.colocated = draw_poisson(params.rho * crossing_mass(params.p_r, s.h_level, s.v_level), rng);
  s.weight = 1.0 / (1.0 + static_cast<double>(s.colocated));
  return s;
}

}  // namespace hfnet
