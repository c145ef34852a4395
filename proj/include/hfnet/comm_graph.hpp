#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hfnet/analytics.hpp"
#include "hfnet/map_core.hpp"
#include "hfnet/sampling.hpp"

namespace hfnet {

enum class EnergyKind : std::uint8_t { kNominalPerStreet, kDistancePathloss };

EnergyKind parse_energy_kind(const std::string& name);
const char* to_string(EnergyKind k);

struct EnergyModel {
  EnergyKind kind = EnergyKind::kNominalPerStreet;
  double delta = 2.0;
  // <= 0 means map_length^delta.
  double p_max = 0.0;
  // Distance model: power = kappa * (gap * map_length)^delta.
  double kappa = 1.0;
  double map_length = 1000.0;
  PowerLaw power_law = PowerLaw::kNominal;
  // Count relays in the street population m (sensitivity studies).
  bool count_relays_in_population = false;

  double resolved_p_max() const;
  void validate() const;
};

enum class EntityKind : std::uint8_t { kNode = 0, kRelay = 1 };

// Where an entity sits on one street thread.
struct ThreadSlot {
  std::size_t thread = 0;
  std::size_t position = 0;
};

struct Entity {
  EntityKind kind = EntityKind::kNode;
  std::size_t source_id = 0;  // MobileNode::id or Relay::id
  Point point;
  bool on_central_cross = false;
  int slot_count = 0;
  ThreadSlot slots[2];
};

// The ordered chain of entities on one street.
struct Thread {
  StreetId street;
  std::vector<std::size_t> members;
  std::vector<std::uint64_t> positions;  // fixed-point abscissa, ascending
  long population = 0;                   // m(street)
  // prefix_energy[i] = energy of the hops members[0] -> ... -> members[i]
  std::vector<double> prefix_energy;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  std::size_t thread = 0;
  double gap = 0.0;  // unit-square units
  double power = 0.0;
  double energy = 0.0;
};

struct Adjacent {
  std::size_t to = 0;
  std::size_t edge = 0;
};

// Entities are numbered nodes first ([0, node_count)), then relays. Immutable
// once built.
class CommGraph {
 public:
  CommGraph(const std::vector<MobileNode>& nodes, const std::vector<Relay>& relays, const EnergyModel& model);

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t node_count() const { return node_count_; }
  std::size_t relay_count() const { return entities_.size() - node_count_; }
  bool is_relay(std::size_t id) const { return id >= node_count_; }
  std::size_t relay_entity(std::size_t relay_index) const { return node_count_ + relay_index; }

  const Entity& entity(std::size_t id) const { return entities_.at(id); }
  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Thread>& threads() const { return threads_; }
  const EnergyModel& model() const { return model_; }
  double p_max() const { return p_max_; }

  // Neighbors sorted by entity id.
  std::span<const Adjacent> neighbors(std::size_t id) const;
  // Edge joining u and v, if adjacent.
  std::optional<std::size_t> edge_between(std::size_t u, std::size_t v) const;

  std::optional<std::size_t> thread_of(const StreetId& street) const;
  // Slot of entity `id` on `thread`, if it lies there.
  std::optional<std::size_t> position_on(std::size_t id, std::size_t thread) const;
  std::optional<std::size_t> relay_at(const StreetId& h, const StreetId& v) const;

  // Mobile-node count of a street; 0 for a valid street with no entity.
  long street_population(const StreetId& street) const;

  void check_entity(std::size_t id) const;

  // Writes u_id,v_id,street,gap,power,energy.
  void write_edges_csv(std::ostream& out) const;

 private:
  std::size_t node_count_ = 0;
  EnergyModel model_;
  double p_max_ = 0.0;
  std::vector<Entity> entities_;
  std::vector<Thread> threads_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> adj_offsets_;
  std::vector<Adjacent> adj_;
  std::unordered_map<StreetId, std::size_t, StreetIdHash> thread_index_;
  std::unordered_map<StreetId, long, StreetIdHash> populations_;
  std::map<std::pair<StreetId, StreetId>, std::size_t> relay_lookup_;
};

CommGraph build_graph(const std::vector<MobileNode>& nodes, const std::vector<Relay>& relays,
                      const EnergyModel& model);

long street_population(const CommGraph& graph, const StreetId& street);

std::string street_descriptor(const StreetId& s);

}  // namespace hfnet
