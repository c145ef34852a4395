#include "hfnet/comm_graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <spdlog/spdlog.h>

namespace hfnet {

EnergyKind parse_energy_kind(const std::string& name) {
  if (name == "nominal" || name == "nominal-per-street") return EnergyKind::kNominalPerStreet;
  if (name == "distance" || name == "distance-pathloss") return EnergyKind::kDistancePathloss;
  throw std::invalid_argument("unknown energy model: " + name);
}

const char* to_string(EnergyKind k) {
  return k == EnergyKind::kNominalPerStreet ? "nominal-per-street" : "distance-pathloss";
}

double EnergyModel::resolved_p_max() const {
  return p_max > 0.0 ? p_max : std::pow(map_length, delta);
}

void EnergyModel::validate() const {
  if (!(delta >= 1.0)) throw InvalidParameter("pathloss exponent delta must be >= 1");
  if (!(map_length > 0.0)) throw InvalidParameter("map_length must be > 0");
  if (!(resolved_p_max() > 0.0) || !std::isfinite(resolved_p_max())) throw InvalidParameter("P_max must be finite and > 0");
  if (!(kappa > 0.0)) throw InvalidParameter("kappa must be > 0");
}

std::string street_descriptor(const StreetId& s) {
  return std::string(to_string(s.orientation)) + ":" + std::to_string(s.level) + ":" + std::to_string(s.index);
}

namespace {

struct Member {
  std::uint64_t pos;
  EntityKind kind;
  std::size_t id;
};

}  // namespace

CommGraph::CommGraph(const std::vector<MobileNode>& nodes, const std::vector<Relay>& relays,
                     const EnergyModel& model)
    : node_count_(nodes.size()), model_(model) {
  model_.validate();
  p_max_ = model_.resolved_p_max();

  std::map<StreetId, std::vector<Member>> by_street;
  entities_.reserve(nodes.size() + relays.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const MobileNode& m = nodes[i];
    if (!m.street.valid()) throw std::invalid_argument("node on an invalid street");
    Entity e;
    e.kind = EntityKind::kNode;
    e.source_id = m.id;
    e.point = m.point();
    e.on_central_cross = m.street.level == 0;
    entities_.push_back(e);
    by_street[m.street].push_back(Member{m.pos_fixed, EntityKind::kNode, i});
    ++populations_[m.street];
  }
  for (std::size_t j = 0; j < relays.size(); ++j) {
    const Crossing& c = relays[j].crossing;
    const std::size_t id = node_count_ + j;
    Entity e;
    e.kind = EntityKind::kRelay;
    e.source_id = relays[j].id;
    e.point = c.point;
    e.on_central_cross = c.on_central_cross();
    entities_.push_back(e);
    by_street[c.h_street].push_back(Member{c.v_street.axis_fixed(), EntityKind::kRelay, id});
    by_street[c.v_street].push_back(Member{c.h_street.axis_fixed(), EntityKind::kRelay, id});
    if (!relay_lookup_.emplace(std::make_pair(c.h_street, c.v_street), id).second) {
      throw std::invalid_argument("two relays at one crossing");
    }
    if (model_.count_relays_in_population) {
      ++populations_[c.h_street];
      ++populations_[c.v_street];
    }
  }

  threads_.reserve(by_street.size());
  for (auto& [street, members] : by_street) {
    std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
      return std::tie(a.pos, a.kind, a.id) < std::tie(b.pos, b.kind, b.id);
    });
    const std::size_t t = threads_.size();
    Thread thread;
    thread.street = street;
    const auto pop = populations_.find(street);
    thread.population = pop == populations_.end() ? 0 : pop->second;
    const double street_power = nominal_power(thread.population, model_.delta, p_max_, model_.power_law);
    thread.prefix_energy.push_back(0.0);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Member& mem = members[k];
      Entity& e = entities_[mem.id];
      e.slots[e.slot_count++] = ThreadSlot{t, k};
      thread.members.push_back(mem.id);
      thread.positions.push_back(mem.pos);
      if (k == 0) continue;
      if (members[k - 1].pos == mem.pos) {
        spdlog::debug("entities {} and {} share an abscissa on {}; ordered by (kind, id)", members[k - 1].id,
                      mem.id, street_descriptor(street));
      }
      Edge edge;
      edge.u = members[k - 1].id;
      edge.v = mem.id;
      edge.thread = t;
      edge.gap = fixed_to_unit(mem.pos - members[k - 1].pos);
      edge.power = model_.kind == EnergyKind::kNominalPerStreet
                       ? street_power
                       : model_.kappa * std::pow(edge.gap * model_.map_length, model_.delta);
      edge.energy = edge.power;  // one slot per hop
      thread.prefix_energy.push_back(thread.prefix_energy.back() + edge.energy);
      edges_.push_back(edge);
    }
    thread_index_.emplace(street, t);
    threads_.push_back(std::move(thread));
  }

  std::vector<std::size_t> degree(entities_.size(), 0);
  for (const Edge& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  adj_offsets_.assign(entities_.size() + 1, 0);
  for (std::size_t i = 0; i < entities_.size(); ++i) adj_offsets_[i + 1] = adj_offsets_[i] + degree[i];
  adj_.resize(adj_offsets_.back());
  std::vector<std::size_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    adj_[fill[edges_[k].u]++] = Adjacent{edges_[k].v, k};
    adj_[fill[edges_[k].v]++] = Adjacent{edges_[k].u, k};
  }
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i]),
              adj_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i + 1]),
              [](const Adjacent& a, const Adjacent& b) { return a.to < b.to; });
  }
}

void CommGraph::check_entity(std::size_t id) const {
  if (id >= entities_.size()) throw std::out_of_range("unknown entity id " + std::to_string(id));
}

std::span<const Adjacent> CommGraph::neighbors(std::size_t id) const {
  check_entity(id);
  return {adj_.data() + adj_offsets_[id], adj_offsets_[id + 1] - adj_offsets_[id]};
}

std::optional<std::size_t> CommGraph::edge_between(std::size_t u, std::size_t v) const {
  for (const Adjacent& a : neighbors(u)) {
    if (a.to == v) return a.edge;
  }
  return std::nullopt;
}

std::optional<std::size_t> CommGraph::thread_of(const StreetId& street) const {
  const auto it = thread_index_.find(street);
  if (it == thread_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CommGraph::position_on(std::size_t id, std::size_t thread) const {
  const Entity& e = entity(id);
  for (int i = 0; i < e.slot_count; ++i) {
    if (e.slots[i].thread == thread) return e.slots[i].position;
  }
  return std::nullopt;
}

std::optional<std::size_t> CommGraph::relay_at(const StreetId& h, const StreetId& v) const {
  const auto it = relay_lookup_.find(std::make_pair(h, v));
  if (it == relay_lookup_.end()) return std::nullopt;
  return it->second;
}

long CommGraph::street_population(const StreetId& street) const {
  if (!street.valid()) throw std::invalid_argument("unknown street " + street_descriptor(street));
  const auto it = populations_.find(street);
  return it == populations_.end() ? 0 : it->second;
}

void CommGraph::write_edges_csv(std::ostream& out) const {
  out << "u_id,v_id,street,gap,power,energy\n";
  const auto old_precision = out.precision(12);
  for (const Edge& e : edges_) {
    out << e.u << ',' << e.v << ',' << street_descriptor(threads_[e.thread].street) << ',' << e.gap << ','
        << e.power << ',' << e.energy << '\n';
  }
  out.precision(old_precision);
}

CommGraph build_graph(const std::vector<MobileNode>& nodes, const std::vector<Relay>& relays,
                      const EnergyModel& model) {
  return CommGraph(nodes, relays, model);
}

long street_population(const CommGraph& graph, const StreetId& street) {
  return graph.street_population(street);
}

}  // namespace hfnet
