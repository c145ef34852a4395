#include "hfnet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

#include <spdlog/spdlog.h>

namespace hfnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Layer = std::vector<double>;

void check_pair(const CommGraph& g, std::size_t s, std::size_t t) {
  g.check_entity(s);
  g.check_entity(t);
  if (s == t) throw std::invalid_argument("source and target must differ");
}

Layer next_layer(const CommGraph& g, const Layer& prev) {
  Layer out(prev.size(), kInf);
  for (std::size_t u = 0; u < prev.size(); ++u) {
    if (prev[u] == kInf) continue;
    for (const Adjacent& a : g.neighbors(u)) {
      const double cand = prev[u] + g.edges()[a.edge].energy;
      if (cand < out[a.to]) out[a.to] = cand;
    }
  }
  return out;
}

Layer first_layer(const CommGraph& g, std::size_t s) {
  Layer l(g.entity_count(), kInf);
  l[s] = 0.0;
  return l;
}

bool layer_empty(const Layer& l) {
  return std::all_of(l.begin(), l.end(), [](double d) { return d == kInf; });
}

// Lexicographically smallest walk s -> t of exactly `h` hops whose every step
// is tight in the layered table.
std::vector<std::size_t> tight_walk(const CommGraph& g, const std::vector<Layer>& d, std::size_t s, std::size_t t,
                                    std::size_t h) {
  const std::size_t n = g.entity_count();
  std::vector<std::vector<char>> good(h + 1, std::vector<char>(n, 0));
  good[h][t] = 1;
  for (std::size_t j = h; j >= 1; --j) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!good[j][v]) continue;
      for (const Adjacent& a : g.neighbors(v)) {
        const std::size_t u = a.to;
        if (d[j - 1][u] != kInf && d[j - 1][u] + g.edges()[a.edge].energy == d[j][v]) good[j - 1][u] = 1;
      }
    }
  }
  std::vector<std::size_t> walk{s};
  std::size_t cur = s;
  for (std::size_t j = 1; j <= h; ++j) {
    bool moved = false;
    for (const Adjacent& a : g.neighbors(cur)) {
      if (good[j][a.to] && d[j - 1][cur] + g.edges()[a.edge].energy == d[j][a.to]) {
        cur = a.to;
        moved = true;
        break;
      }
    }
    if (!moved) throw std::logic_error("tight walk reconstruction failed");
    walk.push_back(cur);
  }
  return walk;
}

std::vector<std::size_t> remove_cycles(const std::vector<std::size_t>& walk) {
  std::vector<std::size_t> out;
  for (std::size_t v : walk) {
    const auto it = std::find(out.begin(), out.end(), v);
    if (it != out.end()) {
      out.erase(it + 1, out.end());
    } else {
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

PathResult path_from_vertices(const CommGraph& graph, std::vector<std::size_t> vertices) {
  if (vertices.empty()) throw std::invalid_argument("empty path");
  PathResult r;
  r.feasible = true;
  r.hops = static_cast<long>(vertices.size()) - 1;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    graph.check_entity(vertices[i]);
    if (graph.is_relay(vertices[i])) ++r.relay_count;
    if (i == 0) continue;
    const auto e = graph.edge_between(vertices[i - 1], vertices[i]);
    if (!e) throw std::invalid_argument("path vertices are not adjacent");
    const Edge& edge = graph.edges()[*e];
    r.accumulated_energy += edge.energy;
    r.max_power = std::max(r.max_power, edge.power);
  }
  r.vertices = std::move(vertices);
  return r;
}

std::vector<std::optional<double>> exact_hops_profile(const CommGraph& graph, std::size_t s, std::size_t t,
                                                      int k_max) {
  graph.check_entity(s);
  graph.check_entity(t);
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  std::vector<std::optional<double>> out;
  Layer cur = first_layer(graph, s);
  for (int h = 0; h <= k_max; ++h) {
    if (h > 0) cur = next_layer(graph, cur);
    out.push_back(cur[t] == kInf ? std::nullopt : std::optional<double>(cur[t]));
  }
  return out;
}

std::optional<double> min_energy_exact_hops(const CommGraph& graph, std::size_t s, std::size_t t, int k) {
  check_pair(graph, s, t);
  if (k < 1) throw std::invalid_argument("hop count k must be >= 1");
  return exact_hops_profile(graph, s, t, k).back();
}

PathResult min_energy_within_hops(const CommGraph& graph, std::size_t s, std::size_t t, int k) {
  check_pair(graph, s, t);
  if (k < 1) throw std::invalid_argument("hop budget k must be >= 1");
  // Shortest optimum never needs more than |V| - 1 hops.
  const std::size_t h_max = std::min<std::size_t>(static_cast<std::size_t>(k), graph.entity_count() - 1);
  std::vector<Layer> d{first_layer(graph, s)};
  double best = kInf;
  std::size_t best_h = 0;
  for (std::size_t h = 1; h <= h_max; ++h) {
    d.push_back(next_layer(graph, d.back()));
    if (d.back()[t] < best) {
      best = d.back()[t];
      best_h = h;
    }
    if (layer_empty(d.back())) break;
  }
  if (best == kInf) return PathResult{};
  d.resize(best_h + 1);
  return path_from_vertices(graph, remove_cycles(tight_walk(graph, d, s, t, best_h)));
}

PathResult min_energy_path(const CommGraph& graph, std::size_t s, std::size_t t) {
  check_pair(graph, s, t);
  const std::size_t n = graph.entity_count();
  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s] = 0.0;
  pq.emplace(0.0, s);
  while (!pq.empty()) {
    const auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u]) continue;
    for (const Adjacent& a : graph.neighbors(u)) {
      const double cand = du + graph.edges()[a.edge].energy;
      if (cand < dist[a.to]) {
        dist[a.to] = cand;
        pq.emplace(cand, a.to);
      }
    }
  }
  if (dist[t] == kInf) return PathResult{};

  // Fewest hops to t over tight edges, then smallest ids.
  auto tight = [&](std::size_t u, const Adjacent& a) {
    return dist[u] != kInf && dist[u] + graph.edges()[a.edge].energy == dist[a.to];
  };
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> hops_to_t(n, kUnset);
  std::queue<std::size_t> bfs;
  hops_to_t[t] = 0;
  bfs.push(t);
  while (!bfs.empty()) {
    const std::size_t v = bfs.front();
    bfs.pop();
    for (const Adjacent& a : graph.neighbors(v)) {
      const std::size_t u = a.to;
      if (hops_to_t[u] != kUnset) continue;
      if (tight(u, Adjacent{v, a.edge})) {
        hops_to_t[u] = hops_to_t[v] + 1;
        bfs.push(u);
      }
    }
  }
  std::vector<std::size_t> path{s};
  std::size_t cur = s;
  while (cur != t) {
    std::size_t next = kUnset;
    for (const Adjacent& a : graph.neighbors(cur)) {
      if (hops_to_t[a.to] != kUnset && hops_to_t[a.to] + 1 == hops_to_t[cur] && tight(cur, a)) {
        next = a.to;
        break;
      }
    }
    if (next == kUnset) throw std::logic_error("minimum-energy path reconstruction failed");
    cur = next;
    path.push_back(cur);
  }
  return path_from_vertices(graph, std::move(path));
}

PathResult min_hops_power_capped(const CommGraph& graph, std::size_t s, std::size_t t, double cap) {
  check_pair(graph, s, t);
  if (!(cap > 0.0)) throw std::invalid_argument("power cap must be > 0");
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  const std::size_t n = graph.entity_count();
  std::vector<std::size_t> hops_to_t(n, kUnset);
  std::queue<std::size_t> bfs;
  hops_to_t[t] = 0;
  bfs.push(t);
  while (!bfs.empty()) {
    const std::size_t v = bfs.front();
    bfs.pop();
    for (const Adjacent& a : graph.neighbors(v)) {
      if (hops_to_t[a.to] != kUnset || graph.edges()[a.edge].power > cap) continue;
      hops_to_t[a.to] = hops_to_t[v] + 1;
      bfs.push(a.to);
    }
  }
  if (hops_to_t[s] == kUnset) return PathResult{};
  std::vector<std::size_t> path{s};
  std::size_t cur = s;
  while (cur != t) {
    for (const Adjacent& a : graph.neighbors(cur)) {
      if (graph.edges()[a.edge].power <= cap && hops_to_t[a.to] + 1 == hops_to_t[cur]) {
        cur = a.to;
        break;
      }
    }
    path.push_back(cur);
  }
  return path_from_vertices(graph, std::move(path));
}

PathResult min_hops_energy_capped(const CommGraph& graph, std::size_t s, std::size_t t, double budget) {
  check_pair(graph, s, t);
  const PathResult cheapest = min_energy_path(graph, s, t);
  if (!cheapest.feasible || cheapest.accumulated_energy > budget) return PathResult{};
  std::vector<Layer> d{first_layer(graph, s)};
  const std::size_t h_max = static_cast<std::size_t>(cheapest.hops);
  for (std::size_t h = 1; h <= h_max; ++h) {
    d.push_back(next_layer(graph, d.back()));
    if (d.back()[t] <= budget) return path_from_vertices(graph, tight_walk(graph, d, s, t, h));
  }
  throw std::logic_error("energy-capped search missed the minimum-energy path");
}

bool ComponentResult::contains(std::size_t id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

ComponentResult giant_component(const CommGraph& graph, const ComponentSpec& spec) {
  if (spec.relay_limit && *spec.relay_limit < 0) throw std::invalid_argument("relay limit must be >= 0");
  const std::size_t n = graph.entity_count();
  const bool bottleneck = spec.kind == ComponentKind::kMaxPower;
  // State: (relays used, entity, slot of the street it was reached on). A
  // relay counts when the path changes street there.
  const int layers = spec.relay_limit ? *spec.relay_limit + 1 : 1;
  auto index = [&](int r, std::size_t v, int slot) {
    return (static_cast<std::size_t>(r) * n + v) * 2 + static_cast<std::size_t>(slot);
  };
  auto slot_of = [&](std::size_t v, std::size_t thread) {
    const Entity& e = graph.entity(v);
    return e.slot_count > 1 && e.slots[1].thread == thread ? 1 : 0;
  };

  std::vector<double> dist(static_cast<std::size_t>(layers) * n * 2, kInf);
  using Item = std::tuple<double, std::size_t, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (std::size_t v = 0; v < n; ++v) {
    const Entity& e = graph.entity(v);
    if (!e.on_central_cross) continue;
    for (int k = 0; k < e.slot_count; ++k) {
      if (graph.threads()[e.slots[k].thread].street.level != 0) continue;
      dist[index(0, v, k)] = 0.0;
      pq.emplace(0.0, v, 0, k);
    }
  }
  while (!pq.empty()) {
    const auto [du, u, r, slot] = pq.top();
    pq.pop();
    if (du > dist[index(r, u, slot)]) continue;
    const std::size_t here = graph.entity(u).slots[slot].thread;
    for (const Adjacent& a : graph.neighbors(u)) {
      const Edge& e = graph.edges()[a.edge];
      const int r2 = spec.relay_limit && e.thread != here ? r + 1 : r;
      if (r2 >= layers) continue;
      const double cand = bottleneck ? std::max(du, e.power) : du + e.energy;
      const int slot2 = slot_of(a.to, e.thread);
      double& best = dist[index(r2, a.to, slot2)];
      if (cand < best) {
        best = cand;
        pq.emplace(cand, a.to, r2, slot2);
      }
    }
  }

  ComponentResult out;
  out.optimum.assign(n, kInf);
  for (int r = 0; r < layers; ++r) {
    for (std::size_t v = 0; v < n; ++v) {
      out.optimum[v] = std::min({out.optimum[v], dist[index(r, v, 0)], dist[index(r, v, 1)]});
    }
  }
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    if (out.optimum[v] <= spec.budget) out.members.push_back(v);
  }
  return out;
}

int diverted_level(std::size_t n, double p_r, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (p_r >= 1.0) return 0;
  return static_cast<int>(std::lround(alpha * std::log(static_cast<double>(n)) / std::log(2.0 / (1.0 - p_r))));
}

int diverted_inner_level(std::size_t n, double p_r, double alpha) {
  const int x = diverted_level(n, p_r, alpha);
  const int full = diverted_level(n, p_r, 1.0);
  return std::max(x + 1, full);
}

namespace {

struct RelayStreets {
  StreetId h;
  StreetId v;
};

RelayStreets relay_streets(const CommGraph& g, std::size_t id) {
  const Entity& e = g.entity(id);
  RelayStreets out;
  for (int i = 0; i < e.slot_count; ++i) {
    const StreetId& st = g.threads()[e.slots[i].thread].street;
    (st.orientation == Orientation::kHorizontal ? out.h : out.v) = st;
  }
  return out;
}

// Relays on `thread` whose other street has the given level.
std::vector<std::size_t> relays_on(const CommGraph& g, std::size_t thread, int other_level) {
  std::vector<std::size_t> out;
  const Thread& th = g.threads()[thread];
  const bool horizontal = th.street.orientation == Orientation::kHorizontal;
  for (std::size_t id : th.members) {
    if (!g.is_relay(id)) continue;
    const RelayStreets rs = relay_streets(g, id);
    if ((horizontal ? rs.v.level : rs.h.level) == other_level) out.push_back(id);
  }
  return out;
}

// Appends the walk along `street` from `from` (already in path) to `to`.
bool walk_street(const CommGraph& g, const StreetId& street, std::size_t from, std::size_t to,
                 std::vector<std::size_t>& path) {
  const auto thread = g.thread_of(street);
  if (!thread) return false;
  const auto a = g.position_on(from, *thread);
  const auto b = g.position_on(to, *thread);
  if (!a || !b) return false;
  const Thread& th = g.threads()[*thread];
  if (*a <= *b) {
    for (std::size_t i = *a + 1; i <= *b; ++i) path.push_back(th.members[i]);
  } else {
    for (std::size_t i = *a; i-- > *b;) path.push_back(th.members[i]);
  }
  return true;
}

struct Leg {
  StreetId street;
  std::size_t to;
};

std::optional<std::vector<std::size_t>> chain(const CommGraph& g, std::size_t s, const std::vector<Leg>& legs) {
  std::vector<std::size_t> path{s};
  std::size_t cur = s;
  for (const Leg& leg : legs) {
    if (!walk_street(g, leg.street, cur, leg.to, path)) return std::nullopt;
    cur = leg.to;
  }
  return path;
}

bool better(const PathResult& a, const PathResult& b) {
  if (!b.feasible) return true;
  return std::tie(a.accumulated_energy, a.hops, a.vertices) < std::tie(b.accumulated_energy, b.hops, b.vertices);
}

PathResult diverted_forward(const CommGraph& g, std::size_t s, std::size_t t, const DivertedConfig& cfg,
                            std::size_t n, double p_r) {
  const StreetId h0{Orientation::kHorizontal, 0, 1};
  const StreetId v0{Orientation::kVertical, 0, 1};
  const int x = diverted_level(n, p_r, cfg.alpha);
  PathResult best;
  auto consider = [&](const std::vector<Leg>& legs) {
    auto vertices = chain(g, s, legs);
    if (!vertices) return;
    PathResult cand = path_from_vertices(g, std::move(*vertices));
    if (better(cand, best)) best = std::move(cand);
  };

  if (x == 0) {
    const auto centre = g.relay_at(h0, v0);
    if (centre) consider({{h0, *centre}, {v0, t}});
    return best;
  }
  const std::size_t th0 = *g.thread_of(h0);
  if (cfg.relays == 3) {
    for (std::size_t a : relays_on(g, th0, x)) {
      const StreetId va = relay_streets(g, a).v;
      for (std::size_t b : relays_on(g, *g.thread_of(va), x)) {
        const StreetId hb = relay_streets(g, b).h;
        const auto c = g.relay_at(hb, v0);
        if (!c) continue;
        consider({{h0, a}, {va, b}, {hb, *c}, {v0, t}});
      }
    }
    return best;
  }
  const int y = diverted_inner_level(n, p_r, cfg.alpha);
  for (std::size_t a : relays_on(g, th0, x)) {
    const StreetId va = relay_streets(g, a).v;
    for (std::size_t e : relays_on(g, *g.thread_of(va), y)) {
      const StreetId he = relay_streets(g, e).h;
      for (std::size_t f : relays_on(g, *g.thread_of(he), y)) {
        const StreetId vf = relay_streets(g, f).v;
        for (std::size_t gg : relays_on(g, *g.thread_of(vf), x)) {
          const StreetId hg = relay_streets(g, gg).h;
          const auto c = g.relay_at(hg, v0);
          if (!c) continue;
          consider({{h0, a}, {va, e}, {he, f}, {vf, gg}, {hg, *c}, {v0, t}});
        }
      }
    }
  }
  return best;
}

}  // namespace

PathResult diverted_path(const CommGraph& graph, std::size_t s, std::size_t t, const DivertedConfig& cfg,
                         std::size_t n, double p_r) {
  check_pair(graph, s, t);
  if (cfg.relays != 3 && cfg.relays != 5) throw std::invalid_argument("diverted path uses 3 or 5 relays");
  const auto th = graph.thread_of(StreetId{Orientation::kHorizontal, 0, 1});
  const auto tv = graph.thread_of(StreetId{Orientation::kVertical, 0, 1});
  auto on = [&](std::size_t id, const std::optional<std::size_t>& thread) {
    return thread && graph.position_on(id, *thread).has_value();
  };
  if (on(s, th) && on(t, tv)) return diverted_forward(graph, s, t, cfg, n, p_r);
  if (on(s, tv) && on(t, th)) {
    PathResult r = diverted_forward(graph, t, s, cfg, n, p_r);
    if (!r.feasible) return r;
    std::reverse(r.vertices.begin(), r.vertices.end());
    return path_from_vertices(graph, std::move(r.vertices));
  }
  throw std::invalid_argument("diverted path needs s and t on different arms of the central cross");
}

HopPolicy parse_hop_policy(const std::string& name) {
  if (name == "min-hops") return HopPolicy::kMinHops;
  if (name == "min-energy") return HopPolicy::kMinEnergy;
  if (name == "power-capped") return HopPolicy::kPowerCapped;
  if (name == "energy-capped") return HopPolicy::kEnergyCapped;
  throw std::invalid_argument("unknown hop policy: " + name);
}

const char* to_string(HopPolicy p) {
  switch (p) {
    case HopPolicy::kMinHops: return "min-hops";
    case HopPolicy::kMinEnergy: return "min-energy";
    case HopPolicy::kPowerCapped: return "power-capped";
    case HopPolicy::kEnergyCapped: return "energy-capped";
  }
  return "?";
}

ThroughputEstimate throughput_lower_bound(const CommGraph& graph, const ThroughputConfig& cfg, Rng& rng) {
  if (cfg.pair_samples < 1) throw std::invalid_argument("pair_samples must be >= 1");
  const ComponentResult comp = giant_component(graph, cfg.component);
  if (comp.size() < 2) throw std::invalid_argument("throughput needs a component of at least 2 nodes");

  const double budget = cfg.policy_budget > 0.0 ? cfg.policy_budget : cfg.component.budget;
  std::uniform_int_distribution<std::size_t> pick(0, comp.size() - 1);
  ThroughputEstimate out;
  out.component_size = comp.size();
  RunningStats hops;
  for (int i = 0; i < cfg.pair_samples; ++i) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    const std::size_t s = comp.members[a];
    const std::size_t t = comp.members[b];
    PathResult r;
    switch (cfg.policy) {
      case HopPolicy::kMinHops: r = min_hops_power_capped(graph, s, t, kInf); break;
      case HopPolicy::kMinEnergy: r = min_energy_path(graph, s, t); break;
      case HopPolicy::kPowerCapped: r = min_hops_power_capped(graph, s, t, budget); break;
      case HopPolicy::kEnergyCapped: r = min_hops_energy_capped(graph, s, t, budget); break;
    }
    ++out.pairs;
    if (!r.feasible) {
      ++out.infeasible;
      continue;
    }
    hops.add(static_cast<double>(r.hops));
  }
  if (hops.count() == 0) {
    spdlog::warn("throughput: no feasible pair among {} samples", out.pairs);
    return out;
  }
  const double n = static_cast<double>(graph.node_count());
  out.mean_hops = hops.mean();
  out.zeta = cfg.rate * n * n / (static_cast<double>(comp.size()) * out.mean_hops);
  out.stderr_ = out.zeta * hops.stderr_of_mean() / out.mean_hops;
  return out;
}

}  // namespace hfnet
