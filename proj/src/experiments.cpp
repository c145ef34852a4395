#include "hfnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hfnet/analytics.hpp"
#include "hfnet/csv.hpp"
#include "hfnet/rng.hpp"
#include "hfnet/sampling.hpp"

namespace hfnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream ids inside one map seed.
enum StreamId : std::uint64_t {
  kNodeStream = 0,
  kRelayStream = 1,
  kCurvePairs = 10,
  kCapPairs = 11,
  kDivertedPairs = 12,
  kHopPairs = 13,
  kThroughputPairs = 14,
};

const char* to_string(RhoRule r) { return r == RhoRule::kEqualN ? "equal-n" : "fixed"; }
const char* node_mode_name(NodeMode m) { return m == NodeMode::kExactN ? "exact-n" : "poisson-n"; }
const char* power_law_name(PowerLaw p) { return p == PowerLaw::kNominal ? "nominal" : "log-corrected"; }

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::pair<std::size_t, std::size_t>> random_node_pairs(std::size_t nodes, int count, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (nodes < 2) return out;
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  for (int i = 0; i < count; ++i) {
    const std::size_t s = pick(rng);
    std::size_t t = pick(rng);
    while (t == s) t = pick(rng);
    out.emplace_back(s, t);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> cross_pairs(const CommGraph& g, int count, Rng& rng) {
  const auto [h, v] = cross_arms(g);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (h.empty() || v.empty()) return out;
  std::uniform_int_distribution<std::size_t> ph(0, h.size() - 1), pv(0, v.size() - 1);
  for (int i = 0; i < count; ++i) {
    const std::size_t s = h[ph(rng)];
    out.emplace_back(s, v[pv(rng)]);
  }
  return out;
}

double mean_or_nan(const RunningStats& s) { return s.count() > 0 ? s.mean() : kNaN; }

double budget_scale(const SweepConfig& cfg, std::size_t n, double p_max) {
  return std::pow(static_cast<double>(n), (1.0 - cfg.delta) * (1.0 - cfg.alpha)) * p_max;
}

struct MapContext {
  std::size_t n;
  int replicate;
  std::uint64_t seed;
  GeneratedMap map;
  CommGraph graph;
};

MapContext make_context(const SweepConfig& cfg, std::size_t n, int replicate) {
  const std::uint64_t seed = map_seed(cfg.seed, n, replicate);
  GeneratedMap map = generate_map(cfg.map_params(n, seed));
  CommGraph graph = build_graph(map.nodes, map.relays, cfg.energy_model());
  return MapContext{n, replicate, seed, std::move(map), std::move(graph)};
}

void evaluate_map(const SweepConfig& cfg, const MapContext& ctx, std::optional<double> c_E,
                  std::vector<SweepRow>& rows) {
  const CommGraph& g = ctx.graph;
  const double p_max = g.p_max();
  auto emit = [&](const std::string& metric, double value) {
    rows.push_back(SweepRow{ctx.n, ctx.replicate, ctx.seed, metric, value});
  };

  if (cfg.wants("relay_count")) {
    emit("relay_count", static_cast<double>(ctx.map.relays.size()));
    emit("relay_count_expected", expected_relay_count(ctx.map.params.rho, ctx.map.params.p_r).value);
  }

  if (cfg.wants("min_energy_curve")) {
    Rng rng = make_stream(ctx.seed, kCurvePairs);
    std::vector<RunningStats> upto(static_cast<std::size_t>(cfg.k_max) + 1), exact(upto.size());
    long upto_violations = 0, exact_nonmonotone = 0;
    for (const auto& [s, t] : random_node_pairs(g.node_count(), cfg.pairs, rng)) {
      const auto profile = exact_hops_profile(g, s, t, cfg.k_max);
      double best = std::numeric_limits<double>::infinity();
      double prev_upto = best;
      std::optional<double> prev_exact;
      bool nonmonotone = false;
      for (int k = 1; k <= cfg.k_max; ++k) {
        const auto& e = profile[static_cast<std::size_t>(k)];
        if (e) {
          exact[static_cast<std::size_t>(k)].add(*e / p_max);
          if (prev_exact && *e > *prev_exact) nonmonotone = true;
          prev_exact = e;
          best = std::min(best, *e);
        }
        if (std::isfinite(best)) upto[static_cast<std::size_t>(k)].add(best / p_max);
        if (best > prev_upto) ++upto_violations;
        prev_upto = best;
      }
      exact_nonmonotone += nonmonotone ? 1 : 0;
    }
    for (int k = 1; k <= cfg.k_max; ++k) {
      emit(fmt::format("min_energy_upto_k{}", k), mean_or_nan(upto[static_cast<std::size_t>(k)]));
      emit(fmt::format("exact_energy_k{}", k), mean_or_nan(exact[static_cast<std::size_t>(k)]));
    }
    emit("upto_monotone_violations", static_cast<double>(upto_violations));
    emit("exact_nonmonotone_pairs", static_cast<double>(exact_nonmonotone));
  }

  if (cfg.wants("power_cap_curve")) {
    Rng rng = make_stream(ctx.seed, kCapPairs);
    const std::size_t steps = static_cast<std::size_t>(cfg.power_cap_steps);
    std::vector<RunningStats> hops(steps);
    std::vector<long> feasible(steps, 0);
    long violations = 0;
    const auto pairs = random_node_pairs(g.node_count(), cfg.pairs, rng);
    for (const auto& [s, t] : pairs) {
      std::optional<long> looser;  // hops at the previous (larger) cap
      for (std::size_t j = 0; j < steps; ++j) {
        const PathResult r = min_hops_power_capped(g, s, t, p_max * std::pow(10.0, -static_cast<double>(j)));
        if (r.feasible) {
          hops[j].add(static_cast<double>(r.hops));
          ++feasible[j];
          if (looser && r.hops < *looser) ++violations;
          if (!looser && j > 0) ++violations;  // feasible under a tighter cap only
        }
        looser = r.feasible ? std::optional<long>(r.hops) : std::nullopt;
        if (!r.feasible) break;
      }
    }
    for (std::size_t j = 0; j < steps; ++j) {
      emit(fmt::format("hops_cap_j{}", j), mean_or_nan(hops[j]));
      emit(fmt::format("feasible_cap_j{}", j),
           pairs.empty() ? kNaN : static_cast<double>(feasible[j]) / static_cast<double>(pairs.size()));
    }
    emit("cap_monotone_violations", static_cast<double>(violations));
  }

  if (cfg.wants("giant_fraction")) {
    const double budget = std::pow(static_cast<double>(ctx.n), -cfg.gamma) * p_max;
    const double n = static_cast<double>(g.node_count());
    emit("giant_G1_fraction",
         static_cast<double>(giant_component(g, ComponentSpec::energy_relays(budget, cfg.relay_limit)).size()) / n);
    emit("giant_Gprime1_fraction",
         static_cast<double>(giant_component(g, ComponentSpec::power_relays(budget, cfg.relay_limit)).size()) / n);
    emit("giant_G_fraction", static_cast<double>(giant_component(g, ComponentSpec::energy(budget)).size()) / n);
  }

  if (cfg.wants("diverted_scaling")) {
    Rng rng = make_stream(ctx.seed, kDivertedPairs);
    RunningStats energy, hops;
    long infeasible = 0;
    const auto pairs = cross_pairs(g, cfg.pairs, rng);
    const DivertedConfig dc{cfg.diverted_relays, cfg.alpha};
    for (const auto& [s, t] : pairs) {
      const PathResult r = diverted_path(g, s, t, dc, ctx.n, ctx.map.params.p_r);
      if (!r.feasible) {
        ++infeasible;
        continue;
      }
      energy.add(r.accumulated_energy / p_max);
      hops.add(static_cast<double>(r.hops));
    }
    emit("diverted_energy", mean_or_nan(energy));
    emit("diverted_hops", mean_or_nan(hops));
    emit("diverted_infeasible", static_cast<double>(infeasible));
    emit("diverted_pairs", static_cast<double>(pairs.size()));
  }

  if (cfg.wants("hops_scaling") && c_E) {
    Rng rng = make_stream(ctx.seed, kHopPairs);
    const double budget = *c_E * budget_scale(cfg, ctx.n, p_max);
    RunningStats hops;
    long infeasible = 0;
    const auto pairs = cross_pairs(g, cfg.pairs, rng);
    for (const auto& [s, t] : pairs) {
      const PathResult r = min_hops_energy_capped(g, s, t, budget);
      if (!r.feasible) {
        ++infeasible;
        continue;
      }
      hops.add(static_cast<double>(r.hops));
    }
    emit("hops_D_n", mean_or_nan(hops));
    emit("hops_infeasible", static_cast<double>(infeasible));
    emit("hops_pairs", static_cast<double>(pairs.size()));
  }

  if (cfg.wants("throughput")) {
    Rng rng = make_stream(ctx.seed, kThroughputPairs);
    const double cap = std::pow(static_cast<double>(ctx.n), -cfg.gamma) * p_max;
    ThroughputConfig tc;
    tc.rate = cfg.rate;
    tc.pair_samples = cfg.pairs;
    tc.component = ComponentSpec::power(cap);
    tc.policy = cfg.throughput_policy;
    tc.policy_budget = cap;
    try {
      const ThroughputEstimate est = throughput_lower_bound(g, tc, rng);
      emit("throughput_zeta", est.mean_hops > 0.0 ? est.zeta : kNaN);
      emit("throughput_stderr", est.mean_hops > 0.0 ? est.stderr_ : kNaN);
      emit("throughput_mean_hops", est.mean_hops > 0.0 ? est.mean_hops : kNaN);
      emit("throughput_component", static_cast<double>(est.component_size));
      emit("throughput_infeasible", static_cast<double>(est.infeasible));
    } catch (const std::invalid_argument& e) {
      spdlog::debug("throughput at n={} replicate {}: {}", ctx.n, ctx.replicate, e.what());
      emit("throughput_zeta", kNaN);
      emit("throughput_component", 0.0);
    }
  }
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::runtime_error("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double calibrate_c_E(const SweepConfig& cfg) {
  const std::size_t n = cfg.n_grid.front();
  std::vector<std::vector<double>> ratios(static_cast<std::size_t>(cfg.replicates));
  parallel_for(ratios.size(), cfg.threads, [&](std::size_t r) {
    const MapContext ctx = make_context(cfg, n, static_cast<int>(r));
    Rng rng = make_stream(ctx.seed, kHopPairs);
    const double scale = budget_scale(cfg, n, ctx.graph.p_max());
    for (const auto& [s, t] : cross_pairs(ctx.graph, cfg.pairs, rng)) {
      const PathResult p = min_energy_path(ctx.graph, s, t);
      ratios[r].push_back(p.feasible ? p.accumulated_energy / scale : std::numeric_limits<double>::infinity());
    }
  });
  std::vector<double> all;
  for (const auto& v : ratios) all.insert(all.end(), v.begin(), v.end());
  const double c = quantile(all, cfg.calibration_quantile);
  if (!std::isfinite(c)) throw std::runtime_error("c_E calibration: too many disconnected pairs at the smallest n");
  return c;
}

SlopeVerdict slope_for(const SweepResult& res, const std::string& metric, std::optional<double> expected,
                       double tolerance) {
  SlopeVerdict v;
  v.metric = metric;
  v.expected = expected;
  v.tolerance = tolerance;
  v.means = res.means(metric);
  std::vector<double> xs, ys;
  for (const auto& [x, y] : v.means) {
    xs.push_back(x);
    ys.push_back(y);
  }
  try {
    v.fit = loglog_slope(xs, ys);
  } catch (const std::invalid_argument& e) {
    spdlog::warn("slope for {}: {}", metric, e.what());
    v.verdict = expected ? "fail" : "n/a";
    return v;
  }
  if (expected) {
    v.verdict = std::abs(v.fit.slope - *expected) <= tolerance ? "pass" : "fail";
  } else {
    v.verdict = "n/a";
  }
  return v;
}

}  // namespace

bool SweepConfig::wants(const std::string& metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

MapParams SweepConfig::map_params(std::size_t n, std::uint64_t seed_for_map) const {
  MapParams p = MapParams::from_dimensions(n, d_F, rho_rule == RhoRule::kEqualN ? static_cast<double>(n) : rho, d_r);
  p.node_mode = node_mode;
  p.max_level = max_level;
  p.map_length = map_length;
  p.seed = seed_for_map;
  p.validate();
  return p;
}

EnergyModel SweepConfig::energy_model() const {
  EnergyModel m;
  m.kind = energy;
  m.delta = delta;
  m.map_length = map_length;
  m.power_law = power_law;
  m.count_relays_in_population = count_relays_in_population;
  m.validate();
  return m;
}

void SweepConfig::validate() const {
  if (n_grid.empty()) throw InvalidParameter("n_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw InvalidParameter("n_grid values must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw InvalidParameter("n_grid must be strictly ascending");
  }
  if (replicates < 1) throw InvalidParameter("replicates must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must lie in (0, 1]");
  if (pairs < 1 || k_max < 1 || power_cap_steps < 1) throw InvalidParameter("pairs, k_max and power_cap_steps must be >= 1");
  if (diverted_relays != 3 && diverted_relays != 5) throw InvalidParameter("diverted_relays must be 3 or 5");
  if (relay_limit < 0) throw InvalidParameter("relay_limit must be >= 0");
  if (!(calibration_quantile > 0.0 && calibration_quantile <= 1.0)) {
    throw InvalidParameter("calibration_quantile must lie in (0, 1]");
  }
  for (const auto& m : metrics) {
    if (std::find(kAllMetrics.begin(), kAllMetrics.end(), m) == kAllMetrics.end()) {
      throw InvalidParameter("unknown metric: " + m);
    }
  }
  map_params(n_grid.front(), seed);
  energy_model();
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "n_grid", "rho_rule", "rho", "replicates", "d_F", "d_r", "delta", "alpha", "gamma", "c_E", "v_E",
      "metrics", "seed", "pairs", "k_max", "power_cap_steps", "diverted_relays", "relay_limit", "rate",
      "throughput_policy", "calibration_quantile", "tolerance", "diverted_tolerance", "max_level", "node_mode",
      "energy", "power_law", "count_relays_in_population", "map_length", "threads"};
  if (!j.is_object()) throw std::invalid_argument("sweep config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown sweep config key: " + key);
  }
  SweepConfig c;
  c.n_grid = j.value("n_grid", c.n_grid);
  const std::string rule = j.value("rho_rule", std::string(to_string(c.rho_rule)));
  if (rule == "equal-n") {
    c.rho_rule = RhoRule::kEqualN;
  } else if (rule == "fixed") {
    c.rho_rule = RhoRule::kFixed;
  } else {
    throw std::invalid_argument("rho_rule must be equal-n or fixed");
  }
  c.rho = j.value("rho", c.rho);
  c.replicates = j.value("replicates", c.replicates);
  c.d_F = j.value("d_F", c.d_F);
  c.d_r = j.value("d_r", c.d_r);
  c.delta = j.value("delta", c.delta);
  c.alpha = j.value("alpha", c.alpha);
  c.gamma = j.value("gamma", c.gamma);
  c.c_E = j.value("c_E", c.c_E);
  c.v_E = j.value("v_E", c.v_E);
  c.metrics = j.value("metrics", c.metrics);
  c.seed = j.value("seed", c.seed);
  c.pairs = j.value("pairs", c.pairs);
  c.k_max = j.value("k_max", c.k_max);
  c.power_cap_steps = j.value("power_cap_steps", c.power_cap_steps);
  c.diverted_relays = j.value("diverted_relays", c.diverted_relays);
  c.relay_limit = j.value("relay_limit", c.relay_limit);
  c.rate = j.value("rate", c.rate);
  c.throughput_policy = parse_hop_policy(j.value("throughput_policy", std::string(to_string(c.throughput_policy))));
  c.calibration_quantile = j.value("calibration_quantile", c.calibration_quantile);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.diverted_tolerance = j.value("diverted_tolerance", c.diverted_tolerance);
  c.max_level = j.value("max_level", c.max_level);
  const std::string mode = j.value("node_mode", std::string(node_mode_name(c.node_mode)));
  if (mode == "exact-n") {
    c.node_mode = NodeMode::kExactN;
  } else if (mode == "poisson-n") {
    c.node_mode = NodeMode::kPoissonN;
  } else {
    throw std::invalid_argument("node_mode must be exact-n or poisson-n");
  }
  c.energy = parse_energy_kind(j.value("energy", std::string(to_string(c.energy))));
  const std::string law = j.value("power_law", std::string(power_law_name(c.power_law)));
  if (law == "nominal") {
    c.power_law = PowerLaw::kNominal;
  } else if (law == "log-corrected") {
    c.power_law = PowerLaw::kLogCorrected;
  } else {
    throw std::invalid_argument("power_law must be nominal or log-corrected");
  }
  c.count_relays_in_population = j.value("count_relays_in_population", c.count_relays_in_population);
  c.map_length = j.value("map_length", c.map_length);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

nlohmann::json to_json(const SweepConfig& c) {
  return nlohmann::json{{"n_grid", c.n_grid},
                        {"rho_rule", to_string(c.rho_rule)},
                        {"rho", c.rho},
                        {"replicates", c.replicates},
                        {"d_F", c.d_F},
                        {"d_r", c.d_r},
                        {"delta", c.delta},
                        {"alpha", c.alpha},
                        {"gamma", c.gamma},
                        {"c_E", c.c_E},
                        {"v_E", c.v_E},
                        {"metrics", c.metrics},
                        {"seed", c.seed},
                        {"pairs", c.pairs},
                        {"k_max", c.k_max},
                        {"power_cap_steps", c.power_cap_steps},
                        {"diverted_relays", c.diverted_relays},
                        {"relay_limit", c.relay_limit},
                        {"rate", c.rate},
                        {"throughput_policy", to_string(c.throughput_policy)},
                        {"calibration_quantile", c.calibration_quantile},
                        {"tolerance", c.tolerance},
                        {"diverted_tolerance", c.diverted_tolerance},
                        {"max_level", c.max_level},
                        {"node_mode", node_mode_name(c.node_mode)},
                        {"energy", to_string(c.energy)},
                        {"power_law", power_law_name(c.power_law)},
                        {"count_relays_in_population", c.count_relays_in_population},
                        {"map_length", c.map_length},
                        {"threads", c.threads}};
}

std::uint64_t map_seed(std::uint64_t master, std::size_t n, int replicate) {
  return stream_seed(master, stream_key(n, static_cast<std::uint64_t>(replicate)));
}

GeneratedMap generate_map(const MapParams& params) {
  params.validate();
  GeneratedMap m;
  m.params = params;
  Rng node_rng = make_stream(params.seed, kNodeStream);
  Rng relay_rng = make_stream(params.seed, kRelayStream);
  m.nodes = sample_nodes(params, node_rng);
  m.relays = sample_relays(params, relay_rng);
  return m;
}

bool SweepResult::all_pass() const {
  return std::none_of(slopes.begin(), slopes.end(), [](const SlopeVerdict& s) { return s.verdict == "fail"; });
}

std::vector<std::pair<double, double>> SweepResult::means(const std::string& metric) const {
  std::map<std::size_t, RunningStats> by_n;
  for (const SweepRow& r : rows) {
    if (r.metric == metric && !std::isnan(r.value)) by_n[r.n].add(r.value);
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [n, s] : by_n) out.emplace_back(static_cast<double>(n), s.mean());
  return out;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult res;
  res.config = cfg;
  if (cfg.wants("hops_scaling")) {
    if (cfg.d_F <= 3.0 || cfg.d_r >= cfg.d_F - 1.0) {
      spdlog::warn("hops_scaling with d_F = {} and d_r = {} lies outside d_F > 3, d_r < d_F - 1", cfg.d_F, cfg.d_r);
    }
    res.c_E = cfg.c_E > 0.0 ? cfg.c_E : calibrate_c_E(cfg);
    spdlog::info("energy budget constant c_E = {:.6g}", *res.c_E);
  }

  const std::size_t per_n = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<SweepRow>> chunks(cfg.n_grid.size() * per_n);
  parallel_for(chunks.size(), cfg.threads, [&](std::size_t task) {
    const std::size_t n = cfg.n_grid[task / per_n];
    const int r = static_cast<int>(task % per_n);
    const MapContext ctx = make_context(cfg, n, r);
    evaluate_map(cfg, ctx, res.c_E, chunks[task]);
  });
  for (auto& c : chunks) res.rows.insert(res.rows.end(), c.begin(), c.end());
  std::sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.n, a.replicate, a.metric) < std::tie(b.n, b.replicate, b.metric);
  });

  if (cfg.wants("relay_count")) res.slopes.push_back(slope_for(res, "relay_count", std::nullopt, 0.0));
  if (cfg.wants("hops_scaling")) {
    SlopeVerdict v = slope_for(res, "hops_D_n", 1.0 - cfg.alpha / (cfg.d_F - 1.0), cfg.tolerance);
    if (v.verdict == "pass" && !(v.fit.slope > 0.0 && v.fit.slope < 1.0)) v.verdict = "fail";
    res.slopes.push_back(std::move(v));
  }
  if (cfg.wants("diverted_scaling")) {
    res.slopes.push_back(
        slope_for(res, "diverted_energy", (1.0 - cfg.delta) * (1.0 - cfg.alpha), cfg.diverted_tolerance));
  }
  if (cfg.wants("giant_fraction")) {
    for (const char* m : {"giant_G1_fraction", "giant_Gprime1_fraction"}) {
      SlopeVerdict v = slope_for(res, m, std::nullopt, 0.0);
      bool nondecreasing = true;
      for (std::size_t i = 1; i < v.means.size(); ++i) nondecreasing &= v.means[i].second >= v.means[i - 1].second;
      v.verdict = nondecreasing ? "pass" : "fail";
      res.slopes.push_back(std::move(v));
    }
  }
  if (cfg.wants("throughput")) {
    SlopeVerdict v = slope_for(res, "throughput_zeta", std::nullopt, 0.0);
    if (v.verdict == "n/a" && v.fit.points_used >= 3) v.verdict = v.fit.slope > 0.0 ? "pass" : "fail";
    res.slopes.push_back(std::move(v));
  }
  return res;
}

void write_nodes_csv(const std::vector<MobileNode>& nodes, std::ostream& out) {
  write_csv_row(out, {"id", "orientation", "level", "index", "pos", "x", "y"});
  for (const MobileNode& m : nodes) {
    const Point p = m.point();
    write_csv_row(out, {std::to_string(m.id), to_string(m.street.orientation), std::to_string(m.street.level),
                        std::to_string(m.street.index), format_number(m.pos()), format_number(p.x),
                        format_number(p.y)});
  }
}

void write_relays_csv(const std::vector<Relay>& relays, std::ostream& out) {
  write_csv_row(out, {"id", "h_level", "h_index", "v_level", "v_index", "x", "y"});
  for (const Relay& r : relays) {
    const Crossing& c = r.crossing;
    write_csv_row(out, {std::to_string(r.id), std::to_string(c.h_street.level), std::to_string(c.h_street.index),
                        std::to_string(c.v_street.level), std::to_string(c.v_street.index), format_number(c.point.x),
                        format_number(c.point.y)});
  }
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  write_csv_row(out, {"n", "replicate", "seed", "metric", "value"});
  for (const SweepRow& r : result.rows) {
    write_csv_row(out, {std::to_string(r.n), std::to_string(r.replicate), std::to_string(r.seed), r.metric,
                        format_number(r.value)});
  }
}

nlohmann::json slopes_json(const SweepResult& result) {
  nlohmann::json j = nlohmann::json::object();
  for (const SlopeVerdict& v : result.slopes) {
    nlohmann::json e{{"slope", v.fit.slope},
                     {"stderr", v.fit.stderr_},
                     {"R2", v.fit.r_squared},
                     {"points", v.fit.points_used},
                     {"verdict", v.verdict}};
    e["expected"] = v.expected ? nlohmann::json(*v.expected) : nlohmann::json();
    e["tolerance"] = v.expected ? nlohmann::json(v.tolerance) : nlohmann::json();
    nlohmann::json means = nlohmann::json::array();
    for (const auto& [n, m] : v.means) means.push_back({n, m});
    e["means"] = means;
    j[v.metric] = e;
  }
  if (result.c_E) j["c_E"] = *result.c_E;
  return j;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> cross_arms(const CommGraph& graph) {
  std::vector<std::size_t> h, v;
  for (std::size_t id = 0; id < graph.node_count(); ++id) {
    const Entity& e = graph.entity(id);
    if (!e.on_central_cross) continue;
    const StreetId& st = graph.threads()[e.slots[0].thread].street;
    (st.orientation == Orientation::kHorizontal ? h : v).push_back(id);
  }
  return {h, v};
}

std::vector<PairRow> simulate_pairs(const CommGraph& graph, const PairQueryConfig& cfg, Rng& rng) {
  if (cfg.pairs < 1 || cfg.k_max < 1) throw std::invalid_argument("pairs and k_max must be >= 1");
  const double p_max = graph.p_max();
  std::vector<PairRow> rows;
  int id = 0;
  for (const auto& [s, t] : random_node_pairs(graph.node_count(), cfg.pairs, rng)) {
    if (cfg.constraint == PairConstraint::kEnergy) {
      const auto profile = exact_hops_profile(graph, s, t, cfg.k_max);
      for (int k = 1; k <= cfg.k_max; ++k) {
        const PathResult r = min_energy_within_hops(graph, s, t, k);
        PairRow row{id, s, t, static_cast<double>(k), profile[static_cast<std::size_t>(k)], std::nullopt, 0, 0.0, false};
        if (r.feasible) {
          row.upto_energy = r.accumulated_energy;
          row.hops = r.hops;
          row.max_power = r.max_power;
          row.feasible = cfg.budget <= 0.0 || r.accumulated_energy <= cfg.budget * p_max;
        }
        rows.push_back(row);
      }
    } else {
      std::vector<double> caps;
      if (cfg.budget > 0.0) {
        caps.push_back(cfg.budget * p_max);
      } else {
        for (int j = 0; j < cfg.power_cap_steps; ++j) caps.push_back(p_max * std::pow(10.0, -j));
      }
      for (double cap : caps) {
        const PathResult r = min_hops_power_capped(graph, s, t, cap);
        PairRow row{id, s, t, cap, std::nullopt, std::nullopt, 0, 0.0, r.feasible};
        if (r.feasible) {
          row.upto_energy = r.accumulated_energy;
          row.hops = r.hops;
          row.max_power = r.max_power;
        }
        rows.push_back(row);
      }
    }
    ++id;
  }
  return rows;
}

void write_pairs_csv(const std::vector<PairRow>& rows, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  write_csv_row(out, {"pair_id", "s", "t", "k_or_M", "exact_energy", "upto_energy", "hops", "max_power", "feasible"});
  for (const PairRow& r : rows) {
    write_csv_row(out, {std::to_string(r.pair_id), std::to_string(r.s), std::to_string(r.t), format_number(r.k_or_m),
                        opt(r.exact_energy), opt(r.upto_energy), r.feasible ? std::to_string(r.hops) : std::string(),
                        r.feasible ? format_number(r.max_power) : std::string(), r.feasible ? "1" : "0"});
  }
}

const std::vector<PairPreset>& pair_presets() {
  static const std::vector<PairPreset> presets = {
      {"df4.3-dr3.3-n800", 4.3, 3.3, 800},
      {"df4.3-dr3.3-n1000", 4.3, 3.3, 1000},
      {"df3.3-dr2.3-n800", 3.3, 2.3, 800},
      {"df3.3-dr2.3-n1000", 3.3, 2.3, 1000},
  };
  return presets;
}

}  // namespace hfnet
