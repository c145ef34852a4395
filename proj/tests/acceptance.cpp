// End-to-end acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,4] [--expect-fail 5,11] [--seed S]
//
// Exit status is 1 when a criterion fails that is not listed in --expect-fail,
// or when a listed one unexpectedly passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hfnet/analytics.hpp"
#include "hfnet/comm_graph.hpp"
#include "hfnet/experiments.hpp"
#include "hfnet/fitting.hpp"
#include "hfnet/routing.hpp"
#include "oracles.hpp"

using namespace hfnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::uint64_t g_seed = 20240611;

const std::vector<std::size_t> kGrid = {200, 400, 800, 1600, 3200};

std::string join(const std::vector<std::string>& parts, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Random node pairs joined by some path.
std::vector<std::pair<std::size_t, std::size_t>> connected_pairs(const CommGraph& g, int count, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::uniform_int_distribution<std::size_t> pick(0, g.node_count() - 1);
  for (int tries = 0; static_cast<int>(out.size()) < count && tries < 200 * count; ++tries) {
    const std::size_t s = pick(rng), t = pick(rng);
    if (s == t || !min_energy_path(g, s, t).feasible) continue;
    out.emplace_back(s, t);
  }
  return out;
}

CommGraph sample_graph(std::size_t n, double d_F, double d_r, const EnergyModel& model, std::uint64_t stream) {
  auto params = MapParams::from_dimensions(n, d_F, static_cast<double>(n), d_r);
  params.seed = stream_seed(g_seed, stream);
  const GeneratedMap map = generate_map(params);
  return build_graph(map.nodes, map.relays, model);
}

Outcome relay_count_reproduction() {
  const double p_r = derive_pr_from_dr(3.0);
  bool ok = true;
  std::vector<std::string> parts;
  for (std::size_t n : {200u, 300u, 400u, 500u, 800u, 1200u, 1600u}) {
    auto params = MapParams::from_dimensions(n, 3.0, static_cast<double>(n), 3.0);
    RunningStats stats;
    for (int r = 0; r < 100; ++r) {
      Rng rng = make_stream(g_seed, stream_key(1000 + n, static_cast<std::uint64_t>(r)));
      stats.add(static_cast<double>(sample_relays(params, rng).size()));
    }
    const double expect = expected_relay_count(static_cast<double>(n), p_r, 60).value;
    const double z = (stats.mean() - expect) / stats.stderr_of_mean();
    ok &= std::abs(z) <= 3.0;
    parts.push_back(fmt::format("n={} mc={:.1f} R={:.1f} z={:+.2f}", n, stats.mean(), expect, z));
  }
  double worst = 0.0;
  for (std::size_t n : {200u, 1600u}) {
    const double a = expected_relay_count(static_cast<double>(n), p_r, 60).value;
    const double b = expected_relay_count(static_cast<double>(n), p_r, 40).value;
    worst = std::max(worst, std::abs(a - b) / a);
  }
  ok &= worst < 0.01;
  parts.push_back(fmt::format("k60 vs k40 rel diff {:.2e}", worst));
  return {ok, join(parts)};
}

Outcome energy_hop_monotonicity() {
  long pairs = 0, violations = 0, nonmonotone = 0;
  std::vector<std::string> parts;
  for (double delta : {2.0, 3.0, 4.0}) {
    EnergyModel model;
    model.delta = delta;
    const CommGraph g = sample_graph(800, 4.33, 3.0, model, stream_key(2, static_cast<std::uint64_t>(delta)));
    Rng rng = make_stream(g_seed, stream_key(20, static_cast<std::uint64_t>(delta)));
    long local_nonmono = 0;
    for (const auto& [s, t] : connected_pairs(g, 100, rng)) {
      ++pairs;
      double prev = oracle::kInf;
      for (int k = 1; k <= 30; ++k) {
        const PathResult r = min_energy_within_hops(g, s, t, k);
        const double e = r.feasible ? r.accumulated_energy : oracle::kInf;
        if (e > prev) ++violations;
        prev = e;
      }
      const auto profile = exact_hops_profile(g, s, t, 30);
      bool up = false, down = false;
      std::optional<double> last;
      for (std::size_t k = 1; k < profile.size(); ++k) {
        if (!profile[k]) continue;
        if (last && *profile[k] > *last) up = true;
        if (last && *profile[k] < *last) down = true;
        last = profile[k];
      }
      local_nonmono += up && down ? 1 : 0;
    }
    nonmonotone += local_nonmono;
    parts.push_back(fmt::format("delta={} non-monotone exact-k pairs={}", delta, local_nonmono));
  }
  parts.insert(parts.begin(), fmt::format("pairs={} within-k violations={}", pairs, violations));
  return {pairs == 300 && violations == 0 && nonmonotone > 0, join(parts)};
}

Outcome power_cap_tradeoff() {
  long feasible_pairs = 0, violations = 0;
  std::vector<std::string> parts;
  for (auto [d_F, d_r] : {std::pair{3.3, 2.3}, std::pair{4.33, 3.0}}) {
    for (std::size_t n : {500u, 800u}) {
      const CommGraph g =
          sample_graph(n, d_F, d_r, EnergyModel{}, stream_key(3, static_cast<std::uint64_t>(d_F * 100) * 10000 + n));
      Rng rng = make_stream(g_seed, stream_key(30, n + static_cast<std::uint64_t>(d_F * 100)));
      long local = 0;
      for (const auto& [s, t] : connected_pairs(g, 100, rng)) {
        std::optional<long> tighter;  // hops under the previous, smaller cap
        bool seen = false;
        for (int j = 24; j >= 0; --j) {
          const double cap = g.p_max() * std::pow(10.0, -j / 4.0);
          const PathResult r = min_hops_power_capped(g, s, t, cap);
          if (seen && !r.feasible) ++violations;
          if (r.feasible && tighter && r.hops > *tighter) ++violations;
          if (r.feasible) {
            seen = true;
            tighter = r.hops;
          }
        }
        local += seen ? 1 : 0;
      }
      feasible_pairs += local;
      parts.push_back(fmt::format("dF={} n={} feasible pairs={}", d_F, n, local));
    }
  }
  parts.insert(parts.begin(), fmt::format("violations={}", violations));
  return {violations == 0 && feasible_pairs > 0, join(parts)};
}

SweepConfig scaling_config(double d_F, std::vector<std::string> metrics) {
  SweepConfig cfg;
  cfg.n_grid = kGrid;
  cfg.replicates = 20;
  cfg.d_F = d_F;
  cfg.d_r = 3.0;
  cfg.delta = 2.0;
  cfg.alpha = 0.5;
  cfg.pairs = 50;
  cfg.metrics = std::move(metrics);
  cfg.seed = g_seed;
  return cfg;
}

const SlopeVerdict& verdict_of(const SweepResult& r, const std::string& metric) {
  for (const auto& v : r.slopes) {
    if (v.metric == metric) return v;
  }
  throw std::runtime_error("sweep produced no verdict for " + metric);
}

std::string means_text(const SlopeVerdict& v) {
  std::vector<std::string> parts;
  for (const auto& [n, m] : v.means) parts.push_back(fmt::format("{:.0f}:{:.4g}", n, m));
  return join(parts, " ");
}

std::optional<SweepResult> g_base_sweep;

const SweepResult& base_sweep() {
  if (!g_base_sweep) g_base_sweep = run_sweep(scaling_config(4.33, {"hops_scaling", "diverted_scaling"}));
  return *g_base_sweep;
}

Outcome scaling_exponent() {
  const SweepResult& base = base_sweep();
  const SlopeVerdict& v = verdict_of(base, "hops_D_n");
  const double expected = *v.expected;
  const bool in_band = v.fit.slope > 0.0 && v.fit.slope < 1.0 && std::abs(v.fit.slope - expected) <= 0.25;

  const SweepResult five = run_sweep(scaling_config(5.0, {"hops_scaling"}));
  const SlopeVerdict& w = verdict_of(five, "hops_D_n");
  const bool decreases = w.fit.slope < v.fit.slope;
  return {in_band && decreases,
          fmt::format("dF=4.33 slope={:.3f}+-{:.3f} expected {:.3f}+-0.25 c_E={:.4g} means[{}]; dF=5 slope={:.3f} "
                      "({}, formula gives {:.3f})",
                      v.fit.slope, v.fit.stderr_, expected, base.c_E.value_or(0.0), means_text(v), w.fit.slope,
                      decreases ? "decreases" : "does not decrease", 1.0 - 0.5 / 4.0)};
}

Outcome diverted_scaling() {
  const SlopeVerdict& v = verdict_of(base_sweep(), "diverted_energy");
  const double expected = *v.expected;
  return {std::abs(v.fit.slope - expected) <= 0.3,
          fmt::format("slope={:.3f}+-{:.3f} expected {:.3f}+-0.3 means/P_max[{}]", v.fit.slope, v.fit.stderr_,
                      expected, means_text(v))};
}

Outcome campbell_mecke() {
  auto params = MapParams::from_dimensions(100, 3.0, 100.0, 3.0);
  params.seed = stream_seed(g_seed, 6);
  bool ok = true;
  std::vector<std::string> parts;
  for (auto p : {PointProcess::kUsers, PointProcess::kAuxiliary, PointProcess::kRelays}) {
    for (auto f : {TestFunction::kConstant, TestFunction::kLevelZero, TestFunction::kCentralCount}) {
      const CampbellReport rep = campbell_check(params, p, f, 10000);
      const double z = (rep.lhs.mean - rep.rhs.mean) / rep.combined_stderr();
      bool agree = rep.agrees(3.0);
      if (f == TestFunction::kConstant) {
        const double mass = p == PointProcess::kUsers       ? 100.0
                            : p == PointProcess::kAuxiliary ? 100.0
                                                            : expected_relay_count(100.0, params.p_r).value;
        agree &= rep.total_mass == mass && std::abs(rep.rhs.mean - mass) <= 1e-9 * mass;
      }
      ok &= agree;
      parts.push_back(fmt::format("{}/{} z={:+.2f}", to_string(p), to_string(f), z));
    }
  }
  return {ok, join(parts)};
}

Outcome concentration() {
  auto params = MapParams::from_dimensions(1, 3.0, 1.0, 3.0);
  const double lambda = node_street_probability(params, 1);
  bool ok = true;
  std::vector<std::string> parts;
  std::vector<double> xs, tails;
  for (double target : {25.0, 100.0, 400.0}) {
    params.n = static_cast<std::size_t>(std::lround(target / lambda));
    params.seed = stream_seed(g_seed, stream_key(7, params.n));
    const ConcentrationReport rep = concentration_probe(params, 1, 1.0, 4000);
    ok &= rep.empirical_outside() <= rep.oracle_outside() + 3.0 * rep.sigma();
    xs.push_back(rep.expected_count);
    tails.push_back(rep.oracle_outside());
    parts.push_back(fmt::format("n*lambda={:.1f} empirical={:.4g} oracle={:.4g} sigma={:.2g}", rep.expected_count,
                                rep.empirical_outside(), rep.oracle_outside(), rep.sigma()));
  }
  // Geometric decay: secant rates of ln(tail) stay at or above 90% of the first one.
  std::vector<double> rates;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    rates.push_back((std::log(tails[i - 1]) - std::log(tails[i])) / (xs[i] - xs[i - 1]));
  }
  bool geometric = rates.front() > 0.0;
  for (double r : rates) geometric &= r >= 0.9 * rates.front();
  const double rate = rates.front();
  ok &= geometric;
  parts.push_back(
      fmt::format("secant decay rates {:.4f} {:.4f} {}", rate, rates.back(), geometric ? "holds" : "violated"));
  return {ok, join(parts)};
}

Outcome fitting_recovery() {
  bool ok = true;
  std::vector<std::string> parts;
  for (auto [d_F, d_r] : {std::pair{3.0, 2.3}, std::pair{4.33, 3.0}}) {
    RunningStats df, dr;
    for (int r = 0; r < 20; ++r) {
      auto params = MapParams::from_dimensions(4000, d_F, 4000.0, d_r);
      params.seed = stream_seed(g_seed, stream_key(8, static_cast<std::uint64_t>(r) + (d_F > 4 ? 100 : 0)));
      const GeneratedMap map = generate_map(params);
      const FitDataset ds = export_synthetic(params, map.nodes, map.relays);
      df.add(fit_dF(density_profile(ds.segments)).estimate);
      dr.add(fit_dr(ds).estimate);
    }
    ok &= std::abs(df.mean() - d_F) <= 0.3 && std::abs(dr.mean() - d_r) <= 0.4;
    parts.push_back(fmt::format("({}, {}): dF^={:.3f} dr^={:.3f}", d_F, d_r, df.mean(), dr.mean()));
  }

  // Exact power laws.
  std::vector<Segment> segs{Segment{"0", 1.0, 2.0}};
  for (int i = 1; i < 12; ++i) {
    const double xi = std::ldexp(1.0, i - 1);
    segs.push_back(Segment{std::to_string(i), xi, std::pow(xi, -2.0)});
  }
  const double exact_dF = fit_dF(density_profile(segs), 1.0).estimate;
  FitDataset ds;
  ds.segments = {Segment{"0", 2.0, 10.0}, Segment{"1", 2.0, 5.0}, Segment{"2", 4.0, 4.0}, Segment{"3", 8.0, 3.0},
                 Segment{"4", 16.0, 2.0}};
  for (int a = 1; a <= 4; ++a)
    for (int b = 1; b <= 4; ++b)
      for (int c = 0; c < 256; ++c)
        ds.intersections.push_back(Intersection{std::to_string(a), std::to_string(b), c < (256 >> (a + b))});
  RelayFitOptions opts;
  opts.bins = 4;
  opts.tail_fraction = 1.0;
  const double exact_dr = fit_dr(ds, opts).estimate;
  const bool exact = std::abs(exact_dF - 3.0) < 1e-12 && std::abs(exact_dr - 2.0) < 1e-12;
  ok &= exact;
  parts.push_back(fmt::format("exact power law errors {:.1e} {:.1e}", std::abs(exact_dF - 3.0),
                              std::abs(exact_dr - 2.0)));
  return {ok, join(parts)};
}

Outcome small_instance_oracle() {
  Rng rng = make_stream(g_seed, 9);
  EnergyModel distance;
  distance.kind = EnergyKind::kDistancePathloss;
  long mismatches = 0, queries = 0;
  auto expect = [&](bool same) {
    ++queries;
    mismatches += same ? 0 : 1;
  };
  for (int gi = 0; gi < 1000; ++gi) {
    const CommGraph g = oracle::small_graph(rng, 12, gi % 2 == 0 ? EnergyModel{} : distance);
    const std::size_t n = g.entity_count();
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        if (s == t) continue;
        for (int k = 1; k <= 5; ++k) {
          expect(min_energy_exact_hops(g, s, t, k) == oracle::exact_hops(g, s, t, k));
          const PathResult w = min_energy_within_hops(g, s, t, k);
          const oracle::Best ref = oracle::within_hops(g, s, t, k);
          expect(w.feasible == ref.feasible && (!ref.feasible || w.accumulated_energy == ref.energy));
        }
        const PathResult best = min_energy_path(g, s, t);
        const oracle::Best ref = oracle::within_hops(g, s, t, static_cast<int>(n));
        expect(best.feasible == ref.feasible &&
               (!ref.feasible || (best.accumulated_energy == ref.energy && best.hops == ref.hops)));
        for (const Edge& e : g.edges()) {
          const PathResult c = min_hops_power_capped(g, s, t, e.power);
          const oracle::Best rc = oracle::min_hops_capped(g, s, t, e.power);
          expect(c.feasible == rc.feasible && (!rc.feasible || c.hops == rc.hops));
        }
        if (!best.feasible) continue;
        for (double scale : {1.0, 1.25, 2.0, 4.0}) {
          const double budget = best.accumulated_energy * scale;
          const PathResult c = min_hops_energy_capped(g, s, t, budget);
          const oracle::Best rc = oracle::min_hops_energy(g, s, t, budget);
          expect(c.feasible == rc.feasible && c.hops == rc.hops && c.accumulated_energy == rc.energy);
        }
      }
    }
    for (bool bottleneck : {false, true}) {
      for (std::optional<int> limit : {std::optional<int>{}, std::optional<int>{0}, std::optional<int>{1},
                                       std::optional<int>{2}}) {
        const auto ref = oracle::component_optimum(g, bottleneck, limit);
        for (double frac : {0.25, 1.0, 3.0}) {
          const double budget = g.p_max() * frac;
          const ComponentSpec spec{bottleneck ? ComponentKind::kMaxPower : ComponentKind::kAccumulatedEnergy,
                                   budget, limit};
          const ComponentResult comp = giant_component(g, spec);
          bool same = true;
          for (std::size_t v = 0; v < n; ++v) same &= comp.optimum[v] == ref[v];
          for (std::size_t v = 0; v < g.node_count(); ++v) same &= comp.contains(v) == (ref[v] <= budget);
          expect(same);
        }
      }
    }
  }
  return {mismatches == 0 && queries > 0, fmt::format("graphs=1000 queries={} mismatches={}", queries, mismatches)};
}

Outcome nearest_neighbor_invariant() {
  Rng rng = make_stream(g_seed, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0), delta(2.0, 6.0), kappa(0.1, 10.0);
  const StreetId street{Orientation::kHorizontal, 3, 5};
  long violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> pos{unit(rng), unit(rng), unit(rng)};
    std::sort(pos.begin(), pos.end());
    EnergyModel model;
    model.kind = EnergyKind::kDistancePathloss;
    model.delta = delta(rng);
    model.kappa = kappa(rng);
    auto node = [&](std::size_t id, double x) {
      return MobileNode{id, street, static_cast<std::uint64_t>(std::ldexp(x, 64))};
    };
    const CommGraph three = build_graph({node(0, pos[0]), node(1, pos[1]), node(2, pos[2])}, {}, model);
    const CommGraph two = build_graph({node(0, pos[0]), node(2, pos[2])}, {}, model);
    const double relayed = three.threads()[0].prefix_energy.back();
    const double direct = two.threads()[0].prefix_energy.back();
    if (relayed > direct) ++violations;
    if (direct > 0.0) worst = std::max(worst, relayed / direct);
  }
  return {violations == 0, fmt::format("triples=100000 violations={} max two-hop/direct={:.4f}", violations, worst)};
}

Outcome giant_fraction_trend() {
  SweepConfig cfg;
  cfg.n_grid = kGrid;
  cfg.replicates = 20;
  cfg.d_F = 3.0;
  cfg.d_r = 3.0;
  cfg.delta = 2.0;
  cfg.gamma = 0.5;
  cfg.metrics = {"giant_fraction"};
  cfg.seed = g_seed;
  const SweepResult res = run_sweep(cfg);
  const SlopeVerdict& g1 = verdict_of(res, "giant_G1_fraction");
  const SlopeVerdict& gp = verdict_of(res, "giant_Gprime1_fraction");
  const bool nondecreasing = g1.verdict == "pass";
  const double last = g1.means.back().second;
  return {nondecreasing && last > 0.9,
          fmt::format("G1 means[{}] {}; last={:.3f} (needs > 0.9); G'1 means[{}]", means_text(g1),
                      nondecreasing ? "non-decreasing" : "decreasing somewhere", last, means_text(gp))};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only, expect_fail;
  app.add_option("--only", only, "comma-separated criteria to run");
  app.add_option("--expect-fail", expect_fail, "comma-separated criteria known to fail");
  app.add_option("--seed", g_seed, "master seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"relay-count reproduction", relay_count_reproduction},
      {"energy-hop monotonicity", energy_hop_monotonicity},
      {"power-cap trade-off", power_cap_tradeoff},
      {"hop scaling exponent", scaling_exponent},
      {"diverted-path energy scaling", diverted_scaling},
      {"campbell-mecke identity", campbell_mecke},
      {"concentration tails", concentration},
      {"dimension fitting recovery", fitting_recovery},
      {"small-instance oracle equivalence", small_instance_oracle},
      {"nearest-neighbor energy invariant", nearest_neighbor_invariant},
      {"giant-fraction trend", giant_fraction_trend},
  };
  const std::set<int> selected = parse_list(only);
  const std::set<int> known = parse_list(expect_fail);

  int unexpected = 0, passed = 0, failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool xfail = known.count(id) > 0;
    std::cout << (o.pass ? "PASS" : "FAIL") << " #" << id << " " << criteria[i].first << " [" << fmt::format("{:.1f}s", secs)
              << (xfail ? ", known failure" : "") << "]: " << o.detail << std::endl;
    (o.pass ? passed : failed)++;
    if (o.pass == xfail) ++unexpected;
  }
  std::cout << fmt::format("{} passed, {} failed, {} unexpected", passed, failed, unexpected) << std::endl;
  return unexpected == 0 ? 0 : 1;
}
