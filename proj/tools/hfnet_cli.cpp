// Command-line front end: map generation, routing queries, sweeps, fitting and
// the statistical checks.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hfnet/analytics.hpp"
#include "hfnet/comm_graph.hpp"
#include "hfnet/experiments.hpp"
#include "hfnet/fitting.hpp"
#include "hfnet/map_core.hpp"
#include "hfnet/regression.hpp"
#include "hfnet/routing.hpp"
#include "hfnet/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string config_path;
  std::string out_dir = ".";
  bool verbose = false;
};

// Map flags shared by several subcommands. Unset flags fall back to the JSON
// config, then to the defaults.
struct MapFlags {
  std::optional<std::size_t> n;
  std::optional<double> d_F, d_r, rho;
  std::optional<std::string> node_mode;
  std::optional<int> max_level;
  std::optional<double> map_length;

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "node count");
    app->add_option("--dF", d_F, "node fractal dimension (>= 2)");
    app->add_option("--dr", d_r, "relay fractal dimension (>= 2)");
    app->add_option("--rho", rho, "relay process mass (default: n)");
    app->add_option("--node-mode", node_mode, "exact-n | poisson-n");
    app->add_option("--max-level", max_level, "node level truncation");
    app->add_option("--map-length", map_length, "side length in meters");
  }
};

struct EnergyFlags {
  std::optional<double> delta;
  std::optional<std::string> energy;
  bool log_corrected = false;
  bool relays_in_population = false;

  void add_to(CLI::App* app) {
    app->add_option("--delta", delta, "pathloss exponent");
    app->add_option("--energy", energy, "nominal-per-street | distance-pathloss");
    app->add_flag("--log-corrected", log_corrected, "use the log-corrected nominal power law");
    app->add_flag("--relays-in-population", relays_in_population, "count relays in the street population");
  }
};

json load_config(const Globals& g) {
  if (g.config_path.empty()) return json::object();
  std::ifstream in(g.config_path);
  if (!in) throw std::runtime_error("cannot open config " + g.config_path);
  return json::parse(in);
}

hfnet::MapParams resolve_map(const Globals& g, const json& cfg, const MapFlags& f) {
  const std::size_t n = f.n.value_or(cfg.value("n", std::size_t{1000}));
  const double d_F = f.d_F.value_or(cfg.value("d_F", 3.0));
  const double d_r = f.d_r.value_or(cfg.value("d_r", 3.0));
  const double rho = f.rho.value_or(cfg.value("rho", static_cast<double>(n)));
  hfnet::MapParams p = hfnet::MapParams::from_dimensions(n, d_F, rho, d_r);
  const std::string mode = f.node_mode.value_or(cfg.value("node_mode", std::string("exact-n")));
  if (mode == "exact-n") {
    p.node_mode = hfnet::NodeMode::kExactN;
  } else if (mode == "poisson-n") {
    p.node_mode = hfnet::NodeMode::kPoissonN;
  } else {
    throw std::invalid_argument("node mode must be exact-n or poisson-n");
  }
  p.max_level = f.max_level.value_or(cfg.value("max_level", p.max_level));
  p.map_length = f.map_length.value_or(cfg.value("map_length", p.map_length));
  p.seed = g.seed_set ? g.seed : cfg.value("seed", g.seed);
  p.validate();
  return p;
}

hfnet::EnergyModel resolve_energy(const json& cfg, const EnergyFlags& f, const hfnet::MapParams& p) {
  hfnet::EnergyModel m;
  m.delta = f.delta.value_or(cfg.value("delta", m.delta));
  m.kind = hfnet::parse_energy_kind(f.energy.value_or(cfg.value("energy", std::string("nominal-per-street"))));
  m.map_length = p.map_length;
  if (f.log_corrected || cfg.value("power_law", std::string("nominal")) == "log-corrected") {
    m.power_law = hfnet::PowerLaw::kLogCorrected;
  }
  m.count_relays_in_population = f.relays_in_population || cfg.value("count_relays_in_population", false);
  m.validate();
  return m;
}

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void emit_json(const Globals& g, const std::string& name, const json& j) {
  std::cout << j.dump(2) << '\n';
  open_out(out_path(g, name)) << j.dump(2) << '\n';
}

json estimate_json(const hfnet::Estimate& e) { return json{{"mean", e.mean}, {"stderr", e.stderr_}}; }

json fit_json(const hfnet::FitResult& r) {
  return json{{"estimate", r.estimate}, {"stderr", r.stderr_},   {"slope", r.slope},
              {"intercept", r.intercept}, {"R2", r.r_squared}, {"points", r.points_used},
              {"window", {r.window_lo, r.window_hi}}, {"in_model", r.in_model}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperfractal street-network simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option_function<std::uint64_t>(
         "--seed", [&](const std::uint64_t& s) { g.seed = s, g.seed_set = true; }, "master RNG seed")
      ->default_val(1);
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_flag("-v,--verbose", g.verbose, "debug logging");

  // generate
  auto* gen = app.add_subcommand("generate", "sample nodes and relays; write nodes.csv and relays.csv");
  MapFlags gen_map;
  EnergyFlags gen_energy;
  gen_map.add_to(gen);
  gen_energy.add_to(gen);
  bool gen_edges = false;
  std::optional<int> export_level;
  bool export_empirical = false;
  gen->add_flag("--edges", gen_edges, "also write edges.csv");
  gen->add_option("--export-level", export_level, "also write segments.csv and intersections.csv up to this level");
  gen->add_flag("--empirical-density", export_empirical, "export sampled rather than expected street densities");

  // relay-count
  auto* rc = app.add_subcommand("relay-count", "expected number of relays");
  double rc_rho = 1000.0, rc_dr = 3.0;
  int rc_kmax = hfnet::kDefaultKMax, rc_measure = 0;
  rc->add_option("--rho", rc_rho, "relay process mass")->capture_default_str();
  rc->add_option("--dr", rc_dr, "relay fractal dimension")->capture_default_str();
  rc->add_option("--kmax", rc_kmax, "anti-diagonals summed")->capture_default_str();
  rc->add_option("--measure", rc_measure, "also average the relay count over this many sampled maps");

  // simulate-pairs
  auto* sp = app.add_subcommand("simulate-pairs", "constrained routing on random node pairs; write pairs.csv");
  MapFlags sp_map;
  EnergyFlags sp_energy;
  sp_map.add_to(sp);
  sp_energy.add_to(sp);
  int sp_pairs = 100, sp_kmax = 30;
  std::string sp_constraint = "energy", sp_preset;
  double sp_budget = 0.0;
  sp->add_option("--pairs", sp_pairs, "number of random pairs")->capture_default_str();
  sp->add_option("--kmax", sp_kmax, "largest hop budget")->capture_default_str();
  sp->add_option("--constraint", sp_constraint, "energy | power")->capture_default_str();
  sp->add_option("--budget", sp_budget, "energy or power budget as a fraction of P_max");
  sp->add_option("--preset", sp_preset, "named (d_F, d_r, n) setup");

  // sweep
  auto* sw = app.add_subcommand("sweep", "replicated scaling sweep; write sweep.csv and slopes.json");
  bool sw_check = false;
  std::optional<int> sw_threads;
  sw->add_flag("--check", sw_check, "exit with status 2 when a tolerance verdict fails");
  sw->add_option("--threads", sw_threads, "worker threads (0: all cores)");

  // fit
  auto* fit = app.add_subcommand("fit", "estimate d_F and d_r from segment data");
  std::string fit_segments, fit_intersections, fit_mode = "per-cell";
  double fit_tail = hfnet::kDefaultTailFraction, fit_cell_tail = hfnet::kDefaultTailFraction;
  int fit_bins = 8, fit_min_count = 5;
  fit->add_option("--segments", fit_segments, "segments.csv")->required();
  fit->add_option("--intersections", fit_intersections, "intersections.csv");
  fit->add_option("--tail-fraction", fit_tail, "fraction of largest-xi points used for d_F")->capture_default_str();
  fit->add_option("--cell-tail-fraction", fit_cell_tail, "fraction of largest-xi1*xi2 cells used for d_r")
      ->capture_default_str();
  fit->add_option("--bins", fit_bins, "log-spaced bins per axis for d_r")->capture_default_str();
  fit->add_option("--min-count", fit_min_count, "minimum intersections per cell")->capture_default_str();
  fit->add_option("--mode", fit_mode, "per-cell | cumulative")->capture_default_str();

  // campbell
  auto* cm = app.add_subcommand("campbell", "Monte Carlo check of the Campbell-Mecke identity");
  MapFlags cm_map;
  cm_map.add_to(cm);
  std::string cm_process = "all", cm_function = "all";
  int cm_reps = 10000;
  cm->add_option("--process", cm_process, "users | auxiliary | relays | all")->capture_default_str();
  cm->add_option("--function", cm_function, "constant | level-zero | central-count | all")->capture_default_str();
  cm->add_option("--replicates", cm_reps, "Monte Carlo replicates")->capture_default_str();

  // concentration
  auto* cc = app.add_subcommand("concentration", "tail frequencies of one street's node count");
  MapFlags cc_map;
  cc_map.add_to(cc);
  int cc_level = 1, cc_reps = 2000;
  double cc_phi = 1.0;
  std::optional<double> cc_expected;
  cc->add_option("--level", cc_level, "street level H")->capture_default_str();
  cc->add_option("--phi", cc_phi, "fraction of the street")->capture_default_str();
  cc->add_option("--replicates", cc_reps, "sampled maps")->capture_default_str();
  cc->add_option("--expected-count", cc_expected, "choose n so that n * lambda_H * phi equals this value");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  try {
    const json cfg = load_config(g);

    if (*gen) {
      const hfnet::GeneratedMap map = hfnet::generate_map(resolve_map(g, cfg, gen_map));
      auto nodes_out = open_out(out_path(g, "nodes.csv"));
      hfnet::write_nodes_csv(map.nodes, nodes_out);
      auto relays_out = open_out(out_path(g, "relays.csv"));
      hfnet::write_relays_csv(map.relays, relays_out);
      if (gen_edges) {
        const hfnet::CommGraph graph =
            hfnet::build_graph(map.nodes, map.relays, resolve_energy(cfg, gen_energy, map.params));
        auto edges_out = open_out(out_path(g, "edges.csv"));
        graph.write_edges_csv(edges_out);
      }
      if (export_level) {
        hfnet::ExportOptions opts;
        opts.level = *export_level;
        opts.density = export_empirical ? hfnet::DensityMode::kEmpirical : hfnet::DensityMode::kExpected;
        const hfnet::FitDataset ds = hfnet::export_synthetic(map.params, map.nodes, map.relays, opts);
        hfnet::write_segments_csv(ds.segments, out_path(g, "segments.csv"));
        hfnet::write_intersections_csv(ds.intersections, out_path(g, "intersections.csv"));
      }
      spdlog::info("{} nodes, {} relays written to {}", map.nodes.size(), map.relays.size(), g.out_dir);
    } else if (*rc) {
      const double p_r = hfnet::derive_pr_from_dr(rc_dr);
      const hfnet::RelayCountEstimate est = hfnet::expected_relay_count(rc_rho, p_r, rc_kmax);
      json j{{"rho", rc_rho}, {"d_r", rc_dr}, {"p_r", p_r}, {"k_max", rc_kmax},
             {"value", est.value}, {"tail_bound", est.tail_bound}};
      if (rc_measure > 0) {
        hfnet::MapParams p = hfnet::MapParams::from_dimensions(1, 3.0, rc_rho, rc_dr);
        hfnet::RunningStats stats;
        for (int m = 0; m < rc_measure; ++m) {
          hfnet::Rng rng = hfnet::make_stream(g.seed, static_cast<std::uint64_t>(m));
          stats.add(static_cast<double>(hfnet::sample_relays(p, rng).size()));
        }
        j["measured"] = estimate_json(stats.estimate());
        j["maps"] = rc_measure;
      }
      emit_json(g, "relay_count.json", j);
    } else if (*sp) {
      if (!sp_preset.empty()) {
        bool found = false;
        for (const auto& pr : hfnet::pair_presets()) {
          if (pr.name != sp_preset) continue;
          sp_map.d_F = sp_map.d_F.value_or(pr.d_F);
          sp_map.d_r = sp_map.d_r.value_or(pr.d_r);
          sp_map.n = sp_map.n.value_or(pr.n);
          found = true;
        }
        if (!found) throw std::invalid_argument("unknown preset: " + sp_preset);
      }
      const hfnet::GeneratedMap map = hfnet::generate_map(resolve_map(g, cfg, sp_map));
      const hfnet::CommGraph graph =
          hfnet::build_graph(map.nodes, map.relays, resolve_energy(cfg, sp_energy, map.params));
      hfnet::PairQueryConfig pq;
      pq.pairs = sp_pairs;
      pq.k_max = sp_kmax;
      pq.budget = sp_budget;
      if (sp_constraint == "energy") {
        pq.constraint = hfnet::PairConstraint::kEnergy;
      } else if (sp_constraint == "power") {
        pq.constraint = hfnet::PairConstraint::kPower;
      } else {
        throw std::invalid_argument("constraint must be energy or power");
      }
      hfnet::Rng rng = hfnet::make_stream(map.params.seed, 100);
      auto out = open_out(out_path(g, "pairs.csv"));
      hfnet::write_pairs_csv(hfnet::simulate_pairs(graph, pq, rng), out);
    } else if (*sw) {
      json sweep_cfg = cfg;
      if (g.seed_set) sweep_cfg["seed"] = g.seed;
      if (sw_threads) sweep_cfg["threads"] = *sw_threads;
      const hfnet::SweepResult res = hfnet::run_sweep(hfnet::sweep_config_from_json(sweep_cfg));
      auto out = open_out(out_path(g, "sweep.csv"));
      hfnet::write_sweep_csv(res, out);
      const json slopes = hfnet::slopes_json(res);
      open_out(out_path(g, "slopes.json")) << slopes.dump(2) << '\n';
      std::cout << slopes.dump(2) << '\n';
      if (sw_check && !res.all_pass()) {
        spdlog::error("tolerance check failed");
        return 2;
      }
    } else if (*fit) {
      hfnet::FitDataset ds;
      ds.segments = hfnet::load_segments_csv(fit_segments);
      const hfnet::FitResult df = hfnet::fit_dF(hfnet::density_profile(ds.segments), fit_tail);
      json j{{"d_F", df.estimate}};
      json stderr_j{{"d_F", df.stderr_}};
      json windows{{"d_F", {df.window_lo, df.window_hi}}};
      json diag{{"d_F", fit_json(df)}};
      if (!fit_intersections.empty()) {
        ds.intersections = hfnet::load_intersections_csv(fit_intersections);
        hfnet::RelayFitOptions opts;
        opts.bins = fit_bins;
        opts.min_count = fit_min_count;
        opts.tail_fraction = fit_cell_tail;
        if (fit_mode == "per-cell") {
          opts.mode = hfnet::RatioMode::kPerCell;
        } else if (fit_mode == "cumulative") {
          opts.mode = hfnet::RatioMode::kCumulative;
        } else {
          throw std::invalid_argument("mode must be per-cell or cumulative");
        }
        const hfnet::FitResult dr = hfnet::fit_dr(ds, opts);
        j["d_r"] = dr.estimate;
        stderr_j["d_r"] = dr.stderr_;
        windows["d_r"] = {dr.window_lo, dr.window_hi};
        diag["d_r"] = fit_json(dr);
      }
      j["stderr"] = stderr_j;
      j["windows"] = windows;
      j["diagnostics"] = diag;
      emit_json(g, "fit.json", j);
    } else if (*cm) {
      const hfnet::MapParams p = resolve_map(g, cfg, cm_map);
      std::vector<hfnet::PointProcess> processes;
      std::vector<hfnet::TestFunction> functions;
      if (cm_process == "all") {
        processes = {hfnet::PointProcess::kUsers, hfnet::PointProcess::kAuxiliary, hfnet::PointProcess::kRelays};
      } else {
        processes = {hfnet::parse_point_process(cm_process)};
      }
      if (cm_function == "all") {
        functions = {hfnet::TestFunction::kConstant, hfnet::TestFunction::kLevelZero,
                     hfnet::TestFunction::kCentralCount};
      } else {
        functions = {hfnet::parse_test_function(cm_function)};
      }
      json reports = json::array();
      for (auto proc : processes) {
        for (auto f : functions) {
          const hfnet::CampbellReport r = hfnet::campbell_check(p, proc, f, cm_reps);
          reports.push_back({{"process", hfnet::to_string(proc)},
                             {"function", hfnet::to_string(f)},
                             {"lhs", estimate_json(r.lhs)},
                             {"rhs", estimate_json(r.rhs)},
                             {"replicates", r.replicates},
                             {"total_mass", r.total_mass},
                             {"agrees", r.agrees()}});
        }
      }
      emit_json(g, "campbell.json", reports);
    } else if (*cc) {
      hfnet::MapParams p = resolve_map(g, cfg, cc_map);
      if (cc_expected) {
        const double per_node = hfnet::node_street_probability(p, cc_level) * cc_phi;
        p.n = static_cast<std::size_t>(std::llround(*cc_expected / per_node));
      }
      const hfnet::ConcentrationReport r = hfnet::concentration_probe(p, cc_level, cc_phi, cc_reps);
      emit_json(g, "concentration.json",
                json{{"level", r.level},
                     {"phi", r.phi},
                     {"n", r.n},
                     {"replicates", r.replicates},
                     {"expected_count", r.expected_count},
                     {"lower", r.lower},
                     {"upper", r.upper},
                     {"empirical_below", r.empirical_below},
                     {"empirical_above", r.empirical_above},
                     {"oracle_below", r.oracle_below},
                     {"oracle_above", r.oracle_above},
                     {"sigma", r.sigma()},
                     {"uninformative", r.uninformative}});
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
