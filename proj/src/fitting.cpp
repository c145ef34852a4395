#include "hfnet/fitting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "hfnet/csv.hpp"
#include "hfnet/regression.hpp"

namespace hfnet {

namespace {

bool parse_integer(const std::string& s, long long& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Numeric ids compare as numbers, anything else lexicographically.
bool id_less(const std::string& a, const std::string& b) {
  long long x = 0, y = 0;
  if (parse_integer(a, x) && parse_integer(b, y)) return x < y;
  return a < b;
}

}  // namespace

void FitDataset::validate() const {
  std::set<std::string> ids;
  for (const Segment& s : segments) {
    if (!(s.length > 0.0)) throw std::invalid_argument("segment " + s.id + ": length must be > 0");
    if (!(s.density >= 0.0)) throw std::invalid_argument("segment " + s.id + ": density must be >= 0");
    if (!ids.insert(s.id).second) throw std::invalid_argument("duplicate segment id " + s.id);
  }
  for (const Intersection& i : intersections) {
    if (!ids.count(i.seg_a) || !ids.count(i.seg_b)) {
      throw std::invalid_argument("intersection refers to unknown segment " + i.seg_a + "/" + i.seg_b);
    }
  }
}

std::vector<ProfilePoint> density_profile(const std::vector<Segment>& segments) {
  if (segments.size() < 2) throw std::invalid_argument("density profile needs at least 2 segments");
  for (const Segment& s : segments) {
    if (!(s.length > 0.0)) throw std::invalid_argument("segment " + s.id + ": length must be > 0");
    if (!(s.density >= 0.0)) throw std::invalid_argument("segment " + s.id + ": density must be >= 0");
  }
  std::vector<const Segment*> order;
  for (const Segment& s : segments) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const Segment* a, const Segment* b) {
    if (a->density != b->density) return a->density > b->density;
    return id_less(a->id, b->id);
  });
  if (order.front()->density == order.back()->density) {
    throw std::invalid_argument("degenerate profile: all densities are equal");
  }

  std::vector<ProfilePoint> out;
  out.reserve(order.size());
  double denser = 0.0;  // length of strictly denser segments
  double group_length = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && order[i]->density != order[i - 1]->density) {
      denser += group_length;
      group_length = 0.0;
    }
    out.push_back(ProfilePoint{order[i]->id, denser, order[i]->density});
    group_length += order[i]->length;
  }
  return out;
}

FitResult fit_dF(const std::vector<ProfilePoint>& profile, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  std::map<double, double> by_xi;
  for (const ProfilePoint& p : profile) {
    if (!(p.xi > 0.0 && p.mu > 0.0)) continue;
    auto [it, inserted] = by_xi.emplace(p.xi, p.mu);
    if (!inserted) it->second = std::min(it->second, p.mu);
  }
  if (by_xi.size() < 5) throw std::invalid_argument("fit_dF needs at least 5 points of distinct positive xi");

  const std::size_t total = by_xi.size();
  const std::size_t keep =
      std::min(total, std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(tail_fraction * total))));
  std::vector<double> lx, ly;
  FitResult r;
  std::size_t i = 0;
  for (const auto& [xi, mu] : by_xi) {
    if (i++ < total - keep) continue;
    lx.push_back(std::log(xi));
    ly.push_back(std::log(mu));
    r.points.emplace_back(xi, mu);
  }
  const LinearFit fit = ordinary_least_squares(lx, ly);
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  r.r_squared = fit.r_squared;
  r.points_used = fit.points;
  r.estimate = 1.0 - fit.slope;
  r.stderr_ = fit.slope_stderr;
  r.window_lo = r.points.front().first;
  r.window_hi = r.points.back().first;
  r.in_model = r.estimate >= 2.0;
  return r;
}

FitResult fit_dr(const FitDataset& dataset, const RelayFitOptions& options) {
  if (options.bins < 3) throw std::invalid_argument("fit_dr needs bins >= 3");
  if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0)) {
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  }
  dataset.validate();
  const std::vector<ProfilePoint> profile = density_profile(dataset.segments);
  std::unordered_map<std::string, double> xi_of;
  for (const ProfilePoint& p : profile) xi_of.emplace(p.segment_id, p.xi);

  struct Pair {
    double lo, hi;
    bool relay;
  };
  std::vector<Pair> pairs;
  std::size_t relays = 0, dropped = 0;
  for (const Intersection& it : dataset.intersections) {
    relays += it.has_relay ? 1 : 0;
    const double a = xi_of.at(it.seg_a);
    const double b = xi_of.at(it.seg_b);
    if (!(a > 0.0 && b > 0.0)) {
      ++dropped;
      continue;
    }
    pairs.push_back(Pair{std::min(a, b), std::max(a, b), it.has_relay});
  }
  if (relays == 0) throw std::invalid_argument("fit_dr needs at least one relay-bearing intersection");
  if (dropped > 0) spdlog::debug("fit_dr: {} intersection(s) touch a segment with xi = 0", dropped);
  if (pairs.empty()) throw std::invalid_argument("fit_dr: no intersection with positive xi");

  double lo = pairs.front().lo, hi = pairs.front().hi;
  for (const Pair& p : pairs) {
    lo = std::min(lo, p.lo);
    hi = std::max(hi, p.hi);
  }
  if (!(hi > lo)) throw std::invalid_argument("fit_dr: xi range is degenerate");
  const double llo = std::log(lo), span = std::log(hi) - llo;
  const int bins = options.bins;
  auto bin_of = [&](double xi) {
    const int b = static_cast<int>(std::floor((std::log(xi) - llo) / span * bins));
    return std::clamp(b, 0, bins - 1);
  };

  std::vector<double> xs, ys;
  FitResult r;
  if (options.mode == RatioMode::kPerCell) {
    const std::size_t cells = static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins);
    std::vector<long> n(cells, 0), rel(cells, 0);
    std::vector<double> log_sum(cells, 0.0);
    for (const Pair& p : pairs) {
      const std::size_t c = static_cast<std::size_t>(bin_of(p.lo) * bins + bin_of(p.hi));
      ++n[c];
      rel[c] += p.relay ? 1 : 0;
      log_sum[c] += std::log(p.lo) + std::log(p.hi);
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (n[c] < options.min_count || rel[c] == 0) continue;
      const double ratio = static_cast<double>(rel[c]) / static_cast<double>(n[c]);
      xs.push_back(log_sum[c] / static_cast<double>(n[c]));
      ys.push_back(std::log(ratio));
      r.points.emplace_back(std::exp(xs.back()), ratio);
    }
  } else {
    for (int i = 0; i < bins; ++i) {
      const double g1 = std::exp(llo + span * (i + 1) / bins);
      for (int j = i; j < bins; ++j) {
        const double g2 = std::exp(llo + span * (j + 1) / bins);
        long n = 0, rel = 0;
        for (const Pair& p : pairs) {
          if (p.lo <= g1 && p.hi <= g2) {
            ++n;
            rel += p.relay ? 1 : 0;
          }
        }
        if (n < options.min_count || rel == 0) continue;
        const double ratio = static_cast<double>(rel) / static_cast<double>(n);
        xs.push_back(std::log(g1 * g2));
        ys.push_back(std::log(ratio));
        r.points.emplace_back(g1 * g2, ratio);
      }
    }
  }
  if (xs.size() < 3) throw std::invalid_argument("fit_dr: fewer than 3 usable cells");

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] > xs[b]; });
  const std::size_t keep = std::min(
      xs.size(), std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(options.tail_fraction * xs.size()))));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  std::vector<double> tx, ty;
  std::vector<std::pair<double, double>> tp;
  for (std::size_t i : order) {
    tx.push_back(xs[i]);
    ty.push_back(ys[i]);
    tp.push_back(r.points[i]);
  }
  xs = std::move(tx);
  ys = std::move(ty);
  r.points = std::move(tp);

  const LinearFit fit = ordinary_least_squares(xs, ys);
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  r.r_squared = fit.r_squared;
  r.points_used = fit.points;
  r.estimate = -2.0 * fit.slope;
  r.stderr_ = 2.0 * fit.slope_stderr;
  r.window_lo = std::exp(*std::min_element(xs.begin(), xs.end()));
  r.window_hi = std::exp(*std::max_element(xs.begin(), xs.end()));
  r.in_model = r.estimate >= 2.0;
  return r;
}

std::vector<Segment> load_segments_csv(const std::filesystem::path& path) {
  const CsvTable t = CsvTable::read_file(path);
  const std::size_t id = t.column("segment_id"), len = t.column("length_m"), dens = t.column("density");
  std::vector<Segment> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) out.push_back(Segment{t.cell(r, id), t.number(r, len), t.number(r, dens)});
  return out;
}

std::vector<Intersection> load_intersections_csv(const std::filesystem::path& path) {
  const CsvTable t = CsvTable::read_file(path);
  const std::size_t a = t.column("seg_a"), b = t.column("seg_b"), rel = t.column("has_relay");
  std::vector<Intersection> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const std::string& flag = t.cell(r, rel);
    if (flag != "0" && flag != "1") throw std::runtime_error(path.string() + ": has_relay must be 0 or 1");
    out.push_back(Intersection{t.cell(r, a), t.cell(r, b), flag == "1"});
  }
  return out;
}

FitDataset export_synthetic(const MapParams& params, const std::vector<MobileNode>& nodes,
                            const std::vector<Relay>& relays, const ExportOptions& options) {
  if (options.level < 0 || options.level > params.max_level) {
    throw InvalidParameter("export level must lie in [0, max_level]");
  }
  const std::vector<StreetId> streets = enumerate_streets(options.level);
  std::map<StreetId, long> counts;
  if (options.density == DensityMode::kEmpirical) {
    for (const MobileNode& m : nodes) ++counts[m.street];
  }
  std::set<std::pair<StreetId, StreetId>> occupied;
  for (const Relay& r : relays) occupied.emplace(r.crossing.h_street, r.crossing.v_street);

  FitDataset ds;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < streets.size(); ++i) {
    const StreetId& s = streets[i];
    const double mass = options.density == DensityMode::kExpected
                            ? static_cast<double>(params.n) * node_street_probability(params, s.level)
                            : static_cast<double>(counts[s]);
    ids.push_back(std::to_string(i));
    ds.segments.push_back(Segment{ids.back(), params.map_length, mass / params.map_length});
  }
  for (std::size_t i = 0; i < streets.size(); ++i) {
    if (streets[i].orientation != Orientation::kHorizontal) continue;
    for (std::size_t j = 0; j < streets.size(); ++j) {
      if (streets[j].orientation != Orientation::kVertical) continue;
      ds.intersections.push_back(Intersection{ids[i], ids[j], occupied.count({streets[i], streets[j]}) > 0});
    }
  }
  return ds;
}

void write_segments_csv(const std::vector<Segment>& segments, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv_row(out, {"segment_id", "length_m", "density"});
  for (const Segment& s : segments) write_csv_row(out, {s.id, format_number(s.length), format_number(s.density)});
}

void write_intersections_csv(const std::vector<Intersection>& intersections, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv_row(out, {"seg_a", "seg_b", "has_relay"});
  for (const Intersection& i : intersections) write_csv_row(out, {i.seg_a, i.seg_b, i.has_relay ? "1" : "0"});
}

}  // namespace hfnet
