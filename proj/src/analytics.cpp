#include "hfnet/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <spdlog/spdlog.h>

#include "hfnet/rng.hpp"

namespace hfnet {

RelayCountEstimate expected_relay_count(double rho, double p_r, int k_max) {
  if (!(p_r >= 0.0 && p_r <= 1.0)) throw InvalidParameter("p_r must lie in [0, 1]");
  if (!(rho >= 0.0)) throw InvalidParameter("rho must be >= 0");
  if (k_max < 0) throw InvalidParameter("k_max must be >= 0");

  RelayCountEstimate out;
  out.k_max = k_max;
  const double base = p_r * p_r;
  const double ratio = (1.0 - p_r) / 2.0;
  for (int k = 0; k <= k_max; ++k) {
    const double crossings = static_cast<double>(k + 1) * std::exp2(k);
    out.value += crossings * -std::expm1(-rho * base * std::pow(ratio, k));
  }
  if (rho == 0.0 || p_r == 1.0) {
    out.tail_bound = 0.0;
  } else if (p_r == 0.0) {
    out.tail_bound = 0.0;  // no mass on any crossing
  } else {
    // rho p_r^2 sum_{k > K} (k+1) r^k with r = 1 - p_r
    const double r = 1.0 - p_r;
    const double K = static_cast<double>(k_max);
    const double tail = ((K + 2.0) * std::pow(r, K + 1.0) - (K + 1.0) * std::pow(r, K + 2.0)) /
                        ((1.0 - r) * (1.0 - r));
    out.tail_bound = rho * base * std::max(tail, 0.0);
  }
  return out;
}

double expected_relays_on_street(double rho, double p_r, int level, int v_max) {
  double total = 0.0;
  for (int v = 0; v <= v_max; ++v) {
    total += std::exp2(v) * relay_presence_probability(rho, p_r, level, v);
  }
  return total;
}

double nominal_power(long m, double delta, double p_max, PowerLaw law) {
  if (m <= 0) return p_max;
  const double md = std::pow(static_cast<double>(m), delta);
  if (law == PowerLaw::kNominal) return p_max / md;
  const double lg = std::max(1.0, std::log(static_cast<double>(m)));
  return std::min(p_max, p_max * std::pow(lg, delta) / md);
}

PointProcess parse_point_process(std::string_view name) {
  if (name == "users") return PointProcess::kUsers;
  if (name == "auxiliary") return PointProcess::kAuxiliary;
  if (name == "relays") return PointProcess::kRelays;
  throw std::invalid_argument("unknown point process: " + std::string(name));
}

TestFunction parse_test_function(std::string_view name) {
  if (name == "constant") return TestFunction::kConstant;
  if (name == "level-zero") return TestFunction::kLevelZero;
  if (name == "central-count") return TestFunction::kCentralCount;
  throw std::invalid_argument("unknown test function: " + std::string(name));
}

const char* to_string(PointProcess p) {
  switch (p) {
    case PointProcess::kUsers: return "users";
    case PointProcess::kAuxiliary: return "auxiliary";
    case PointProcess::kRelays: return "relays";
  }
  return "?";
}

const char* to_string(TestFunction f) {
  switch (f) {
    case TestFunction::kConstant: return "constant";
    case TestFunction::kLevelZero: return "level-zero";
    case TestFunction::kCentralCount: return "central-count";
  }
  return "?";
}

double CampbellReport::combined_stderr() const {
  return std::hypot(lhs.stderr_, rhs.stderr_);
}

bool CampbellReport::agrees(double z) const {
  return std::abs(lhs.mean - rhs.mean) <= z * combined_stderr();
}

namespace {

bool in_central_ball(const Point& p) {
  return std::hypot(p.x - 0.5, p.y - 0.5) <= kCentralCountRadius;
}

template <typename Range, typename Proj>
long count_in_ball(const Range& points, Proj proj) {
  long c = 0;
  for (const auto& item : points) c += in_central_ball(proj(item)) ? 1 : 0;
  return c;
}

auto crossing_key(const Crossing& c) {
  return std::make_tuple(c.h_street.level, c.h_street.index, c.v_street.level, c.v_street.index);
}

bool same_crossing(const Crossing& a, const Crossing& b) { return crossing_key(a) == crossing_key(b); }

// Sum over configuration points of f(x, config).
double configuration_sum_users(const std::vector<MobileNode>& nodes, TestFunction f) {
  switch (f) {
    case TestFunction::kConstant: return static_cast<double>(nodes.size());
    case TestFunction::kLevelZero:
      return static_cast<double>(
          std::count_if(nodes.begin(), nodes.end(), [](const MobileNode& m) { return m.street.level == 0; }));
    case TestFunction::kCentralCount: {
      const double nb = static_cast<double>(count_in_ball(nodes, [](const MobileNode& m) { return m.point(); }));
      return nb * nb;
    }
  }
  return 0.0;
}

double configuration_sum_crossings(const std::vector<Crossing>& points, TestFunction f) {
  switch (f) {
    case TestFunction::kConstant: return static_cast<double>(points.size());
    case TestFunction::kLevelZero:
      return static_cast<double>(
          std::count_if(points.begin(), points.end(), [](const Crossing& c) { return c.on_central_cross(); }));
    case TestFunction::kCentralCount: {
      const double nb = static_cast<double>(count_in_ball(points, [](const Crossing& c) { return c.point; }));
      return nb * nb;
    }
  }
  return 0.0;
}

std::vector<Crossing> support_of(const std::vector<Relay>& relays) {
  std::vector<Crossing> out;
  out.reserve(relays.size());
  for (const auto& r : relays) out.push_back(r.crossing);
  return out;
}

constexpr std::uint64_t kLhsDomain = 0x1;
constexpr std::uint64_t kRhsDomain = 0x2;

}  // namespace

CampbellReport campbell_check(const MapParams& params_in, PointProcess process, TestFunction f,
                              int replicates) {
  if (replicates < 2) throw std::invalid_argument("campbell_check needs at least 2 replicates");
  MapParams params = params_in;
  params.node_mode = NodeMode::kPoissonN;
  params.validate();

  CampbellReport report;
  report.process = process;
  report.function = f;
  report.replicates = replicates;

  RunningStats lhs;
  for (int r = 0; r < replicates; ++r) {
    Rng rng = make_stream(params.seed, stream_key(kLhsDomain, static_cast<std::uint64_t>(r)));
    switch (process) {
      case PointProcess::kUsers: lhs.add(configuration_sum_users(sample_nodes(params, rng), f)); break;
      case PointProcess::kAuxiliary:
        lhs.add(configuration_sum_crossings(sample_auxiliary_points(params, rng), f));
        break;
      case PointProcess::kRelays:
        lhs.add(configuration_sum_crossings(support_of(sample_relays(params, rng)), f));
        break;
    }
  }
  report.lhs = lhs.estimate();

  const bool needs_config = f == TestFunction::kCentralCount;
  if (process == PointProcess::kUsers || process == PointProcess::kAuxiliary) {
    const double mass = process == PointProcess::kUsers ? static_cast<double>(params.n) : params.rho;
    report.total_mass = mass;
    RunningStats rhs;
    for (int r = 0; r < replicates; ++r) {
      Rng rng = make_stream(params.seed, stream_key(kRhsDomain, static_cast<std::uint64_t>(r)));
      TypicalSample x0 = process == PointProcess::kUsers ? sample_typical_user(params, rng)
                                                         : sample_typical_auxiliary(params, rng);
      double value = 0.0;
      switch (f) {
        case TestFunction::kConstant: value = 1.0; break;
        case TestFunction::kLevelZero:
          value = (process == PointProcess::kUsers ? x0.level == 0 : x0.crossing->on_central_cross()) ? 1.0 : 0.0;
          break;
        case TestFunction::kCentralCount:
          if (in_central_ball(x0.location)) {
            long nb = 0;
            if (process == PointProcess::kUsers) {
              nb = count_in_ball(sample_nodes(params, rng), [](const MobileNode& m) { return m.point(); });
            } else {
              nb = count_in_ball(sample_auxiliary_points(params, rng), [](const Crossing& c) { return c.point; });
            }
            value = static_cast<double>(nb + 1);
          }
          break;
      }
      rhs.add(mass * value);
    }
    report.rhs = rhs.estimate();
    return report;
  }

  // Relays: R(rho) times the self-normalized typical-relay expectation.
  const double relay_mass = expected_relay_count(params.rho, params.p_r).value;
  report.total_mass = relay_mass;
  std::vector<double> w, g;
  w.reserve(static_cast<std::size_t>(replicates));
  g.reserve(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    Rng rng = make_stream(params.seed, stream_key(kRhsDomain, static_cast<std::uint64_t>(r)));
    double weight = 1.0;
    double value = 0.0;
    if (!needs_config) {
      const TypicalSample xi = sample_typical_relay(params, rng);
      weight = xi.weight;
      value = f == TestFunction::kConstant ? 1.0 : (xi.crossing->on_central_cross() ? 1.0 : 0.0);
    } else {
      const std::vector<Crossing> aux = sample_auxiliary_points(params, rng);
      const TypicalSample xs = sample_typical_auxiliary(params, rng);
      const long colocated =
          std::count_if(aux.begin(), aux.end(), [&](const Crossing& c) { return same_crossing(c, *xs.crossing); });
      weight = 1.0 / (1.0 + static_cast<double>(colocated));
      if (in_central_ball(xs.location)) {
        const std::vector<Crossing> support = support_of(relays_from_auxiliary(aux));
        const long nb = count_in_ball(support, [](const Crossing& c) { return c.point; });
        value = static_cast<double>(colocated > 0 ? nb : nb + 1);
      }
    }
    w.push_back(weight);
    g.push_back(weight * value);
  }
  double sw = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    sg += g[i];
  }
  const double ratio = sg / sw;
  const double mean_w = sw / static_cast<double>(w.size());
  RunningStats residual;
  for (std::size_t i = 0; i < w.size(); ++i) residual.add(g[i] - ratio * w[i]);
  const double ratio_se = std::sqrt(residual.variance() / static_cast<double>(w.size())) / mean_w;
  report.rhs = Estimate{relay_mass * ratio, relay_mass * ratio_se};
  return report;
}

double ConcentrationReport::sigma() const {
  const double p = oracle_outside();
  return replicates > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(replicates)) : 0.0;
}

ConcentrationReport concentration_oracle(const MapParams& params, int level, double phi) {
  params.validate();
  if (!(phi > 0.0 && phi <= 1.0)) throw InvalidParameter("phi must lie in (0, 1]");
  if (level < 0 || level > params.max_level) throw InvalidParameter("level outside [0, max_level]");

  ConcentrationReport rep;
  rep.level = level;
  rep.phi = phi;
  rep.n = params.n;
  const double success = node_street_probability(params, level) * phi;
  rep.expected_count = static_cast<double>(params.n) * success;
  rep.lower = rep.expected_count / 2.0;
  rep.upper = 2.0 * rep.expected_count;
  rep.uninformative = rep.expected_count < 1.0;
  if (rep.uninformative) {
    spdlog::warn("concentration probe: expected count {:.3g} < 1, regime uninformative", rep.expected_count);
  }

  // N < lower  <=>  N <= ceil(lower) - 1 ;  N > upper  <=>  N >= floor(upper) + 1
  const double below_max = std::ceil(rep.lower) - 1.0;
  const double above_from = std::floor(rep.upper);
  if (params.node_mode == NodeMode::kExactN) {
    const boost::math::binomial_distribution<double> dist(static_cast<double>(params.n), success);
    rep.oracle_below = below_max >= 0.0 ? boost::math::cdf(dist, below_max) : 0.0;
    rep.oracle_above = above_from >= static_cast<double>(params.n)
                           ? 0.0
                           : boost::math::cdf(boost::math::complement(dist, above_from));
  } else {
    const boost::math::poisson_distribution<double> dist(rep.expected_count);
    rep.oracle_below = below_max >= 0.0 ? boost::math::cdf(dist, below_max) : 0.0;
    rep.oracle_above = boost::math::cdf(boost::math::complement(dist, above_from));
  }
  return rep;
}

ConcentrationReport concentration_probe(const MapParams& params, int level, double phi, int replicates) {
  if (replicates < 1) throw std::invalid_argument("concentration_probe needs replicates >= 1");
  ConcentrationReport rep = concentration_oracle(params, level, phi);
  rep.replicates = replicates;

  // The designated street: horizontal, level H, first index; the interval is [0, phi).
  const StreetId target{Orientation::kHorizontal, level, 1};
  long below = 0, above = 0;
  for (int r = 0; r < replicates; ++r) {
    Rng rng = make_stream(params.seed, static_cast<std::uint64_t>(r));
    const std::vector<MobileNode> nodes = sample_nodes(params, rng);
    long count = 0;
    for (const auto& m : nodes) {
      if (m.street == target && m.pos() < phi) ++count;
    }
    if (static_cast<double>(count) < rep.lower) ++below;
    if (static_cast<double>(count) > rep.upper) ++above;
  }
  rep.empirical_below = static_cast<double>(below) / replicates;
  rep.empirical_above = static_cast<double>(above) / replicates;
  return rep;
}

}  // namespace hfnet
