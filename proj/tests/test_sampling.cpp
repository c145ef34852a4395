#include <doctest.h>

#include <cmath>
#include <set>
#include <tuple>

#include "hfnet/regression.hpp"
#include "hfnet/sampling.hpp"
#include "oracles.hpp"

using namespace hfnet;

TEST_CASE("same seed gives the same map") {
  const auto params = MapParams::from_dimensions(300, 3.0, 300.0, 3.0);
  Rng a = make_stream(42, 0);
  Rng b = make_stream(42, 0);
  const auto na = sample_nodes(params, a);
  const auto nb = sample_nodes(params, b);
  REQUIRE(na.size() == nb.size());
  for (std::size_t i = 0; i < na.size(); ++i) {
    CHECK(na[i].street == nb[i].street);
    CHECK(na[i].pos_fixed == nb[i].pos_fixed);
  }
  Rng c = make_stream(42, 1);
  const auto nc = sample_nodes(params, c);
  bool differs = false;
  for (std::size_t i = 0; i < na.size(); ++i) differs = differs || na[i].pos_fixed != nc[i].pos_fixed;
  CHECK(differs);
}

TEST_CASE("stream seeds are distinct across streams") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 1000; ++s) seeds.insert(stream_seed(7, s));
  CHECK(seeds.size() == 1000);
  CHECK(stream_key(1, 2) != stream_key(2, 1));
}

TEST_CASE("exact-n gives n nodes on valid streets") {
  auto params = MapParams::from_dimensions(500, 4.33, 10.0, 3.0);
  params.max_level = 6;
  Rng rng = make_stream(3, 0);
  const auto nodes = sample_nodes(params, rng);
  CHECK(nodes.size() == 500);
  for (const auto& n : nodes) {
    CHECK(n.street.valid());
    CHECK(n.street.level <= 6);
    const auto pt = n.point();
    CHECK(pt.x >= 0.0);
    CHECK(pt.x < 1.0);
    CHECK(pt.y >= 0.0);
    CHECK(pt.y < 1.0);
  }
}

TEST_CASE("poisson-n node count has mean n") {
  auto params = MapParams::from_dimensions(200, 3.0, 10.0, 3.0);
  params.node_mode = NodeMode::kPoissonN;
  RunningStats stats;
  for (int r = 0; r < 400; ++r) {
    Rng rng = make_stream(11, r);
    stats.add(static_cast<double>(sample_nodes(params, rng).size()));
  }
  CHECK(std::abs(stats.mean() - 200.0) < 4.0 * stats.stderr_of_mean());
}

TEST_CASE("street probabilities sum to one") {
  auto params = MapParams::from_dimensions(1, 3.3, 1.0, 3.0);
  params.max_level = 12;
  double total = 0.0;
  for (int l = 0; l <= params.max_level; ++l) total += std::ldexp(2.0, l) * node_street_probability(params, l);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(node_street_probability(params, params.max_level + 1) == 0.0);
}

TEST_CASE("node level frequencies follow the geometric law") {
  auto params = MapParams::from_dimensions(20000, 3.0, 1.0, 3.0);
  Rng rng = make_stream(5, 0);
  const auto nodes = sample_nodes(params, rng);
  std::vector<double> counts(4, 0.0);
  for (const auto& n : nodes) {
    if (n.street.level < 4) counts[n.street.level] += 1.0;
  }
  for (int l = 0; l < 4; ++l) {
    const double prob = std::ldexp(2.0, l) * node_street_probability(params, l);
    const double expect = prob * 20000.0;
    CHECK(std::abs(counts[l] - expect) < 4.0 * std::sqrt(expect * (1.0 - prob)));
  }
}

TEST_CASE("crossing masses sum to one") {
  const double p_r = derive_pr_from_dr(2.6);
  double total = 0.0;
  for (int h = 0; h < 300; ++h)
    for (int v = 0; v < 300; ++v) total += crossing_mass(p_r, h, v) * std::pow(2.0, h + v);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("relays are the distinct auxiliary crossings") {
  const auto params = MapParams::from_dimensions(10, 3.0, 400.0, 2.5);
  Rng rng = make_stream(9, 0);
  const auto points = sample_auxiliary_points(params, rng);
  const auto relays = relays_from_auxiliary(points);
  std::set<std::tuple<int, std::uint64_t, int, std::uint64_t>> keys;
  for (const auto& p : points)
    keys.insert({p.h_street.level, p.h_street.index, p.v_street.level, p.v_street.index});
  CHECK(relays.size() == keys.size());
  CHECK(relays.size() <= points.size());
  for (std::size_t i = 0; i < relays.size(); ++i) {
    CHECK(relays[i].id == i);
    CHECK(relays[i].crossing.h_street.orientation == Orientation::kHorizontal);
    CHECK(relays[i].crossing.v_street.orientation == Orientation::kVertical);
  }
}

TEST_CASE("mean relay count matches the crossing series") {
  const auto params = MapParams::from_dimensions(10, 3.0, 150.0, 3.0);
  RunningStats stats;
  for (int r = 0; r < 300; ++r) {
    Rng rng = make_stream(21, r);
    stats.add(static_cast<double>(sample_relays(params, rng).size()));
  }
  const double expect = static_cast<double>(oracle::relay_count_by_crossings(150.0, params.p_r, 200));
  CHECK(std::abs(stats.mean() - expect) < 4.0 * stats.stderr_of_mean());
}

TEST_CASE("typical relay weight is the inverse co-located count") {
  const auto params = MapParams::from_dimensions(10, 3.0, 50.0, 3.0);
  Rng rng = make_stream(1, 0);
  for (int i = 0; i < 200; ++i) {
    const auto s = sample_typical_relay(params, rng);
    CHECK(s.kind == TypicalKind::kRelay);
    CHECK(s.weight == doctest::Approx(1.0 / (1.0 + s.colocated)));
    REQUIRE(s.crossing.has_value());
    CHECK(s.location.x == s.crossing->point.x);
  }
}

TEST_CASE("d_F = 2 cannot place nodes") {
  const auto params = MapParams::from_dimensions(10, 2.0, 1.0, 3.0);
  Rng rng = make_stream(1, 0);
  CHECK_THROWS_AS(sample_nodes(params, rng), InvalidParameter);
}
