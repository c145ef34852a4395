#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hfnet/comm_graph.hpp"
#include "oracles.hpp"

using namespace hfnet;

namespace {

std::uint64_t at(double frac) { return static_cast<std::uint64_t>(std::ldexp(frac, 64)); }

MobileNode node(std::size_t id, StreetId s, double pos) { return MobileNode{id, s, at(pos)}; }

const StreetId kH0{Orientation::kHorizontal, 0, 1};
const StreetId kV0{Orientation::kVertical, 0, 1};
const StreetId kV1{Orientation::kVertical, 1, 1};  // x = 1/4
const StreetId kH2{Orientation::kHorizontal, 2, 5};  // y = 5/8

}  // namespace

TEST_CASE("nodes on one street form a sorted chain") {
  const std::vector<MobileNode> nodes = {node(0, kH0, 0.7), node(1, kH0, 0.1), node(2, kH0, 0.4)};
  const auto g = build_graph(nodes, {}, EnergyModel{});
  CHECK(g.entity_count() == 3);
  CHECK(g.p_max() == doctest::Approx(1e6));
  REQUIRE(g.threads().size() == 1);
  const auto& th = g.threads()[0];
  CHECK(th.members == std::vector<std::size_t>{1, 2, 0});
  CHECK(th.population == 3);
  REQUIRE(g.edges().size() == 2);
  for (const auto& e : g.edges()) CHECK(e.power == doctest::Approx(1e6 / 9.0));
  CHECK(g.edge_between(1, 2).has_value());
  CHECK(g.edge_between(2, 0).has_value());
  CHECK_FALSE(g.edge_between(1, 0).has_value());
  CHECK(g.neighbors(2).size() == 2);
  CHECK(g.neighbors(2)[0].to == 0);
  CHECK(g.neighbors(2)[1].to == 1);
  CHECK(th.prefix_energy.back() == doctest::Approx(2e6 / 9.0));
}

TEST_CASE("a relay joins two streets and does not count as population") {
  const std::vector<MobileNode> nodes = {node(0, kH0, 0.1), node(1, kH0, 0.9), node(2, kV1, 0.2),
                                         node(3, kV1, 0.8)};
  const std::vector<Relay> relays = {Relay{0, crossing_point(kH0, kV1)}};
  const auto g = build_graph(nodes, relays, EnergyModel{});
  CHECK(g.node_count() == 4);
  CHECK(g.relay_count() == 1);
  const std::size_t r = g.relay_entity(0);
  CHECK(g.is_relay(r));
  CHECK(g.entity(r).slot_count == 2);
  CHECK(g.entity(r).on_central_cross);
  CHECK(g.relay_at(kH0, kV1) == r);
  CHECK_FALSE(g.relay_at(kH0, kV0).has_value());
  CHECK(g.neighbors(r).size() == 4);
  CHECK(g.street_population(kH0) == 2);
  CHECK(g.street_population(kV1) == 2);
  CHECK(g.street_population(kH2) == 0);
  CHECK_THROWS_AS(g.street_population(StreetId{Orientation::kHorizontal, 1, 2}), std::invalid_argument);
  const auto e = g.edge_between(0, r);
  REQUIRE(e.has_value());
  CHECK(g.edges()[*e].power == doctest::Approx(1e6 / 4.0));
  CHECK(g.edges()[*e].gap == doctest::Approx(0.15));
}

TEST_CASE("relays in population when requested") {
  const std::vector<MobileNode> nodes = {node(0, kH0, 0.1)};
  const std::vector<Relay> relays = {Relay{0, crossing_point(kH0, kV1)}};
  EnergyModel model;
  model.count_relays_in_population = true;
  const auto g = build_graph(nodes, relays, model);
  CHECK(g.street_population(kH0) == 2);
  CHECK(g.street_population(kV1) == 1);
}

TEST_CASE("empty street segments are charged full power") {
  const std::vector<Relay> relays = {Relay{0, crossing_point(kH2, kV0)}, Relay{1, crossing_point(kH2, kV1)}};
  const auto g = build_graph({}, relays, EnergyModel{});
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].power == g.p_max());
}

TEST_CASE("distance model charges kappa (gap L)^delta") {
  const std::vector<MobileNode> nodes = {node(0, kH2, 0.25), node(1, kH2, 0.75)};
  EnergyModel model;
  model.kind = EnergyKind::kDistancePathloss;
  model.delta = 3.0;
  model.kappa = 2.0;
  model.map_length = 100.0;
  const auto g = build_graph(nodes, {}, model);
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].power == doctest::Approx(2.0 * std::pow(50.0, 3.0)));
}

TEST_CASE("two hops through a middle entity never beat the direct hop under pathloss") {
  Rng rng = make_stream(8, 0);
  std::uniform_real_distribution<double> pos(0.0, 1.0), delta(2.0, 5.0);
  for (int i = 0; i < 2000; ++i) {
    double a = pos(rng), b = pos(rng), c = pos(rng);
    if (a > c) std::swap(a, c);
    if (!(a < b && b < c)) continue;
    EnergyModel model;
    model.kind = EnergyKind::kDistancePathloss;
    model.delta = delta(rng);
    const auto two = build_graph({node(0, kH2, a), node(1, kH2, b), node(2, kH2, c)}, {}, model);
    const auto one = build_graph({node(0, kH2, a), node(2, kH2, c)}, {}, model);
    CHECK(two.threads()[0].prefix_energy.back() <= one.threads()[0].prefix_energy.back());
  }
}

TEST_CASE("graph rejects bad input") {
  const std::vector<Relay> twice = {Relay{0, crossing_point(kH0, kV1)}, Relay{1, crossing_point(kH0, kV1)}};
  CHECK_THROWS_AS(build_graph({}, twice, EnergyModel{}), std::invalid_argument);
  EnergyModel bad;
  bad.delta = 0.5;
  CHECK_THROWS_AS(build_graph({}, {}, bad), InvalidParameter);
  const auto g = build_graph({node(0, kH0, 0.5)}, {}, EnergyModel{});
  CHECK_THROWS_AS(g.check_entity(1), std::out_of_range);
  CHECK(parse_energy_kind("distance") == EnergyKind::kDistancePathloss);
  CHECK_THROWS_AS(parse_energy_kind("magic"), std::invalid_argument);
}

TEST_CASE("edges csv") {
  const auto g = build_graph({node(0, kH0, 0.25), node(1, kH0, 0.75)}, {}, EnergyModel{});
  std::ostringstream out;
  g.write_edges_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("u_id,v_id,street,gap,power,energy\n", 0) == 0);
  CHECK(text.find("0,1,H:0:1,0.5,") != std::string::npos);
}

TEST_CASE("every edge joins consecutive thread members") {
  Rng rng = make_stream(12, 0);
  const auto g = oracle::small_graph(rng, 40, EnergyModel{});
  for (const auto& e : g.edges()) {
    const auto pu = g.position_on(e.u, e.thread);
    const auto pv = g.position_on(e.v, e.thread);
    REQUIRE(pu.has_value());
    REQUIRE(pv.has_value());
    CHECK(*pv == *pu + 1);
  }
}
