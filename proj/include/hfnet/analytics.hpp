#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "hfnet/map_core.hpp"
#include "hfnet/regression.hpp"
#include "hfnet/sampling.hpp"

namespace hfnet {

inline constexpr int kDefaultKMax = 60;

struct RelayCountEstimate {
  double value = 0.0;
  int k_max = 0;
  // Closed-form bound on the omitted terms (uses 1 - e^-x <= x).
  double tail_bound = 0.0;
};

// Expected number of relays, truncated after k_max anti-diagonals h + v = k.
RelayCountEstimate expected_relay_count(double rho, double p_r, int k_max = kDefaultKMax);

// Expected number of relays on one street of level `level`, summing crossing
// levels 0..v_max.
double expected_relays_on_street(double rho, double p_r, int level, int v_max = kDefaultKMax);

enum class PowerLaw : std::uint8_t {
  kNominal,       // P_max / m^delta
  kLogCorrected,  // P_max * (max(1, ln m))^delta / m^delta, capped at P_max
};

// Common transmit power of the nodes of a street holding m nodes. An empty
// street (m == 0) is charged P_max.
double nominal_power(long m, double delta, double p_max, PowerLaw law = PowerLaw::kNominal);

enum class PointProcess : std::uint8_t { kUsers, kAuxiliary, kRelays };

enum class TestFunction : std::uint8_t {
  kConstant,      // f = 1
  kLevelZero,     // location on the central cross
  kCentralCount,  // 1{|x - c| <= r} * #{y in config : |y - c| <= r}, c = (1/2, 1/2)
};

inline constexpr double kCentralCountRadius = 0.3;

PointProcess parse_point_process(std::string_view name);
TestFunction parse_test_function(std::string_view name);  // throws on unknown id
const char* to_string(PointProcess p);
const char* to_string(TestFunction f);

struct CampbellReport {
  PointProcess process = PointProcess::kUsers;
  TestFunction function = TestFunction::kConstant;
  Estimate lhs;
  Estimate rhs;
  int replicates = 0;
  // n, rho or R(rho): the exact mean of the f = 1 sum.
  double total_mass = 0.0;

  double combined_stderr() const;
  bool agrees(double z = 3.0) const;
};

// Both sides of the Campbell-Mecke identity by Monte Carlo. Users are drawn
// from the Poisson (poisson-n) model regardless of params.node_mode, since the
// identity is stated for Poisson processes.
CampbellReport campbell_check(const MapParams& params, PointProcess process, TestFunction f,
                              int replicates);

struct ConcentrationReport {
  int level = 0;
  double phi = 1.0;
  int replicates = 0;
  std::size_t n = 0;
  double expected_count = 0.0;  // n * lambda_H * phi
  double lower = 0.0;           // expected_count / 2
  double upper = 0.0;           // 2 * expected_count
  double empirical_below = 0.0;
  double empirical_above = 0.0;
  double oracle_below = 0.0;
  double oracle_above = 0.0;
  bool uninformative = false;  // expected_count < 1

  double empirical_outside() const { return empirical_below + empirical_above; }
  double oracle_outside() const { return oracle_below + oracle_above; }
  // Binomial standard deviation of the empirical outside-frequency under the oracle.
  double sigma() const;
};

// Exact tails of the count on an interval of fraction phi of one level-H street:
// Binomial(n, lambda_H phi) in exact-n mode, Poisson(n lambda_H phi) otherwise.
ConcentrationReport concentration_oracle(const MapParams& params, int level, double phi);

ConcentrationReport concentration_probe(const MapParams& params, int level, double phi, int replicates);

}  // namespace hfnet
