#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Geometry of the self-similar street support and the parameter record shared
// by every other module.
//
// Streets live in the unit square. A street of level l sits at the axis
// coordinate b * 2^-(l+1) for odd b, so every coordinate is a dyadic rational.
// Coordinates are carried exactly as 64-bit fixed-point fractions (value / 2^64),
// which is lossless for every level up to kMaxExactLevel.

namespace hfnet {

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Highest level whose street coordinates are exact in 64-bit fixed point.
inline constexpr int kMaxExactLevel = 62;

enum class Orientation : std::uint8_t { kHorizontal = 0, kVertical = 1 };

const char* to_string(Orientation o);

enum class NodeMode : std::uint8_t { kExactN, kPoissonN };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct StreetId {
  Orientation orientation = Orientation::kHorizontal;
  int level = 0;
  std::uint64_t index = 1;  // odd, in [1, 2^(level+1) - 1]

  // Axis coordinate as a fraction of 2^64.
  std::uint64_t axis_fixed() const;
  double axis() const;
  bool valid() const;

  auto operator<=>(const StreetId&) const = default;
};

struct StreetIdHash {
  std::size_t operator()(const StreetId& s) const noexcept;
};

struct Crossing {
  StreetId h_street;
  StreetId v_street;
  Point point;

  bool on_central_cross() const { return h_street.level == 0 || v_street.level == 0; }
};

// Fixed-point helpers: a position along a street is value / 2^64.
double fixed_to_unit(std::uint64_t fixed);

// (1/2)^dF = q/4  =>  p = 1 - 4 * 2^-dF
double derive_p_from_dF(double d_F);
double dF_from_p(double p);
// 2/(1-p_r) = 2^(dr/2)  =>  p_r = 1 - 2^(1 - dr/2)
double derive_pr_from_dr(double d_r);
double dr_from_pr(double p_r);

std::vector<StreetId> enumerate_streets(int max_level);

Crossing crossing_point(const StreetId& h, const StreetId& v);

struct MapParams {
  std::size_t n = 1000;
  NodeMode node_mode = NodeMode::kExactN;
  double d_F = 3.0;
  double p = 0.5;
  double rho = 1000.0;
  double d_r = 3.0;
  double p_r = 0.29289321881345248;  // d_r = 3
  int max_level = 20;
  int relay_max_level = kMaxExactLevel;
  double map_length = 1000.0;
  std::uint64_t seed = 1;

  double q() const { return 1.0 - p; }

  // Canonical constructors: the complementary pair is always derived.
  static MapParams from_dimensions(std::size_t n, double d_F, double rho, double d_r);
  static MapParams from_probabilities(std::size_t n, double p, double rho, double p_r);

  // Throws InvalidParameter on any violated invariant.
  void validate() const;
};

}  // namespace hfnet
