#include "hfnet/map_core.hpp"

#include <cmath>
#include <limits>

namespace hfnet {

const char* to_string(Orientation o) {
  return o == Orientation::kHorizontal ? "H" : "V";
}

std::uint64_t StreetId::axis_fixed() const {
  // b * 2^-(l+1) * 2^64 = b << (63 - l)
  return index << (63 - level);
}

double StreetId::axis() const { return fixed_to_unit(axis_fixed()); }

bool StreetId::valid() const {
  if (level < 0 || level > kMaxExactLevel) return false;
  if ((index & 1u) == 0) return false;
  const std::uint64_t upper = (std::uint64_t{1} << (level + 1)) - 1;
  return index >= 1 && index <= upper;
}

std::size_t StreetIdHash::operator()(const StreetId& s) const noexcept {
  std::uint64_t h = s.index * 0x9E3779B97F4A7C15ull;
  h ^= (static_cast<std::uint64_t>(s.level) << 1 | static_cast<std::uint64_t>(s.orientation)) +
       0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

double fixed_to_unit(std::uint64_t fixed) {
  return std::ldexp(static_cast<double>(fixed), -64);
}

double derive_p_from_dF(double d_F) {
  if (!(d_F >= 2.0)) throw InvalidParameter("d_F must be >= 2");
  return 1.0 - 4.0 * std::exp2(-d_F);
}

double dF_from_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0, 1]");
  const double q = 1.0 - p;
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  return std::log2(4.0 / q);
}

double derive_pr_from_dr(double d_r) {
  if (!(d_r >= 2.0)) throw InvalidParameter("d_r must be >= 2");
  return 1.0 - std::exp2(1.0 - d_r / 2.0);
}

double dr_from_pr(double p_r) {
  if (!(p_r >= 0.0 && p_r <= 1.0)) throw InvalidParameter("p_r must lie in [0, 1]");
  if (p_r == 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::log2(2.0 / (1.0 - p_r));
}

std::vector<StreetId> enumerate_streets(int max_level) {
  if (max_level < 0 || max_level > kMaxExactLevel) {
    throw InvalidParameter("max_level must lie in [0, " + std::to_string(kMaxExactLevel) + "]");
  }
  std::vector<StreetId> out;
  for (Orientation o : {Orientation::kHorizontal, Orientation::kVertical}) {
    for (int l = 0; l <= max_level; ++l) {
      const std::uint64_t upper = (std::uint64_t{1} << (l + 1)) - 1;
      for (std::uint64_t b = 1; b <= upper; b += 2) out.push_back({o, l, b});
    }
  }
  return out;
}

Crossing crossing_point(const StreetId& h, const StreetId& v) {
  if (h.orientation != Orientation::kHorizontal || v.orientation != Orientation::kVertical) {
    throw std::invalid_argument("crossing_point expects (horizontal, vertical) streets");
  }
  if (!h.valid() || !v.valid()) throw std::invalid_argument("crossing_point: invalid street id");
  return Crossing{h, v, Point{v.axis(), h.axis()}};
}

MapParams MapParams::from_dimensions(std::size_t n, double d_F, double rho, double d_r) {
  MapParams m;
  m.n = n;
  m.d_F = d_F;
  m.p = derive_p_from_dF(d_F);
  m.rho = rho;
  m.d_r = d_r;
  m.p_r = derive_pr_from_dr(d_r);
  m.validate();
  return m;
}

MapParams MapParams::from_probabilities(std::size_t n, double p, double rho, double p_r) {
  MapParams m;
  m.n = n;
  m.p = p;
  m.d_F = dF_from_p(p);
  m.rho = rho;
  m.p_r = p_r;
  m.d_r = dr_from_pr(p_r);
  m.validate();
  return m;
}

void MapParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0, 1]");
  if (!(p_r >= 0.0 && p_r <= 1.0)) throw InvalidParameter("p_r must lie in [0, 1]");
  if (!(d_F >= 2.0)) throw InvalidParameter("d_F must be >= 2");
  if (!(d_r >= 2.0)) throw InvalidParameter("d_r must be >= 2");
  if (std::abs(derive_p_from_dF(d_F) - p) > 1e-9) throw InvalidParameter("p and d_F disagree");
  if (std::abs(derive_pr_from_dr(d_r) - p_r) > 1e-9) throw InvalidParameter("p_r and d_r disagree");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidParameter("rho must be finite and >= 0");
  if (max_level < 0 || max_level > kMaxExactLevel) throw InvalidParameter("max_level out of range");
  if (relay_max_level < 0 || relay_max_level > kMaxExactLevel) {
    throw InvalidParameter("relay_max_level out of range");
  }
  if (!(map_length > 0.0)) throw InvalidParameter("map_length must be > 0");
}

}  // namespace hfnet
