#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hfnet/map_core.hpp"
#include "hfnet/sampling.hpp"

namespace hfnet {

struct Segment {
  std::string id;
  double length = 0.0;   // meters
  double density = 0.0;  // vehicles per meter
};

struct Intersection {
  std::string seg_a;
  std::string seg_b;
  bool has_relay = false;
};

struct FitDataset {
  std::vector<Segment> segments;
  std::vector<Intersection> intersections;

  // Throws std::invalid_argument on bad lengths, densities or dangling ids.
  void validate() const;
};

struct ProfilePoint {
  std::string segment_id;
  double xi = 0.0;  // length of all strictly denser segments
  double mu = 0.0;  // density of this segment
};

// Sorted by xi ascending (density descending, ties by segment id).
std::vector<ProfilePoint> density_profile(const std::vector<Segment>& segments);

struct FitResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
  double window_lo = 0.0;  // regressor range actually used
  double window_hi = 0.0;
  bool in_model = false;  // estimate >= 2
  std::vector<std::pair<double, double>> points;  // (x, y) before taking logs
};

inline constexpr double kDefaultTailFraction = 0.5;

FitResult fit_dF(const std::vector<ProfilePoint>& profile, double tail_fraction = kDefaultTailFraction);

enum class RatioMode : std::uint8_t {
  kPerCell,     // R/N inside each (xi_1, xi_2) cell
  kCumulative,  // R/N over all intersections below (xi_1, xi_2)
};

struct RelayFitOptions {
  int bins = 8;
  int min_count = 5;
  RatioMode mode = RatioMode::kPerCell;
  // Share of usable cells kept, largest xi_1 * xi_2 first (at least 3).
  double tail_fraction = kDefaultTailFraction;
};

FitResult fit_dr(const FitDataset& dataset, const RelayFitOptions& options = {});

// segments.csv: segment_id,length_m,density
std::vector<Segment> load_segments_csv(const std::filesystem::path& path);
// intersections.csv: seg_a,seg_b,has_relay
std::vector<Intersection> load_intersections_csv(const std::filesystem::path& path);

enum class DensityMode : std::uint8_t {
  kExpected,   // n * lambda_l per street
  kEmpirical,  // sampled node count per street
};

struct ExportOptions {
  int level = 8;
  DensityMode density = DensityMode::kExpected;
};

// One segment per street up to options.level, one intersection per crossing of
// two exported streets; has_relay from the sampled relays.
FitDataset export_synthetic(const MapParams& params, const std::vector<MobileNode>& nodes,
                            const std::vector<Relay>& relays, const ExportOptions& options = {});

void write_segments_csv(const std::vector<Segment>& segments, const std::filesystem::path& path);
void write_intersections_csv(const std::vector<Intersection>& intersections, const std::filesystem::path& path);

}  // namespace hfnet
