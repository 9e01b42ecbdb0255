#ifndef AOS_DETECT_EVAL_H_
#define AOS_DETECT_EVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aos/thermal_raster.h"

namespace aos {

inline constexpr double kDefaultDetectionThresholdC = 50.0;

struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;  // inclusive
  int y1 = 0;
};

// One 8-connected component of pixels at or above the detection threshold.
struct Hotspot {
  std::vector<std::uint32_t> pixels;  // linear indices y * width + x, ascending
  std::size_t area_px = 0;
  double area_m2 = 0.0;
  double centroid_x_px = 0.0;
  double centroid_y_px = 0.0;
  double centroid_x_m = 0.0;  // ground frame of the raster (x east, y north)
  double centroid_y_m = 0.0;
  double mean_c = 0.0;
  double max_c = 0.0;
  PixelBox bbox;
};

// Components ordered by area descending, then centroid row, then column.
// No-data pixels never belong to a component.
std::vector<Hotspot> detect_hotspots(const TemperatureRaster& r,
                                     double threshold_c = kDefaultDetectionThresholdC);

struct ErrorStats {
  double mse = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

// Error over pixels valid in both rasters whose truth value lies in `regime`.
// Throws ParameterError on a size mismatch and EmptySelectionError when no
// pixel qualifies.
ErrorStats rmse(const TemperatureRaster& pred, const TemperatureRaster& truth,
                const std::optional<RegimeMask>& regime = std::nullopt);

// Intersection over union of two ascending index sets; 0 for an empty union.
double morphology_iou(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
double morphology_iou(const Hotspot& detected, std::span<const std::uint32_t> truth);

// Spearman rank correlation with average ranks for ties. NaN when either
// sample has no variance or fewer than two points.
double spearman(std::span<const double> x, std::span<const double> y);

struct HotspotMatch {
  double best_iou = 0.0;
  bool detected = false;
};

inline constexpr double kDefaultMatchIou = 0.5;

// For each truth region the best IoU over all detections; a region counts as
// detected when that IoU reaches `min_iou`.
std::vector<HotspotMatch> match_hotspots(const std::vector<Hotspot>& detections,
                                         const std::vector<std::vector<std::uint32_t>>& truth,
                                         double min_iou = kDefaultMatchIou);

// One row of an evaluation sweep.
struct EvaluationRecord {
  double density_tpha = 0.0;
  double ambient_c = 0.0;
  double sun_abs_c = 0.0;
  double solar_deg = 0.0;
  std::string sa_type;  // "2d", "1d-row", "1d-col" or "none"
  std::string method;   // "single", "integral", "corrected"
  std::string regime;   // "full" or "fire"
  double mse = 0.0;
  double rmse = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // set when the configuration failed; metrics are NaN
};

}  // namespace aos

#endif  // AOS_DETECT_EVAL_H_
