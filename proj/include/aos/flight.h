#ifndef AOS_FLIGHT_H_
#define AOS_FLIGHT_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "aos/forest_scene.h"
#include "aos/integrator.h"
#include "aos/surface_field.h"

namespace aos {

enum class HotspotPlacement {
  kRandom,        // uniform inside the central view, non-overlapping
  kUnderCanopy,   // each hotspot centered below a tree crown
};

struct FlightParams {
  std::uint64_t seed = 0;
  ForestParams forest;  // forest.seed is derived from `seed`
  ThermalEnv env;       // env.ambient_c is the target ambient

  // Surface synthesis happens at a fixed source ambient and is then shifted to
  // env.ambient_c by the augmentation.
  double source_ambient_c = 9.0;
  int surface_px = 512;
  double surface_res_m = 0.1;
  double t_max_c = 98.0;
  double t_max_target_c = 300.0;
  double alpha = 0.5;

  int hotspot_count = 4;
  HotspotPlacement placement = HotspotPlacement::kRandom;
  Range hotspot_radius_m{0.8, 1.4};
  Range hotspot_peak_c{60.0, 98.0};  // source-frame peaks
  double hotspot_region_m = 8.0;      // hotspots stay within +-this of the center
  // When non-empty these are used verbatim (source frame) instead of planning.
  std::vector<HotspotSpec> explicit_hotspots;

  SAGrid grid;  // waypoint layout, centered on the origin
  int image_px = 256;
  int supersampling = 1;
  int threads = 1;

  void validate() const;
  AugmentationParams augmentation() const {
    return AugmentationParams::for_ambients(source_ambient_c, env.ambient_c, t_max_c,
                                            t_max_target_c, alpha);
  }
  CameraIntrinsics intrinsics() const { return {image_px, image_px}; }
};

struct FlightData {
  FlightParams params;
  std::vector<HotspotSpec> hotspots;
  std::shared_ptr<const TemperatureRaster> surface_source;  // before augmentation
  std::shared_ptr<const TemperatureRaster> surface;         // augmented ground truth
  std::size_t tree_count = 0;
  std::size_t leaf_count = 0;
  // Grid captures in waypoint order j * n + i.
  std::vector<Capture> images;
  std::vector<Capture> masks;
  std::vector<Capture> vegetation;
  // Center view of the bare ground: the reference every method is scored on.
  TemperatureRaster truth = TemperatureRaster::filled(1, 1, 0.0f);

  const Capture& center_image() const;
  CaptureGrid image_grid() const;
};

// Hotspot layout for a flight; deterministic per seed.
std::vector<HotspotSpec> plan_hotspots(const FlightParams& p);

// Runs surface synthesis, augmentation, scene construction and rendering of
// every waypoint plus the bare-ground center view.
FlightData simulate_flight(const FlightParams& p);

// Captures of one row (j fixed) or one column (i fixed) of the grid with the
// matching 1D grid layout.
struct Slice {
  std::vector<CaptureView> views;
  SAGrid grid;
};
Slice row_slice(const std::vector<Capture>& captures, const SAGrid& grid, int j);
Slice column_slice(const std::vector<Capture>& captures, const SAGrid& grid, int i);
Slice full_grid(const std::vector<Capture>& captures, const SAGrid& grid);

}  // namespace aos

#endif  // AOS_FLIGHT_H_
