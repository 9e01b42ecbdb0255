#ifndef AOS_SURFACE_FIELD_H_
#define AOS_SURFACE_FIELD_H_

#include <cstdint>
#include <vector>

#include "aos/thermal_raster.h"

namespace aos {

// Biomass heated by direct sunlight stays within this margin above ambient;
// anything hotter is a potential fire.
inline constexpr float kSolarHeatingMarginC = 15.0f;
inline constexpr float kFreezingPointC = 0.0f;

// Parameters of the ambient-shift / fire-rescale augmentation.
struct AugmentationParams {
  double t_lower_c = kFreezingPointC;
  double t_upper_c = 24.0;  // source ambient (9 C) + 15 C
  double alpha = 0.5;       // sigmoid steepness, 1/C
  double delta_t_c = 0.0;   // target ambient - source ambient
  double t_max_c = 98.0;    // hottest fire temperature in the source data
  double t_max_target_c = 300.0;

  // Source at `source_ambient_c`, shifted to `target_ambient_c`.
  static AugmentationParams for_ambients(double source_ambient_c,
                                         double target_ambient_c,
                                         double t_max_c = 98.0,
                                         double t_max_target_c = 300.0,
                                         double alpha = 0.5);

  // Throws ParameterError if the ordering invariants do not hold.
  void validate() const;
};

// Smooth band weight w(t) = sigmoid(a(t - T_lower)) - sigmoid(a(t - T_upper)).
double augmentation_weight(double t, const AugmentationParams& p);

// t + w(t) * delta_t. Total over finite t.
double augment_nonfire(double t, const AugmentationParams& p);

// Linear rescale of a fire temperature anchored at T_upper that maps T_max to
// the target maximum. Throws DomainError for t <= T_upper.
double augment_fire(double t, const AugmentationParams& p);

// Applies augment_fire above T_upper and augment_nonfire elsewhere. The result
// carries ambient_c + delta_t; no-data pixels stay no-data.
TemperatureRaster augment_raster(const TemperatureRaster& r,
                                 const AugmentationParams& p);

struct HotspotSpec {
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double radius_m = 1.0;
  double peak_c = 80.0;
  // Exponent of the super-Gaussian profile exp(-(r/radius)^falloff); larger
  // values give a flatter core and a sharper rim.
  double falloff = 4.0;
};

struct SurfaceFieldParams {
  std::uint64_t seed = 0;
  double ambient_c = 9.0;
  int size_px = 512;
  double ground_res_m = 0.1;
  std::vector<HotspotSpec> hotspots;
  int octaves = 5;
  double base_wavelength_m = 12.0;
};

// Seeded multi-octave background in [max(0, ambient-4), ambient+15] with
// hotspots blended on top. The raster is centered on the ground origin (see
// ground_to_pixel). Every pixel is a pure function of (seed, position), so
// the output does not depend on evaluation order.
// Throws ParameterError for a hotspot outside the raster or a peak that does
// not exceed ambient + 15.
TemperatureRaster gen_surface_field(const SurfaceFieldParams& params);

TemperatureRaster gen_surface_field(std::uint64_t seed, double ambient_c,
                                    int size_px,
                                    const std::vector<HotspotSpec>& hotspots);

// Ground frame of a surface raster: x east, y north, origin at the raster
// center. Pixel (i, j) has its center at
//   x = (i - (w-1)/2) * res,  y = ((h-1)/2 - j) * res.
struct PixelCoord {
  double x;
  double y;
};
struct GroundPoint {
  double x;
  double y;
};

PixelCoord ground_to_pixel(const TemperatureRaster& r, GroundPoint g);
GroundPoint pixel_to_ground(const TemperatureRaster& r, PixelCoord p);

// Half side length of the raster's ground coverage.
double half_extent_m(const TemperatureRaster& r);

}  // namespace aos

#endif  // AOS_SURFACE_FIELD_H_
