#ifndef AOS_INTEGRATOR_H_
#define AOS_INTEGRATOR_H_

#include <optional>
#include <span>
#include <vector>

#include "aos/camera.h"
#include "aos/thermal_raster.h"

namespace aos {

// Synthetic-aperture waypoint layout. Waypoint (i, j) sits at
//   center + ((i - n/2) * spacing, (j - m/2) * spacing)
// with i along east and j along north; m == 1 is an east-west strip and
// n == 1 a north-south strip.
struct SAGrid {
  int n = 11;
  int m = 11;
  double spacing_m = 2.0;
  double altitude_agl_m = 35.0;
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double yaw_deg = 0.0;

  int center_n() const { return n / 2; }
  int center_m() const { return m / 2; }
  int size() const { return n * m; }

  void validate() const;
  Vec3 waypoint(int i, int j) const;
  CameraPose pose(int i, int j, const CameraIntrinsics& intrinsics) const;
  CameraPose center_pose(const CameraIntrinsics& intrinsics) const {
    return pose(center_n(), center_m(), intrinsics);
  }
};

struct Capture {
  TemperatureRaster image;
  CameraPose pose;
};

// Non-owning capture, for integrating subsets without copying rasters.
struct CaptureView {
  const TemperatureRaster* image;
  CameraPose pose;
};

struct IntegralImage {
  TemperatureRaster sigma;  // no-data where count == 0
  TemperatureRaster count;  // contributing samples per pixel
  SAGrid grid;
  CameraPose center;
};

struct IntegrateOptions {
  // Output camera; defaults to the intrinsics of the center capture (or the
  // first capture when the center waypoint is absent).
  std::optional<CameraIntrinsics> output;
  int threads = 1;
};

// Per-pixel mean of all captures back-projected into the view of the grid's
// center waypoint via the ground plane at ground_height_m. A sample counts
// only where it overlaps the pixel; the mean divides by that count.
//
// Captures must occupy distinct grid waypoints at the grid altitude; a
// subset of the grid is allowed. Samples are accumulated in waypoint order,
// so the result does not depend on the order of `captures`.
// Throws ParameterError for an empty list or a pose that is not a waypoint.
IntegralImage integrate(std::span<const CaptureView> captures, const SAGrid& grid,
                        double ground_height_m = 0.0,
                        const IntegrateOptions& options = {});
IntegralImage integrate(std::span<const Capture> captures, const SAGrid& grid,
                        double ground_height_m = 0.0,
                        const IntegrateOptions& options = {});

// Same reprojection and averaging applied to visibility masks; returns the
// aggregated ground-visible fraction f.
TemperatureRaster integrate_mask(std::span<const CaptureView> masks,
                                 const SAGrid& grid, double ground_height_m = 0.0,
                                 const IntegrateOptions& options = {});
TemperatureRaster integrate_mask(std::span<const Capture> masks,
                                 const SAGrid& grid, double ground_height_m = 0.0,
                                 const IntegrateOptions& options = {});

// A full X x Y capture grid, index j * cols + i.
struct CaptureGrid {
  int cols = 0;  // X, waypoints along east
  int rows = 0;  // Y, waypoints along north
  double spacing_m = 2.0;
  double altitude_agl_m = 35.0;
  std::vector<Capture> captures;

  const Capture& at(int i, int j) const {
    return captures[static_cast<std::size_t>(j) * cols + i];
  }
  void validate() const;
};

struct SlideOptions {
  int stride_n = 1;
  int stride_m = 1;
  // Without padding only windows that fit inside the grid are produced. With
  // padding every stride-th waypoint is a window center and the missing
  // border waypoints are simply excluded.
  bool pad = false;
  IntegrateOptions integrate;
};

struct WindowIntegral {
  int center_i;
  int center_j;
  IntegralImage integral;
};

// Window center waypoints for the given grid and window size.
std::vector<std::pair<int, int>> window_centers(int cols, int rows,
                                                const SAGrid& window,
                                                const SlideOptions& options);

// Applies a fixed window to every placement over a larger grid. Each result
// equals integrate() over that window's captures. Returns an empty list (and
// logs a warning) when a stride exceeds the grid.
std::vector<WindowIntegral> sliding_integrate(const CaptureGrid& grid,
                                              const SAGrid& window,
                                              const SlideOptions& options = {},
                                              double ground_height_m = 0.0);

// Captures of one window placement.
std::vector<CaptureView> window_captures(const CaptureGrid& grid,
                                         const SAGrid& window, int center_i,
                                         int center_j);
SAGrid window_grid(const CaptureGrid& grid, const SAGrid& window, int center_i,
                   int center_j);

}  // namespace aos

#endif  // AOS_INTEGRATOR_H_
