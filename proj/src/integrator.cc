#include "aos/integrator.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "aos/detail/bilinear.h"
#include "aos/errors.h"

namespace aos {
namespace {

constexpr double kWaypointTolM = 1e-3;

struct Slotted {
  int slot;
  const CaptureView* view;
};

std::vector<Slotted> assign_slots(std::span<const CaptureView> captures,
                                  const SAGrid& grid) {
  std::vector<Slotted> out;
  out.reserve(captures.size());
  std::vector<char> taken(static_cast<std::size_t>(grid.size()), 0);
  for (const auto& c : captures) {
    if (c.image == nullptr) throw ParameterError("integrate: null capture image");
    const double fi = (c.pose.position.x - grid.center_x_m) / grid.spacing_m + grid.center_n();
    const double fj = (c.pose.position.y - grid.center_y_m) / grid.spacing_m + grid.center_m();
    const long i = std::lround(fi);
    const long j = std::lround(fj);
    if (std::abs(fi - i) * grid.spacing_m > kWaypointTolM ||
        std::abs(fj - j) * grid.spacing_m > kWaypointTolM || i < 0 || j < 0 ||
        i >= grid.n || j >= grid.m) {
      throw ParameterError("integrate: capture pose is not a waypoint of the grid");
    }
    if (std::abs(c.pose.position.z - grid.altitude_agl_m) > kWaypointTolM) {
      throw ParameterError("integrate: capture altitude does not match the grid");
    }
    const int slot = static_cast<int>(j) * grid.n + static_cast<int>(i);
    if (taken[slot]) {
      throw ParameterError("integrate: two captures share waypoint (" +
                           std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    taken[slot] = 1;
    out.push_back({slot, &c});
  }
  std::sort(out.begin(), out.end(),
            [](const Slotted& a, const Slotted& b) { return a.slot < b.slot; });
  return out;
}

void accumulate_rows(const std::vector<Slotted>& slotted,
                     const std::vector<ImageAffine>& maps, int width, int row_begin,
                     int row_end, std::vector<double>& sum,
                     std::vector<std::uint32_t>& count) {
  for (std::size_t s = 0; s < slotted.size(); ++s) {
    const TemperatureRaster& src = *slotted[s].view->image;
    const float* data = src.data().data();
    const int sw = src.width();
    const int sh = src.height();
    const ImageAffine& a = maps[s];
    for (int y = row_begin; y < row_end; ++y) {
      const double bx = a.m01 * y + a.b0;
      const double by = a.m11 * y + a.b1;
      double* sum_row = sum.data() + static_cast<std::size_t>(y) * width;
      std::uint32_t* count_row = count.data() + static_cast<std::size_t>(y) * width;
      for (int x = 0; x < width; ++x) {
        const double sx = a.m00 * x + bx;
        const double sy = a.m10 * x + by;
        const float v = detail::bilinear(data, sw, sh, sx, sy);
        if (v == v) {
          sum_row[x] += v;
          ++count_row[x];
        }
      }
    }
  }
}

}  // namespace

void SAGrid::validate() const {
  if (n < 1 || m < 1) throw ParameterError("SA grid needs n >= 1 and m >= 1");
  if (!(spacing_m > 0.0)) throw ParameterError("SA grid spacing must be > 0");
  if (!(altitude_agl_m > 0.0)) throw ParameterError("SA grid altitude must be > 0");
}

Vec3 SAGrid::waypoint(int i, int j) const {
  return {center_x_m + (i - center_n()) * spacing_m,
          center_y_m + (j - center_m()) * spacing_m, altitude_agl_m};
}

CameraPose SAGrid::pose(int i, int j, const CameraIntrinsics& intrinsics) const {
  return CameraPose{waypoint(i, j), yaw_deg, intrinsics};
}

IntegralImage integrate(std::span<const CaptureView> captures, const SAGrid& grid,
                        double ground_height_m, const IntegrateOptions& options) {
  grid.validate();
  if (captures.empty()) throw ParameterError("integrate: no captures");
  const std::vector<Slotted> slotted = assign_slots(captures, grid);

  const int center_slot = grid.center_m() * grid.n + grid.center_n();
  CameraIntrinsics out = slotted.front().view->pose.intrinsics;
  for (const auto& s : slotted) {
    if (s.slot == center_slot) out = s.view->pose.intrinsics;
  }
  if (options.output) out = *options.output;
  const CameraPose center = grid.center_pose(out);
  validate_pose(center);

  std::vector<ImageAffine> maps;
  maps.reserve(slotted.size());
  for (const auto& s : slotted) {
    maps.push_back(view_to_view_affine(center, s.view->pose, ground_height_m));
  }

  const int w = out.width;
  const int h = out.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> sum(n, 0.0);
  std::vector<std::uint32_t> count(n, 0);
  const int threads = std::clamp(options.threads, 1, h);
  if (threads == 1) {
    accumulate_rows(slotted, maps, w, 0, h, sum, count);
  } else {
    // Row bands keep each pixel's accumulation order unchanged.
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
      const int r0 = h * t / threads;
      const int r1 = h * (t + 1) / threads;
      pool.emplace_back([&, r0, r1] {
        accumulate_rows(slotted, maps, w, r0, r1, sum, count);
      });
    }
  }

  std::vector<float> sigma(n);
  std::vector<float> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    sigma[i] = count[i] > 0 ? static_cast<float>(sum[i] / count[i]) : kNoData;
    counts[i] = static_cast<float>(count[i]);
  }
  const float ambient = slotted.front().view->image->ambient_c();
  const float gsd = static_cast<float>(2.0 * footprint_half_m(center, ground_height_m) / w);
  return IntegralImage{TemperatureRaster(w, h, ambient, gsd, std::move(sigma)),
                       TemperatureRaster(w, h, ambient, gsd, std::move(counts)),
                       grid, center};
}

IntegralImage integrate(std::span<const Capture> captures, const SAGrid& grid,
                        double ground_height_m, const IntegrateOptions& options) {
  std::vector<CaptureView> views;
  views.reserve(captures.size());
  for (const auto& c : captures) views.push_back({&c.image, c.pose});
  return integrate(views, grid, ground_height_m, options);
}

TemperatureRaster integrate_mask(std::span<const CaptureView> masks,
                                 const SAGrid& grid, double ground_height_m,
                                 const IntegrateOptions& options) {
  return integrate(masks, grid, ground_height_m, options).sigma;
}

TemperatureRaster integrate_mask(std::span<const Capture> masks,
                                 const SAGrid& grid, double ground_height_m,
                                 const IntegrateOptions& options) {
  return integrate(masks, grid, ground_height_m, options).sigma;
}

void CaptureGrid::validate() const {
  if (cols < 1 || rows < 1) throw ParameterError("capture grid is empty");
  if (captures.size() != static_cast<std::size_t>(cols) * rows) {
    throw ParameterError("capture grid size does not match cols * rows");
  }
}

std::vector<std::pair<int, int>> window_centers(int cols, int rows,
                                                const SAGrid& window,
                                                const SlideOptions& options) {
  std::vector<std::pair<int, int>> centers;
  if (options.stride_n < 1 || options.stride_m < 1) {
    throw ParameterError("sliding window stride must be >= 1");
  }
  if (options.stride_n > cols || options.stride_m > rows) {
    spdlog::warn("sliding window stride ({}, {}) exceeds the {}x{} grid",
                 options.stride_n, options.stride_m, cols, rows);
    return centers;
  }
  std::vector<int> ci;
  std::vector<int> cj;
  if (options.pad) {
    for (int i = 0; i < cols; i += options.stride_n) ci.push_back(i);
    for (int j = 0; j < rows; j += options.stride_m) cj.push_back(j);
  } else {
    for (int s = 0; s + window.n <= cols; s += options.stride_n) ci.push_back(s + window.center_n());
    for (int s = 0; s + window.m <= rows; s += options.stride_m) cj.push_back(s + window.center_m());
  }
  if (ci.empty() || cj.empty()) {
    spdlog::warn("{}x{} window does not fit the {}x{} grid without padding",
                 window.n, window.m, cols, rows);
  }
  for (int j : cj) {
    for (int i : ci) centers.emplace_back(i, j);
  }
  return centers;
}

SAGrid window_grid(const CaptureGrid& grid, const SAGrid& window, int center_i,
                   int center_j) {
  const CameraPose& c = grid.at(center_i, center_j).pose;
  SAGrid g = window;
  g.spacing_m = grid.spacing_m;
  g.altitude_agl_m = grid.altitude_agl_m;
  g.center_x_m = c.position.x;
  g.center_y_m = c.position.y;
  g.yaw_deg = c.yaw_deg;
  return g;
}

std::vector<CaptureView> window_captures(const CaptureGrid& grid,
                                         const SAGrid& window, int center_i,
                                         int center_j) {
  std::vector<CaptureView> views;
  const int i0 = center_i - window.center_n();
  const int j0 = center_j - window.center_m();
  for (int j = std::max(0, j0); j < std::min(grid.rows, j0 + window.m); ++j) {
    for (int i = std::max(0, i0); i < std::min(grid.cols, i0 + window.n); ++i) {
      const Capture& c = grid.at(i, j);
      views.push_back({&c.image, c.pose});
    }
  }
  return views;
}

std::vector<WindowIntegral> sliding_integrate(const CaptureGrid& grid,
                                              const SAGrid& window,
                                              const SlideOptions& options,
                                              double ground_height_m) {
  grid.validate();
  window.validate();
  std::vector<WindowIntegral> out;
  for (const auto& [ci, cj] : window_centers(grid.cols, grid.rows, window, options)) {
    const auto views = window_captures(grid, window, ci, cj);
    out.push_back({ci, cj,
                   integrate(views, window_grid(grid, window, ci, cj),
                             ground_height_m, options.integrate)});
  }
  return out;
}

}  // namespace aos
