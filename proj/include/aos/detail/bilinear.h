#ifndef AOS_DETAIL_BILINEAR_H_
#define AOS_DETAIL_BILINEAR_H_

#include <algorithm>
#include <cstddef>
#include <limits>

namespace aos::detail {

// Offsets this close to a pixel center or to the sampled area snap onto it,
// so a view mapped onto itself samples its own pixels exactly despite
// rounding in the reprojection.
inline constexpr double kSnapPx = 1e-6;

inline double lerp_skip_zero(double a, double b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return a * (1.0 - t) + b * t;
}

// Shared bilinear kernel; see resample_bilinear for the contract. Only
// neighbours with non-zero weight contribute, so a no-data neighbour poisons
// the sample exactly when it would carry weight.
inline float bilinear(const float* data, int w, int h, double x, double y) {
  if (!(x >= -kSnapPx && y >= -kSnapPx && x <= w - 1 + kSnapPx && y <= h - 1 + kSnapPx)) {
    return std::numeric_limits<float>::quiet_NaN();
  }
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  double fx = x - x0;
  double fy = y - y0;
  if (fx < kSnapPx) fx = 0.0;
  if (fx > 1.0 - kSnapPx) fx = 1.0;
  if (fy < kSnapPx) fy = 0.0;
  if (fy > 1.0 - kSnapPx) fy = 1.0;
  const float* r0 = data + static_cast<std::size_t>(y0) * w;
  const float* r1 = data + static_cast<std::size_t>(y1) * w;
  const double top = fy == 1.0 ? 0.0 : lerp_skip_zero(r0[x0], r0[x1], fx);
  const double bottom = fy == 0.0 ? 0.0 : lerp_skip_zero(r1[x0], r1[x1], fx);
  return static_cast<float>(lerp_skip_zero(top, bottom, fy));
}

}  // namespace aos::detail

#endif  // AOS_DETAIL_BILINEAR_H_
