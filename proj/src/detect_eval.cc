#include "aos/detect_eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aos/errors.h"
#include "aos/surface_field.h"

namespace aos {

std::vector<Hotspot> detect_hotspots(const TemperatureRaster& r, double threshold_c) {
  if (!std::isfinite(threshold_c)) {
    throw ParameterError("detection threshold must be finite");
  }
  const int w = r.width();
  const int h = r.height();
  const auto data = r.data();
  const double px_area = static_cast<double>(r.ground_res_m()) * r.ground_res_m();
  std::vector<char> seen(data.size(), 0);
  std::vector<Hotspot> out;
  std::vector<std::uint32_t> stack;

  for (std::size_t start = 0; start < data.size(); ++start) {
    if (seen[start] || !(data[start] >= threshold_c)) continue;
    Hotspot hs;
    seen[start] = 1;
    stack.assign(1, static_cast<std::uint32_t>(start));
    while (!stack.empty()) {
      const std::uint32_t p = stack.back();
      stack.pop_back();
      hs.pixels.push_back(p);
      const int px = static_cast<int>(p % w);
      const int py = static_cast<int>(p / w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx;
          const int ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
          if (seen[q] || !(data[q] >= threshold_c)) continue;
          seen[q] = 1;
          stack.push_back(static_cast<std::uint32_t>(q));
        }
      }
    }
    std::sort(hs.pixels.begin(), hs.pixels.end());

    double sum = 0.0, sx = 0.0, sy = 0.0;
    hs.max_c = -std::numeric_limits<double>::infinity();
    hs.bbox = {w, h, -1, -1};
    for (std::uint32_t p : hs.pixels) {
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      sum += data[p];
      sx += x;
      sy += y;
      hs.max_c = std::max<double>(hs.max_c, data[p]);
      hs.bbox.x0 = std::min(hs.bbox.x0, x);
      hs.bbox.y0 = std::min(hs.bbox.y0, y);
      hs.bbox.x1 = std::max(hs.bbox.x1, x);
      hs.bbox.y1 = std::max(hs.bbox.y1, y);
    }
    const double n = static_cast<double>(hs.pixels.size());
    hs.area_px = hs.pixels.size();
    hs.area_m2 = n * px_area;
    hs.mean_c = sum / n;
    hs.centroid_x_px = sx / n;
    hs.centroid_y_px = sy / n;
    const GroundPoint g = pixel_to_ground(r, {hs.centroid_x_px, hs.centroid_y_px});
    hs.centroid_x_m = g.x;
    hs.centroid_y_m = g.y;
    out.push_back(std::move(hs));
  }

  std::sort(out.begin(), out.end(), [](const Hotspot& a, const Hotspot& b) {
    if (a.area_px != b.area_px) return a.area_px > b.area_px;
    if (a.centroid_y_px != b.centroid_y_px) return a.centroid_y_px < b.centroid_y_px;
    return a.centroid_x_px < b.centroid_x_px;
  });
  return out;
}

ErrorStats rmse(const TemperatureRaster& pred, const TemperatureRaster& truth,
                const std::optional<RegimeMask>& regime) {
  if (!pred.same_shape(truth)) {
    throw ParameterError("rmse: rasters differ in size");
  }
  const auto p = pred.data();
  const auto t = truth.data();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!is_valid(p[i]) || !is_valid(t[i])) continue;
    if (regime && !regime->contains(t[i])) continue;
    const double d = static_cast<double>(p[i]) - t[i];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw EmptySelectionError("rmse: no pixel selected");
  ErrorStats s;
  s.count = n;
  s.mse = sum / static_cast<double>(n);
  s.rmse = std::sqrt(s.mse);
  return s;
}

double morphology_iou(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double morphology_iou(const Hotspot& detected, std::span<const std::uint32_t> truth) {
  return morphology_iou(detected.pixels, truth);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("spearman: samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

std::vector<HotspotMatch> match_hotspots(const std::vector<Hotspot>& detections,
                                         const std::vector<std::vector<std::uint32_t>>& truth,
                                         double min_iou) {
  std::vector<HotspotMatch> out;
  out.reserve(truth.size());
  for (const auto& region : truth) {
    HotspotMatch m;
    for (const auto& d : detections) m.best_iou = std::max(m.best_iou, morphology_iou(d, region));
    m.detected = m.best_iou >= min_iou;
    out.push_back(m);
  }
  return out;
}

}  // namespace aos
