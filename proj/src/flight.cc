#include "aos/flight.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "aos/errors.h"
#include "aos/rng.h"

namespace aos {
namespace {

constexpr int kPlacementAttempts = 2000;
constexpr double kHotspotGapM = 1.0;

bool separated(const std::vector<HotspotSpec>& placed, double x, double y, double r) {
  for (const auto& h : placed) {
    if (std::hypot(h.center_x_m - x, h.center_y_m - y) < h.radius_m + r + kHotspotGapM) {
      return false;
    }
  }
  return true;
}

ForestParams seeded_forest(const FlightParams& p) {
  ForestParams fp = p.forest;
  fp.seed = derive_seed(p.seed, "forest");
  return fp;
}

}  // namespace

void FlightParams::validate() const {
  forest.validate();
  env.validate();
  grid.validate();
  if (image_px < 8) throw ParameterError("flight: image_px must be >= 8");
  if (supersampling < 1) throw ParameterError("flight: supersampling must be >= 1");
  if (threads < 1) throw ParameterError("flight: threads must be >= 1");
  if (surface_px < 8) throw ParameterError("flight: surface_px must be >= 8");
  if (!(surface_res_m > 0.0)) throw ParameterError("flight: surface_res_m must be > 0");
  if (hotspot_count < 0) throw ParameterError("flight: hotspot_count must be >= 0");
  if (!(hotspot_radius_m.min > 0.0 && hotspot_radius_m.min <= hotspot_radius_m.max)) {
    throw ParameterError("flight: invalid hotspot radius range");
  }
  if (!(hotspot_peak_c.min <= hotspot_peak_c.max)) {
    throw ParameterError("flight: invalid hotspot peak range");
  }
  if (!(hotspot_region_m >= 0.0) ||
      hotspot_region_m + hotspot_radius_m.max > 0.5 * surface_px * surface_res_m) {
    throw ParameterError("flight: hotspot region exceeds the surface raster");
  }
  augmentation().validate();
}

const Capture& FlightData::center_image() const {
  const SAGrid& g = params.grid;
  return images[static_cast<std::size_t>(g.center_m()) * g.n + g.center_n()];
}

CaptureGrid FlightData::image_grid() const {
  return CaptureGrid{params.grid.n, params.grid.m, params.grid.spacing_m,
                     params.grid.altitude_agl_m, images};
}

std::vector<HotspotSpec> plan_hotspots(const FlightParams& p) {
  if (!p.explicit_hotspots.empty()) return p.explicit_hotspots;
  SplitMix64 rng(derive_seed(p.seed, "hotspots"));
  std::vector<HotspotSpec> out;
  const double region = p.hotspot_region_m;

  if (p.placement == HotspotPlacement::kRandom) {
    for (int k = 0; k < p.hotspot_count; ++k) {
      const double r = rng.uniform(p.hotspot_radius_m.min, p.hotspot_radius_m.max);
      const double peak = rng.uniform(p.hotspot_peak_c.min, p.hotspot_peak_c.max);
      for (int a = 0; a < kPlacementAttempts; ++a) {
        const double x = rng.uniform(-region, region);
        const double y = rng.uniform(-region, region);
        if (separated(out, x, y, r)) {
          out.push_back({x, y, r, peak});
          break;
        }
      }
    }
  } else {
    const std::vector<Tree> trees = place_trees(seeded_forest(p));
    std::vector<const Tree*> candidates;
    for (const auto& t : trees) {
      if (std::abs(t.x) <= region && std::abs(t.y) <= region) candidates.push_back(&t);
    }
    // Seeded Fisher-Yates keeps the choice independent of std library details.
    for (std::size_t i = candidates.size(); i > 1; --i) {
      const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(candidates[i - 1], candidates[std::min(k, i - 1)]);
    }
    // Hotspots are centered on the stem, below the crown.
    for (const Tree* t : candidates) {
      if (static_cast<int>(out.size()) == p.hotspot_count) break;
      const double r = std::min(rng.uniform(p.hotspot_radius_m.min, p.hotspot_radius_m.max),
                                t->crown_radius_m);
      const double peak = rng.uniform(p.hotspot_peak_c.min, p.hotspot_peak_c.max);
      if (separated(out, t->x, t->y, r)) out.push_back({t->x, t->y, r, peak});
    }
  }
  if (static_cast<int>(out.size()) < p.hotspot_count) {
    spdlog::warn("placed {} of {} hotspots", out.size(), p.hotspot_count);
  }
  return out;
}

FlightData simulate_flight(const FlightParams& p) {
  p.validate();
  FlightData d;
  d.params = p;
  d.hotspots = plan_hotspots(p);

  SurfaceFieldParams sp;
  sp.seed = derive_seed(p.seed, "surface");
  sp.ambient_c = p.source_ambient_c;
  sp.size_px = p.surface_px;
  sp.ground_res_m = p.surface_res_m;
  sp.hotspots = d.hotspots;
  auto source = std::make_shared<const TemperatureRaster>(gen_surface_field(sp));
  d.surface_source = source;
  d.surface = std::make_shared<const TemperatureRaster>(augment_raster(*source, p.augmentation()));

  const ForestScene scene = build_scene(seeded_forest(p), d.surface, p.env);
  d.tree_count = scene.trees().size();
  d.leaf_count = scene.leaves().size();

  const SAGrid& g = p.grid;
  const CameraIntrinsics intr = p.intrinsics();
  const RenderOptions ro{p.supersampling};
  std::vector<std::optional<RenderResult>> renders(static_cast<std::size_t>(g.size()));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int s = next++; s < g.size(); s = next++) {
      renders[s] = render_thermal(scene, g.pose(s % g.n, s / g.n, intr), ro);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < std::min(p.threads, g.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  for (int s = 0; s < g.size(); ++s) {
    const CameraPose pose = g.pose(s % g.n, s / g.n, intr);
    RenderResult& r = *renders[s];
    d.images.push_back({std::move(r.image), pose});
    d.masks.push_back({std::move(r.mask), pose});
    d.vegetation.push_back({std::move(r.vegetation), pose});
  }

  const ForestScene bare({}, {}, d.surface, p.env);
  d.truth = render_thermal(bare, g.center_pose(intr), ro).image;
  return d;
}

namespace {

Slice make_slice(const std::vector<Capture>& captures, const SAGrid& grid, int i0, int i1,
                 int j0, int j1) {
  Slice s;
  s.grid = grid;
  s.grid.n = i1 - i0;
  s.grid.m = j1 - j0;
  // Keep the slice centered on its middle waypoint.
  const Vec3 c = grid.waypoint(i0 + s.grid.center_n(), j0 + s.grid.center_m());
  s.grid.center_x_m = c.x;
  s.grid.center_y_m = c.y;
  for (int j = j0; j < j1; ++j) {
    for (int i = i0; i < i1; ++i) {
      const Capture& cap = captures.at(static_cast<std::size_t>(j) * grid.n + i);
      s.views.push_back({&cap.image, cap.pose});
    }
  }
  return s;
}

}  // namespace

Slice row_slice(const std::vector<Capture>& captures, const SAGrid& grid, int j) {
  if (j < 0 || j >= grid.m) throw ParameterError("row slice index out of range");
  return make_slice(captures, grid, 0, grid.n, j, j + 1);
}

Slice column_slice(const std::vector<Capture>& captures, const SAGrid& grid, int i) {
  if (i < 0 || i >= grid.n) throw ParameterError("column slice index out of range");
  return make_slice(captures, grid, i, i + 1, 0, grid.m);
}

Slice full_grid(const std::vector<Capture>& captures, const SAGrid& grid) {
  return make_slice(captures, grid, 0, grid.n, 0, grid.m);
}

}  // namespace aos
