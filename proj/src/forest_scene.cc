#include "aos/forest_scene.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aos/errors.h"
#include "aos/rng.h"
#include "aos/surface_field.h"

namespace aos {
namespace {

constexpr ElementId kNoElement = std::numeric_limits<ElementId>::max();
constexpr double kRayEps = 1e-9;

void check_range(const Range& r, const char* name) {
  if (!(r.min > 0.0) || !(r.min <= r.max)) {
    throw ParameterError(std::string("forest: invalid range for ") + name);
  }
}

double mean_leaf_area(const Range& size) {
  // Disc area from a uniform diameter: (pi/4) E[d^2].
  const double a = size.min;
  const double b = size.max;
  const double e_d2 =
      b > a ? (b * b * b - a * a * a) / (3.0 * (b - a)) : a * a;
  return 0.25 * std::numbers::pi * e_d2;
}

struct SubpixelGrid {
  int width;
  int height;
  int k;
  std::vector<Vec3> dirs;
};

SubpixelGrid make_subpixel_grid(const CameraPose& pose, int k) {
  SubpixelGrid g{pose.intrinsics.width * k, pose.intrinsics.height * k, k, {}};
  g.dirs.resize(static_cast<std::size_t>(g.width) * g.height);
  const double inv_k = 1.0 / k;
  for (int sy = 0; sy < g.height; ++sy) {
    for (int sx = 0; sx < g.width; ++sx) {
      const PixelCoord p{(sx + 0.5) * inv_k - 0.5, (sy + 0.5) * inv_k - 0.5};
      g.dirs[static_cast<std::size_t>(sy) * g.width + sx] = pixel_ray_dir(pose, p);
    }
  }
  return g;
}

// Turns per-subpixel first hits into the three output rasters.
RenderResult shade(const ForestScene& scene, const CameraPose& pose,
                   const SubpixelGrid& grid, const std::vector<double>& depth,
                   const std::vector<ElementId>& hit) {
  const int w = pose.intrinsics.width;
  const int h = pose.intrinsics.height;
  const int k = grid.k;
  const double inv_n = 1.0 / (k * k);
  std::vector<float> image(static_cast<std::size_t>(w) * h);
  std::vector<float> mask(image.size());
  std::vector<float> veg(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double t_sum = 0.0;
      double m_sum = 0.0;
      double v_sum = 0.0;
      bool nodata = false;
      for (int sy = y * k; sy < (y + 1) * k; ++sy) {
        for (int sx = x * k; sx < (x + 1) * k; ++sx) {
          const std::size_t i = static_cast<std::size_t>(sy) * grid.width + sx;
          if (hit[i] == kNoElement) {
            const Vec3 p = pose.position + grid.dirs[i] * depth[i];
            const float g = scene.ground_temperature(p.x, p.y);
            nodata |= !is_valid(g);
            t_sum += g;
            m_sum += 1.0;
          } else {
            const float v = scene.element_temperature(hit[i]);
            t_sum += v;
            v_sum += v;
          }
        }
      }
      const std::size_t o = static_cast<std::size_t>(y) * w + x;
      if (k == 1) {
        image[o] = static_cast<float>(t_sum);
        mask[o] = static_cast<float>(m_sum);
        veg[o] = static_cast<float>(v_sum);
      } else {
        image[o] = static_cast<float>(t_sum * inv_n);
        mask[o] = static_cast<float>(m_sum * inv_n);
        veg[o] = static_cast<float>(v_sum * inv_n);
      }
      if (nodata) image[o] = kNoData;
    }
  }
  const float ambient = static_cast<float>(scene.env().ambient_c);
  const float gsd = static_cast<float>(2.0 * footprint_half_m(pose) / w);
  return {TemperatureRaster(w, h, ambient, gsd, std::move(image)),
          TemperatureRaster(w, h, ambient, gsd, std::move(mask)),
          TemperatureRaster(w, h, ambient, gsd, std::move(veg))};
}

void check_render_pose(const ForestScene& scene, const CameraPose& pose,
                       const RenderOptions& options) {
  validate_pose(pose);
  if (!(pose.position.z > scene.max_height_m())) {
    throw ParameterError("render: camera must fly above the canopy");
  }
  if (options.supersampling < 1) {
    throw ParameterError("render: supersampling must be >= 1");
  }
}

}  // namespace

void ForestParams::validate() const {
  if (!(density_tpha >= 0.0 && density_tpha <= 2000.0)) {
    throw ParameterError("forest: density_tpha must be in [0, 2000]");
  }
  if (!(extent_m > 0.0)) throw ParameterError("forest: extent_m must be > 0");
  check_range(tree_height_m, "tree_height_m");
  check_range(trunk_length_m, "trunk_length_m");
  check_range(trunk_diameter_m, "trunk_diameter_m");
  check_range(leaf_size_m, "leaf_size_m");
  if (!(tree_height_m.min > 1.0)) {
    throw ParameterError("forest: trees must be taller than 1 m");
  }
  if (!(crown_leaf_area_density >= 0.0)) {
    throw ParameterError("forest: crown_leaf_area_density must be >= 0");
  }
  if (!(min_tree_spacing_m >= 0.0)) {
    throw ParameterError("forest: min_tree_spacing_m must be >= 0");
  }
}

void ThermalEnv::validate() const {
  if (!std::isfinite(ambient_c)) throw ParameterError("env: ambient_c must be finite");
  if (!(sun_absorption_c >= 0.0 && sun_absorption_c <= 15.0)) {
    throw ParameterError("env: sun_absorption_c must be in [0, 15]");
  }
  if (!(solar_angle_deg >= -90.0 && solar_angle_deg <= 90.0)) {
    throw ParameterError("env: solar_angle_deg must be in [-90, 90]");
  }
}

Vec3 ThermalEnv::sun_direction() const {
  const double a = solar_angle_deg * std::numbers::pi / 180.0;
  return {std::sin(a), 0.0, std::cos(a)};
}

std::vector<Tree> place_trees(const ForestParams& fp) {
  fp.validate();
  const double area_m2 = fp.extent_m * fp.extent_m;
  // Binomial count: one Bernoulli trial per square meter cell.
  const auto cells = static_cast<std::uint64_t>(std::ceil(area_m2));
  const double p = fp.density_tpha * (area_m2 / 10000.0) / static_cast<double>(cells);
  SplitMix64 count_rng(derive_seed(fp.seed, "forest-count"));
  std::uint64_t count = 0;
  for (std::uint64_t c = 0; c < cells; ++c) count += count_rng.uniform() < p;

  SplitMix64 place_rng(derive_seed(fp.seed, "forest-place"));
  const double half = 0.5 * fp.extent_m;
  const double min_d2 = fp.min_tree_spacing_m * fp.min_tree_spacing_m;
  std::vector<Tree> trees;
  trees.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double x = place_rng.uniform(-half, half);
      const double y = place_rng.uniform(-half, half);
      const bool clear = std::none_of(trees.begin(), trees.end(), [&](const Tree& t) {
        const double dx = t.x - x;
        const double dy = t.y - y;
        return dx * dx + dy * dy < min_d2;
      });
      if (!clear) continue;
      SplitMix64 rng(derive_seed(hash_combine(fp.seed, trees.size()), "tree"));
      Tree t;
      t.x = x;
      t.y = y;
      t.height_m = rng.uniform(fp.tree_height_m.min, fp.tree_height_m.max);
      const double trunk_len = rng.uniform(fp.trunk_length_m.min, fp.trunk_length_m.max);
      t.trunk_radius_m =
          0.5 * rng.uniform(fp.trunk_diameter_m.min, fp.trunk_diameter_m.max);
      t.trunk_top_m = std::min(trunk_len, t.height_m - 1.0);
      t.crown_half_height_m = 0.5 * (t.height_m - t.trunk_top_m);
      t.crown_center_z_m = t.trunk_top_m + t.crown_half_height_m;
      // Sized so crowns roughly close the canopy (cover ~1) at 585 trees/ha.
      t.crown_radius_m = std::clamp(0.12 * t.height_m + 0.9, 1.2, 3.0) *
                         rng.uniform(0.85, 1.15);
      trees.push_back(t);
      break;
    }
  }
  return trees;
}

std::vector<Leaf> grow_leaves(const ForestParams& fp, const Tree& tree,
                              std::uint32_t tree_index) {
  SplitMix64 rng(derive_seed(hash_combine(fp.seed, tree_index), "leaves"));
  const double crown_area =
      std::numbers::pi * tree.crown_radius_m * tree.crown_radius_m;
  const auto count = static_cast<std::size_t>(std::llround(
      fp.crown_leaf_area_density * crown_area / mean_leaf_area(fp.leaf_size_m)));
  std::vector<Leaf> leaves;
  leaves.reserve(count);
  while (leaves.size() < count) {
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    const double w = rng.uniform(-1.0, 1.0);
    if (u * u + v * v + w * w > 1.0) continue;
    const double nz = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - nz * nz));
    Leaf leaf;
    leaf.center = {tree.x + u * tree.crown_radius_m, tree.y + v * tree.crown_radius_m,
                   tree.crown_center_z_m + w * tree.crown_half_height_m};
    leaf.normal = {s * std::cos(phi), s * std::sin(phi), nz};
    leaf.radius_m = 0.5 * rng.uniform(fp.leaf_size_m.min, fp.leaf_size_m.max);
    leaf.tree = tree_index;
    leaves.push_back(leaf);
  }
  return leaves;
}

ForestScene::ForestScene(std::vector<Tree> trees, std::vector<Leaf> leaves,
                         std::shared_ptr<const TemperatureRaster> surface,
                         ThermalEnv env)
    : trees_(std::move(trees)),
      leaves_(std::move(leaves)),
      surface_(std::move(surface)),
      env_(env) {
  if (!surface_) throw ParameterError("scene: surface raster is required");
  env_.validate();
  boxes_.resize(element_count());
  for (ElementId id = 0; id < boxes_.size(); ++id) {
    boxes_[id] = compute_bounds(id);
    max_height_ = std::max(max_height_, boxes_[id].hi.z);
  }
  bvh_ = Bvh(boxes_);

  exposure_.resize(element_count());
  temperature_.resize(element_count());
  for (ElementId id = 0; id < exposure_.size(); ++id) {
    exposure_[id] = compute_exposure(id);
    temperature_[id] =
        static_cast<float>(vegetation_temperature(exposure_[id], env_));
  }
}

Aabb ForestScene::compute_bounds(ElementId id) const {
  Aabb b;
  if (is_trunk(id)) {
    const Tree& t = trunk_tree(id);
    b.extend(Vec3{t.x - t.trunk_radius_m, t.y - t.trunk_radius_m, 0.0});
    b.extend(Vec3{t.x + t.trunk_radius_m, t.y + t.trunk_radius_m, t.trunk_top_m});
    return b;
  }
  const Leaf& l = leaves_[id];
  const Vec3 n = l.normal;
  const Vec3 e{l.radius_m * std::sqrt(std::max(0.0, 1.0 - n.x * n.x)),
               l.radius_m * std::sqrt(std::max(0.0, 1.0 - n.y * n.y)),
               l.radius_m * std::sqrt(std::max(0.0, 1.0 - n.z * n.z))};
  b.extend(l.center - e);
  b.extend(l.center + e);
  return b;
}

std::optional<double> ForestScene::intersect_element(ElementId id, const Ray& ray,
                                                     double t_min,
                                                     double t_max) const {
  const Vec3& o = ray.origin;
  const Vec3& d = ray.dir;
  if (!is_trunk(id)) {
    const Leaf& l = leaves_[id];
    const double denom = dot(l.normal, d);
    if (denom == 0.0) return std::nullopt;
    const double t = dot(l.normal, l.center - o) / denom;
    if (!(t > t_min && t <= t_max)) return std::nullopt;
    const Vec3 q = o + d * t - l.center;
    if (dot(q, q) > l.radius_m * l.radius_m) return std::nullopt;
    return t;
  }
  const Tree& tr = trunk_tree(id);
  const double r2 = tr.trunk_radius_m * tr.trunk_radius_m;
  const double ox = o.x - tr.x;
  const double oy = o.y - tr.y;
  double best = std::numeric_limits<double>::infinity();
  const double a = d.x * d.x + d.y * d.y;
  if (a > 0.0) {
    const double b = 2.0 * (ox * d.x + oy * d.y);
    const double c = ox * ox + oy * oy - r2;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (!(t > t_min && t <= t_max)) continue;
        const double z = o.z + d.z * t;
        if (z >= 0.0 && z <= tr.trunk_top_m) {
          best = t;
          break;
        }
      }
    }
  }
  if (d.z != 0.0) {
    const double t = (tr.trunk_top_m - o.z) / d.z;
    if (t > t_min && t <= t_max && t < best) {
      const double px = ox + d.x * t;
      const double py = oy + d.y * t;
      if (px * px + py * py <= r2) best = t;
    }
  }
  if (std::isinf(best)) return std::nullopt;
  return best;
}

Hit ForestScene::intersect(const Ray& ray, double t_min) const {
  double t_max = ray.dir.z < 0.0 ? -ray.origin.z / ray.dir.z
                                 : std::numeric_limits<double>::infinity();
  ElementId best = kNoElement;
  bvh_.traverse(ray, t_min, t_max, [&](std::uint32_t prim, double& tmax) {
    const auto t = intersect_element(prim, ray, t_min, tmax);
    if (t && (*t < tmax || prim < best)) {
      tmax = *t;
      best = prim;
    }
    return false;
  });
  Hit hit;
  hit.t = t_max;
  if (best != kNoElement) hit.element = best;
  return hit;
}

bool ForestScene::occluded(const Ray& ray, double t_min, double t_max,
                           std::optional<ElementId> ignore) const {
  bool blocked = false;
  double limit = t_max;
  bvh_.traverse(ray, t_min, limit, [&](std::uint32_t prim, double& tmax) {
    if (ignore && prim == *ignore) return false;
    if (intersect_element(prim, ray, t_min, tmax)) {
      blocked = true;
      return true;
    }
    return false;
  });
  return blocked;
}

double ForestScene::compute_exposure(ElementId id) const {
  const Vec3 sun = env_.sun_direction();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (!is_trunk(id)) {
    const Leaf& l = leaves_[id];
    const double facing = std::abs(dot(l.normal, sun));
    if (facing == 0.0) return 0.0;
    return occluded(Ray{l.center, sun}, kRayEps, kInf, id) ? 0.0 : facing;
  }
  // Trunk sides: lit by the horizontal sun component only.
  const Tree& t = trunk_tree(id);
  const double facing = std::hypot(sun.x, sun.y);
  if (facing < 1e-9) return 0.0;
  const Vec3 side{sun.x / facing, sun.y / facing, 0.0};
  constexpr int kSamples = 4;
  int lit = 0;
  for (int k = 0; k < kSamples; ++k) {
    const Vec3 p{t.x + side.x * (t.trunk_radius_m + 1e-4),
                 t.y + side.y * (t.trunk_radius_m + 1e-4),
                 t.trunk_top_m * (k + 0.5) / kSamples};
    lit += !occluded(Ray{p, sun}, kRayEps, kInf, id);
  }
  return facing * lit / kSamples;
}

float ForestScene::ground_temperature(double x, double y) const {
  const PixelCoord p = ground_to_pixel(*surface_, {x, y});
  return resample_bilinear(*surface_, p.x, p.y);
}

ForestScene build_scene(const ForestParams& fp,
                        std::shared_ptr<const TemperatureRaster> surface,
                        const ThermalEnv& env) {
  fp.validate();
  env.validate();
  if (!surface) throw ParameterError("build_scene: surface raster is required");
  if (half_extent_m(*surface) + 1e-9 < 0.5 * fp.extent_m) {
    throw ParameterError("build_scene: surface raster smaller than forest extent");
  }
  std::vector<Tree> trees = place_trees(fp);
  std::vector<Leaf> leaves;
  for (std::uint32_t i = 0; i < trees.size(); ++i) {
    auto grown = grow_leaves(fp, trees[i], i);
    leaves.insert(leaves.end(), grown.begin(), grown.end());
  }
  return ForestScene(std::move(trees), std::move(leaves), std::move(surface), env);
}

ForestScene build_scene(const ForestParams& fp, const TemperatureRaster& surface,
                        const ThermalEnv& env) {
  return build_scene(fp, std::make_shared<const TemperatureRaster>(surface), env);
}

double vegetation_temperature(double exposure, const ThermalEnv& env) {
  return env.ambient_c + env.sun_absorption_c * std::clamp(exposure, 0.0, 1.0);
}

double vegetation_temperature(const ForestScene& scene, ElementId id) {
  return vegetation_temperature(scene.exposure(id), scene.env());
}

RenderResult render_thermal_traced(const ForestScene& scene, const CameraPose& pose,
                                   const RenderOptions& options) {
  check_render_pose(scene, pose, options);
  const SubpixelGrid grid = make_subpixel_grid(pose, options.supersampling);
  std::vector<double> depth(grid.dirs.size());
  std::vector<ElementId> hit(grid.dirs.size(), kNoElement);
  for (std::size_t i = 0; i < grid.dirs.size(); ++i) {
    const Hit h = scene.intersect(Ray{pose.position, grid.dirs[i]}, kRayEps);
    depth[i] = h.t;
    if (h.element) hit[i] = *h.element;
  }
  return shade(scene, pose, grid, depth, hit);
}

// Object-order variant of the same first-hit query: every element is tested
// against the rays whose pixels its projected bounds cover, keeping the
// nearest (t, id) per ray. Identical hits to tracing, far fewer box tests for
// the small leaf discs that dominate these scenes.
RenderResult render_thermal(const ForestScene& scene, const CameraPose& pose,
                            const RenderOptions& options) {
  check_render_pose(scene, pose, options);
  const SubpixelGrid grid = make_subpixel_grid(pose, options.supersampling);
  const int k = grid.k;
  const double oz = pose.position.z;
  // Ground distance for every ray; all rays have dir.z == -1.
  std::vector<double> depth(grid.dirs.size(), oz);
  std::vector<ElementId> hit(grid.dirs.size(), kNoElement);

  const auto& in = pose.intrinsics;
  const double f = in.focal_px();
  const Vec3 eu = pose.column_axis();
  const Vec3 ev = pose.row_axis();
  const double reach = footprint_half_m(pose) *
                       (std::abs(eu.x) + std::abs(eu.y));  // rotated footprint
  const double max_x = pose.position.x + reach;
  const double min_x = pose.position.x - reach;
  const double max_y = pose.position.y + reach;
  const double min_y = pose.position.y - reach;

  auto raster_element = [&](ElementId id) {
    const Aabb& b = scene.element_bounds(id);
    if (b.hi.x < min_x || b.lo.x > max_x || b.hi.y < min_y || b.lo.y > max_y) {
      return;
    }
    const Vec3 c = b.center();
    const double rh = 0.5 * std::hypot(b.hi.x - b.lo.x, b.hi.y - b.lo.y);
    const Vec3 rel{c.x - pose.position.x, c.y - pose.position.y, 0.0};
    const double a = dot(rel, eu);
    const double bb = dot(rel, ev);
    const double d_near = oz - b.hi.z;
    const double d_far = oz - b.lo.z;
    auto span = [&](double center, double principal, int size) {
      const double lo = std::min((center - rh) / d_near, (center - rh) / d_far);
      const double hi = std::max((center + rh) / d_near, (center + rh) / d_far);
      const double plo = principal + f * lo - 1e-6;
      const double phi = principal + f * hi + 1e-6;
      // Subpixel s has its center at pixel coordinate (s + 0.5) / k - 0.5.
      const int s0 = std::max(0, static_cast<int>(std::ceil((plo + 0.5) * k - 0.5)));
      const int s1 =
          std::min(size * k - 1, static_cast<int>(std::floor((phi + 0.5) * k - 0.5)));
      return std::pair<int, int>{s0, s1};
    };
    const auto [x0, x1] = span(a, in.cx(), in.width);
    const auto [y0, y1] = span(bb, in.cy(), in.height);
    for (int sy = y0; sy <= y1; ++sy) {
      for (int sx = x0; sx <= x1; ++sx) {
        const std::size_t i = static_cast<std::size_t>(sy) * grid.width + sx;
        const auto t = scene.intersect_element(id, Ray{pose.position, grid.dirs[i]},
                                               kRayEps, depth[i]);
        if (t && (*t < depth[i] || id < hit[i])) {
          depth[i] = *t;
          hit[i] = id;
        }
      }
    }
  };
  for (ElementId id = 0; id < scene.element_count(); ++id) raster_element(id);
  return shade(scene, pose, grid, depth, hit);
}

}  // namespace aos
