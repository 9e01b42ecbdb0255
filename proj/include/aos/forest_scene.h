#ifndef AOS_FOREST_SCENE_H_
#define AOS_FOREST_SCENE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "aos/bvh.h"
#include "aos/camera.h"
#include "aos/geometry.h"
#include "aos/thermal_raster.h"

namespace aos {

struct Range {
  double min;
  double max;
};

struct ForestParams {
  double density_tpha = 585.0;
  double extent_m = 48.0;  // side of the square forest patch centered on the origin
  std::uint64_t seed = 0;
  Range tree_height_m{5.0, 20.0};
  Range trunk_length_m{4.0, 8.0};
  Range trunk_diameter_m{0.20, 0.50};
  Range leaf_size_m{0.05, 0.20};
  // One-sided leaf area per unit of crown-projected area. 1.6 leaves roughly
  // 30 % light through the crown center and ~45 % averaged over the crown.
  double crown_leaf_area_density = 1.6;
  double min_tree_spacing_m = 1.5;

  void validate() const;
};

struct ThermalEnv {
  double ambient_c = 15.0;
  double sun_absorption_c = 7.0;  // [0, 15]
  double solar_angle_deg = 0.0;   // from zenith, positive towards east

  void validate() const;
  // Unit vector pointing at the sun.
  Vec3 sun_direction() const;
};

struct Tree {
  double x = 0.0;
  double y = 0.0;
  double height_m = 0.0;
  double trunk_top_m = 0.0;   // trunk cylinder spans z in [0, trunk_top_m]
  double trunk_radius_m = 0.0;
  double crown_center_z_m = 0.0;
  double crown_radius_m = 0.0;       // horizontal semi-axis
  double crown_half_height_m = 0.0;  // vertical semi-axis
};

// Opaque two-sided disc.
struct Leaf {
  Vec3 center;
  Vec3 normal;  // unit length
  double radius_m = 0.0;
  std::uint32_t tree = 0;
};

// Identifies one occluding element: leaves first, then one trunk per tree.
using ElementId = std::uint32_t;

struct RenderResult {
  TemperatureRaster image;
  TemperatureRaster mask;        // fraction of rays that reached the ground
  TemperatureRaster vegetation;  // vegetation temperature times (1 - mask)
};

struct Hit {
  double t = 0.0;
  std::optional<ElementId> element;  // nullopt: the ground plane
};

// Immutable procedural forest over a flat ground carrying a surface
// temperature field. Element temperatures are fixed at construction from the
// thermal environment.
class ForestScene {
 public:
  // Places the given trees and leaves over `surface` (centered on the origin)
  // and computes element exposure with shadow rays.
  ForestScene(std::vector<Tree> trees, std::vector<Leaf> leaves,
              std::shared_ptr<const TemperatureRaster> surface,
              ThermalEnv env);

  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<Leaf>& leaves() const { return leaves_; }
  const TemperatureRaster& surface() const { return *surface_; }
  const ThermalEnv& env() const { return env_; }

  std::size_t element_count() const { return leaves_.size() + trees_.size(); }
  bool is_trunk(ElementId id) const { return id >= leaves_.size(); }
  const Tree& trunk_tree(ElementId id) const { return trees_[id - leaves_.size()]; }
  ElementId trunk_element(std::size_t tree) const {
    return static_cast<ElementId>(leaves_.size() + tree);
  }

  double exposure(ElementId id) const { return exposure_[id]; }
  float element_temperature(ElementId id) const { return temperature_[id]; }
  double max_height_m() const { return max_height_; }

  // Nearest hit along the ray (element or ground) with t in (t_min, inf).
  Hit intersect(const Ray& ray, double t_min = 1e-9) const;
  // Whether any element blocks the ray in (t_min, t_max); `ignore` is skipped.
  bool occluded(const Ray& ray, double t_min, double t_max,
                std::optional<ElementId> ignore = std::nullopt) const;

  // Exact intersection with one element; nullopt on a miss.
  std::optional<double> intersect_element(ElementId id, const Ray& ray,
                                          double t_min, double t_max) const;
  const Aabb& element_bounds(ElementId id) const { return boxes_[id]; }

  float ground_temperature(double x, double y) const;

 private:
  Aabb compute_bounds(ElementId id) const;
  double compute_exposure(ElementId id) const;

  std::vector<Tree> trees_;
  std::vector<Leaf> leaves_;
  std::shared_ptr<const TemperatureRaster> surface_;
  ThermalEnv env_;
  std::vector<Aabb> boxes_;
  Bvh bvh_;
  std::vector<double> exposure_;
  std::vector<float> temperature_;
  double max_height_ = 0.0;
};

// Tree trunks and crowns for a parameter set, without leaves. Tree count is
// binomial with mean density * area; positions are uniform with minimum
// spacing rejection. Deterministic per seed.
std::vector<Tree> place_trees(const ForestParams& fp);

// Procedural leaves for one tree, deterministic per (seed, tree index).
std::vector<Leaf> grow_leaves(const ForestParams& fp, const Tree& tree,
                              std::uint32_t tree_index);

// Throws ParameterError when the surface raster does not cover the extent.
ForestScene build_scene(const ForestParams& fp,
                        std::shared_ptr<const TemperatureRaster> surface,
                        const ThermalEnv& env);
ForestScene build_scene(const ForestParams& fp, const TemperatureRaster& surface,
                        const ThermalEnv& env);

// ambient + sun_absorption * exposure, exposure in [0, 1].
double vegetation_temperature(double exposure, const ThermalEnv& env);
double vegetation_temperature(const ForestScene& scene, ElementId id);

struct RenderOptions {
  int supersampling = 1;  // rays per pixel along each axis
};

// Nadir thermal image: each ray returns the surface temperature where it
// reaches the ground and otherwise the temperature of the first element hit.
// Throws ParameterError when the camera is not above the canopy.
RenderResult render_thermal(const ForestScene& scene, const CameraPose& pose,
                            const RenderOptions& options = {});

// Reference renderer that traces every ray through the BVH. Produces the same
// rasters as render_thermal; slower, used to cross-check it.
RenderResult render_thermal_traced(const ForestScene& scene,
                                   const CameraPose& pose,
                                   const RenderOptions& options = {});

}  // namespace aos

#endif  // AOS_FOREST_SCENE_H_
