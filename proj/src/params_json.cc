#include "aos/params_json.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "aos/errors.h"

namespace aos {
namespace fs = std::filesystem;
namespace {

// Reads keys of one JSON object and rejects anything it was not asked for.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ParameterError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ParameterError(where_ + "." + key + ": wrong type");
    }
  }

  void range(const char* key, Range& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const Json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ParameterError(where_ + "." + key + ": expected [min, max]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  const Json* child(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string where(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!used_.count(k)) throw ParameterError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

Json range_json(const Range& r) { return Json::array({r.min, r.max}); }

HotspotSpec hotspot_from_json(const Json& j, const std::string& where) {
  StrictObject o(j, where);
  HotspotSpec h;
  o.get("x_m", h.center_x_m);
  o.get("y_m", h.center_y_m);
  o.get("radius_m", h.radius_m);
  o.get("peak_c", h.peak_c);
  o.get("falloff", h.falloff);
  o.finish();
  return h;
}

const char* placement_name(HotspotPlacement p) {
  return p == HotspotPlacement::kRandom ? "random" : "under_canopy";
}

template <typename T>
std::vector<T> number_list(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParameterError(where + ": expected a non-empty array");
  std::vector<T> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ParameterError(where + ": expected numbers");
    out.push_back(v.get<T>());
  }
  return out;
}

std::string capture_name(const char* kind, int i, int j) {
  return fmt::format("{}/{}_{:03d}_{:03d}.tgr", kind, kind, j, i);
}

}  // namespace

FlightParams flight_params_from_json(const Json& j) {
  FlightParams p;
  StrictObject o(j, "params");
  o.get("seed", p.seed);
  if (const Json* f = o.child("forest")) {
    StrictObject fo(*f, o.where("forest"));
    fo.get("density_tpha", p.forest.density_tpha);
    fo.get("extent_m", p.forest.extent_m);
    fo.range("tree_height_m", p.forest.tree_height_m);
    fo.range("trunk_length_m", p.forest.trunk_length_m);
    fo.range("trunk_diameter_m", p.forest.trunk_diameter_m);
    fo.range("leaf_size_m", p.forest.leaf_size_m);
    fo.get("crown_leaf_area_density", p.forest.crown_leaf_area_density);
    fo.get("min_tree_spacing_m", p.forest.min_tree_spacing_m);
    fo.finish();
  }
  if (const Json* e = o.child("env")) {
    StrictObject eo(*e, o.where("env"));
    eo.get("ambient_c", p.env.ambient_c);
    eo.get("sun_absorption_c", p.env.sun_absorption_c);
    eo.get("solar_angle_deg", p.env.solar_angle_deg);
    eo.finish();
  }
  if (const Json* s = o.child("surface")) {
    StrictObject so(*s, o.where("surface"));
    so.get("source_ambient_c", p.source_ambient_c);
    so.get("size_px", p.surface_px);
    so.get("res_m", p.surface_res_m);
    so.finish();
  }
  if (const Json* a = o.child("augmentation")) {
    StrictObject ao(*a, o.where("augmentation"));
    ao.get("t_max_c", p.t_max_c);
    ao.get("t_max_target_c", p.t_max_target_c);
    ao.get("alpha", p.alpha);
    ao.finish();
  }
  if (const Json* h = o.child("hotspots")) {
    StrictObject ho(*h, o.where("hotspots"));
    ho.get("count", p.hotspot_count);
    std::string placement = placement_name(p.placement);
    ho.get("placement", placement);
    if (placement == "random") {
      p.placement = HotspotPlacement::kRandom;
    } else if (placement == "under_canopy") {
      p.placement = HotspotPlacement::kUnderCanopy;
    } else {
      throw ParameterError("params.hotspots.placement: expected random or under_canopy");
    }
    ho.range("radius_m", p.hotspot_radius_m);
    ho.range("peak_c", p.hotspot_peak_c);
    ho.get("region_m", p.hotspot_region_m);
    if (const Json* list = ho.child("list")) {
      if (!list->is_array()) throw ParameterError("params.hotspots.list: expected an array");
      for (std::size_t k = 0; k < list->size(); ++k) {
        p.explicit_hotspots.push_back(
            hotspot_from_json((*list)[k], fmt::format("params.hotspots.list[{}]", k)));
      }
    }
    ho.finish();
  }
  if (const Json* g = o.child("grid")) {
    StrictObject go(*g, o.where("grid"));
    go.get("n", p.grid.n);
    go.get("m", p.grid.m);
    go.get("spacing_m", p.grid.spacing_m);
    go.get("altitude_m", p.grid.altitude_agl_m);
    go.get("yaw_deg", p.grid.yaw_deg);
    go.finish();
  }
  if (const Json* c = o.child("camera")) {
    StrictObject co(*c, o.where("camera"));
    co.get("image_px", p.image_px);
    co.get("supersampling", p.supersampling);
    co.finish();
  }
  o.finish();
  p.validate();
  return p;
}

Json to_json(const HotspotSpec& h) {
  return Json{{"x_m", h.center_x_m},
              {"y_m", h.center_y_m},
              {"radius_m", h.radius_m},
              {"peak_c", h.peak_c},
              {"falloff", h.falloff}};
}

Json to_json(const FlightParams& p) {
  Json hotspots = {{"count", p.hotspot_count},
                   {"placement", placement_name(p.placement)},
                   {"radius_m", range_json(p.hotspot_radius_m)},
                   {"peak_c", range_json(p.hotspot_peak_c)},
                   {"region_m", p.hotspot_region_m}};
  if (!p.explicit_hotspots.empty()) {
    Json list = Json::array();
    for (const auto& h : p.explicit_hotspots) list.push_back(to_json(h));
    hotspots["list"] = std::move(list);
  }
  return Json{
      {"seed", p.seed},
      {"forest",
       {{"density_tpha", p.forest.density_tpha},
        {"extent_m", p.forest.extent_m},
        {"tree_height_m", range_json(p.forest.tree_height_m)},
        {"trunk_length_m", range_json(p.forest.trunk_length_m)},
        {"trunk_diameter_m", range_json(p.forest.trunk_diameter_m)},
        {"leaf_size_m", range_json(p.forest.leaf_size_m)},
        {"crown_leaf_area_density", p.forest.crown_leaf_area_density},
        {"min_tree_spacing_m", p.forest.min_tree_spacing_m}}},
      {"env",
       {{"ambient_c", p.env.ambient_c},
        {"sun_absorption_c", p.env.sun_absorption_c},
        {"solar_angle_deg", p.env.solar_angle_deg}}},
      {"surface",
       {{"source_ambient_c", p.source_ambient_c},
        {"size_px", p.surface_px},
        {"res_m", p.surface_res_m}}},
      {"augmentation",
       {{"t_max_c", p.t_max_c}, {"t_max_target_c", p.t_max_target_c}, {"alpha", p.alpha}}},
      {"hotspots", std::move(hotspots)},
      {"grid",
       {{"n", p.grid.n},
        {"m", p.grid.m},
        {"spacing_m", p.grid.spacing_m},
        {"altitude_m", p.grid.altitude_agl_m},
        {"yaw_deg", p.grid.yaw_deg}}},
      {"camera", {{"image_px", p.image_px}, {"supersampling", p.supersampling}}},
  };
}

SweepConfig sweep_config_from_json(const Json& j) {
  SweepConfig c;
  StrictObject o(j, "sweep");
  if (const Json* b = o.child("base")) c.base = flight_params_from_json(*b);
  if (const Json* v = o.child("densities_tpha")) c.densities_tpha = number_list<double>(*v, "sweep.densities_tpha");
  if (const Json* v = o.child("ambients_c")) c.ambients_c = number_list<double>(*v, "sweep.ambients_c");
  if (const Json* v = o.child("sun_abs_c")) c.sun_abs_c = number_list<double>(*v, "sweep.sun_abs_c");
  if (const Json* v = o.child("solar_deg")) c.solar_deg = number_list<double>(*v, "sweep.solar_deg");
  if (const Json* v = o.child("seeds")) {
    if (v->is_number_unsigned()) {
      c.seeds.clear();
      for (std::uint64_t s = 0; s < v->get<std::uint64_t>(); ++s) c.seeds.push_back(s);
    } else {
      c.seeds = number_list<std::uint64_t>(*v, "sweep.seeds");
    }
  }
  if (const Json* v = o.child("sa_types")) {
    if (!v->is_array()) throw ParameterError("sweep.sa_types: expected an array");
    c.sa_types.clear();
    for (const auto& s : *v) {
      if (!s.is_string()) throw ParameterError("sweep.sa_types: expected strings");
      c.sa_types.push_back(parse_sa_type(s.get<std::string>()));
    }
  }
  o.get("f_min", c.correction.f_min);
  o.get("jobs", c.jobs);
  o.finish();
  c.validate();
  return c;
}

Json to_json(const SweepConfig& c) {
  Json sa = Json::array();
  for (SaType t : c.sa_types) sa.push_back(std::string(sa_type_name(t)));
  return Json{{"base", to_json(c.base)},
              {"densities_tpha", c.densities_tpha},
              {"ambients_c", c.ambients_c},
              {"sun_abs_c", c.sun_abs_c},
              {"solar_deg", c.solar_deg},
              {"seeds", c.seeds},
              {"sa_types", std::move(sa)},
              {"f_min", c.correction.f_min}};
}

Json to_json(const Hotspot& h) {
  return Json{{"area_px", h.area_px},
              {"area_m2", h.area_m2},
              {"centroid_px", {h.centroid_x_px, h.centroid_y_px}},
              {"centroid_m", {h.centroid_x_m, h.centroid_y_m}},
              {"mean_c", h.mean_c},
              {"max_c", h.max_c},
              {"bbox_px", {h.bbox.x0, h.bbox.y0, h.bbox.x1, h.bbox.y1}}};
}

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON", e.byte);
  }
}

void write_json(const Json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> save_flight(const FlightData& flight, const fs::path& dir) {
  for (const char* sub : {"images", "masks", "vegetation"}) fs::create_directories(dir / sub);
  std::vector<std::string> written;
  auto put = [&](const TemperatureRaster& r, const std::string& rel) {
    write_raster(r, dir / rel);
    written.push_back(rel);
  };
  put(flight.truth, "truth.tgr");
  put(*flight.surface, "surface.tgr");
  put(*flight.surface_source, "surface_source.tgr");

  const SAGrid& g = flight.params.grid;
  Json captures = Json::array();
  for (int j = 0; j < g.m; ++j) {
    for (int i = 0; i < g.n; ++i) {
      const std::size_t s = static_cast<std::size_t>(j) * g.n + i;
      const CameraPose& pose = flight.images[s].pose;
      const std::string img = capture_name("images", i, j);
      const std::string msk = capture_name("masks", i, j);
      const std::string veg = capture_name("vegetation", i, j);
      put(flight.images[s].image, img);
      put(flight.masks[s].image, msk);
      put(flight.vegetation[s].image, veg);
      captures.push_back(Json{{"index", {i, j}},
                              {"position_m", {pose.position.x, pose.position.y, pose.position.z}},
                              {"yaw_deg", pose.yaw_deg},
                              {"image", img},
                              {"mask", msk},
                              {"vegetation", veg}});
    }
  }
  Json hotspots = Json::array();
  for (const auto& h : flight.hotspots) hotspots.push_back(to_json(h));
  const Json ds{{"version", 1},
                {"params", to_json(flight.params)},
                {"tree_count", flight.tree_count},
                {"leaf_count", flight.leaf_count},
                {"hotspots", std::move(hotspots)},
                {"truth", "truth.tgr"},
                {"surface", "surface.tgr"},
                {"surface_source", "surface_source.tgr"},
                {"captures", std::move(captures)}};
  write_json(ds, dir / kDatasetFile);
  written.push_back(kDatasetFile);
  return written;
}

FlightData load_flight(const fs::path& dir) {
  const Json ds = read_json(dir / kDatasetFile);
  FlightData d;
  try {
    d.params = flight_params_from_json(ds.at("params"));
    d.tree_count = ds.value("tree_count", std::size_t{0});
    d.leaf_count = ds.value("leaf_count", std::size_t{0});
    for (const auto& h : ds.at("hotspots")) d.hotspots.push_back(hotspot_from_json(h, "hotspots"));
    d.truth = read_raster(dir / ds.at("truth").get<std::string>());
    d.surface = std::make_shared<const TemperatureRaster>(
        read_raster(dir / ds.at("surface").get<std::string>()));
    d.surface_source = std::make_shared<const TemperatureRaster>(
        read_raster(dir / ds.at("surface_source").get<std::string>()));

    const SAGrid& g = d.params.grid;
    const CameraIntrinsics intr = d.params.intrinsics();
    std::map<int, const Json*> by_slot;
    for (const auto& c : ds.at("captures")) {
      const int i = c.at("index").at(0).get<int>();
      const int j = c.at("index").at(1).get<int>();
      if (i < 0 || j < 0 || i >= g.n || j >= g.m) {
        throw ParameterError(fmt::format("dataset: capture index ({}, {}) is outside the grid", i, j));
      }
      by_slot[j * g.n + i] = &c;
    }
    for (int j = 0; j < g.m; ++j) {
      for (int i = 0; i < g.n; ++i) {
        const auto it = by_slot.find(j * g.n + i);
        if (it == by_slot.end()) {
          throw ParameterError(fmt::format("dataset is missing waypoint ({}, {})", i, j));
        }
        const Json& c = *it->second;
        const auto& pos = c.at("position_m");
        const CameraPose pose{{pos.at(0).get<double>(), pos.at(1).get<double>(),
                               pos.at(2).get<double>()},
                              c.at("yaw_deg").get<double>(),
                              intr};
        auto load = [&](const char* key) {
          const fs::path path = dir / c.at(key).get<std::string>();
          if (!fs::exists(path)) {
            throw IoError(fmt::format("waypoint ({}, {}): missing {} file {}", i, j, key,
                                      path.string()));
          }
          TemperatureRaster r = read_raster(path);
          if (r.width() != intr.width || r.height() != intr.height) {
            throw ParameterError(fmt::format("waypoint ({}, {}): {} is {}x{}, expected {}x{}", i,
                                             j, key, r.width(), r.height(), intr.width,
                                             intr.height));
          }
          return Capture{std::move(r), pose};
        };
        d.images.push_back(load("image"));
        d.masks.push_back(load("mask"));
        d.vegetation.push_back(load("vegetation"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("dataset.json: ") + e.what());
  }
  return d;
}

Json to_json(const RunManifest& m) {
  return Json{{"subcommand", m.subcommand}, {"parameters", m.parameters},
              {"seeds", m.seeds},           {"inputs", m.inputs},
              {"outputs", m.outputs},       {"tool_version", m.tool_version}};
}

void write_run_manifest(const RunManifest& m, const fs::path& dir) {
  fs::create_directories(dir);
  write_json(to_json(m), dir / kRunManifestFile);
}

}  // namespace aos
