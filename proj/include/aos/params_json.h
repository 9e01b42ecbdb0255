#ifndef AOS_PARAMS_JSON_H_
#define AOS_PARAMS_JSON_H_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aos/detect_eval.h"
#include "aos/flight.h"
#include "aos/sweep.h"

namespace aos {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

// Parameter files are strict: unknown keys and wrong types raise
// ParameterError naming the offending key. Missing keys keep their defaults.
FlightParams flight_params_from_json(const Json& j);
Json to_json(const FlightParams& p);

SweepConfig sweep_config_from_json(const Json& j);
Json to_json(const SweepConfig& c);

Json to_json(const Hotspot& h);
Json to_json(const HotspotSpec& h);

// Parses a JSON file; syntax errors raise FormatError with the byte offset.
Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline so reruns produce identical bytes.
void write_json(const Json& j, const std::filesystem::path& path);

// --- Dataset directories -----------------------------------------------------
//
// dataset.json holds the flight parameters, the grid, hotspot list and one
// entry per capture:
//   {"index": [i, j], "position_m": [x, y, z], "yaw_deg": ..,
//    "image": "images/...", "mask": "masks/...", "vegetation": "vegetation/..."}
// Raster paths are relative to the dataset directory.

inline constexpr const char* kDatasetFile = "dataset.json";
inline constexpr const char* kRunManifestFile = "manifest.json";

// Writes every raster plus dataset.json; returns the relative paths written.
std::vector<std::string> save_flight(const FlightData& flight, const std::filesystem::path& dir);

// Loads a dataset directory. Throws ParameterError naming the first missing
// waypoint and IoError/FormatError for unreadable rasters.
FlightData load_flight(const std::filesystem::path& dir);

struct RunManifest {
  std::string subcommand;
  Json parameters;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string tool_version = kToolVersion;
};

Json to_json(const RunManifest& m);
void write_run_manifest(const RunManifest& m, const std::filesystem::path& dir);

}  // namespace aos

#endif  // AOS_PARAMS_JSON_H_
