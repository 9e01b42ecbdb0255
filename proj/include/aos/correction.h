#ifndef AOS_CORRECTION_H_
#define AOS_CORRECTION_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aos/thermal_raster.h"

namespace aos {

// Physical clamp applied to corrected temperatures.
inline constexpr float kPhysicalMinC = -40.0f;
inline constexpr float kPhysicalMaxC = 400.0f;

struct CorrectionInput {
  TemperatureRaster sigma;
  double ambient_c = 0.0;
  std::optional<TemperatureRaster> visibility;  // f, same shape as sigma
  // Vegetation reference: a per-pixel raster takes precedence over the
  // scalar, which defaults to ambient + sun_absorption / 2.
  std::optional<double> vegetation_c;
  std::optional<TemperatureRaster> vegetation_map;
  double sun_absorption_c = 0.0;

  void validate() const;
  double default_vegetation_c() const { return ambient_c + 0.5 * sun_absorption_c; }
};

struct CorrectionBackend {
  std::string id;
  bool needs_mask = false;
  bool external = false;
};

inline const CorrectionBackend kAnalyticBackend{"analytic", true, false};

// Mean over every valid pixel of every image. Throws EmptySelectionError
// when there are none.
double estimate_ambient(std::span<const TemperatureRaster> images);

enum PixelFlag : std::uint8_t {
  kFlagNone = 0,
  kFlagLowConfidence = 1,  // f below f_min, value passed through
  kFlagClamped = 2,        // result clamped into the physical range
};

struct AnalyticOptions {
  double f_min = 0.1;
};

struct CorrectionResult {
  TemperatureRaster corrected;
  std::vector<std::uint8_t> flags;  // PixelFlag bits per pixel
  std::size_t low_confidence = 0;
  std::size_t clamped = 0;
};

// Occlusion unmixing sigma' = (sigma - (1 - f) T_v) / f where f >= f_min;
// other pixels pass through flagged. Throws CapabilityError without f.
CorrectionResult correct_analytic(const CorrectionInput& in,
                                  const AnalyticOptions& options = {});

// Per-pixel mean vegetation temperature of an integral: the integral of the
// rendered vegetation component divided by (1 - f). No-data where f == 1.
TemperatureRaster vegetation_reference(const TemperatureRaster& vegetation_integral,
                                       const TemperatureRaster& visibility);

// --- File-exchange protocol for external backends ---------------------------
//
// The exchange directory holds sigma.tgr (ambient in its header), f.tgr when
// a mask is present and request.json:
//   {"version": 1, "ambient_c": ..., "input": "sigma.tgr",
//    "mask": "f.tgr", "output": "sigma_prime.tgr"}
// The backend runs as `<command> --request <dir>/request.json` and succeeds
// with exit code 0 and the output file written.

inline constexpr int kExchangeVersion = 1;
inline constexpr const char* kExchangeRootEnv = "AOS_EXCHANGE_ROOT";

struct ExternalBackend {
  std::string command;  // shell command line, --request is appended
  std::chrono::milliseconds timeout{60000};
  // Exchange directory; when empty a fresh one is created under
  // $AOS_EXCHANGE_ROOT (or the system temp directory).
  std::filesystem::path exchange_dir;
};

// Writes the request files into `dir` and returns the request path.
std::filesystem::path write_exchange_request(const CorrectionInput& in,
                                             const std::filesystem::path& dir);

TemperatureRaster correct_external(const CorrectionInput& in,
                                   const ExternalBackend& backend);

}  // namespace aos

#endif  // AOS_CORRECTION_H_
