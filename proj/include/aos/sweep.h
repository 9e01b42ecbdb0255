#ifndef AOS_SWEEP_H_
#define AOS_SWEEP_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aos/correction.h"
#include "aos/detect_eval.h"
#include "aos/flight.h"

namespace aos {

enum class SaType { k2d, kRow, kCol };

std::string_view sa_type_name(SaType t);
// Accepts "2d", "1d-row", "1d-col"; throws ParameterError otherwise.
SaType parse_sa_type(std::string_view s);

// Integral, aggregated visibility and per-pixel vegetation reference of one
// SA layout through the grid center, plus the analytic correction.
struct SaOutputs {
  IntegralImage sigma;
  TemperatureRaster visibility;
  TemperatureRaster vegetation;  // mean occluder temperature, no-data where f == 1
  CorrectionResult corrected;
};

SaOutputs integrate_and_correct(const FlightData& flight, SaType type,
                                const AnalyticOptions& options = {}, int threads = 1);

struct SweepConfig {
  FlightParams base;  // every field not swept below
  std::vector<double> densities_tpha{585.0};
  std::vector<double> ambients_c{15.0};
  std::vector<double> sun_abs_c{7.0};
  std::vector<double> solar_deg{0.0};
  std::vector<SaType> sa_types{SaType::k2d, SaType::kRow};
  std::vector<std::uint64_t> seeds{0};
  AnalyticOptions correction;
  int jobs = 1;

  void validate() const;
  std::size_t configuration_count() const;
};

// One flight per (density, ambient, sun, solar, seed); each is scored for the
// single center image ("none" SA type) and for the integral and corrected
// output of every SA type, in the full and fire regimes. Records come out in
// a fixed order regardless of `jobs`. A failing configuration yields records
// with NaN metrics and an error message instead of aborting the sweep; an
// empty fire selection yields NaN metrics for that regime.
std::vector<EvaluationRecord> run_sweep(const SweepConfig& config);

inline constexpr std::string_view kSweepCsvHeader =
    "density_tpha,ambient_c,sun_abs_c,solar_deg,sa_type,method,regime,mse,rmse,seed";

void write_sweep_csv(const std::vector<EvaluationRecord>& records, std::ostream& out);
void write_sweep_csv(const std::vector<EvaluationRecord>& records,
                     const std::filesystem::path& path);
// Throws FormatError on a malformed header or row.
std::vector<EvaluationRecord> read_sweep_csv(const std::filesystem::path& path);

// Line charts of mean RMSE against every swept axis with more than one value,
// one SVG per (axis, regime). Returns the written files.
std::vector<std::filesystem::path> write_sweep_plots(const std::vector<EvaluationRecord>& records,
                                                     const std::filesystem::path& dir);

}  // namespace aos

#endif  // AOS_SWEEP_H_
