#ifndef AOS_THERMAL_RASTER_H_
#define AOS_THERMAL_RASTER_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace aos {

inline constexpr float kNoData = std::numeric_limits<float>::quiet_NaN();

inline bool is_valid(float t) { return !std::isnan(t); }

// A 2-D grid of temperatures in degrees Celsius, row-major with the origin at
// the top-left pixel. NaN marks a no-data pixel. Pixel centers sit at integer
// continuous coordinates: pixel (x, y) covers [x - 0.5, x + 0.5].
//
// Rasters are immutable once built and may be shared across threads.
class TemperatureRaster {
 public:
  // Throws ParameterError if width/height are zero, data has the wrong length,
  // ground_res_m is not a positive finite number or a value is infinite.
  TemperatureRaster(int width, int height, float ambient_c, float ground_res_m,
                    std::vector<float> data);

  static TemperatureRaster filled(int width, int height, float value,
                                  float ambient_c = 0.0f,
                                  float ground_res_m = 1.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  float ambient_c() const { return ambient_c_; }
  float ground_res_m() const { return ground_res_m_; }

  float at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(int y) const {
    return std::span<const float>(data_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }

  std::size_t valid_count() const;

  // Copies with new metadata or new pixel values; dimensions are preserved.
  TemperatureRaster with_ambient(float ambient_c) const;
  TemperatureRaster with_data(std::vector<float> data) const;

  bool same_shape(const TemperatureRaster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

 private:
  int width_;
  int height_;
  float ambient_c_;
  float ground_res_m_;
  std::vector<float> data_;
};

// Bit-exact equality: metadata and every payload byte, NaN payloads included.
bool bitwise_equal(const TemperatureRaster& a, const TemperatureRaster& b);

// Half-open interval [lower_c, upper_c) selecting pixels by temperature.
struct RegimeMask {
  float lower_c;
  float upper_c;

  RegimeMask(float lower, float upper);

  bool contains(float t) const { return t >= lower_c && t < upper_c; }

  static RegimeMask full() { return {0.0f, 300.0f}; }
  static RegimeMask fire() { return {50.0f, 300.0f}; }
};

struct RasterStats {
  double min;
  double max;
  double mean;
  std::size_t count;
};

// Statistics over valid pixels, optionally restricted to a regime.
// Throws EmptySelectionError when nothing is selected.
RasterStats raster_stats(const TemperatureRaster& r,
                         std::optional<RegimeMask> mask = std::nullopt);

// Bilinear interpolation at continuous coordinates. Returns NaN when the
// point lies outside [0, width-1] x [0, height-1] or a neighbour with
// non-zero weight is no-data. Offsets within 1e-6 px of a pixel center or of
// the border snap onto it.
float resample_bilinear(const TemperatureRaster& r, double x, double y);

// TGR1 files: "TGR1", u32 width, u32 height, f32 ambient_c, f32 ground_res_m,
// then width*height f32 values. All little-endian.
inline constexpr std::size_t kTgrHeaderBytes = 20;

TemperatureRaster read_raster(const std::filesystem::path& path);
void write_raster(const TemperatureRaster& r, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_raster(const TemperatureRaster& r);
TemperatureRaster decode_raster(std::span<const std::uint8_t> bytes);

}  // namespace aos

#endif  // AOS_THERMAL_RASTER_H_
