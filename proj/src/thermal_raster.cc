#include "aos/thermal_raster.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "aos/detail/bilinear.h"
#include "aos/errors.h"

namespace aos {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kEmptySelection: return "empty_selection";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kCapability: return "capability";
    case ErrorCode::kBackend: return "backend";
    case ErrorCode::kProjection: return "projection";
  }
  return "unknown";
}

TemperatureRaster::TemperatureRaster(int width, int height, float ambient_c,
                                     float ground_res_m,
                                     std::vector<float> data)
    : width_(width),
      height_(height),
      ambient_c_(ambient_c),
      ground_res_m_(ground_res_m),
      data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw ParameterError("raster dimensions must be positive");
  }
  if (data_.size() !=
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ParameterError("raster data length does not match width*height");
  }
  if (!std::isfinite(ambient_c)) {
    throw ParameterError("raster ambient_c must be finite");
  }
  if (!std::isfinite(ground_res_m) || ground_res_m <= 0.0f) {
    throw ParameterError("raster ground_res_m must be positive");
  }
  for (float v : data_) {
    if (std::isinf(v)) throw ParameterError("raster holds an infinite value");
  }
}

TemperatureRaster TemperatureRaster::filled(int width, int height, float value,
                                            float ambient_c,
                                            float ground_res_m) {
  if (width <= 0 || height <= 0) {
    throw ParameterError("raster dimensions must be positive");
  }
  return TemperatureRaster(
      width, height, ambient_c, ground_res_m,
      std::vector<float>(static_cast<std::size_t>(width) * height, value));
}

std::size_t TemperatureRaster::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), is_valid));
}

TemperatureRaster TemperatureRaster::with_ambient(float ambient_c) const {
  return TemperatureRaster(width_, height_, ambient_c, ground_res_m_, data_);
}

TemperatureRaster TemperatureRaster::with_data(std::vector<float> data) const {
  return TemperatureRaster(width_, height_, ambient_c_, ground_res_m_,
                           std::move(data));
}

bool bitwise_equal(const TemperatureRaster& a, const TemperatureRaster& b) {
  if (!a.same_shape(b)) return false;
  if (std::bit_cast<std::uint32_t>(a.ambient_c()) !=
          std::bit_cast<std::uint32_t>(b.ambient_c()) ||
      std::bit_cast<std::uint32_t>(a.ground_res_m()) !=
          std::bit_cast<std::uint32_t>(b.ground_res_m())) {
    return false;
  }
  return std::memcmp(a.data().data(), b.data().data(),
                     a.size() * sizeof(float)) == 0;
}

RegimeMask::RegimeMask(float lower, float upper)
    : lower_c(lower), upper_c(upper) {
  if (!(lower < upper)) {
    throw ParameterError("regime lower bound must be below upper bound");
  }
}

RasterStats raster_stats(const TemperatureRaster& r,
                         std::optional<RegimeMask> mask) {
  RasterStats s{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), 0.0, 0};
  double sum = 0.0;
  for (float v : r.data()) {
    if (!is_valid(v)) continue;
    if (mask && !mask->contains(v)) continue;
    s.min = std::min<double>(s.min, v);
    s.max = std::max<double>(s.max, v);
    sum += v;
    ++s.count;
  }
  if (s.count == 0) {
    throw EmptySelectionError("raster_stats: no valid pixel selected");
  }
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

float resample_bilinear(const TemperatureRaster& r, double x, double y) {
  return detail::bilinear(r.data().data(), r.width(), r.height(), x, y);
}

namespace {

void put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  return static_cast<std::uint32_t>(bytes[at]) |
         static_cast<std::uint32_t>(bytes[at + 1]) << 8 |
         static_cast<std::uint32_t>(bytes[at + 2]) << 16 |
         static_cast<std::uint32_t>(bytes[at + 3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_raster(const TemperatureRaster& r) {
  std::vector<std::uint8_t> out(kTgrHeaderBytes + r.size() * 4);
  std::uint8_t* p = out.data();
  std::memcpy(p, "TGR1", 4);
  put_u32(p + 4, static_cast<std::uint32_t>(r.width()));
  put_u32(p + 8, static_cast<std::uint32_t>(r.height()));
  put_u32(p + 12, std::bit_cast<std::uint32_t>(r.ambient_c()));
  put_u32(p + 16, std::bit_cast<std::uint32_t>(r.ground_res_m()));
  p += kTgrHeaderBytes;
  for (float v : r.data()) {
    put_u32(p, std::bit_cast<std::uint32_t>(v));
    p += 4;
  }
  return out;
}

TemperatureRaster decode_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated TGR1 magic", bytes.size());
  if (std::memcmp(bytes.data(), "TGR1", 4) != 0) {
    throw FormatError("bad magic, expected TGR1", 0);
  }
  if (bytes.size() < kTgrHeaderBytes) {
    throw FormatError("truncated TGR1 header", bytes.size());
  }
  const std::uint32_t width = get_u32(bytes, 4);
  const std::uint32_t height = get_u32(bytes, 8);
  const float ambient = std::bit_cast<float>(get_u32(bytes, 12));
  const float res = std::bit_cast<float>(get_u32(bytes, 16));
  if (width == 0 || width > (1u << 20)) throw FormatError("invalid width", 4);
  if (height == 0 || height > (1u << 20)) throw FormatError("invalid height", 8);
  if (!std::isfinite(ambient)) throw FormatError("non-finite ambient_c", 12);
  if (!std::isfinite(res) || res <= 0.0f) {
    throw FormatError("ground_res_m must be finite and positive", 16);
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t expected = kTgrHeaderBytes + count * 4;
  if (bytes.size() < expected) {
    throw FormatError("truncated TGR1 payload", bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes after TGR1 payload", expected);
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = kTgrHeaderBytes + i * 4;
    data[i] = std::bit_cast<float>(get_u32(bytes, at));
    if (std::isinf(data[i])) throw FormatError("infinite temperature", at);
  }
  return TemperatureRaster(static_cast<int>(width), static_cast<int>(height),
                           ambient, res, std::move(data));
}

TemperatureRaster read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_raster(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.byte_offset());
  }
}

void write_raster(const TemperatureRaster& r,
                  const std::filesystem::path& path) {
  const auto bytes = encode_raster(r);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open raster file for writing " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing raster file " + path.string());
}

}  // namespace aos
