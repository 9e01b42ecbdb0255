#include "aos/surface_field.h"

#include <algorithm>
#include <cmath>

#include "aos/errors.h"
#include "aos/rng.h"

namespace aos {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double lattice_value(std::uint64_t seed, int octave, std::int64_t ix,
                     std::int64_t iy) {
  const std::uint64_t key = hash_combine(
      hash_combine(static_cast<std::uint64_t>(octave),
                   static_cast<std::uint64_t>(ix)),
      static_cast<std::uint64_t>(iy));
  return unit_at(seed, key);
}

// Value noise summed over octaves, normalized to [0, 1].
double fractal_noise(std::uint64_t seed, int octaves, double wavelength_m,
                     double x, double y) {
  double sum = 0.0;
  double norm = 0.0;
  double amplitude = 1.0;
  double wavelength = wavelength_m;
  for (int o = 0; o < octaves; ++o) {
    const double u = x / wavelength;
    const double v = y / wavelength;
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const auto iu = static_cast<std::int64_t>(fu);
    const auto iv = static_cast<std::int64_t>(fv);
    const double su = quintic(u - fu);
    const double sv = quintic(v - fv);
    const double a = lattice_value(seed, o, iu, iv);
    const double b = lattice_value(seed, o, iu + 1, iv);
    const double c = lattice_value(seed, o, iu, iv + 1);
    const double d = lattice_value(seed, o, iu + 1, iv + 1);
    const double top = a + (b - a) * su;
    const double bottom = c + (d - c) * su;
    sum += amplitude * (top + (bottom - top) * sv);
    norm += amplitude;
    amplitude *= 0.5;
    wavelength *= 0.5;
  }
  return sum / norm;
}

}  // namespace

AugmentationParams AugmentationParams::for_ambients(double source_ambient_c,
                                                    double target_ambient_c,
                                                    double t_max_c,
                                                    double t_max_target_c,
                                                    double alpha) {
  AugmentationParams p;
  p.t_lower_c = kFreezingPointC;
  p.t_upper_c = source_ambient_c + kSolarHeatingMarginC;
  p.alpha = alpha;
  p.delta_t_c = target_ambient_c - source_ambient_c;
  p.t_max_c = t_max_c;
  p.t_max_target_c = t_max_target_c;
  return p;
}

void AugmentationParams::validate() const {
  if (!(t_lower_c < t_upper_c)) {
    throw ParameterError("augmentation: t_lower_c must be below t_upper_c");
  }
  if (!(t_max_c > t_upper_c)) {
    throw ParameterError("augmentation: t_max_c must exceed t_upper_c");
  }
  if (!(t_max_target_c > t_upper_c)) {
    throw ParameterError("augmentation: t_max_target_c must exceed t_upper_c");
  }
  if (!(alpha > 0.0)) throw ParameterError("augmentation: alpha must be > 0");
  if (!std::isfinite(delta_t_c)) {
    throw ParameterError("augmentation: delta_t_c must be finite");
  }
}

double augmentation_weight(double t, const AugmentationParams& p) {
  return sigmoid(p.alpha * (t - p.t_lower_c)) -
         sigmoid(p.alpha * (t - p.t_upper_c));
}

double augment_nonfire(double t, const AugmentationParams& p) {
  return t + augmentation_weight(t, p) * p.delta_t_c;
}

double augment_fire(double t, const AugmentationParams& p) {
  if (!(t > p.t_upper_c)) {
    throw DomainError("augment_fire: temperature must exceed t_upper_c");
  }
  const double scale =
      (p.t_max_target_c - p.t_upper_c) / (p.t_max_c - p.t_upper_c);
  return p.t_upper_c + scale * (t - p.t_upper_c);
}

TemperatureRaster augment_raster(const TemperatureRaster& r,
                                 const AugmentationParams& p) {
  p.validate();
  std::vector<float> out(r.size());
  const auto in = r.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const float t = in[i];
    if (!is_valid(t)) {
      out[i] = t;
    } else if (t > p.t_upper_c) {
      out[i] = static_cast<float>(augment_fire(t, p));
    } else {
      out[i] = static_cast<float>(augment_nonfire(t, p));
    }
  }
  return TemperatureRaster(r.width(), r.height(),
                           static_cast<float>(r.ambient_c() + p.delta_t_c),
                           r.ground_res_m(), std::move(out));
}

PixelCoord ground_to_pixel(const TemperatureRaster& r, GroundPoint g) {
  const double res = r.ground_res_m();
  return {g.x / res + (r.width() - 1) * 0.5,
          (r.height() - 1) * 0.5 - g.y / res};
}

GroundPoint pixel_to_ground(const TemperatureRaster& r, PixelCoord p) {
  const double res = r.ground_res_m();
  return {(p.x - (r.width() - 1) * 0.5) * res,
          ((r.height() - 1) * 0.5 - p.y) * res};
}

double half_extent_m(const TemperatureRaster& r) {
  return 0.5 * std::min(r.width(), r.height()) * r.ground_res_m();
}

TemperatureRaster gen_surface_field(const SurfaceFieldParams& params) {
  if (params.size_px <= 0) {
    throw ParameterError("gen_surface_field: size must be positive");
  }
  if (!(params.ground_res_m > 0.0)) {
    throw ParameterError("gen_surface_field: ground_res_m must be positive");
  }
  if (params.octaves < 1) {
    throw ParameterError("gen_surface_field: need at least one octave");
  }
  const int n = params.size_px;
  const double half = 0.5 * n * params.ground_res_m;
  const double upper = params.ambient_c + kSolarHeatingMarginC;
  const double lower = std::max<double>(kFreezingPointC, params.ambient_c - 4.0);
  for (const auto& h : params.hotspots) {
    if (std::abs(h.center_x_m) > half || std::abs(h.center_y_m) > half) {
      throw ParameterError("gen_surface_field: hotspot center outside raster");
    }
    if (!(h.radius_m > 0.0) || !(h.falloff > 0.0)) {
      throw ParameterError("gen_surface_field: hotspot radius and falloff must be > 0");
    }
    if (!(h.peak_c > upper)) {
      throw ParameterError(
          "gen_surface_field: hotspot peak must exceed ambient + 15 C");
    }
  }

  const std::uint64_t noise_seed = derive_seed(params.seed, "surface-noise");
  std::vector<float> data(static_cast<std::size_t>(n) * n);
  const float res = static_cast<float>(params.ground_res_m);
  const TemperatureRaster frame = TemperatureRaster::filled(
      n, n, 0.0f, 0.0f, res);  // geometry only
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const GroundPoint g = pixel_to_ground(frame, {double(i), double(j)});
      const double noise = fractal_noise(noise_seed, params.octaves,
                                         params.base_wavelength_m, g.x, g.y);
      // Stretch the bell-shaped octave sum before clamping into the band.
      const double stretched = std::clamp(0.5 + 1.6 * (noise - 0.5), 0.0, 1.0);
      double t = lower + (upper - lower) * stretched;
      for (const auto& h : params.hotspots) {
        const double r = std::hypot(g.x - h.center_x_m, g.y - h.center_y_m);
        const double k = std::exp(-std::pow(r / h.radius_m, h.falloff));
        t = std::max(t, std::min(h.peak_c, t + (h.peak_c - t) * k));
      }
      data[static_cast<std::size_t>(j) * n + i] = static_cast<float>(t);
    }
  }
  return TemperatureRaster(n, n, static_cast<float>(params.ambient_c), res,
                           std::move(data));
}

TemperatureRaster gen_surface_field(std::uint64_t seed, double ambient_c,
                                    int size_px,
                                    const std::vector<HotspotSpec>& hotspots) {
  SurfaceFieldParams p;
  p.seed = seed;
  p.ambient_c = ambient_c;
  p.size_px = size_px;
  p.hotspots = hotspots;
  return gen_surface_field(p);
}

}  // namespace aos
