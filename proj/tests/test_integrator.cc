#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "aos/camera.h"
#include "aos/errors.h"
#include "aos/integrator.h"
#include "aos/surface_field.h"
#include "test_util.h"

using namespace aos;

namespace {

std::vector<Capture> constant_captures(const SAGrid& g, int px, const std::vector<float>& values) {
  std::vector<Capture> caps;
  for (int j = 0; j < g.m; ++j) {
    for (int i = 0; i < g.n; ++i) {
      const float v = values[caps.size() % values.size()];
      caps.push_back({TemperatureRaster::filled(px, px, v), g.pose(i, j, {px, px})});
    }
  }
  return caps;
}

double sample(const TemperatureRaster& r, double x, double y) {
  // Same sampling rule as the library, written as an explicit weighted sum.
  constexpr double kSnap = 1e-6;
  const int w = r.width();
  const int h = r.height();
  if (x < -kSnap || y < -kSnap || x > w - 1 + kSnap || y > h - 1 + kSnap) return std::nan("");
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const int x0 = std::min(static_cast<int>(std::floor(x)), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(std::floor(y)), std::max(h - 2, 0));
  double fx = x - x0;
  double fy = y - y0;
  if (fx < kSnap) fx = 0.0;
  if (fx > 1.0 - kSnap) fx = 1.0;
  if (fy < kSnap) fy = 0.0;
  if (fy > 1.0 - kSnap) fy = 1.0;
  double acc = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const double wt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      if (wt == 0.0) continue;
      const float v = r.at(std::min(x0 + dx, w - 1), std::min(y0 + dy, h - 1));
      if (std::isnan(v)) return std::nan("");
      acc += wt * v;
    }
  }
  return acc;
}

// Per-pixel mean over captures, going through the ground point of every pixel.
struct Oracle {
  std::vector<double> mean;
  std::vector<int> count;
  std::vector<double> lo;
  std::vector<double> hi;
};

Oracle brute_force(const std::vector<Capture>& caps, const SAGrid& g, const CameraIntrinsics& out,
                   double ground_h) {
  const CameraPose center = g.center_pose(out);
  Oracle o;
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
  o.mean.assign(n, 0.0);
  o.count.assign(n, 0);
  o.lo.assign(n, std::numeric_limits<double>::infinity());
  o.hi.assign(n, -std::numeric_limits<double>::infinity());
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * out.width + x;
      const GroundPoint gp = project_to_ground(center, {double(x), double(y)}, ground_h);
      for (const auto& c : caps) {
        const PixelCoord p = ground_to_image(c.pose, gp, ground_h);
        const double v = sample(c.image, p.x, p.y);
        if (std::isnan(v)) continue;
        o.mean[k] += v;
        o.count[k] += 1;
        o.lo[k] = std::min(o.lo[k], v);
        o.hi[k] = std::max(o.hi[k], v);
      }
      if (o.count[k] > 0) o.mean[k] /= o.count[k];
    }
  }
  return o;
}

struct Fixture {
  SAGrid grid;
  std::vector<Capture> caps;
  double ground_h;
};

Fixture random_fixture(SplitMix64& rng) {
  Fixture f;
  f.grid.n = 1 + static_cast<int>(rng.uniform() * 5);
  f.grid.m = 1 + static_cast<int>(rng.uniform() * 5);
  f.grid.spacing_m = rng.uniform(0.5, 6.0);
  f.grid.altitude_agl_m = rng.uniform(20.0, 50.0);
  f.grid.center_x_m = rng.uniform(-3, 3);
  f.grid.center_y_m = rng.uniform(-3, 3);
  f.grid.yaw_deg = rng.uniform(-180, 180);
  f.ground_h = rng.uniform() < 0.3 ? rng.uniform(0.0, 5.0) : 0.0;
  const int px = 16 + static_cast<int>(rng.uniform() * 24);
  for (int j = 0; j < f.grid.m; ++j) {
    for (int i = 0; i < f.grid.n; ++i) {
      // Drop a few waypoints so subsets are exercised too.
      if (f.grid.size() > 1 && rng.uniform() < 0.15) continue;
      f.caps.push_back({test::random_raster(rng, px, px, 0.0, 120.0, 0.05),
                        f.grid.pose(i, j, {px, px})});
    }
  }
  if (f.caps.empty()) {
    f.caps.push_back({test::random_raster(rng, px, px, 0.0, 120.0), f.grid.pose(0, 0, {px, px})});
  }
  return f;
}

}  // namespace

TEST_SUITE("integrator") {
  TEST_CASE("identical constant views integrate to the constant") {
    const SAGrid g;  // 11 x 11, 2 m
    const auto caps = constant_captures(g, 64, {20.0f});
    const auto out = integrate(caps, g);
    for (float v : out.sigma.data()) CHECK(v == 20.0f);
    CHECK(out.count.at(32, 32) == 121.0f);
    CHECK(raster_stats(out.count).min >= 1.0);
  }

  TEST_CASE("no-data samples are excluded from the mean") {
    SAGrid g;
    g.n = 11;
    g.m = 1;
    std::vector<Capture> caps;
    const float vals[] = {10.0f, 20.0f, 30.0f};
    for (int i = 0; i < 11; ++i) {
      const float v = i < 3 ? vals[i] : kNoData;
      caps.push_back({TemperatureRaster::filled(32, 32, v), g.pose(i, 0, {32, 32})});
    }
    const auto out = integrate(caps, g);
    // Pixels seen by all three valid views.
    CHECK(out.sigma.at(8, 16) == doctest::Approx(20.0));
    CHECK(out.count.at(8, 16) == 3.0f);
  }

  TEST_CASE("visibility masks average to the ground fraction") {
    SAGrid g;
    g.n = 2;
    g.m = 1;
    g.spacing_m = 0.5;
    std::vector<Capture> masks = {
        {TemperatureRaster::filled(32, 32, 1.0f), g.pose(0, 0, {32, 32})},
        {TemperatureRaster::filled(32, 32, 0.0f), g.pose(1, 0, {32, 32})}};
    const auto f = integrate_mask(masks, g);
    CHECK(f.at(16, 16) == doctest::Approx(0.5));
  }

  TEST_CASE("matches the brute-force oracle on random partial-overlap fixtures") {
    SplitMix64 rng(1234);
    int fixtures = 0;
    for (int k = 0; k < 60; ++k) {
      const Fixture f = random_fixture(rng);
      const auto out = integrate(f.caps, f.grid, f.ground_h);
      const auto& intr = out.center.intrinsics;
      const Oracle o = brute_force(f.caps, f.grid, intr, f.ground_h);
      bool ok = true;
      for (std::size_t i = 0; i < o.mean.size(); ++i) {
        const float got = out.sigma.data()[i];
        if (o.count[i] == 0) {
          ok &= std::isnan(got);
        } else {
          ok &= std::abs(got - o.mean[i]) <= 1e-4;
          ok &= out.count.data()[i] == static_cast<float>(o.count[i]);
          // Bounded by the contributing samples.
          ok &= got >= o.lo[i] - 1e-4 && got <= o.hi[i] + 1e-4;
        }
      }
      CHECK(ok);
      ++fixtures;
    }
    CHECK(fixtures >= 50);
  }

  TEST_CASE("capture order and thread count do not change the result") {
    SplitMix64 rng(77);
    for (int k = 0; k < 8; ++k) {
      Fixture f = random_fixture(rng);
      const auto ref = integrate(f.caps, f.grid, f.ground_h);
      for (std::size_t i = f.caps.size(); i > 1; --i) {
        std::swap(f.caps[i - 1], f.caps[static_cast<std::size_t>(rng.uniform() * i)]);
      }
      IntegrateOptions opts;
      opts.threads = 3;
      const auto shuffled = integrate(f.caps, f.grid, f.ground_h, opts);
      CHECK(bitwise_equal(ref.sigma, shuffled.sigma));
      CHECK(bitwise_equal(ref.count, shuffled.count));
    }
  }

  TEST_CASE("invalid capture sets") {
    SAGrid g;
    g.n = 3;
    g.m = 1;
    std::vector<Capture> none;
    CHECK_THROWS_AS(integrate(none, g), ParameterError);
    auto caps = constant_captures(g, 16, {5.0f});
    caps[1].pose = caps[0].pose;
    CHECK_THROWS_AS(integrate(caps, g), ParameterError);
    caps = constant_captures(g, 16, {5.0f});
    caps[2].pose.position.x += 0.7;
    CHECK_THROWS_AS(integrate(caps, g), ParameterError);
    caps = constant_captures(g, 16, {5.0f});
    caps[2].pose.position.z = 40.0;
    CHECK_THROWS_AS(integrate(caps, g), ParameterError);
  }

  TEST_CASE("window placement counts") {
    SAGrid w;
    w.n = 11;
    w.m = 1;
    SlideOptions o;
    CHECK(window_centers(13, 1, w, o).size() == 3);
    o.stride_n = 13;
    CHECK(window_centers(13, 1, w, o).size() == 1);
    o.stride_n = 14;
    CHECK(window_centers(13, 1, w, o).empty());
    o.stride_n = 4;
    o.pad = true;
    CHECK(window_centers(13, 1, w, o).size() == 4);
    o.stride_n = 0;
    CHECK_THROWS_AS(window_centers(13, 1, w, o), ParameterError);
  }

  TEST_CASE("sliding windows equal direct integration of their captures") {
    SplitMix64 rng(9);
    CaptureGrid cg;
    cg.cols = 6;
    cg.rows = 4;
    cg.spacing_m = 1.5;
    SAGrid layout;
    layout.n = cg.cols;
    layout.m = cg.rows;
    layout.spacing_m = cg.spacing_m;
    for (int j = 0; j < cg.rows; ++j) {
      for (int i = 0; i < cg.cols; ++i) {
        cg.captures.push_back({test::random_raster(rng, 24, 24, 0, 60), layout.pose(i, j, {24, 24})});
      }
    }
    SAGrid w;
    w.n = 3;
    w.m = 3;
    for (bool pad : {false, true}) {
      SlideOptions o;
      o.stride_n = 2;
      o.stride_m = 1;
      o.pad = pad;
      const auto results = sliding_integrate(cg, w, o);
      CHECK(results.size() == window_centers(6, 4, w, o).size());
      for (const auto& r : results) {
        // Independently gather the window's captures.
        std::vector<Capture> subset;
        for (int j = r.center_j - 1; j <= r.center_j + 1; ++j) {
          for (int i = r.center_i - 1; i <= r.center_i + 1; ++i) {
            if (i >= 0 && j >= 0 && i < cg.cols && j < cg.rows) subset.push_back(cg.at(i, j));
          }
        }
        SAGrid g = w;
        g.spacing_m = cg.spacing_m;
        g.center_x_m = cg.at(r.center_i, r.center_j).pose.position.x;
        g.center_y_m = cg.at(r.center_i, r.center_j).pose.position.y;
        const auto direct = integrate(subset, g);
        CHECK(bitwise_equal(direct.sigma, r.integral.sigma));
      }
    }
  }

  TEST_CASE("integrating the bare ground reproduces it") {
    const auto surf = gen_surface_field(3, 15.0, 256, {});
    SAGrid g;
    g.n = 5;
    g.m = 5;
    std::vector<Capture> caps;
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < 5; ++i) {
        const CameraPose pose = g.pose(i, j, {48, 48});
        std::vector<float> v(48 * 48);
        for (int y = 0; y < 48; ++y) {
          for (int x = 0; x < 48; ++x) {
            const auto gp = project_to_ground(pose, {double(x), double(y)});
            const auto p = ground_to_pixel(surf, gp);
            v[y * 48 + x] = resample_bilinear(surf, p.x, p.y);
          }
        }
        caps.push_back({TemperatureRaster(48, 48, 15.0f, 0.46f, std::move(v)), pose});
      }
    }
    const auto out = integrate(caps, g);
    double se = 0.0;
    for (int k = 0; k < 48 * 48; ++k) {
      const double d = out.sigma.data()[k] - caps[12].image.data()[k];
      se += d * d;
    }
    // Resampling smooths a little; the mean is unchanged in expectation.
    CHECK(std::sqrt(se / (48 * 48)) <= 0.5);
  }
}
