#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "aos/correction.h"
#include "aos/errors.h"
#include "test_util.h"

using namespace aos;

namespace {

TemperatureRaster row(std::vector<float> v) {
  const int w = static_cast<int>(v.size());
  return TemperatureRaster(w, 1, 15.0f, 0.1f, std::move(v));
}

CorrectionInput input(TemperatureRaster sigma, TemperatureRaster f, double tv) {
  CorrectionInput in{.sigma = std::move(sigma), .ambient_c = 15.0, .visibility = std::move(f),
                     .vegetation_c = tv, .vegetation_map = std::nullopt, .sun_absorption_c = 0.0};
  return in;
}

}  // namespace

TEST_SUITE("correction") {
  TEST_CASE("ambient estimate") {
    const std::vector<TemperatureRaster> one = {TemperatureRaster::filled(8, 8, 13.0f)};
    CHECK(estimate_ambient(one) == doctest::Approx(13.0));
    const std::vector<TemperatureRaster> two = {TemperatureRaster::filled(4, 4, 10.0f),
                                                TemperatureRaster::filled(4, 4, 16.0f)};
    CHECK(estimate_ambient(two) == doctest::Approx(13.0));
    const std::vector<TemperatureRaster> holes = {row({kNoData, 12.0f, 14.0f})};
    CHECK(estimate_ambient(holes) == doctest::Approx(13.0));
    const std::vector<TemperatureRaster> empty = {row({kNoData})};
    CHECK_THROWS_AS(estimate_ambient(empty), EmptySelectionError);
  }

  TEST_CASE("single-pixel unmixing") {
    const auto r = correct_analytic(input(row({45.0f}), row({0.6f}), 15.0));
    CHECK(r.corrected.at(0, 0) == doctest::Approx(65.0));
    CHECK(r.flags[0] == kFlagNone);
  }

  TEST_CASE("full visibility is the identity") {
    SplitMix64 rng(4);
    const auto sigma = test::random_raster(rng, 20, 20, -10.0, 300.0, 0.05);
    const auto f = TemperatureRaster::filled(20, 20, 1.0f);
    const auto r = correct_analytic(input(sigma, f, 99.0));
    CHECK(bitwise_equal(r.corrected, sigma));
    CHECK(r.low_confidence == 0);
    CHECK(r.clamped == 0);
  }

  TEST_CASE("recovers the ground temperature of a constructed mixture") {
    SplitMix64 rng(8);
    const int n = 400;
    std::vector<float> ts(n), fs(n), tv(n), sigma(n);
    for (int i = 0; i < n; ++i) {
      ts[i] = static_cast<float>(rng.uniform(0.0, 300.0));
      fs[i] = static_cast<float>(rng.uniform(0.1, 1.0));
      tv[i] = static_cast<float>(rng.uniform(10.0, 30.0));
      sigma[i] = static_cast<float>(double(fs[i]) * ts[i] + (1.0 - fs[i]) * tv[i]);
    }
    auto in = input(row(sigma), row(fs), 0.0);
    in.vegetation_map = row(tv);
    const auto r = correct_analytic(in);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(r.corrected.at(i, 0) - ts[i]) <= 1e-3);
    }

    // Scalar reference temperature.
    std::vector<float> sigma2(n);
    for (int i = 0; i < n; ++i) sigma2[i] = static_cast<float>(fs[i] * ts[i] + (1.0 - fs[i]) * 18.5);
    const auto r2 = correct_analytic(input(row(sigma2), row(fs), 18.5));
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(r2.corrected.at(i, 0) - ts[i]) <= 1e-3);
    }
  }

  TEST_CASE("default vegetation temperature is ambient plus half the absorption") {
    CorrectionInput in{.sigma = row({18.5f}), .ambient_c = 15.0, .visibility = row({0.5f}),
                       .vegetation_c = std::nullopt, .vegetation_map = std::nullopt,
                       .sun_absorption_c = 7.0};
    CHECK(in.default_vegetation_c() == doctest::Approx(18.5));
    CHECK(correct_analytic(in).corrected.at(0, 0) == doctest::Approx(18.5));
  }

  TEST_CASE("low visibility passes through and extremes are clamped") {
    const auto r = correct_analytic(input(row({40.0f, 300.0f, -30.0f, kNoData, 20.0f}),
                                          row({0.05f, 0.2f, 0.2f, 0.5f, kNoData}), 15.0));
    CHECK(r.corrected.at(0, 0) == 40.0f);
    CHECK((r.flags[0] & kFlagLowConfidence) != 0);
    CHECK(r.corrected.at(1, 0) == kPhysicalMaxC);
    CHECK((r.flags[1] & kFlagClamped) != 0);
    CHECK(r.corrected.at(2, 0) == kPhysicalMinC);
    CHECK(std::isnan(r.corrected.at(3, 0)));
    CHECK(r.corrected.at(4, 0) == 20.0f);
    CHECK(r.low_confidence == 2);
    CHECK(r.clamped == 2);

    AnalyticOptions strict;
    strict.f_min = 0.3;
    const auto s = correct_analytic(input(row({30.0f}), row({0.25f}), 15.0), strict);
    CHECK(s.corrected.at(0, 0) == 30.0f);
    strict.f_min = 0.0;
    CHECK_THROWS_AS(correct_analytic(input(row({30.0f}), row({0.25f}), 15.0), strict),
                    ParameterError);
  }

  TEST_CASE("missing or mismatched inputs") {
    CorrectionInput in{.sigma = row({1.0f}), .ambient_c = 15.0, .visibility = std::nullopt,
                       .vegetation_c = std::nullopt, .vegetation_map = std::nullopt,
                       .sun_absorption_c = 0.0};
    CHECK_THROWS_AS(correct_analytic(in), CapabilityError);
    CHECK_THROWS_AS(correct_analytic(input(row({1.0f}), row({1.0f, 1.0f}), 15.0)), ParameterError);
  }

  TEST_CASE("vegetation reference divides by the occluded fraction") {
    const auto v = vegetation_reference(row({0.4f * 20.0f, 0.0f, 5.0f}), row({0.6f, 1.0f, 0.0f}));
    CHECK(v.at(0, 0) == doctest::Approx(20.0));
    CHECK(std::isnan(v.at(1, 0)));
    CHECK(v.at(2, 0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(vegetation_reference(row({1.0f}), row({1.0f, 1.0f})), ParameterError);
  }

  TEST_CASE("exchange request layout") {
    test::TempDir dir;
    const auto path = write_exchange_request(input(row({30.0f, 31.0f}), row({0.5f, 0.7f}), 15.0),
                                             dir.path());
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("version") == 1);
    CHECK(j.at("ambient_c") == 15.0);
    CHECK(j.at("input") == "sigma.tgr");
    CHECK(j.at("mask") == "f.tgr");
    CHECK(j.at("output") == "sigma_prime.tgr");
    const auto s = read_raster(dir / "sigma.tgr");
    CHECK(s.ambient_c() == 15.0f);
    CHECK(s.at(1, 0) == 31.0f);
    CHECK(read_raster(dir / "f.tgr").at(1, 0) == 0.7f);
  }

  TEST_CASE("echo backend round trip") {
    test::TempDir dir;
    SplitMix64 rng(3);
    const auto sigma = test::random_raster(rng, 17, 9, 0.0, 100.0, 0.1);
    ExternalBackend b{AOS_ECHO_BACKEND, std::chrono::milliseconds(20000), dir.path()};
    const auto out = correct_external(input(sigma, TemperatureRaster::filled(17, 9, 0.5f), 15.0), b);
    CHECK(out.same_shape(sigma));
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      const float a = sigma.data()[i];
      const float c = out.data()[i];
      CHECK(((std::isnan(a) && std::isnan(c)) || a == c));
    }
  }

  TEST_CASE("exchange directory is created under the configured root") {
    test::TempDir root;
    ::setenv(kExchangeRootEnv, root.path().c_str(), 1);
    ExternalBackend b{AOS_ECHO_BACKEND, std::chrono::milliseconds(20000), {}};
    CHECK_NOTHROW(correct_external(input(row({1.0f}), row({1.0f}), 15.0), b));
    ::unsetenv(kExchangeRootEnv);
    int dirs = 0;
    for (const auto& e : std::filesystem::directory_iterator(root.path())) {
      dirs += e.is_directory() && std::filesystem::exists(e.path() / "request.json");
    }
    CHECK(dirs == 1);
  }

  TEST_CASE("backend failures") {
    test::TempDir dir;
    const auto in = input(row({1.0f, 2.0f}), row({1.0f, 1.0f}), 15.0);
    auto backend = [&](const std::string& cmd, int ms = 20000) {
      return ExternalBackend{cmd, std::chrono::milliseconds(ms), dir.path()};
    };
    try {
      correct_external(in, backend(AOS_MISMATCH_BACKEND));
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
    }
    try {
      correct_external(in, backend("echo boom >&2; false"));
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(std::string(e.what()).find("status 1") != std::string::npos);
    }
    CHECK_THROWS_AS(correct_external(in, backend("true")), BackendError);
    const auto start = std::chrono::steady_clock::now();
    try {
      correct_external(in, backend("sleep 30;", 300));
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
    test::spit(dir / "junk.sh", "printf garbage > \"$(dirname \"$2\")/sigma_prime.tgr\"\n");
    CHECK_THROWS_AS(correct_external(in, backend("sh " + (dir / "junk.sh").string())),
                    BackendError);
    CHECK_THROWS_AS(correct_external(in, backend("")), ParameterError);
  }
}
