#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "aos/flight.h"
#include "aos/integrator.h"
#include "aos/params_json.h"
#include "test_util.h"

using namespace aos;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

RunResult run(const std::string& args) {
  const std::string cmd = quote(AOS_TOOL) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write_small_params(const fs::path& path, double density = 300.0, int n = 3) {
  nlohmann::ordered_json j = {
      {"seed", 5},
      {"forest", {{"density_tpha", density}}},
      {"grid", {{"n", n}, {"m", n}}},
      {"camera", {{"image_px", 32}}},
  };
  test::spit(path, j.dump(2));
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_same_tree(const fs::path& a, const fs::path& b, const std::string& skip = "") {
  const auto fa = files_under(a);
  REQUIRE(fa == files_under(b));
  for (const auto& f : fa) {
    if (!skip.empty() && f.filename() == skip) continue;
    CHECK_MESSAGE(test::slurp(a / f) == test::slurp(b / f), f.string());
  }
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    const auto r = run("detect --input");
    CHECK(r.code == 2);
    CHECK(r.json()["ok"] == false);
    CHECK(run("integrate --dataset x --out y --sa 3d").code == 2);
  }

  TEST_CASE("simulate, integrate and replay are reproducible") {
    test::TempDir dir;
    write_small_params(dir / "p.json");
    const auto sim = run("simulate --params " + (dir / "p.json").string() + " --out " +
                         (dir / "ds").string());
    REQUIRE(sim.code == 0);
    const auto sj = sim.json();
    CHECK(sj["ok"] == true);
    CHECK(sj["images"] == 9);
    CHECK(fs::exists(dir / "ds" / "dataset.json"));
    CHECK(fs::exists(dir / "ds" / "manifest.json"));

    REQUIRE(run("simulate --params " + (dir / "p.json").string() + " --out " +
                (dir / "ds2").string()).code == 0);
    check_same_tree(dir / "ds", dir / "ds2", "manifest.json");

    REQUIRE(run("replay --manifest " + (dir / "ds" / "manifest.json").string() + " --out " +
                (dir / "ds3").string()).code == 0);
    check_same_tree(dir / "ds", dir / "ds3", "manifest.json");

    const auto integ = run("integrate --dataset " + (dir / "ds").string() + " --out " +
                           (dir / "int").string());
    REQUIRE(integ.code == 0);
    for (const char* f : {"sigma.tgr", "count.tgr", "f.tgr", "vegetation.tgr", "manifest.json"}) {
      CHECK(fs::exists(dir / "int" / f));
    }
    REQUIRE(run("replay --manifest " + (dir / "int" / "manifest.json").string() + " --out " +
                (dir / "int2").string()).code == 0);
    check_same_tree(dir / "int", dir / "int2", "manifest.json");
  }

  TEST_CASE("1d-row output equals integrating the center row directly") {
    test::TempDir dir;
    write_small_params(dir / "p.json", 400.0, 5);
    REQUIRE(run("simulate --params " + (dir / "p.json").string() + " --out " +
                (dir / "ds").string()).code == 0);
    REQUIRE(run("integrate --sa 1d-row --dataset " + (dir / "ds").string() + " --out " +
                (dir / "row").string()).code == 0);
    const FlightData f = load_flight(dir / "ds");
    const Slice s = row_slice(f.images, f.params.grid, 2);
    const auto direct = integrate(s.views, s.grid);
    CHECK(bitwise_equal(direct.sigma, read_raster(dir / "row" / "sigma.tgr")));
  }

  TEST_CASE("sliding windows") {
    test::TempDir dir;
    write_small_params(dir / "p.json", 100.0, 5);
    REQUIRE(run("simulate --params " + (dir / "p.json").string() + " --out " +
                (dir / "ds").string()).code == 0);
    const auto a = run("integrate --sa 1d-row --stride 1 --window 3 --dataset " +
                       (dir / "ds").string() + " --out " + (dir / "a").string());
    REQUIRE(a.code == 0);
    CHECK(a.json()["windows"] == 3);
    CHECK(fs::exists(dir / "a" / "window_001_000" / "sigma.tgr"));
    const auto b = run("integrate --sa 1d-row --stride 1 --window 3 --pad --dataset " +
                       (dir / "ds").string() + " --out " + (dir / "b").string());
    CHECK(b.json()["windows"] == 5);
    const auto c = run("integrate --sa 2d --stride 9 --dataset " + (dir / "ds").string() +
                       " --out " + (dir / "c").string());
    CHECK(c.code == 0);
    CHECK(c.json()["windows"] == 0);
  }

  TEST_CASE("a dataset with a missing waypoint is rejected") {
    test::TempDir dir;
    write_small_params(dir / "p.json", 0.0);
    REQUIRE(run("simulate --params " + (dir / "p.json").string() + " --out " +
                (dir / "ds").string()).code == 0);
    auto j = read_json(dir / "ds" / "dataset.json");
    j["captures"].erase(0);
    write_json(j, dir / "ds" / "dataset.json");
    const auto r = run("integrate --dataset " + (dir / "ds").string() + " --out " +
                       (dir / "o").string());
    CHECK(r.code == 2);
    CHECK(r.json()["error"]["message"].get<std::string>().find("(0, 0)") != std::string::npos);
  }

  TEST_CASE("correct") {
    test::TempDir dir;
    SplitMix64 rng(2);
    const auto sigma = test::random_raster(rng, 16, 12, 0.0, 90.0);
    write_raster(sigma, dir / "s.tgr");
    write_raster(TemperatureRaster::filled(16, 12, 1.0f), dir / "f.tgr");
    write_raster(TemperatureRaster::filled(16, 13, 1.0f), dir / "f_bad.tgr");
    const std::string base = "correct --sigma " + (dir / "s.tgr").string() + " --out " +
                             (dir / "o.tgr").string();

    REQUIRE(run(base + " --mask " + (dir / "f.tgr").string()).code == 0);
    CHECK(bitwise_equal(read_raster(dir / "o.tgr"), sigma));
    CHECK(fs::exists(dir / "o.tgr.manifest.json"));

    const auto nomask = run(base);
    CHECK(nomask.code == 2);
    CHECK(nomask.json()["error"]["code"] == "capability");
    CHECK(run(base + " --mask " + (dir / "f_bad.tgr").string()).code == 2);

    fs::remove(dir / "o.tgr");
    REQUIRE(run(base + " --backend " + quote(AOS_ECHO_BACKEND)).code == 0);
    CHECK(bitwise_equal(read_raster(dir / "o.tgr"), sigma));
    const auto mm = run(base + " --backend " + quote(AOS_MISMATCH_BACKEND));
    CHECK(mm.code == 4);
    CHECK(run(base + " --backend false").code == 4);
  }

  TEST_CASE("detect and evaluate") {
    test::TempDir dir;
    write_raster(TemperatureRaster::filled(20, 20, 20.0f), dir / "u.tgr");
    const auto d = run("detect --input " + (dir / "u.tgr").string());
    REQUIRE(d.code == 0);
    CHECK(d.json()["count"] == 0);
    CHECK(d.json()["hotspots"].empty());

    std::vector<float> v(400, 20.0f);
    v[21] = v[22] = v[41] = 80.0f;
    write_raster(TemperatureRaster(20, 20, 15.0f, 0.1f, v), dir / "h.tgr");
    const auto h = run("detect --input " + (dir / "h.tgr").string());
    CHECK(h.json()["count"] == 1);
    CHECK(h.json()["hotspots"][0]["area_px"] == 3);

    const auto e = run("evaluate --pred " + (dir / "h.tgr").string() + " --truth " +
                       (dir / "h.tgr").string() + " --detect-threshold 50");
    REQUIRE(e.code == 0);
    const auto j = e.json();
    CHECK(j["full"]["rmse"] == 0.0);
    CHECK(j["fire"]["rmse"] == 0.0);
    CHECK(j["detection"]["detected"] == 1);

    // No fire pixels: the fire regime is reported as empty rather than failing.
    const auto u = run("evaluate --pred " + (dir / "u.tgr").string() + " --truth " +
                       (dir / "u.tgr").string());
    CHECK(u.code == 0);

    test::spit(dir / "bad.tgr", "TGR2garbage");
    CHECK(run("detect --input " + (dir / "bad.tgr").string()).code == 3);
    CHECK(run("detect --input " + (dir / "nope.tgr").string()).code == 3);
    write_raster(TemperatureRaster::filled(5, 5, 1.0f), dir / "small.tgr");
    CHECK(run("evaluate --pred " + (dir / "small.tgr").string() + " --truth " +
              (dir / "u.tgr").string()).code == 2);
  }

  TEST_CASE("sweep writes a reproducible CSV") {
    test::TempDir dir;
    test::spit(dir / "c.json", R"({
      "base": {"grid": {"n": 3, "m": 3}, "camera": {"image_px": 32}},
      "densities_tpha": [0, 300],
      "sa_types": ["2d"]
    })");
    const auto a = run("sweep --config " + (dir / "c.json").string() + " --seeds 2 --out " +
                       (dir / "a").string());
    REQUIRE(a.code == 0);
    CHECK(a.json()["records"] == 2 * 2 * 6);
    const auto text = test::slurp(dir / "a" / "sweep.csv");
    CHECK(std::string(text.begin(), text.end()).rfind(std::string(kSweepCsvHeader), 0) == 0);
    REQUIRE(run("replay --manifest " + (dir / "a" / "manifest.json").string() + " --out " +
                (dir / "b").string()).code == 0);
    CHECK(test::slurp(dir / "a" / "sweep.csv") == test::slurp(dir / "b" / "sweep.csv"));
    test::spit(dir / "bad.json", R"({"densities": [1]})");
    CHECK(run("sweep --config " + (dir / "bad.json").string() + " --out " + (dir / "x").string())
              .code == 2);
  }
}
