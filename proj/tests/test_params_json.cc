#include <doctest.h>

#include <fstream>

#include "aos/errors.h"
#include "aos/params_json.h"
#include "test_util.h"

using namespace aos;

TEST_SUITE("params_json") {
  TEST_CASE("flight parameters round trip") {
    FlightParams p;
    p.seed = 42;
    p.forest.density_tpha = 333.0;
    p.env.ambient_c = 21.5;
    p.env.solar_angle_deg = -30.0;
    p.placement = HotspotPlacement::kUnderCanopy;
    p.hotspot_peak_c = {70.0, 90.0};
    p.explicit_hotspots = {{1.0, -2.0, 0.9, 77.0, 3.0}};
    p.grid.n = 7;
    p.grid.m = 1;
    p.image_px = 128;
    const Json j = to_json(p);
    const FlightParams q = flight_params_from_json(j);
    CHECK(q.seed == 42);
    CHECK(q.forest.density_tpha == 333.0);
    CHECK(q.env.ambient_c == 21.5);
    CHECK(q.placement == HotspotPlacement::kUnderCanopy);
    REQUIRE(q.explicit_hotspots.size() == 1);
    CHECK(q.explicit_hotspots[0].falloff == 3.0);
    CHECK(q.grid.m == 1);
    CHECK(to_json(q) == j);
  }

  TEST_CASE("missing keys keep their defaults") {
    const FlightParams d;
    const FlightParams q = flight_params_from_json(Json::parse(R"({"seed": 3})"));
    CHECK(q.seed == 3);
    CHECK(q.forest.density_tpha == d.forest.density_tpha);
    CHECK(q.grid.n == d.grid.n);
    CHECK(q.image_px == d.image_px);
  }

  TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(flight_params_from_json(Json::parse(R"({"sed": 3})")), ParameterError);
    CHECK_THROWS_AS(flight_params_from_json(Json::parse(R"({"forest": {"densty": 3}})")),
                    ParameterError);
    CHECK_THROWS_AS(flight_params_from_json(Json::parse(R"({"seed": "three"})")), ParameterError);
    CHECK_THROWS_AS(flight_params_from_json(Json::parse(R"({"camera": {"image_px": 1.5}})")),
                    ParameterError);
    CHECK_THROWS_AS(flight_params_from_json(Json::parse(R"({"hotspots": {"placement": "moon"}})")),
                    ParameterError);
    CHECK_THROWS_AS(flight_params_from_json(Json::parse("[1, 2]")), ParameterError);
    try {
      flight_params_from_json(Json::parse(R"({"env": {"ambient": 3}})"));
      FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
      CHECK(std::string(e.what()).find("ambient") != std::string::npos);
    }
  }

  TEST_CASE("sweep configuration") {
    const auto c = sweep_config_from_json(Json::parse(R"({
      "base": {"camera": {"image_px": 64}},
      "densities_tpha": [220, 585],
      "seeds": 3,
      "sa_types": ["2d", "1d-col"],
      "f_min": 0.2,
      "jobs": 2
    })"));
    CHECK(c.base.image_px == 64);
    CHECK(c.densities_tpha == std::vector<double>{220.0, 585.0});
    CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(c.sa_types == std::vector<SaType>{SaType::k2d, SaType::kCol});
    CHECK(c.correction.f_min == 0.2);
    CHECK(c.jobs == 2);
    CHECK(sweep_config_from_json(Json::parse(R"({"seeds": [5, 9]})")).seeds ==
          std::vector<std::uint64_t>{5, 9});
    CHECK(sweep_config_from_json(to_json(c)).seeds == c.seeds);
    CHECK_THROWS_AS(sweep_config_from_json(Json::parse(R"({"sa_types": ["3d"]})")), ParameterError);
    CHECK_THROWS_AS(sweep_config_from_json(Json::parse(R"({"extra": 1})")), ParameterError);
  }

  TEST_CASE("malformed JSON reports a byte offset") {
    test::TempDir dir;
    test::spit(dir / "bad.json", "{\"seed\": 1,, }");
    try {
      read_json(dir / "bad.json");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset() > 0);
      CHECK(e.byte_offset() <= 14);
    }
    CHECK_THROWS_AS(read_json(dir / "missing.json"), IoError);
  }

  TEST_CASE("dataset save and load") {
    test::TempDir dir;
    FlightParams p;
    p.grid.n = 3;
    p.grid.m = 2;
    p.image_px = 24;
    p.forest.density_tpha = 300.0;
    const FlightData f = simulate_flight(p);
    const auto written = save_flight(f, dir.path());
    CHECK(written.size() == 3 + 3 * 6 + 1);
    const FlightData g = load_flight(dir.path());
    CHECK(g.images.size() == 6);
    CHECK(g.tree_count == f.tree_count);
    CHECK(g.hotspots.size() == f.hotspots.size());
    CHECK(bitwise_equal(g.truth, f.truth));
    CHECK(bitwise_equal(*g.surface, *f.surface));
    for (std::size_t k = 0; k < 6; ++k) {
      CHECK(bitwise_equal(g.images[k].image, f.images[k].image));
      CHECK(bitwise_equal(g.masks[k].image, f.masks[k].image));
      CHECK(bitwise_equal(g.vegetation[k].image, f.vegetation[k].image));
      CHECK(g.images[k].pose.position.x == f.images[k].pose.position.x);
      CHECK(g.images[k].pose.intrinsics == f.images[k].pose.intrinsics);
    }

    // Saving again produces the same bytes.
    test::TempDir again;
    save_flight(g, again.path());
    for (const auto& rel : written) CHECK(test::slurp(dir / rel) == test::slurp(again / rel));

    // Drop one capture entry.
    Json j = read_json(dir / kDatasetFile);
    j["captures"].erase(4);
    write_json(j, dir / kDatasetFile);
    try {
      load_flight(dir.path());
      FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
      CHECK(std::string(e.what()).find("(1, 1)") != std::string::npos);
    }
  }

  TEST_CASE("run manifest") {
    test::TempDir dir;
    RunManifest m{"simulate", Json{{"argv", Json::array({"simulate"})}}, {7}, {"in.json"},
                  {"out"}};
    write_run_manifest(m, dir.path());
    const Json j = read_json(dir / kRunManifestFile);
    CHECK(j.at("subcommand") == "simulate");
    CHECK(j.at("seeds") == Json::array({7}));
    CHECK(j.at("tool_version") == kToolVersion);
  }
}
