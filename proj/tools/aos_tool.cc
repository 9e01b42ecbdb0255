// Command-line front end. stdout carries exactly one JSON summary per run;
// logs go to stderr.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "aos/correction.h"
#include "aos/detect_eval.h"
#include "aos/errors.h"
#include "aos/flight.h"
#include "aos/integrator.h"
#include "aos/params_json.h"
#include "aos/sweep.h"

namespace fs = std::filesystem;
using namespace aos;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kBackendFailure = 4, kInternal = 5 };

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kFormat:
    case ErrorCode::kIo:
    case ErrorCode::kEmptySelection:
      return kData;
    case ErrorCode::kBackend:
      return kBackendFailure;
    default:
      return kUsage;
  }
}

void emit(const Json& j) { std::cout << j.dump() << std::endl; }

void emit_error(const std::string& code, const std::string& message) {
  emit(Json{{"ok", false}, {"error", {{"code", code}, {"message", message}}}});
}

// Options shared by the manifest machinery: the canonical argument vector is
// recorded so `replay` can rerun a subcommand exactly.
struct Invocation {
  std::vector<std::string> args;  // without the program name
};

RunManifest base_manifest(const std::string& sub, const Invocation& inv) {
  RunManifest m;
  m.subcommand = sub;
  m.parameters = Json{{"argv", inv.args}};
  return m;
}

TemperatureRaster load(const std::string& path) { return read_raster(path); }

Json stats_json(const std::optional<ErrorStats>& s) {
  if (!s) return nullptr;
  return Json{{"mse", s->mse}, {"rmse", s->rmse}, {"count", s->count}};
}

std::optional<ErrorStats> try_rmse(const TemperatureRaster& p, const TemperatureRaster& t,
                                   const RegimeMask& m) {
  try {
    return rmse(p, t, m);
  } catch (const EmptySelectionError&) {
    return std::nullopt;
  }
}

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string params;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

int run_simulate(const SimulateArgs& a, const Invocation& inv) {
  FlightParams p = flight_params_from_json(read_json(a.params));
  if (a.seed) p.seed = *a.seed;
  p.threads = a.jobs;
  spdlog::info("simulating flight seed={} density={} ambient={}", p.seed,
               p.forest.density_tpha, p.env.ambient_c);
  const FlightData flight = simulate_flight(p);
  const std::vector<std::string> written = save_flight(flight, a.out);

  RunManifest m = base_manifest("simulate", inv);
  m.parameters["resolved"] = to_json(p);
  m.seeds = {p.seed};
  m.inputs = {a.params};
  m.outputs = written;
  write_run_manifest(m, a.out);

  emit(Json{{"ok", true},
            {"subcommand", "simulate"},
            {"out", a.out},
            {"images", flight.images.size()},
            {"trees", flight.tree_count},
            {"leaves", flight.leaf_count},
            {"hotspots", flight.hotspots.size()}});
  return kOk;
}

// --- integrate ----------------------------------------------------------------

struct IntegrateArgs {
  std::string dataset;
  std::string out;
  std::string sa = "2d";
  std::optional<int> stride;
  std::optional<int> window;
  bool pad = false;
  int jobs = 1;
};

// Capture grid for an SA type: the full grid, or the center row / column.
CaptureGrid sa_capture_grid(const std::vector<Capture>& caps, const SAGrid& g, SaType t) {
  CaptureGrid cg;
  cg.spacing_m = g.spacing_m;
  cg.altitude_agl_m = g.altitude_agl_m;
  auto at = [&](int i, int j) { return caps[static_cast<std::size_t>(j) * g.n + i]; };
  switch (t) {
    case SaType::k2d:
      cg.cols = g.n;
      cg.rows = g.m;
      cg.captures = caps;
      break;
    case SaType::kRow:
      cg.cols = g.n;
      cg.rows = 1;
      for (int i = 0; i < g.n; ++i) cg.captures.push_back(at(i, g.center_m()));
      break;
    case SaType::kCol:
      cg.cols = 1;
      cg.rows = g.m;
      for (int j = 0; j < g.m; ++j) cg.captures.push_back(at(g.center_n(), j));
      break;
  }
  return cg;
}

int run_integrate(const IntegrateArgs& a, const Invocation& inv) {
  const SaType type = parse_sa_type(a.sa);
  const FlightData flight = load_flight(a.dataset);
  fs::create_directories(a.out);
  RunManifest m = base_manifest("integrate", inv);
  m.inputs = {(fs::path(a.dataset) / kDatasetFile).string()};
  m.seeds = {flight.params.seed};

  auto write_set = [&](const fs::path& dir, const IntegralImage& sigma, const TemperatureRaster& f,
                       const TemperatureRaster& t_v) {
    fs::create_directories(dir);
    for (const auto& [name, r] : {std::pair<const char*, const TemperatureRaster*>{"sigma.tgr", &sigma.sigma},
                                  {"count.tgr", &sigma.count},
                                  {"f.tgr", &f},
                                  {"vegetation.tgr", &t_v}}) {
      write_raster(*r, dir / name);
      m.outputs.push_back(fs::relative(dir / name, a.out).string());
    }
  };

  IntegrateOptions io;
  io.threads = a.jobs;
  Json summary{{"ok", true}, {"subcommand", "integrate"}, {"sa", a.sa}, {"out", a.out}};

  if (!a.stride) {
    if (a.window || a.pad) throw ParameterError("--window and --pad need --stride");
    const SaOutputs o = integrate_and_correct(flight, type, {}, a.jobs);
    write_set(a.out, o.sigma, o.visibility, o.vegetation);
    summary["windows"] = 1;
  } else {
    const SAGrid& g = flight.params.grid;
    const CaptureGrid images = sa_capture_grid(flight.images, g, type);
    const CaptureGrid masks = sa_capture_grid(flight.masks, g, type);
    const CaptureGrid vegs = sa_capture_grid(flight.vegetation, g, type);
    SAGrid window;
    const int w = a.window.value_or(type == SaType::kCol ? g.m : g.n);
    window.n = type == SaType::kCol ? 1 : w;
    window.m = type == SaType::kRow ? 1 : w;
    SlideOptions so;
    so.stride_n = type == SaType::kCol ? 1 : *a.stride;
    so.stride_m = type == SaType::kRow ? 1 : *a.stride;
    so.pad = a.pad;
    so.integrate = io;
    const auto sig = sliding_integrate(images, window, so);
    const auto fs_ = sliding_integrate(masks, window, so);
    const auto vs = sliding_integrate(vegs, window, so);
    Json windows = Json::array();
    for (std::size_t k = 0; k < sig.size(); ++k) {
      const fs::path dir =
          fs::path(a.out) / fmt::format("window_{:03d}_{:03d}", sig[k].center_i, sig[k].center_j);
      write_set(dir, sig[k].integral, fs_[k].integral.sigma,
                vegetation_reference(vs[k].integral.sigma, fs_[k].integral.sigma));
      windows.push_back({sig[k].center_i, sig[k].center_j});
    }
    summary["windows"] = sig.size();
    summary["centers"] = std::move(windows);
  }
  write_run_manifest(m, a.out);
  emit(summary);
  return kOk;
}

// --- correct ------------------------------------------------------------------

struct CorrectArgs {
  std::string sigma;
  std::string mask;
  std::string vegetation;
  std::optional<double> ambient;
  std::string ambient_from;
  std::optional<double> t_v;
  double sun = 0.0;
  double f_min = 0.1;
  std::string backend = "analytic";
  int timeout_ms = 60000;
  std::string out;
};

int run_correct(const CorrectArgs& a, const Invocation& inv) {
  CorrectionInput in{.sigma = load(a.sigma),
                     .ambient_c = 0.0,
                     .visibility = std::nullopt,
                     .vegetation_c = a.t_v,
                     .vegetation_map = std::nullopt,
                     .sun_absorption_c = a.sun};
  in.ambient_c = in.sigma.ambient_c();
  if (!a.ambient_from.empty()) {
    const FlightData flight = load_flight(a.ambient_from);
    std::vector<TemperatureRaster> imgs;
    for (const auto& c : flight.images) imgs.push_back(c.image);
    in.ambient_c = estimate_ambient(imgs);
  }
  if (a.ambient) in.ambient_c = *a.ambient;
  if (!a.mask.empty()) in.visibility = load(a.mask);
  if (!a.vegetation.empty()) in.vegetation_map = load(a.vegetation);

  Json summary{{"ok", true}, {"subcommand", "correct"}, {"backend", a.backend},
               {"ambient_c", in.ambient_c}, {"out", a.out}};
  if (a.backend == "analytic") {
    const CorrectionResult r = correct_analytic(in, {a.f_min});
    write_raster(r.corrected, a.out);
    summary["low_confidence_px"] = r.low_confidence;
    summary["clamped_px"] = r.clamped;
  } else {
    ExternalBackend be;
    be.command = a.backend;
    be.timeout = std::chrono::milliseconds(a.timeout_ms);
    write_raster(correct_external(in, be), a.out);
  }
  RunManifest m = base_manifest("correct", inv);
  m.inputs = {a.sigma};
  if (!a.mask.empty()) m.inputs.push_back(a.mask);
  if (!a.vegetation.empty()) m.inputs.push_back(a.vegetation);
  m.outputs = {a.out};
  write_json(to_json(m), a.out + ".manifest.json");
  emit(summary);
  return kOk;
}

// --- detect / evaluate ------------------------------------------------------------

struct DetectArgs {
  std::string input;
  double threshold = kDefaultDetectionThresholdC;
};

int run_detect(const DetectArgs& a) {
  const auto hs = detect_hotspots(load(a.input), a.threshold);
  Json list = Json::array();
  for (const auto& h : hs) list.push_back(to_json(h));
  emit(Json{{"ok", true},
            {"subcommand", "detect"},
            {"threshold_c", a.threshold},
            {"count", hs.size()},
            {"hotspots", std::move(list)}});
  return kOk;
}

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  std::optional<double> threshold;
};

int run_evaluate(const EvaluateArgs& a) {
  const TemperatureRaster pred = load(a.pred);
  const TemperatureRaster truth = load(a.truth);
  if (!pred.same_shape(truth)) throw ParameterError("evaluate: rasters differ in size");
  const auto full = try_rmse(pred, truth, RegimeMask::full());
  if (!full) throw EmptySelectionError("evaluate: no comparable pixels");
  Json summary{{"ok", true},
               {"subcommand", "evaluate"},
               {"full", stats_json(full)},
               {"fire", stats_json(try_rmse(pred, truth, RegimeMask::fire()))}};
  if (a.threshold) {
    std::vector<std::vector<std::uint32_t>> regions;
    for (const auto& h : detect_hotspots(truth, *a.threshold)) regions.push_back(h.pixels);
    const auto matches = match_hotspots(detect_hotspots(pred, *a.threshold), regions);
    Json ious = Json::array();
    std::size_t detected = 0;
    for (const auto& mt : matches) {
      ious.push_back(mt.best_iou);
      detected += mt.detected;
    }
    summary["detection"] = {{"threshold_c", *a.threshold},
                            {"true_hotspots", regions.size()},
                            {"detected", detected},
                            {"iou", std::move(ious)}};
  }
  emit(summary);
  return kOk;
}

// --- sweep --------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out;
  std::optional<int> seeds;
  int jobs = 1;
};

int run_sweep_cmd(const SweepArgs& a, const Invocation& inv) {
  SweepConfig c = sweep_config_from_json(read_json(a.config));
  if (a.seeds) {
    if (*a.seeds < 1) throw ParameterError("--seeds must be >= 1");
    c.seeds.clear();
    for (int s = 0; s < *a.seeds; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  c.jobs = a.jobs;
  fs::create_directories(a.out);
  const auto records = run_sweep(c);
  const fs::path csv = fs::path(a.out) / "sweep.csv";
  write_sweep_csv(records, csv);
  const auto plots = write_sweep_plots(records, fs::path(a.out) / "plots");

  std::size_t failed = 0;
  std::map<std::string, std::pair<double, int>> means;
  for (const auto& r : records) {
    if (!r.error.empty() && r.error != "empty selection") ++failed;
    if (!std::isfinite(r.rmse)) continue;
    auto& cell = means[r.method + "/" + r.sa_type + "/" + r.regime];
    cell.first += r.rmse;
    cell.second += 1;
  }
  Json mean_json = Json::object();
  for (const auto& [k, v] : means) mean_json[k] = v.first / v.second;

  RunManifest m = base_manifest("sweep", inv);
  m.parameters["resolved"] = to_json(c);
  m.seeds = c.seeds;
  m.inputs = {a.config};
  m.outputs = {"sweep.csv"};
  for (const auto& p : plots) m.outputs.push_back(fs::relative(p, a.out).string());
  write_run_manifest(m, a.out);

  emit(Json{{"ok", true},
            {"subcommand", "sweep"},
            {"configurations", c.configuration_count()},
            {"records", records.size()},
            {"failed_records", failed},
            {"csv", csv.string()},
            {"mean_rmse", std::move(mean_json)}});
  return kOk;
}

int dispatch(std::vector<std::string> args);

// --- replay -------------------------------------------------------------------------

int run_replay(const std::string& manifest, const std::string& out_override) {
  const Json m = read_json(manifest);
  std::vector<std::string> args;
  try {
    args = m.at("parameters").at("argv").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw ParameterError("replay: manifest has no recorded argv");
  }
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t k = 0; k + 1 < args.size(); ++k) {
      if (args[k] == "--out") {
        args[k + 1] = out_override;
        replaced = true;
      }
    }
    if (!replaced) throw ParameterError("replay: recorded command has no --out");
  }
  spdlog::info("replaying: {}", fmt::join(args, " "));
  return dispatch(args);
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"Thermal synthetic-aperture simulation, integration and evaluation"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Render one SA flight into a dataset directory");
  s_sim->add_option("--params", sim.params, "Flight parameter JSON")->required();
  s_sim->add_option("--out", sim.out, "Dataset directory")->required();
  s_sim->add_option("--seed", sim.seed, "Override the seed from the parameter file");
  s_sim->add_option("--jobs", sim.jobs, "Render threads")->check(CLI::PositiveNumber);

  IntegrateArgs integ;
  auto* s_int = app.add_subcommand("integrate", "Integrate a dataset into sigma, count and f");
  s_int->add_option("--dataset", integ.dataset, "Dataset directory")->required();
  s_int->add_option("--out", integ.out, "Output directory")->required();
  s_int->add_option("--sa", integ.sa, "SA layout")->check(CLI::IsMember({"2d", "1d-row", "1d-col"}));
  s_int->add_option("--stride", integ.stride, "Slide a window with this waypoint stride")
      ->check(CLI::PositiveNumber);
  s_int->add_option("--window", integ.window, "Window size in waypoints (sliding mode)")
      ->check(CLI::PositiveNumber);
  s_int->add_flag("--pad", integ.pad, "Also place windows whose waypoints run off the grid");
  s_int->add_option("--jobs", integ.jobs, "Integration threads")->check(CLI::PositiveNumber);

  CorrectArgs corr;
  auto* s_cor = app.add_subcommand("correct", "Correct an integral image");
  s_cor->add_option("--sigma", corr.sigma, "Integral image")->required();
  s_cor->add_option("--mask", corr.mask, "Aggregated visibility f");
  s_cor->add_option("--vegetation", corr.vegetation, "Per-pixel vegetation temperature map");
  s_cor->add_option("--ambient", corr.ambient, "Ambient temperature (default: sigma header)");
  s_cor->add_option("--ambient-from", corr.ambient_from,
                    "Estimate ambient as the mean of a dataset's images");
  s_cor->add_option("--tv", corr.t_v, "Scalar vegetation temperature");
  s_cor->add_option("--sun", corr.sun, "Sun absorption for the default vegetation temperature");
  s_cor->add_option("--f-min", corr.f_min, "Visibility below which pixels pass through");
  s_cor->add_option("--backend", corr.backend, "'analytic' or an external command line");
  s_cor->add_option("--timeout-ms", corr.timeout_ms, "External backend timeout")
      ->check(CLI::PositiveNumber);
  s_cor->add_option("--out", corr.out, "Corrected raster")->required();

  DetectArgs det;
  auto* s_det = app.add_subcommand("detect", "Detect hotspots by thresholding");
  s_det->add_option("--input", det.input, "Raster")->required();
  s_det->add_option("--threshold", det.threshold, "Threshold in C");

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "RMSE against ground truth per regime");
  s_ev->add_option("--pred", ev.pred, "Prediction raster")->required();
  s_ev->add_option("--truth", ev.truth, "Ground truth raster")->required();
  s_ev->add_option("--detect-threshold", ev.threshold, "Also match hotspots at this threshold");

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "Run an evaluation sweep");
  s_sw->add_option("--config", sw.config, "Sweep JSON")->required();
  s_sw->add_option("--out", sw.out, "Output directory")->required();
  s_sw->add_option("--seeds", sw.seeds, "Use seeds 0..N-1");
  s_sw->add_option("--jobs", sw.jobs, "Parallel configurations")->check(CLI::PositiveNumber);

  std::string manifest, replay_out;
  auto* s_rep = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  s_rep->add_option("--manifest", manifest, "manifest.json")->required();
  s_rep->add_option("--out", replay_out, "Write to this location instead");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cerr << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    emit_error("usage", e.what());
    return kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  const Invocation inv{args};
  if (*s_sim) return run_simulate(sim, inv);
  if (*s_int) return run_integrate(integ, inv);
  if (*s_cor) return run_correct(corr, inv);
  if (*s_det) return run_detect(det);
  if (*s_ev) return run_evaluate(ev);
  if (*s_sw) return run_sweep_cmd(sw, inv);
  if (*s_rep) return run_replay(manifest, replay_out);
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("aos"));
  spdlog::set_pattern("[%l] %v");
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    emit_error(std::string(error_code_name(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    spdlog::critical("internal error: {}", e.what());
    emit_error("internal", e.what());
    return kInternal;
  }
}
