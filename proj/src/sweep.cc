#include "aos/sweep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "aos/errors.h"

namespace aos {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Regime {
  const char* name;
  RegimeMask mask;
};

const Regime kRegimes[] = {{"full", RegimeMask::full()}, {"fire", RegimeMask::fire()}};

Slice slice_for(const std::vector<Capture>& captures, const SAGrid& grid, SaType type) {
  switch (type) {
    case SaType::k2d:
      return full_grid(captures, grid);
    case SaType::kRow:
      return row_slice(captures, grid, grid.center_m());
    case SaType::kCol:
      return column_slice(captures, grid, grid.center_n());
  }
  throw ParameterError("unknown SA type");
}

std::string fmt_num(double v) { return fmt::format("{:.9g}", v); }

}  // namespace

std::string_view sa_type_name(SaType t) {
  switch (t) {
    case SaType::k2d:
      return "2d";
    case SaType::kRow:
      return "1d-row";
    case SaType::kCol:
      return "1d-col";
  }
  return "?";
}

SaType parse_sa_type(std::string_view s) {
  if (s == "2d") return SaType::k2d;
  if (s == "1d-row") return SaType::kRow;
  if (s == "1d-col") return SaType::kCol;
  throw ParameterError("unknown SA type '" + std::string(s) + "' (expected 2d, 1d-row or 1d-col)");
}

SaOutputs integrate_and_correct(const FlightData& flight, SaType type,
                                const AnalyticOptions& options, int threads) {
  const SAGrid& grid = flight.params.grid;
  const Slice img = slice_for(flight.images, grid, type);
  const Slice msk = slice_for(flight.masks, grid, type);
  const Slice veg = slice_for(flight.vegetation, grid, type);
  IntegrateOptions io;
  io.threads = threads;
  IntegralImage sigma = integrate(img.views, img.grid, 0.0, io);
  TemperatureRaster f = integrate_mask(msk.views, msk.grid, 0.0, io);
  TemperatureRaster v_int = integrate(veg.views, veg.grid, 0.0, io).sigma;
  TemperatureRaster t_v = vegetation_reference(v_int, f);

  CorrectionInput in{.sigma = sigma.sigma,
                     .ambient_c = flight.params.env.ambient_c,
                     .visibility = f,
                     .vegetation_c = std::nullopt,
                     .vegetation_map = t_v,
                     .sun_absorption_c = flight.params.env.sun_absorption_c};
  CorrectionResult corrected = correct_analytic(in, options);
  return SaOutputs{std::move(sigma), std::move(f), std::move(t_v), std::move(corrected)};
}

void SweepConfig::validate() const {
  if (densities_tpha.empty() || ambients_c.empty() || sun_abs_c.empty() || solar_deg.empty() ||
      seeds.empty()) {
    throw ParameterError("sweep: every axis needs at least one value");
  }
  if (jobs < 1) throw ParameterError("sweep: jobs must be >= 1");
  for (double d : densities_tpha) {
    if (!(d >= 0.0)) throw ParameterError("sweep: density must be >= 0");
  }
}

std::size_t SweepConfig::configuration_count() const {
  return densities_tpha.size() * ambients_c.size() * sun_abs_c.size() * solar_deg.size() *
         seeds.size();
}

std::vector<EvaluationRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  struct Job {
    double density, ambient, sun, solar;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double d : config.densities_tpha)
    for (double a : config.ambients_c)
      for (double s : config.sun_abs_c)
        for (double z : config.solar_deg)
          for (std::uint64_t seed : config.seeds) jobs.push_back({d, a, s, z, seed});

  std::vector<std::vector<EvaluationRecord>> results(jobs.size());

  auto run_one = [&](std::size_t k) {
    const Job& job = jobs[k];
    std::vector<EvaluationRecord>& out = results[k];
    EvaluationRecord proto;
    proto.density_tpha = job.density;
    proto.ambient_c = job.ambient;
    proto.sun_abs_c = job.sun;
    proto.solar_deg = job.solar;
    proto.seed = job.seed;

    auto emit = [&](std::string_view sa, const char* method, const TemperatureRaster* pred,
                    const TemperatureRaster* truth, const std::string& error) {
      for (const Regime& reg : kRegimes) {
        EvaluationRecord r = proto;
        r.sa_type = sa;
        r.method = method;
        r.regime = reg.name;
        r.mse = r.rmse = kNaN;
        r.error = error;
        if (pred != nullptr) {
          try {
            const ErrorStats e = rmse(*pred, *truth, reg.mask);
            r.mse = e.mse;
            r.rmse = e.rmse;
          } catch (const EmptySelectionError&) {
            r.error = "empty selection";
          }
        }
        out.push_back(std::move(r));
      }
    };

    try {
      FlightParams p = config.base;
      p.seed = job.seed;
      p.forest.density_tpha = job.density;
      p.env.ambient_c = job.ambient;
      p.env.sun_absorption_c = job.sun;
      p.env.solar_angle_deg = job.solar;
      p.threads = 1;
      const FlightData flight = simulate_flight(p);
      emit("none", "single", &flight.center_image().image, &flight.truth, {});
      for (SaType t : config.sa_types) {
        const SaOutputs o = integrate_and_correct(flight, t, config.correction);
        emit(sa_type_name(t), "integral", &o.sigma.sigma, &flight.truth, {});
        emit(sa_type_name(t), "corrected", &o.corrected.corrected, &flight.truth, {});
      }
    } catch (const std::exception& e) {
      spdlog::error("sweep configuration density={} ambient={} sun={} solar={} seed={} failed: {}",
                    job.density, job.ambient, job.sun, job.solar, job.seed, e.what());
      out.clear();
      emit("none", "single", nullptr, nullptr, e.what());
      for (SaType t : config.sa_types) {
        emit(sa_type_name(t), "integral", nullptr, nullptr, e.what());
        emit(sa_type_name(t), "corrected", nullptr, nullptr, e.what());
      }
    }
  };

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      run_one(k);
      const std::size_t n = ++done;
      spdlog::debug("sweep {}/{}", n, jobs.size());
    }
  };
  {
    std::vector<std::jthread> pool;
    const int extra = std::min<int>(config.jobs, static_cast<int>(jobs.size())) - 1;
    for (int t = 0; t < extra; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<EvaluationRecord> records;
  for (auto& r : results) {
    for (auto& rec : r) records.push_back(std::move(rec));
  }
  return records;
}

void write_sweep_csv(const std::vector<EvaluationRecord>& records, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : records) {
    out << fmt_num(r.density_tpha) << ',' << fmt_num(r.ambient_c) << ',' << fmt_num(r.sun_abs_c)
        << ',' << fmt_num(r.solar_deg) << ',' << r.sa_type << ',' << r.method << ','
        << r.regime << ',' << fmt_num(r.mse) << ',' << fmt_num(r.rmse) << ',' << r.seed
        << '\n';
  }
}

void write_sweep_csv(const std::vector<EvaluationRecord>& records,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_sweep_csv(records, out);
}

std::vector<EvaluationRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line) || line != kSweepCsvHeader) {
    throw FormatError(path.string() + ": unexpected CSV header", 0);
  }
  offset += line.size() + 1;
  std::vector<EvaluationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0') {
        throw FormatError(path.string() + ": bad number '" + s + "'", offset);
      }
      return v;
    };
    if (f.size() != 10) throw FormatError(path.string() + ": expected 10 columns", offset);
    EvaluationRecord r;
    r.density_tpha = num(f[0]);
    r.ambient_c = num(f[1]);
    r.sun_abs_c = num(f[2]);
    r.solar_deg = num(f[3]);
    r.sa_type = f[4];
    r.method = f[5];
    r.regime = f[6];
    r.mse = num(f[7]);
    r.rmse = num(f[8]);
    try {
      r.seed = std::stoull(f[9]);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad seed '" + f[9] + "'", offset);
    }
    out.push_back(std::move(r));
    offset += line.size() + 1;
  }
  return out;
}

namespace {

struct Axis {
  const char* name;
  std::function<double(const EvaluationRecord&)> get;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& xlabel,
                      const std::map<std::string, std::map<double, double>>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymax = 0.0;
  for (const auto& [_, pts] : series) {
    for (const auto& [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) { return H - B - y / ymax * (H - T - B); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H);
  out << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  out << fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     (W - R + L) / 2, title);
  out << fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
      L, H - B, W - R, T);
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 5.0;
    const double yv = ymax * k / 5.0;
    out << fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n",
                       sx(xv), H - B + 18, xv);
    out << fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", L - 6,
                       sy(yv) + 4, yv);
    out << fmt::format(
        "<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", L, sy(yv),
        W - R, sy(yv));
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     (W - R + L) / 2, H - 15, xlabel);
  out << fmt::format(
      "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">"
      "mean RMSE (C)</text>\n",
      (H - B + T) / 2, (H - B + T) / 2);
  int idx = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kPalette[idx % std::size(kPalette)];
    std::string poly;
    for (const auto& [x, y] : pts) poly += fmt::format("{:.1f},{:.1f} ", sx(x), sy(y));
    out << fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color,
        poly);
    for (const auto& [x, y] : pts) {
      out << fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n", sx(x),
                         sy(y), color);
    }
    const double ly = T + 16 + 18 * idx;
    out << fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        W - R + 12, ly, W - R + 32, color, W - R + 38, ly + 4, name);
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> write_sweep_plots(const std::vector<EvaluationRecord>& records,
                                                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Axis axes[] = {
      {"density_tpha", [](const EvaluationRecord& r) { return r.density_tpha; }},
      {"ambient_c", [](const EvaluationRecord& r) { return r.ambient_c; }},
      {"sun_abs_c", [](const EvaluationRecord& r) { return r.sun_abs_c; }},
      {"solar_deg", [](const EvaluationRecord& r) { return r.solar_deg; }},
  };
  std::vector<std::filesystem::path> written;
  for (const Axis& axis : axes) {
    std::map<double, int> distinct;
    for (const auto& r : records) distinct[axis.get(r)] = 1;
    if (distinct.size() < 2) continue;
    for (const char* regime : {"full", "fire"}) {
      std::map<std::string, std::map<double, std::pair<double, int>>> acc;
      for (const auto& r : records) {
        if (r.regime != regime || !std::isfinite(r.rmse)) continue;
        const std::string key = r.sa_type == "none" ? r.method : r.method + " " + r.sa_type;
        auto& cell = acc[key][axis.get(r)];
        cell.first += r.rmse;
        cell.second += 1;
      }
      if (acc.empty()) continue;
      std::map<std::string, std::map<double, double>> series;
      for (const auto& [key, pts] : acc) {
        for (const auto& [x, c] : pts) series[key][x] = c.first / c.second;
      }
      const auto path = dir / fmt::format("rmse_vs_{}_{}.svg", axis.name, regime);
      write_line_chart(path, fmt::format("Mean RMSE, {} regime", regime), axis.name, series);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace aos
