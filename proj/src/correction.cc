#include "aos/correction.h"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "aos/errors.h"

namespace aos {
namespace fs = std::filesystem;
namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string tail_of(const fs::path& path, std::size_t max_bytes = 2000) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (s.size() > max_bytes) s = s.substr(s.size() - max_bytes);
  return s;
}

fs::path make_exchange_dir() {
  const char* root_env = std::getenv(kExchangeRootEnv);
  const fs::path root = root_env && *root_env ? fs::path(root_env) : fs::temp_directory_path();
  fs::create_directories(root);
  std::string templ = (root / "aos-exchange-XXXXXX").string();
  if (mkdtemp(templ.data()) == nullptr) {
    throw IoError("cannot create exchange directory under " + root.string());
  }
  return templ;
}

// Runs `command` through /bin/sh with stdout/stderr sent to `log`. Returns
// the exit status, or nullopt when the timeout expired and the process group
// was killed.
std::optional<int> run_with_timeout(const std::string& command, const fs::path& log,
                                    std::chrono::milliseconds timeout) {
  const pid_t pid = fork();
  if (pid < 0) throw BackendError("fork failed while starting backend");
  if (pid == 0) {
    setpgid(0, 0);
    const std::string redirected = command + " >" + shell_quote(log.string()) + " 2>&1";
    execl("/bin/sh", "sh", "-c", redirected.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  while (true) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw BackendError("waitpid failed while running backend");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      return std::nullopt;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace

void CorrectionInput::validate() const {
  if (visibility && !visibility->same_shape(sigma)) {
    throw ParameterError("correction: visibility mask and sigma differ in size");
  }
  if (vegetation_map && !vegetation_map->same_shape(sigma)) {
    throw ParameterError("correction: vegetation map and sigma differ in size");
  }
  if (!std::isfinite(ambient_c)) throw ParameterError("correction: ambient must be finite");
}

double estimate_ambient(std::span<const TemperatureRaster> images) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& img : images) {
    for (float v : img.data()) {
      if (!is_valid(v)) continue;
      sum += v;
      ++n;
    }
  }
  if (n == 0) throw EmptySelectionError("estimate_ambient: no valid pixels");
  return sum / static_cast<double>(n);
}

CorrectionResult correct_analytic(const CorrectionInput& in,
                                  const AnalyticOptions& options) {
  in.validate();
  if (!in.visibility) {
    throw CapabilityError("analytic correction needs a visibility mask");
  }
  if (!(options.f_min > 0.0 && options.f_min <= 1.0)) {
    throw ParameterError("analytic correction: f_min must be in (0, 1]");
  }
  const double t_v_default = in.vegetation_c.value_or(in.default_vegetation_c());
  const auto sigma = in.sigma.data();
  const auto f = in.visibility->data();
  std::vector<float> out(sigma.size());
  CorrectionResult result{in.sigma, std::vector<std::uint8_t>(sigma.size(), kFlagNone)};
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const float s = sigma[i];
    if (!is_valid(s)) {
      out[i] = s;
      continue;
    }
    const double vis = std::clamp<double>(f[i], 0.0, 1.0);
    if (!is_valid(f[i]) || vis < options.f_min) {
      out[i] = s;
      result.flags[i] |= kFlagLowConfidence;
      ++result.low_confidence;
      continue;
    }
    double t_v = t_v_default;
    if (in.vegetation_map) {
      const float m = in.vegetation_map->data()[i];
      if (is_valid(m)) t_v = m;
    }
    double v = (s - (1.0 - vis) * t_v) / vis;
    if (v < kPhysicalMinC || v > kPhysicalMaxC) {
      v = std::clamp<double>(v, kPhysicalMinC, kPhysicalMaxC);
      result.flags[i] |= kFlagClamped;
      ++result.clamped;
    }
    out[i] = static_cast<float>(v);
  }
  result.corrected = in.sigma.with_data(std::move(out));
  return result;
}

TemperatureRaster vegetation_reference(const TemperatureRaster& vegetation_integral,
                                       const TemperatureRaster& visibility) {
  if (!vegetation_integral.same_shape(visibility)) {
    throw ParameterError("vegetation_reference: rasters differ in size");
  }
  const auto v = vegetation_integral.data();
  const auto f = visibility.data();
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double occluded = 1.0 - static_cast<double>(f[i]);
    out[i] = is_valid(v[i]) && is_valid(f[i]) && occluded > 1e-6
                 ? static_cast<float>(v[i] / occluded)
                 : kNoData;
  }
  return vegetation_integral.with_data(std::move(out));
}

fs::path write_exchange_request(const CorrectionInput& in, const fs::path& dir) {
  in.validate();
  fs::create_directories(dir);
  write_raster(in.sigma.with_ambient(static_cast<float>(in.ambient_c)), dir / "sigma.tgr");
  nlohmann::json request = {
      {"version", kExchangeVersion},
      {"ambient_c", in.ambient_c},
      {"input", "sigma.tgr"},
      {"output", "sigma_prime.tgr"},
  };
  if (in.visibility) {
    write_raster(*in.visibility, dir / "f.tgr");
    request["mask"] = "f.tgr";
  }
  const fs::path request_path = dir / "request.json";
  std::ofstream out(request_path);
  if (!out) throw IoError("cannot write " + request_path.string());
  out << request.dump(2) << "\n";
  return request_path;
}

TemperatureRaster correct_external(const CorrectionInput& in,
                                   const ExternalBackend& backend) {
  if (backend.command.empty()) throw ParameterError("external backend command is empty");
  const fs::path dir = backend.exchange_dir.empty() ? make_exchange_dir() : backend.exchange_dir;
  fs::remove(dir / "sigma_prime.tgr");
  const fs::path request = write_exchange_request(in, dir);
  const fs::path log = dir / "backend.log";
  const std::string command = backend.command + " --request " + shell_quote(request.string());
  spdlog::debug("running correction backend: {}", command);

  const auto status = run_with_timeout(command, log, backend.timeout);
  if (!status) {
    throw BackendError("backend timed out after " +
                       std::to_string(backend.timeout.count()) + " ms: " + command);
  }
  if (*status != 0) {
    throw BackendError("backend exited with status " + std::to_string(*status) +
                       "; log tail:\n" + tail_of(log));
  }
  const fs::path output = dir / "sigma_prime.tgr";
  if (!fs::exists(output)) {
    throw BackendError("backend succeeded but wrote no " + output.string());
  }
  TemperatureRaster result = [&] {
    try {
      return read_raster(output);
    } catch (const Error& e) {
      throw BackendError(std::string("malformed backend response: ") + e.what());
    }
  }();
  if (!result.same_shape(in.sigma)) {
    throw BackendError("backend dimension mismatch: expected " +
                       std::to_string(in.sigma.width()) + "x" +
                       std::to_string(in.sigma.height()) + ", got " +
                       std::to_string(result.width()) + "x" +
                       std::to_string(result.height()));
  }
  return result;
}

}  // namespace aos
