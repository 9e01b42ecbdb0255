#ifndef AOS_TESTS_TEST_UTIL_H_
#define AOS_TESTS_TEST_UTIL_H_

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "aos/rng.h"
#include "aos/thermal_raster.h"

namespace aos::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "aos_test_XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline TemperatureRaster random_raster(SplitMix64& rng, int w, int h, double lo, double hi,
                                       double nan_fraction = 0.0) {
  std::vector<float> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) {
    x = rng.uniform() < nan_fraction ? kNoData : static_cast<float>(rng.uniform(lo, hi));
  }
  return TemperatureRaster(w, h, 0.0f, 0.1f, std::move(v));
}

}  // namespace aos::test

#endif  // AOS_TESTS_TEST_UTIL_H_
