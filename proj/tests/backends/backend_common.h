#ifndef AOS_TESTS_BACKEND_COMMON_H_
#define AOS_TESTS_BACKEND_COMMON_H_

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

// Minimal exchange-protocol client shared by the test backends.
struct Request {
  std::filesystem::path dir;
  nlohmann::json body;
  std::filesystem::path input() const { return dir / body.at("input").get<std::string>(); }
  std::filesystem::path output() const { return dir / body.at("output").get<std::string>(); }
};

inline bool parse_request(int argc, char** argv, Request& req) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--request") == 0) {
      const std::filesystem::path path = argv[i + 1];
      std::ifstream in(path);
      if (!in) {
        std::cerr << "cannot open request " << path << "\n";
        return false;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      req.dir = path.parent_path();
      req.body = nlohmann::json::parse(ss.str());
      if (req.body.value("version", 0) != 1) {
        std::cerr << "unsupported request version\n";
        return false;
      }
      return true;
    }
  }
  std::cerr << "usage: " << argv[0] << " --request <request.json>\n";
  return false;
}

#endif  // AOS_TESTS_BACKEND_COMMON_H_
