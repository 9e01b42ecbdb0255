// Returns the integral unchanged.
#include "aos/thermal_raster.h"
#include "backend_common.h"

int main(int argc, char** argv) {
  Request req;
  if (!parse_request(argc, argv, req)) return 2;
  aos::write_raster(aos::read_raster(req.input()), req.output());
  std::cerr << "echo backend wrote " << req.output() << "\n";
  return 0;
}
