// Regenerates the synthetic fixture maps under fixtures/.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "osmmcl/synthetic_map.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";

  osmmcl::SyntheticMapConfig rural;
  rural.seed = 7;

  osmmcl::SyntheticMapConfig hamlet;
  hamlet.width = 600.0;
  hamlet.height = 500.0;
  hamlet.junctions = 9;
  hamlet.min_junction_spacing = 120.0;
  hamlet.curvature = 0.2;
  hamlet.center = {45.1, -71.9};
  hamlet.seed = 11;

  for (const auto& [name, cfg] : {std::pair{"rural_2km2.osm", rural}, std::pair{"hamlet.osm", hamlet}}) {
    std::ofstream out(dir + "/" + name, std::ios::trunc);
    if (!out) {
      std::cerr << "cannot write " << dir << "/" << name << "\n";
      return EXIT_FAILURE;
    }
    out << osmmcl::synthesize_osm(cfg);
    std::cout << "wrote " << dir << "/" << name << "\n";
  }
  return EXIT_SUCCESS;
}
