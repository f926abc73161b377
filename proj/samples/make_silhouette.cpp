// Writes the aircraft silhouette used as the complex, non-symmetric test
// object: an opaque polygon on a transmitting background, 256 x 256 pixels
// over [-1, 1]^2, tilted so no symmetry axis lines up with the raster.
//
//   make_silhouette [output.pgm]

#include <cstdio>
#include <string>

#include "csi/csi.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "jet.pgm";
  csi::Polygon jet;
  jet.vertices = {{0.0, 0.92},    {0.06, 0.74},   {0.09, 0.45},   {0.11, 0.12},  {0.78, -0.18},
                  {0.80, -0.30},  {0.12, -0.24},  {0.10, -0.56},  {0.36, -0.74}, {0.37, -0.84},
                  {0.07, -0.80},  {0.0, -0.88},   {-0.07, -0.80}, {-0.37, -0.84}, {-0.36, -0.74},
                  {-0.10, -0.56}, {-0.12, -0.24}, {-0.80, -0.30}, {-0.78, -0.18}, {-0.11, 0.12},
                  {-0.09, 0.45},  {-0.06, 0.74}};
  const auto map = csi::TransmissionMap::shape(jet).rotated(0.35);
  auto gray = csi::to_graymap(csi::rasterize(map, 256, 256, 2.0 / 256));
  gray.comments = {" aircraft silhouette, opaque on transmitting background, pitch 2/256 waist"};
  try {
    csi::write_file(path, csi::write_pgm(gray));
  } catch (const csi::Error& e) {
    std::fprintf(stderr, "%s: %s\n", e.kind().c_str(), e.what());
    return 1;
  }
  std::printf("wrote %s\n", path.c_str());
}
