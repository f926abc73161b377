// Joint OAM spectrum of a centered five-pointed star, printed as the
// collapsed (l_o, l_r) matrix with the conservation diagonal removed.

#include <cstdio>

#include "csi/csi.hpp"

int main() {
  const auto star = csi::make_shape(csi::parse_shape("star:5"));
  const auto table = csi::compute_table(star, /*l_max=*/10, /*p_max=*/3);
  const auto spectrum = csi::joint_spectrum(table);
  const auto offdiag = csi::zero_diagonal(spectrum);

  std::printf("mutual information:              %.4f bits\n", csi::mutual_information(spectrum));
  std::printf("off-diagonal mutual information: %.4f bits\n", csi::mutual_information(offdiag));

  const auto q = csi::collapse(offdiag);
  std::printf("\nQ(l_o, l_r) x 1000, rows l_o = -10..10, columns l_r = -10..10\n");
  for (int lo = -q.l_max; lo <= q.l_max; ++lo) {
    for (int lr = -q.l_max; lr <= q.l_max; ++lr) std::printf("%4.0f", 1000.0 * q.at(lo, lr));
    std::printf("\n");
  }
}
