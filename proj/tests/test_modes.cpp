#include "csi/modes.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "support.hpp"

using namespace csi;

TEST(laguerre, low_order_values) {
  EXPECT_EQ(laguerre(0, 3, 7.2), 1.0);
  EXPECT_EQ(laguerre(1, 2, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(laguerre(2, 0, 2.0), -1.0);
  // closed form (x^2 - 4x + 2) / 2
  for (double x : {0.0, 0.3, 1.7, 5.0}) EXPECT_NEAR(laguerre(2, 0, x), (x * x - 4 * x + 2) / 2, 1e-14);
}

TEST(laguerre, matches_explicit_series) {
  for (int n = 0; n <= 7; ++n)
    for (int a = 0; a <= 10; ++a)
      for (double x : {0.0, 0.01, 0.5, 1.0, 2.5, 6.0, 12.0, 30.0}) {
        const double ref = static_cast<double>(csitest::laguerre_series(n, a, x));
        EXPECT_NEAR(laguerre(n, a, x), ref, 1e-12 * std::max(1.0, std::fabs(ref))) << n << " " << a << " " << x;
      }
}

TEST(laguerre, row_is_bit_identical_to_single_values) {
  double row[8];
  for (int a : {0, 3, 10})
    for (double x : {0.2, 3.3, 17.0}) {
      laguerre_row(7, a, x, row);
      for (int n = 0; n <= 7; ++n) EXPECT_EQ(row[n], laguerre(n, a, x));
    }
}

TEST(laguerre, rejects_negative_order) {
  EXPECT_THROW(laguerre(-1, 0, 1.0), InvalidArgument);
  EXPECT_THROW(laguerre(1, -2, 1.0), InvalidArgument);
}

TEST(normalization, gaussian_value_and_waist_scaling) {
  EXPECT_NEAR(normalization({0, 0}), std::sqrt(2.0 / std::numbers::pi), 1e-15);
  for (ModeIndex m : {ModeIndex{0, 0}, ModeIndex{3, 2}, ModeIndex{-7, 5}})
    EXPECT_NEAR(normalization(m, BeamGeometry{2.0}), normalization(m) / 2.0, 1e-15);
  EXPECT_THROW(normalization({0, -1}), InvalidArgument);
  EXPECT_THROW(normalization({0, 0}, BeamGeometry{0.0}), InvalidArgument);
}

TEST(normalization, unit_power_by_radial_quadrature) {
  for (int l : {0, 1, 4, 10})
    for (int p : {0, 3, 7}) EXPECT_NEAR(csitest::radial_overlap(l, p, p, 0.0, 12.0), 1.0, 1e-9) << l << "," << p;
}

TEST(normalization, unit_power_on_default_grid) {
  const QuadratureGrid g = build_grid();
  for (ModeIndex m : {ModeIndex{0, 0}, ModeIndex{5, 3}, ModeIndex{-10, 7}}) {
    double s = 0.0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        const double x = g.coord(j), y = g.coord(i);
        s += std::norm(mode_field(m, std::hypot(x, y), std::atan2(y, x))) * g.weight();
      }
    EXPECT_NEAR(s, 1.0, 1e-3);
  }
}

TEST(mode_field, vanishes_on_axis_for_nonzero_l) {
  for (double phi : {0.0, 1.0, -2.5}) EXPECT_EQ(mode_field({3, 0}, 0.0, phi), ComplexField(0.0, 0.0));
}

TEST(mode_field, fundamental_is_real_positive) {
  for (double r : {0.0, 0.5, 1.0, 3.0, 6.0})
    for (double phi : {0.0, 0.7, 3.1}) {
      const auto u = mode_field({0, 0}, r, phi);
      EXPECT_GT(u.real(), 0.0);
      EXPECT_EQ(u.imag(), 0.0);
    }
}

TEST(mode_field, azimuthal_phase_is_minus_l_phi) {
  for (int l : {-4, -1, 1, 2, 7})
    for (double phi : {0.3, 1.9, -2.2}) {
      const auto u = mode_field({l, 1}, 0.6, phi);
      const auto u0 = mode_field({l, 1}, 0.6, 0.0);
      const double d = std::remainder(std::arg(u) - std::arg(u0) + l * phi, 2 * std::numbers::pi);
      EXPECT_NEAR(d, 0.0, 1e-12) << l << " " << phi;
    }
}

TEST(mode_field, negative_l_is_conjugate) {
  for (int l : {1, 3, 10})
    for (double r : {0.2, 1.1})
      for (double phi : {0.4, -1.3, 2.9}) {
        const auto a = mode_field({-l, 2}, r, phi);
        const auto b = std::conj(mode_field({l, 2}, r, phi));
        EXPECT_EQ(a, b);
      }
}

TEST(mode_field, radial_profile_matches_reference) {
  for (int l : {0, 2, -5, 10})
    for (int p : {0, 1, 7})
      for (double r : {0.1, 0.9, 2.0, 3.5}) {
        const double ref = static_cast<double>(csitest::radial_reference(l, p, r));
        EXPECT_NEAR(std::abs(mode_field({l, p}, r, 0.0)), std::fabs(ref), 1e-12 * std::max(1.0, std::fabs(ref)));
      }
}

TEST(mode_field, radial_node_count) {
  for (int p = 0; p <= 7; ++p) {
    int zeros = 0;
    double prev = mode_field({0, p}, 1e-6, 0.0).real();
    for (int k = 1; k <= 60000; ++k) {
      const double v = mode_field({0, p}, k * 1e-4, 0.0).real();
      if ((v < 0) != (prev < 0)) ++zeros;
      prev = v;
    }
    EXPECT_EQ(zeros, p);
  }
}

TEST(mode_field, waist_scaling) {
  const auto a = mode_field({2, 1}, BeamGeometry{2.0}, 1.4, 0.3);
  const auto b = mode_field({2, 1}, 0.7, 0.3);
  EXPECT_NEAR(std::abs(a - b / 2.0), 0.0, 1e-15);
  EXPECT_THROW(mode_field({0, 0}, -0.1, 0.0), InvalidArgument);
}

TEST(ModeSet, ordering_and_indexing) {
  const ModeSet s(10, 7);
  EXPECT_EQ(s.size(), 168u);
  EXPECT_EQ(s[0], (ModeIndex{-10, 0}));
  EXPECT_EQ(s[1], (ModeIndex{-10, 1}));
  EXPECT_EQ(s[167], (ModeIndex{10, 7}));
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.index(s[i]), i);
    if (i) EXPECT_LT(s[i - 1], s[i]);
  }
  EXPECT_FALSE(s.contains({11, 0}));
  EXPECT_FALSE(s.contains({0, 8}));
}

TEST(ModeEvaluator, bit_identical_to_mode_field) {
  const ModeSet s(4, 3);
  const auto modes = detail::mode_list(s);
  const ModeEvaluator eval(modes);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> xs(50), ys(50);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    xs[k] = u(rng);
    ys[k] = u(rng);
  }
  std::vector<double> re(modes.size() * xs.size()), im(re.size());
  eval.evaluate(xs.data(), ys.data(), xs.size(), xs.size(), re.data(), im.data());
  for (std::size_t m = 0; m < modes.size(); ++m)
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const auto v = mode_field(modes[m], std::hypot(xs[k], ys[k]), std::atan2(ys[k], xs[k]));
      EXPECT_EQ(re[m * xs.size() + k], v.real());
      EXPECT_EQ(im[m * xs.size() + k], v.imag());
    }
}
