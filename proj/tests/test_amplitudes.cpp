#include "csi/amplitudes.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "support.hpp"

using namespace csitest;

namespace {

const AmplitudeEngine& small() { return engine(4, 3); }

double max_abs_diff(const AmplitudeTable& a, const AmplitudeTable& b) {
  double worst = 0.0;
  for (std::size_t q = 0; q < a.entries.size(); ++q) worst = std::max(worst, std::abs(a.entries[q] - b.entries[q]));
  return worst;
}

RasterPayload random_raster(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RasterPayload r;
  r.width = 24;
  r.height = 20;
  r.pitch = 0.1;
  for (int k = 0; k < r.width * r.height; ++k) r.samples.push_back(u(rng));
  return r;
}

}  // namespace

TEST(grid, construction_and_errors) {
  const QuadratureGrid g = build_grid(6.0, 512);
  EXPECT_DOUBLE_EQ(g.spacing(), 12.0 / 512);
  EXPECT_DOUBLE_EQ(g.coord(0), -6.0 + 6.0 / 512);
  EXPECT_DOUBLE_EQ(g.coord(511), 6.0 - 6.0 / 512);
  EXPECT_EQ(g.node_count(), 512u * 512u);
  EXPECT_THROW(build_grid(0.0, 512), InvalidArgument);
  EXPECT_THROW(build_grid(6.0, 15), InvalidArgument);
  EXPECT_THROW(build_grid(6.0, 1 << 16), InvalidArgument);
}

TEST(grid, gram_is_orthonormal) {
  const auto& e = small();
  const auto& g = e.gram();
  const std::size_t m = e.modes().size();
  double worst = 0.0;
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(g[o * m + i] - Complex(o == i, 0.0)));
  EXPECT_LT(worst, 1e-6);
}

TEST(grid, refining_does_not_move_the_fundamental) {
  const auto disc = make_shape(Disc{1.0});
  const Complex coarse = compute_amplitude(disc, {0, 0}, {0, 0}, build_grid(6.0, 256));
  const Complex fine = compute_amplitude(disc, {0, 0}, {0, 0}, build_grid(6.0, 512));
  EXPECT_NEAR(std::abs(coarse - fine), 0.0, 2e-3);
}

TEST(table, uniform_maps) {
  const auto one = small().table(TransmissionMap::uniform(1.0));
  const auto zero = small().table(TransmissionMap::uniform(0.0));
  const auto half = small().table(TransmissionMap::uniform(0.5));
  const std::size_t m = one.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_NEAR(std::abs(one.at(o, i) - Complex(o == i, 0.0)), 0.0, 1e-6);
      EXPECT_EQ(zero.at(o, i), Complex(0.0, 0.0));
      EXPECT_EQ(half.at(o, i), 0.5 * one.at(o, i));
    }
}

TEST(table, half_plane_passes_half_the_fundamental) {
  const auto plane = make_shape(Polygon{{{-100, -100}, {100, -100}, {100, 0}, {-100, 0}}});
  EXPECT_NEAR(compute_amplitude(plane, {0, 0}, {0, 0}).real(), 0.5, 1e-9);
}

TEST(table, inverted_disc_matches_radial_quadrature) {
  const auto hole = make_shape(Disc{1.0}, Convention::inverted);
  const auto t = small().table(hole);
  EXPECT_NEAR(t.at({0, 0}, {0, 0}).real(), radial_overlap(0, 0, 0, 0.0, 1.0), 1e-3);
  EXPECT_NEAR(t.at({3, 1}, {3, 2}).real(), radial_overlap(3, 1, 2, 0.0, 1.0), 1e-3);
  EXPECT_NEAR(t.at({-2, 3}, {-2, 0}).real(), radial_overlap(2, 3, 0, 0.0, 1.0), 1e-3);
  double off = 0.0;
  for (std::size_t o = 0; o < t.size(); ++o)
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t.modes[o].l != t.modes[i].l) off = std::max(off, std::abs(t.at(o, i)));
  EXPECT_LT(off, 2e-3);
}

TEST(table, star_selection_rule_and_hermiticity) {
  const auto t = table_of(star5());
  ASSERT_EQ(t.entries.size(), 28224u);
  const double peak = t.max_magnitude();
  double worst_rule = 0.0, worst_herm = 0.0;
  for (std::size_t o = 0; o < t.size(); ++o)
    for (std::size_t i = 0; i < t.size(); ++i) {
      if ((t.modes[o].l - t.modes[i].l) % 5 != 0) worst_rule = std::max(worst_rule, std::abs(t.at(o, i)));
      worst_herm = std::max(worst_herm, std::abs(t.at(o, i) - std::conj(t.at(i, o))));
    }
  EXPECT_LT(worst_rule, 1e-3 * peak);
  EXPECT_LT(worst_herm, 1e-12);
}

TEST(table, single_entry_is_bit_identical) {
  const auto star = star5();
  const auto& e = small();
  const auto t = e.table(star);
  for (auto [out, in] : {std::pair{ModeIndex{0, 0}, ModeIndex{0, 0}}, {ModeIndex{-4, 2}, ModeIndex{1, 3}},
                         {ModeIndex{3, 0}, ModeIndex{-2, 1}}, {ModeIndex{4, 3}, ModeIndex{4, 3}}})
    EXPECT_EQ(compute_amplitude(star, out, in, e.grid()), t.at(out, in)) << out.l << "," << out.p;
  EXPECT_THROW(compute_amplitude(star, {0, -1}, {0, 0}), InvalidArgument);
}

TEST(table, rotation_multiplies_by_azimuthal_phase) {
  const auto poly = make_shape(Polygon{{{0.1, 0.0}, {0.9, 0.2}, {0.3, 0.7}, {-0.4, 0.3}}});
  const auto& e = small();
  const auto base = e.table(poly);
  for (double theta : {1.3, 2.1}) {
    const auto turned = e.table(poly.rotated(theta));
    EXPECT_LT(phase_law_error(turned, base, theta, +1), 1e-2) << theta;
    EXPECT_GT(phase_law_error(turned, base, theta, -1), 1e-1) << theta;
  }
}

TEST(table, object_moved_off_the_grid) {
  const auto& e = small();
  const auto far = make_shape(Disc{1.0}).translated(50.0, 0.0);
  const auto far_hole = make_shape(Disc{1.0}, Convention::inverted).translated(50.0, 0.0);
  EXPECT_EQ(e.table(far).entries, e.table(TransmissionMap::uniform(1.0)).entries);
  for (const auto& a : e.table(far_hole).entries) EXPECT_EQ(a, Complex(0.0, 0.0));
}

TEST(table, linear_in_transmission) {
  const auto a = random_raster(1), b = random_raster(2);
  RasterPayload mix = a;
  const double alpha = 0.3;
  for (std::size_t k = 0; k < mix.samples.size(); ++k)
    mix.samples[k] = alpha * a.samples[k] + (1 - alpha) * b.samples[k];
  const auto& e = small();
  const auto ta = e.table(TransmissionMap::raster(a));
  const auto tb = e.table(TransmissionMap::raster(b));
  const auto tm = e.table(TransmissionMap::raster(mix));
  AmplitudeTable expect = ta;
  for (std::size_t q = 0; q < expect.entries.size(); ++q)
    expect.entries[q] = alpha * ta.entries[q] + (1 - alpha) * tb.entries[q];
  EXPECT_LT(max_abs_diff(tm, expect), 1e-12);
}

TEST(engine, memory_budget) {
  EXPECT_THROW(AmplitudeEngine(10, 7, {}, EngineOptions{1, 1 << 20}), ResourceLimit);
  EXPECT_NO_THROW(AmplitudeEngine(1, 0, {}, EngineOptions{1, 1 << 20}));
  EXPECT_THROW(AmplitudeEngine(-1, 0), InvalidArgument);
}

TEST(engine, thread_count_does_not_change_bits) {
  const auto fan = fan8();
  const AmplitudeEngine one(4, 3, build_grid(6.0, 256), EngineOptions{1});
  const AmplitudeEngine three(4, 3, build_grid(6.0, 256), EngineOptions{3});
  EXPECT_EQ(one.gram(), three.gram());
  EXPECT_EQ(one.table(fan).entries, three.table(fan).entries);
}

TEST(engine, per_entry_constant_map_matches_table) {
  const auto fan = fan8();
  const auto& e = small();
  const auto per = e.table_per_entry([&](std::size_t, std::size_t) { return fan; }, fan.support(), fan.background());
  EXPECT_LT(max_abs_diff(per, e.table(fan)), 1e-14);
  EXPECT_THROW(e.table_per_entry([&](std::size_t, std::size_t) { return TransmissionMap::uniform(0.5); },
                                 fan.support(), 1.0),
               InvalidArgument);
}
