#pragma once

// OAM transition amplitudes a^{l'l}_{p'p} = <l',p'| T |l,p> by midpoint
// quadrature on a uniform Cartesian grid.
//
// Summation order (fixed, so every entry is bit-reproducible):
//   a = b * G + D
// where b is the map's background transmission, G is the Gram matrix of the
// modes over the whole grid and D sums w * (T - b) * conj(u_out) * u_in over
// the grid nodes inside the map's support disc.
//   * Nodes are visited row-major (y ascending, then x ascending) and grouped
//     into blocks: one grid row per block for G, 512 consecutive support
//     nodes per block for D.
//   * Within a block, node k feeds accumulator lane k mod 4; the lanes are
//     combined as (l0 + l1) + (l2 + l3).
//   * Block sums are combined with a binary-counter pairwise reduction in
//     block order.
//   * G is computed for out <= in (in ModeSet order) and mirrored by
//     conjugation for out > in.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "csi/error.hpp"
#include "csi/modes.hpp"
#include "csi/parallel.hpp"
#include "csi/scene.hpp"

namespace csi {

using Complex = std::complex<double>;

inline constexpr double kDefaultHalfWidth = 6.0;
inline constexpr int kDefaultResolution = 512;
inline constexpr int kDefaultLMax = 10;
inline constexpr int kDefaultPMax = 7;

/// Midpoints of an n x n partition of [-L, L]^2.
struct QuadratureGrid {
  double half_width = kDefaultHalfWidth;
  int n = kDefaultResolution;

  double spacing() const { return 2.0 * half_width / n; }
  double weight() const { return spacing() * spacing(); }
  double coord(int i) const { return -half_width + spacing() * (i + 0.5); }
  std::size_t node_count() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }

  friend bool operator==(const QuadratureGrid&, const QuadratureGrid&) = default;
};

inline QuadratureGrid build_grid(double half_width = kDefaultHalfWidth, int n = kDefaultResolution) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw InvalidArgument("grid half-width must be positive");
  if (n < 16) throw InvalidArgument("grid resolution must be >= 16");
  if (n > 1 << 15) throw InvalidArgument("grid resolution too large");
  return {half_width, n};
}

/// Dense table of a^{l'l}_{p'p}; entry (out, in) at out_index * size + in_index.
struct AmplitudeTable {
  ModeSet modes{kDefaultLMax, kDefaultPMax};
  QuadratureGrid grid{};
  std::vector<Complex> entries;

  std::size_t size() const { return modes.size(); }
  Complex& at(std::size_t out, std::size_t in) { return entries[out * size() + in]; }
  const Complex& at(std::size_t out, std::size_t in) const { return entries[out * size() + in]; }
  const Complex& at(const ModeIndex& out, const ModeIndex& in) const {
    return at(modes.index(out), modes.index(in));
  }
  double max_magnitude() const {
    double m = 0.0;
    for (const auto& a : entries) m = std::max(m, std::abs(a));
    return m;
  }
};

struct EngineOptions {
  unsigned threads = 1;
  std::size_t memory_budget = std::size_t{2} << 30;  // bytes
};

namespace detail {

inline constexpr std::size_t kSupportBlock = 512;

/// conj(u) . v over one block with four interleaved lanes.
inline Complex dot_lanes(const double* ur, const double* ui, const double* vr, const double* vi,
                         std::size_t count) {
  double sr[4] = {0.0, 0.0, 0.0, 0.0};
  double si[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    for (std::size_t t = 0; t < 4; ++t) {
      sr[t] += ur[k + t] * vr[k + t] + ui[k + t] * vi[k + t];
      si[t] += ur[k + t] * vi[k + t] - ui[k + t] * vr[k + t];
    }
  }
  for (std::size_t t = 0; k < count; ++k, ++t) {
    sr[t] += ur[k] * vr[k] + ui[k] * vi[k];
    si[t] += ur[k] * vi[k] - ui[k] * vr[k];
  }
  return {(sr[0] + sr[1]) + (sr[2] + sr[3]), (si[0] + si[1]) + (si[2] + si[3])};
}

/// Binary-counter pairwise summation of equally sized vectors.
class PairwiseAccumulator {
 public:
  void push(std::vector<Complex> v) {
    int level = 0;
    while (!stack_.empty() && stack_.back().first == level) {
      auto prev = std::move(stack_.back().second);
      stack_.pop_back();
      for (std::size_t i = 0; i < v.size(); ++i) prev[i] += v[i];
      v = std::move(prev);
      ++level;
    }
    stack_.emplace_back(level, std::move(v));
  }

  std::vector<Complex> finish(std::size_t size) {
    if (stack_.empty()) return std::vector<Complex>(size);
    auto acc = std::move(stack_.back().second);
    for (std::size_t k = stack_.size() - 1; k-- > 0;) {
      auto& earlier = stack_[k].second;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = earlier[i] + acc[i];
    }
    stack_.clear();
    return acc;
  }

  std::size_t depth() const { return stack_.size(); }

 private:
  std::vector<std::pair<int, std::vector<Complex>>> stack_;
};

/// Nodes of one block: coordinates and per-node real weights.
struct NodeBlock {
  std::vector<double> xs, ys, weights;
  std::size_t size() const { return xs.size(); }
};

/// Row r of the grid as a block with uniform weight.
inline void grid_row_block(const QuadratureGrid& grid, int row, NodeBlock& out) {
  const auto n = static_cast<std::size_t>(grid.n);
  out.xs.resize(n);
  out.ys.assign(n, grid.coord(row));
  out.weights.assign(n, grid.weight());
  for (int j = 0; j < grid.n; ++j) out.xs[static_cast<std::size_t>(j)] = grid.coord(j);
}

/// Sub-samples per cell side when averaging transmission over a grid cell.
/// Point sampling aliases sharp edges badly enough to break exact symmetry
/// selection rules at the 1e-3 level; cell averages fix that cheaply.
inline constexpr int kCellSamples = 4;

/// Mean of T over the kCellSamples^2 midpoints of the cell centered on (x, y).
inline double cell_transmission(const TransmissionMap& map, double x, double y, double spacing) {
  double acc = 0.0;
  for (int a = 0; a < kCellSamples; ++a) {
    const double sy = y + spacing * ((a + 0.5) / kCellSamples - 0.5);
    for (int b = 0; b < kCellSamples; ++b)
      acc += map.sample(x + spacing * ((b + 0.5) / kCellSamples - 0.5), sy);
  }
  return acc / (kCellSamples * kCellSamples);
}

/// Grid nodes inside a support disc, row-major.
struct SupportNodes {
  std::vector<double> xs, ys;
  std::size_t size() const { return xs.size(); }
  std::size_t block_count() const { return (size() + kSupportBlock - 1) / kSupportBlock; }
};

inline SupportNodes support_nodes(const QuadratureGrid& grid, const SupportDisc& disc) {
  SupportNodes s;
  if (disc.radius < 0.0) return s;
  // Half a cell diagonal so every cell touching the disc is kept, plus slack
  // for rounding in the pose transform. Extra nodes contribute T - b = 0.
  const double r = (disc.radius + std::numbers::sqrt2 * 0.5 * grid.spacing()) * (1.0 + 1e-9) + 1e-12;
  const double r2 = r * r;
  for (int i = 0; i < grid.n; ++i) {
    const double y = grid.coord(i);
    const double dy = y - disc.center.y;
    if (dy * dy > r2) continue;
    for (int j = 0; j < grid.n; ++j) {
      const double x = grid.coord(j);
      const double dx = x - disc.center.x;
      if (dx * dx + dy * dy <= r2) {
        s.xs.push_back(x);
        s.ys.push_back(y);
      }
    }
  }
  return s;
}

/// Mode values for a block, mode-major with the given stride.
struct ModeValues {
  std::size_t stride = 0;
  std::vector<double> re, im;

  void evaluate(const ModeEvaluator& eval, const double* xs, const double* ys, std::size_t count) {
    stride = count;
    re.resize(eval.modes().size() * count);
    im.resize(eval.modes().size() * count);
    eval.evaluate(xs, ys, count, stride, re.data(), im.data());
  }
  const double* re_of(std::size_t m) const { return re.data() + m * stride; }
  const double* im_of(std::size_t m) const { return im.data() + m * stride; }
};

/// For each (out, in) pair of evaluator mode positions, sums over the blocks
/// w_k conj(u_out(x_k)) u_in(x_k) in the documented order.
/// `fill_block(b, block)` supplies block b; `values_for(b, block, vals)`
/// supplies the mode values at its nodes.
template <class FillBlock, class ValuesFor>
std::vector<Complex> reduce_pairs(std::size_t mode_count,
                                  std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                  std::size_t block_count, FillBlock&& fill_block,
                                  ValuesFor&& values_for) {
  PairwiseAccumulator acc;
  NodeBlock block;
  ModeValues local;
  std::vector<double> vr, vi;
  std::vector<char> used_in(mode_count, 0);
  for (const auto& pr : pairs) used_in[pr.second] = 1;
  for (std::size_t b = 0; b < block_count; ++b) {
    fill_block(b, block);
    const std::size_t count = block.size();
    const ModeValues& u = values_for(b, block, local);
    vr.resize(mode_count * count);
    vi.resize(mode_count * count);
    for (std::size_t m = 0; m < mode_count; ++m) {
      if (!used_in[m]) continue;
      const double* ur = u.re_of(m);
      const double* ui = u.im_of(m);
      double* outr = vr.data() + m * count;
      double* outi = vi.data() + m * count;
      for (std::size_t k = 0; k < count; ++k) {
        outr[k] = block.weights[k] * ur[k];
        outi[k] = block.weights[k] * ui[k];
      }
    }
    std::vector<Complex> partial(pairs.size());
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const auto [o, i] = pairs[q];
      partial[q] = dot_lanes(u.re_of(o), u.im_of(o), vr.data() + i * count, vi.data() + i * count,
                             count);
    }
    acc.push(std::move(partial));
  }
  return acc.finish(pairs.size());
}

inline std::vector<ModeIndex> mode_list(const ModeSet& set) {
  std::vector<ModeIndex> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) out.push_back(set[i]);
  return out;
}

}  // namespace detail

/// Builds amplitude tables for one (l_max, p_max, grid) configuration. The
/// Gram matrix is computed on first use and shared by later tables.
class AmplitudeEngine {
 public:
  AmplitudeEngine(int l_max, int p_max, QuadratureGrid grid = {}, EngineOptions options = {})
      : modes_(l_max, p_max),
        grid_(build_grid(grid.half_width, grid.n)),
        options_(options),
        evaluator_(std::make_shared<ModeEvaluator>(detail::mode_list(modes_))),
        gram_state_(std::make_shared<GramState>()) {
    const std::size_t m = modes_.size();
    // Table, Gram matrix and the pairwise stacks of every worker.
    const double levels = std::log2(static_cast<double>(grid_.n)) + 2.0;
    const double bytes = static_cast<double>(m) * m * sizeof(Complex) * (2.0 + levels);
    if (bytes > static_cast<double>(options_.memory_budget))
      throw ResourceLimit("amplitude table for l_max=" + std::to_string(l_max) +
                          ", p_max=" + std::to_string(p_max) + " needs ~" +
                          std::to_string(static_cast<long long>(bytes / (1 << 20))) +
                          " MiB, budget is " +
                          std::to_string(options_.memory_budget >> 20) + " MiB");
  }

  const ModeSet& modes() const { return modes_; }
  const QuadratureGrid& grid() const { return grid_; }
  const EngineOptions& options() const { return options_; }

  /// Gram matrix <u_out | u_in> on the grid.
  const std::vector<Complex>& gram() const {
    std::call_once(gram_state_->once, [this] { gram_state_->values = compute_gram(); });
    return gram_state_->values;
  }

  AmplitudeTable table(const TransmissionMap& map) const {
    const double b = map.background();
    const auto nodes = detail::support_nodes(grid_, map.support());
    const std::size_t m = modes_.size();
    AmplitudeTable t{modes_, grid_, std::vector<Complex>(m * m)};
    std::vector<Complex> object(m * m);
    if (nodes.size() > 0) object = object_sum(map, nodes);
    if (b != 0.0) {
      const auto& g = gram();
      for (std::size_t q = 0; q < m * m; ++q) t.entries[q] = b * g[q] + object[q];
    } else {
      t.entries = std::move(object);
    }
    return t;
  }

  /// Table whose entry (out, in) is computed for its own map. Every map must
  /// share `background` and lie inside `support`.
  AmplitudeTable table_per_entry(
      const std::function<TransmissionMap(std::size_t out, std::size_t in)>& map_for_entry,
      const SupportDisc& support, double background) const {
    const std::size_t m = modes_.size();
    const auto nodes = detail::support_nodes(grid_, support);
    // Mode values at every support node, cached once and sliced per block.
    detail::ModeValues cached;
    cached.evaluate(*evaluator_, nodes.xs.data(), nodes.ys.data(), nodes.size());
    const std::size_t blocks = nodes.block_count();
    const std::vector<Complex>* g = background != 0.0 ? &gram() : nullptr;
    AmplitudeTable t{modes_, grid_, std::vector<Complex>(m * m)};
    const double w = grid_.weight();
    parallel_for(m * m, options_.threads, [&](std::size_t q) {
      const std::size_t out = q / m, in = q % m;
      const TransmissionMap map = map_for_entry(out, in);
      if (map.background() != background)
        throw InvalidArgument("per-entry maps must share one background value");
      const std::pair<std::size_t, std::size_t> pair{0, 1};
      std::vector<double> block_re(2 * detail::kSupportBlock), block_im(2 * detail::kSupportBlock);
      detail::ModeValues slice;
      auto sums = detail::reduce_pairs(
          2, std::span(&pair, 1), blocks,
          [&](std::size_t b, detail::NodeBlock& blk) {
            const std::size_t begin = b * detail::kSupportBlock;
            const std::size_t end = std::min(nodes.size(), begin + detail::kSupportBlock);
            blk.xs.assign(nodes.xs.begin() + begin, nodes.xs.begin() + end);
            blk.ys.assign(nodes.ys.begin() + begin, nodes.ys.begin() + end);
            blk.weights.resize(end - begin);
            for (std::size_t k = begin; k < end; ++k)
              blk.weights[k - begin] =
                  w * (detail::cell_transmission(map, nodes.xs[k], nodes.ys[k], grid_.spacing()) - background);
          },
          [&](std::size_t b, const detail::NodeBlock& blk, detail::ModeValues&) -> const detail::ModeValues& {
            const std::size_t begin = b * detail::kSupportBlock;
            const std::size_t count = blk.size();
            slice.stride = count;
            slice.re.resize(2 * count);
            slice.im.resize(2 * count);
            std::copy_n(cached.re_of(out) + begin, count, slice.re.begin());
            std::copy_n(cached.im_of(out) + begin, count, slice.im.begin());
            std::copy_n(cached.re_of(in) + begin, count, slice.re.begin() + count);
            std::copy_n(cached.im_of(in) + begin, count, slice.im.begin() + count);
            return slice;
          });
      t.entries[q] = g ? background * (*g)[q] + sums[0] : sums[0];
    });
    return t;
  }

 private:
  struct GramState {
    std::once_flag once;
    std::vector<Complex> values;
  };

  using Pair = std::pair<std::size_t, std::size_t>;

  std::vector<Complex> compute_gram() const {
    const std::size_t m = modes_.size();
    std::vector<Complex> g(m * m);
    const unsigned workers = std::max(1u, std::min<unsigned>(options_.threads ? options_.threads : default_threads(),
                                                            static_cast<unsigned>(m)));
    parallel_for(workers, workers, [&](std::size_t w) {
      std::vector<Pair> pairs;
      for (std::size_t o = w; o < m; o += workers)
        for (std::size_t i = o; i < m; ++i) pairs.emplace_back(o, i);
      auto sums = detail::reduce_pairs(
          m, pairs, static_cast<std::size_t>(grid_.n),
          [&](std::size_t b, detail::NodeBlock& blk) { detail::grid_row_block(grid_, static_cast<int>(b), blk); },
          [&](std::size_t, const detail::NodeBlock& blk, detail::ModeValues& vals) -> const detail::ModeValues& {
            vals.evaluate(*evaluator_, blk.xs.data(), blk.ys.data(), blk.size());
            return vals;
          });
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto [o, i] = pairs[q];
        g[o * m + i] = sums[q];
        if (o != i) g[i * m + o] = std::conj(sums[q]);
      }
    });
    return g;
  }

  std::vector<Complex> object_sum(const TransmissionMap& map, const detail::SupportNodes& nodes) const {
    const std::size_t m = modes_.size();
    const double b = map.background();
    const double w = grid_.weight();
    std::vector<double> weights(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k)
      weights[k] = w * (detail::cell_transmission(map, nodes.xs[k], nodes.ys[k], grid_.spacing()) - b);
    std::vector<Complex> d(m * m);
    const unsigned workers = std::max(1u, std::min<unsigned>(options_.threads ? options_.threads : default_threads(),
                                                            static_cast<unsigned>(m)));
    parallel_for(workers, workers, [&](std::size_t w_id) {
      std::vector<Pair> pairs;
      for (std::size_t o = w_id; o < m; o += workers)
        for (std::size_t i = 0; i < m; ++i) pairs.emplace_back(o, i);
      auto sums = detail::reduce_pairs(
          m, pairs, nodes.block_count(),
          [&](std::size_t blk_id, detail::NodeBlock& blk) {
            const std::size_t begin = blk_id * detail::kSupportBlock;
            const std::size_t end = std::min(nodes.size(), begin + detail::kSupportBlock);
            blk.xs.assign(nodes.xs.begin() + begin, nodes.xs.begin() + end);
            blk.ys.assign(nodes.ys.begin() + begin, nodes.ys.begin() + end);
            blk.weights.assign(weights.begin() + begin, weights.begin() + end);
          },
          [&](std::size_t, const detail::NodeBlock& blk, detail::ModeValues& vals) -> const detail::ModeValues& {
            vals.evaluate(*evaluator_, blk.xs.data(), blk.ys.data(), blk.size());
            return vals;
          });
      for (std::size_t q = 0; q < pairs.size(); ++q) d[pairs[q].first * m + pairs[q].second] = sums[q];
    });
    return d;
  }

  ModeSet modes_;
  QuadratureGrid grid_;
  EngineOptions options_;
  std::shared_ptr<const ModeEvaluator> evaluator_;
  std::shared_ptr<GramState> gram_state_;
};

/// Single entry <out| T |in>, bit-identical to the matching table entry.
inline Complex compute_amplitude(const TransmissionMap& map, const ModeIndex& out,
                                 const ModeIndex& in, const QuadratureGrid& grid = {}) {
  validate(out);
  validate(in);
  const QuadratureGrid g = build_grid(grid.half_width, grid.n);
  const double b = map.background();
  Complex gram_part{};
  if (b != 0.0) {
    // Gram entries are computed with the lexicographically smaller mode first.
    const bool mirrored = in < out;
    const ModeEvaluator eval({mirrored ? in : out, mirrored ? out : in});
    const std::pair<std::size_t, std::size_t> pair{0, 1};
    const auto sums = detail::reduce_pairs(
        2, std::span(&pair, 1), static_cast<std::size_t>(g.n),
        [&](std::size_t row, detail::NodeBlock& blk) { detail::grid_row_block(g, static_cast<int>(row), blk); },
        [&](std::size_t, const detail::NodeBlock& blk, detail::ModeValues& vals) -> const detail::ModeValues& {
          vals.evaluate(eval, blk.xs.data(), blk.ys.data(), blk.size());
          return vals;
        });
    gram_part = mirrored ? std::conj(sums[0]) : sums[0];
  }
  const auto nodes = detail::support_nodes(g, map.support());
  Complex object_part{};
  if (nodes.size() > 0) {
    const ModeEvaluator eval({out, in});
    const double w = g.weight();
    const std::pair<std::size_t, std::size_t> pair{0, 1};
    const auto sums = detail::reduce_pairs(
        2, std::span(&pair, 1), nodes.block_count(),
        [&](std::size_t blk_id, detail::NodeBlock& blk) {
          const std::size_t begin = blk_id * detail::kSupportBlock;
          const std::size_t end = std::min(nodes.size(), begin + detail::kSupportBlock);
          blk.xs.assign(nodes.xs.begin() + begin, nodes.xs.begin() + end);
          blk.ys.assign(nodes.ys.begin() + begin, nodes.ys.begin() + end);
          blk.weights.resize(end - begin);
          for (std::size_t k = begin; k < end; ++k)
            blk.weights[k - begin] = w * (detail::cell_transmission(map, nodes.xs[k], nodes.ys[k], g.spacing()) - b);
        },
        [&](std::size_t, const detail::NodeBlock& blk, detail::ModeValues& vals) -> const detail::ModeValues& {
          vals.evaluate(eval, blk.xs.data(), blk.ys.data(), blk.size());
          return vals;
        });
    object_part = sums[0];
  }
  if (b == 0.0) return object_part;
  return b * gram_part + object_part;
}

inline AmplitudeTable compute_table(const TransmissionMap& map, int l_max = kDefaultLMax,
                                    int p_max = kDefaultPMax, const QuadratureGrid& grid = {},
                                    EngineOptions options = {}) {
  return AmplitudeEngine(l_max, p_max, grid, options).table(map);
}

}  // namespace csi
