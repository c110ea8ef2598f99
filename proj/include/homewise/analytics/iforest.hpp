#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace homewise {

/// Harmonic number H(i) = 1 + 1/2 + ... + 1/i, with H(0) = 0.
inline double harmonic_number(std::size_t i) {
  double h = 0.0;
  for (std::size_t k = i; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return h;
}

/// Average path length of an unsuccessful binary-search-tree lookup among n
/// points: c(n) = 2 H(n-1) - 2 (n-1) / n, and 0 for n <= 1.
inline double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  const double nd = static_cast<double>(n);
  return 2.0 * harmonic_number(n - 1) - 2.0 * (nd - 1.0) / nd;
}

/// Bit-reproducible draws on top of mt19937_64, whose output sequence is
/// fixed by the standard. Distribution objects are avoided because their
/// algorithms vary between standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Isolation forest over fixed-dimension points with axis-parallel random
/// splits. Scores are 2^(-E[h(x)] / c(psi)) where psi is the per-tree sample
/// size; values near 1 are anomalous, values at or below 0.5 are normal.
template <std::size_t Dims>
class IsolationForest {
 public:
  using Point = std::array<double, Dims>;

  struct Params {
    std::size_t trees = 100;
    std::size_t subsample = 256;
    std::uint64_t seed = 0;
  };

  explicit IsolationForest(Params params) : params_(params) {}

  void fit(std::span<const Point> data) {
    trees_.clear();
    if (data.empty() || params_.trees == 0) return;
    psi_ = std::min(params_.subsample, data.size());
    const auto height_limit = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(psi_, 2)))));
    SeededRng rng(params_.seed);
    std::vector<std::size_t> all(data.size());
    trees_.reserve(params_.trees);
    for (std::size_t t = 0; t < params_.trees; ++t) {
      std::iota(all.begin(), all.end(), std::size_t{0});
      // Partial Fisher-Yates: the first psi_ entries become the sample.
      for (std::size_t i = 0; i < psi_; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(all.size() - i));
        std::swap(all[i], all[j]);
      }
      std::vector<std::size_t> sample(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(psi_));
      Tree tree;
      build(tree, data, sample, 0, sample.size(), 0, height_limit, rng);
      trees_.push_back(std::move(tree));
    }
  }

  /// Mean path length of `x` across trees, including the c(size) correction
  /// at external nodes.
  double mean_path_length(const Point& x) const {
    if (trees_.empty()) return 0.0;
    double total = 0.0;
    for (const auto& tree : trees_) total += path_length(tree, x);
    return total / static_cast<double>(trees_.size());
  }

  double score(const Point& x) const {
    const double c = average_path_length(psi_);
    if (c <= 0.0) return 0.5;
    return std::pow(2.0, -mean_path_length(x) / c);
  }

  std::size_t sample_size() const { return psi_; }
  std::size_t tree_count() const { return trees_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks an external node
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double leaf_adjust = 0.0;  // c(size) for external nodes
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  std::int32_t build(Tree& tree, std::span<const Point> data, std::vector<std::size_t>& idx, std::size_t begin,
                     std::size_t end, std::size_t depth, std::size_t height_limit, SeededRng& rng) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::size_t size = end - begin;

    auto make_leaf = [&] {
      tree.nodes[id].feature = -1;
      tree.nodes[id].leaf_adjust = average_path_length(size);
      return id;
    };
    if (size <= 1 || depth >= height_limit) return make_leaf();

    std::array<double, Dims> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t d = 0; d < Dims; ++d) {
        lo[d] = std::min(lo[d], data[idx[i]][d]);
        hi[d] = std::max(hi[d], data[idx[i]][d]);
      }
    std::array<std::size_t, Dims> candidates{};
    std::size_t n_candidates = 0;
    for (std::size_t d = 0; d < Dims; ++d)
      if (hi[d] > lo[d]) candidates[n_candidates++] = d;
    if (n_candidates == 0) return make_leaf();  // all points identical

    const std::size_t feature = candidates[rng.below(n_candidates)];
    double split = lo[feature];
    while (!(split > lo[feature])) split = lo[feature] + rng.uniform() * (hi[feature] - lo[feature]);

    auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                 idx.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t i) { return data[i][feature] < split; });
    const auto mid = static_cast<std::size_t>(mid_it - idx.begin());

    tree.nodes[id].feature = static_cast<int>(feature);
    tree.nodes[id].split = split;
    const auto left = build(tree, data, idx, begin, mid, depth + 1, height_limit, rng);
    const auto right = build(tree, data, idx, mid, end, depth + 1, height_limit, rng);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }

  static double path_length(const Tree& tree, const Point& x) {
    std::int32_t id = 0;
    double depth = 0.0;
    for (;;) {
      const Node& n = tree.nodes[id];
      if (n.feature < 0) return depth + n.leaf_adjust;
      id = x[n.feature] < n.split ? n.left : n.right;
      depth += 1.0;
    }
  }

  Params params_;
  std::size_t psi_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace homewise
