#pragma once

#include <cstdint>

#include "logcave/mle.hpp"
#include "logcave/rng.hpp"

namespace logcave {

struct SampleBatch {
  std::vector<Vec> points;
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
  std::vector<std::int64_t> simplex_counts;  // per triangulation cell
};

/// Uniform draw from the unit simplex {w >= 0, sum w <= 1} via sorted
/// uniform spacings; each coordinate is marginally Beta(1, d).
Vec uniform_simplex(SplitMix64& rng, int d);

/// Exact draws from the fitted density: cell selection by an alias table
/// over the cell masses, then rejection on the cell with bound
/// exp(max(0, max z)). Deterministic given the seed; output is shard-major,
/// so results are reproducible for a fixed shard count regardless of the
/// number of worker threads.
SampleBatch sample(const LogConcaveDensity& model, int count, std::uint64_t seed, int shards = 1);

namespace detail {

/// Walker/Vose alias table for O(1) categorical draws.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights);
  int draw(SplitMix64& rng) const;
  int size() const { return static_cast<int>(prob_.size()); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

}  // namespace detail

}  // namespace logcave
