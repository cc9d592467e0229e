#include "logcave/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace logcave {

namespace detail {

AliasTable::AliasTable(const std::vector<double>& weights) {
  const int m = static_cast<int>(weights.size());
  if (m == 0) throw InvalidInput("alias table needs at least one weight");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidInput("alias table weights must have positive sum");
  prob_.assign(m, 0.0);
  alias_.assign(m, 0);
  std::vector<double> scaled(m);
  for (int i = 0; i < m; ++i) scaled[i] = weights[i] * m / total;
  std::vector<int> small, large;
  for (int i = m - 1; i >= 0; --i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[i] = 1.0;
  for (int i : small) prob_[i] = 1.0;
}

int AliasTable::draw(SplitMix64& rng) const {
  const int i = static_cast<int>(rng.next_below(prob_.size()));
  return rng.next_double() < prob_[i] ? i : alias_[i];
}

}  // namespace detail

Vec uniform_simplex(SplitMix64& rng, int d) {
  Vec u(d);
  for (int i = 0; i < d; ++i) u[i] = rng.next_double();
  std::sort(u.data(), u.data() + d);
  Vec w(d);
  double prev = 0.0;
  for (int i = 0; i < d; ++i) {
    w[i] = u[i] - prev;
    prev = u[i];
  }
  return w;
}

SampleBatch sample(const LogConcaveDensity& model, int count, std::uint64_t seed, int shards) {
  if (count < 1) throw InvalidInput("sample count must be >= 1");
  if (shards < 1) throw InvalidInput("shard count must be >= 1");
  const auto& cells = model.tent.tri.simplices;
  const int d = model.data.dim;
  const int m = static_cast<int>(cells.size());

  detail::AliasTable table(model.masses);

  // Per-cell height differences and rejection bounds.
  std::vector<Vec> zs(m);
  std::vector<double> bound(m);
  for (int c = 0; c < m; ++c) {
    Vec z(d);
    double mx = 0.0;
    for (int l = 0; l < d; ++l) {
      z[l] = model.y_star[cells[c].vertices[l + 1]] - model.y_star[cells[c].vertices[0]];
      mx = std::max(mx, z[l]);
    }
    zs[c] = std::move(z);
    bound[c] = mx;  // log of max of exp(<w,z>) over the simplex
  }

  SampleBatch batch;
  batch.seed = seed;
  batch.points.resize(count);
  batch.simplex_counts.assign(m, 0);

  std::vector<std::int64_t> trials_per_shard(shards, 0);
  std::vector<std::vector<std::int64_t>> counts_per_shard(shards,
                                                          std::vector<std::int64_t>(m, 0));
  std::vector<int> shard_begin(shards + 1, 0);
  for (int s = 0; s <= shards; ++s)
    shard_begin[s] = static_cast<int>((static_cast<long long>(count) * s) / shards);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int s = 0; s < shards; ++s) {
    SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(s)));
    for (int i = shard_begin[s]; i < shard_begin[s + 1]; ++i) {
      for (;;) {
        ++trials_per_shard[s];
        const int c = table.draw(rng);
        Vec w = uniform_simplex(rng, d);
        const double u = rng.next_double();
        if (u < std::exp(w.dot(zs[c]) - bound[c])) {
          batch.points[i] = cells[c].origin + cells[c].edges * w;
          ++counts_per_shard[s][c];
          break;
        }
      }
    }
  }

  std::int64_t trials = 0;
  for (int s = 0; s < shards; ++s) {
    trials += trials_per_shard[s];
    for (int c = 0; c < m; ++c) batch.simplex_counts[c] += counts_per_shard[s][c];
  }
  batch.acceptance_rate = static_cast<double>(count) / static_cast<double>(trials);
  return batch;
}

}  // namespace logcave
