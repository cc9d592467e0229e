#include "logcave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "logcave/rng.hpp"

namespace logcave {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Greedy affinely-independent seed set: start at the lexicographically
// smallest point, then repeatedly add the point farthest from the current
// affine span. Returns k+1 indices or throws DegenerateInput.
std::vector<int> initial_simplex(const std::vector<Vec>& pts, int k, double tol) {
  const int n = static_cast<int>(pts.size());
  int first = 0;
  for (int i = 1; i < n; ++i) {
    if (std::lexicographical_compare(pts[i].data(), pts[i].data() + k,
                                     pts[first].data(), pts[first].data() + k))
      first = i;
  }
  std::vector<int> chosen{first};
  Mat basis(k, k);  // orthonormal columns spanning the current affine span
  int rank = 0;
  std::vector<char> used(n, 0);
  used[first] = 1;
  while (rank < k) {
    int best = -1;
    double best_dist = 0.0;
    Vec best_res(k);
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      Vec r = pts[i] - pts[first];
      if (rank > 0) r -= basis.leftCols(rank) * (basis.leftCols(rank).transpose() * r);
      const double dist = r.norm();
      if (dist > best_dist) {
        best_dist = dist;
        best = i;
        best_res = r;
      }
    }
    if (best < 0 || best_dist <= tol)
      throw DegenerateInput("affine hull has dimension " + std::to_string(rank) +
                            " < " + std::to_string(k));
    basis.col(rank) = best_res / best_dist;
    ++rank;
    chosen.push_back(best);
    used[best] = 1;
  }
  return chosen;
}

struct Facet {
  std::vector<int> vertices;  // k indices, ascending
  Vec normal;                 // unit outward
  double offset = 0.0;
  bool alive = true;
};

// Incremental convex hull in R^k with simplicial facets. Points within tol
// of a facet hyperplane are treated as not visible, so ties resolve by
// omitting the tied point from that face.
class HullBuilder {
 public:
  HullBuilder(const std::vector<Vec>& pts, int k, double tol, std::uint64_t order_seed)
      : pts_(pts), k_(k), tol_(tol) {
    auto seed_idx = initial_simplex(pts_, k_, tol_);
    interior_ = Vec::Zero(k_);
    for (int i : seed_idx) interior_ += pts_[i];
    interior_ /= static_cast<double>(seed_idx.size());

    for (int omit = 0; omit <= k_; ++omit) {
      std::vector<int> vs;
      for (int i = 0; i <= k_; ++i)
        if (i != omit) vs.push_back(seed_idx[i]);
      add_facet(std::move(vs));
    }

    std::vector<char> seeded(pts_.size(), 0);
    for (int i : seed_idx) seeded[i] = 1;
    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(pts_.size()); ++i)
      if (!seeded[i]) order.push_back(i);
    SplitMix64 rng(order_seed);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(rng.next_below(i + 1))]);
    for (int i : order) insert(i);
  }

  std::vector<Facet> take_facets() {
    std::vector<Facet> out;
    for (auto& f : facets_)
      if (f.alive) out.push_back(std::move(f));
    return out;
  }

 private:
  void add_facet(std::vector<int> vs) {
    std::sort(vs.begin(), vs.end());
    Facet f;
    f.vertices = std::move(vs);
    hyperplane(f);
    facets_.push_back(std::move(f));
  }

  // Unit normal and offset of the hyperplane through the facet's k vertices,
  // oriented away from the interior reference point.
  void hyperplane(Facet& f) const {
    const Vec& v0 = pts_[f.vertices[0]];
    Mat edges(k_, k_ - 1);
    for (int l = 1; l < k_; ++l) edges.col(l - 1) = pts_[f.vertices[l]] - v0;
    Vec normal;
    if (k_ == 1) {
      normal = Vec::Ones(1);
    } else {
      Eigen::ColPivHouseholderQR<Mat> qr(edges);
      Mat q = qr.householderQ();
      normal = q.col(k_ - 1);
    }
    double offset = normal.dot(v0);
    if (interior_.dot(normal) > offset) {
      normal = -normal;
      offset = -offset;
    }
    f.normal = std::move(normal);
    f.offset = offset;
  }

  void insert(int p) {
    const Vec& x = pts_[p];
    std::vector<int> visible;
    for (int fi = 0; fi < static_cast<int>(facets_.size()); ++fi) {
      if (!facets_[fi].alive) continue;
      if (facets_[fi].normal.dot(x) - facets_[fi].offset > tol_) visible.push_back(fi);
    }
    if (visible.empty()) return;  // inside or on the boundary

    // Horizon ridges appear in exactly one visible facet.
    std::map<std::vector<int>, int> ridge_count;
    std::vector<int> ridge(k_ - 1);
    for (int fi : visible) {
      const auto& vs = facets_[fi].vertices;
      for (int omit = 0; omit < k_; ++omit) {
        int w = 0;
        for (int l = 0; l < k_; ++l)
          if (l != omit) ridge[w++] = vs[l];
        ++ridge_count[ridge];
      }
    }
    for (int fi : visible) facets_[fi].alive = false;
    int created = 0;
    for (const auto& [r, cnt] : ridge_count) {
      if (cnt != 1) continue;
      std::vector<int> vs = r;
      vs.push_back(p);
      add_facet(std::move(vs));
      ++created;
    }
    if (created == 0) throw Error("convex hull update produced no facets");
  }

  const std::vector<Vec>& pts_;
  int k_;
  double tol_;
  Vec interior_;
  std::vector<Facet> facets_;
};

double coordinate_scale(const std::vector<Vec>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

// (k-1)-dimensional measure of a facet embedded in R^k.
double facet_measure(const std::vector<Vec>& pts, const Facet& f, int k) {
  if (k == 1) return 1.0;
  Mat edges(k, k - 1);
  for (int l = 1; l < k; ++l) edges.col(l - 1) = pts[f.vertices[l]] - pts[f.vertices[0]];
  const double gram = (edges.transpose() * edges).determinant();
  return std::sqrt(std::max(gram, 0.0)) / factorial(k - 1);
}

}  // namespace

double membership_tol(const Vec& x) { return 1e-8 * (1.0 + x.norm()); }

bool contains(const HullFacets& hull, const Vec& x, double tol) {
  for (const auto& f : hull.facets)
    if (f.normal.dot(x) - f.offset > tol) return false;
  return true;
}

bool contains(const HullFacets& hull, const Vec& x) {
  return contains(hull, x, membership_tol(x));
}

namespace detail {

std::uint64_t hash_bytes(const void* data, std::size_t len, std::uint64_t seed) {
  // FNV-1a over the raw bytes, folded through SplitMix64 finalization.
  const unsigned char* b = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed ^ 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= 0x100000001B3ULL;
  }
  return SplitMix64::derive(h, 0x5eedULL);
}

}  // namespace detail

HullFacets convex_hull(const std::vector<Vec>& points) {
  if (points.empty()) throw InvalidInput("convex_hull: empty input");
  const int k = static_cast<int>(points[0].size());
  if (static_cast<int>(points.size()) < k + 1)
    throw InvalidInput("convex_hull: need at least d+1 points");

  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (const auto& p : points)
    h = detail::hash_bytes(p.data(), sizeof(double) * p.size(), h);

  const double tol = 1e-9 * coordinate_scale(points);
  HullBuilder builder(points, k, tol, h);

  HullFacets hull;
  hull.dim = k;
  auto facets = builder.take_facets();

  Vec centroid = Vec::Zero(k);
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  double volume = 0.0;
  for (auto& f : facets) {
    const double height = f.offset - f.normal.dot(centroid);
    volume += facet_measure(points, f, k) * height / k;
    hull.facets.push_back(HullFacet{std::move(f.normal), f.offset, std::move(f.vertices)});
  }
  std::sort(hull.facets.begin(), hull.facets.end(),
            [](const HullFacet& a, const HullFacet& b) { return a.vertices < b.vertices; });
  hull.volume = volume;
  return hull;
}

namespace detail {

std::vector<SimplexCell> lift_cells(const DataSet& data, const Vec& y) {
  const int d = data.dim;
  const int n = data.size();
  if (y.size() != n) throw InvalidInput("heights length does not match point count");
  if (!y.allFinite()) throw InvalidInput("heights must be finite");

  // Lifted points plus one sentinel strictly below every tent, so the lifted
  // hull is full-dimensional even for flat height vectors. Facets through
  // the sentinel face downward and are discarded.
  const double ymin = y.minCoeff();
  const double ymax = y.maxCoeff();
  std::vector<Vec> lifted(n + 1);
  Vec centroid = Vec::Zero(d);
  for (int i = 0; i < n; ++i) {
    Vec q(d + 1);
    q.head(d) = data.points[i];
    q[d] = y[i];
    lifted[i] = std::move(q);
    centroid += data.points[i];
  }
  centroid /= static_cast<double>(n);
  Vec sentinel(d + 1);
  sentinel.head(d) = centroid;
  sentinel[d] = ymin - (1.0 + 2.0 * (ymax - ymin));
  lifted[n] = std::move(sentinel);

  std::uint64_t h = detail::hash_bytes(y.data(), sizeof(double) * y.size(), 0x11ULL);
  for (const auto& p : data.points)
    h = detail::hash_bytes(p.data(), sizeof(double) * p.size(), h);

  const double tol = 1e-9 * coordinate_scale(lifted);
  HullBuilder builder(lifted, d + 1, tol, h);
  auto facets = builder.take_facets();

  std::vector<SimplexCell> cells;
  for (auto& f : facets) {
    if (f.normal[d] <= 1e-12) continue;  // downward or vertical face
    if (std::find(f.vertices.begin(), f.vertices.end(), n) != f.vertices.end()) continue;
    SimplexCell c;
    c.vertices = std::move(f.vertices);  // already ascending
    c.origin = data.points[c.vertices[0]];
    c.edges.resize(d, d);
    for (int l = 1; l <= d; ++l) c.edges.col(l - 1) = data.points[c.vertices[l]] - c.origin;
    Eigen::PartialPivLU<Mat> lu(c.edges);
    c.absdet = std::abs(lu.determinant());
    double colprod = 1.0;
    for (int l = 0; l < d; ++l) colprod *= c.edges.col(l).norm();
    // Slivers (nearly affinely dependent vertices) keep their volume weight
    // but are excluded from piece-wise evaluation: their inverse is garbage.
    c.invertible = c.absdet > 1e-10 * colprod;
    if (c.invertible) c.inv_edges = lu.inverse();
    cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end(),
            [](const SimplexCell& a, const SimplexCell& b) { return a.vertices < b.vertices; });
  return cells;
}

}  // namespace detail

Triangulation lifted_triangulation(const DataSet& data, const Vec& y) {
  Triangulation tri;
  tri.simplices = detail::lift_cells(data, y);
  tri.hull = convex_hull(data.points);
  return tri;
}

DataSet DataSet::make(std::vector<Vec> points, std::optional<Vec> weights) {
  DataSet ds;
  const int n = static_cast<int>(points.size());
  if (n == 0) throw InvalidInput("empty point set");
  ds.dim = static_cast<int>(points[0].size());
  if (ds.dim < 1) throw InvalidInput("points must have dimension >= 1");
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != ds.dim) throw InvalidInput("inconsistent point dimensions");
    if (!p.allFinite()) throw InvalidInput("points must be finite");
  }
  if (n < ds.dim + 1)
    throw InvalidInput("need at least d+1 = " + std::to_string(ds.dim + 1) + " points, got " +
                       std::to_string(n));

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::lexicographical_compare(points[a].data(), points[a].data() + points[a].size(),
                                        points[b].data(), points[b].data() + points[b].size());
  });
  for (int i = 0; i + 1 < n; ++i)
    if (points[idx[i]] == points[idx[i + 1]])
      throw InvalidInput("duplicate point at rows " + std::to_string(idx[i]) + " and " +
                         std::to_string(idx[i + 1]));

  if (weights) {
    if (weights->size() != n) throw InvalidInput("weights length does not match point count");
    if ((weights->array() <= 0.0).any()) throw InvalidInput("weights must be positive");
    const double s = weights->sum();
    if (std::abs(s - 1.0) > 1e-12) throw InvalidInput("weights must sum to 1 within 1e-12");
    ds.weights = *weights;
  } else {
    ds.weights = Vec::Constant(n, 1.0 / n);
  }
  ds.points = std::move(points);

  // Affine-independence check of (d+1)-subsets: exhaustive when the subset
  // count is small, seeded random sampling otherwise.
  const int d = ds.dim;
  double scale = coordinate_scale(ds.points);
  auto independent = [&](const std::vector<int>& s) {
    Mat e(d, d);
    for (int l = 1; l <= d; ++l) e.col(l - 1) = ds.points[s[l]] - ds.points[s[0]];
    double colprod = 1.0;
    for (int l = 0; l < d; ++l) colprod *= std::max(e.col(l).norm(), 1e-30 * scale);
    return std::abs(e.determinant()) > 1e-12 * colprod;
  };
  double log_subsets = 0.0;
  for (int i = 0; i < d + 1; ++i) log_subsets += std::log2(double(n - i)) - std::log2(double(i + 1));
  ds.general_position = true;
  if (log_subsets <= std::log2(100000.0)) {
    std::vector<int> s(d + 1);
    std::iota(s.begin(), s.end(), 0);
    for (;;) {
      if (!independent(s)) {
        ds.general_position = false;
        break;
      }
      int pos = d;
      while (pos >= 0 && s[pos] == n - (d + 1) + pos) --pos;
      if (pos < 0) break;
      ++s[pos];
      for (int q = pos + 1; q <= d; ++q) s[q] = s[q - 1] + 1;
    }
  } else {
    SplitMix64 rng(detail::hash_bytes(ds.points[0].data(), sizeof(double) * d, 0xA11ULL));
    std::vector<int> s(d + 1);
    for (int trial = 0; trial < 2000 && ds.general_position; ++trial) {
      for (int q = 0; q <= d; ++q) {
        int candidate;
        bool fresh;
        do {
          candidate = static_cast<int>(rng.next_below(n));
          fresh = true;
          for (int r = 0; r < q; ++r) fresh = fresh && s[r] != candidate;
        } while (!fresh);
        s[q] = candidate;
      }
      if (!independent(s)) ds.general_position = false;
    }
  }
  return ds;
}

}  // namespace logcave
