#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "logcave/errors.hpp"

namespace logcave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A sample of n points in R^d with positive per-point weights summing to 1.
struct DataSet {
  int dim = 0;
  std::vector<Vec> points;
  Vec weights;
  /// Result of the affine-independence spot check: true when no (d+1)-subset
  /// of the points examined was affinely dependent. Exhaustive for small n,
  /// sampled otherwise; recorded but never enforced.
  bool general_position = false;

  int size() const { return static_cast<int>(points.size()); }

  /// Validates n >= d+1, consistent dimensions, pairwise-distinct points and
  /// weight normalization (sum 1 within 1e-12). Default weights are 1/n.
  static DataSet make(std::vector<Vec> points, std::optional<Vec> weights = {});
};

struct HullFacet {
  Vec normal;           // unit outward normal
  double offset = 0.0;  // <normal, x> <= offset for every hull point
  std::vector<int> vertices;
};

/// Facet description of the convex hull of a point set, plus its volume.
struct HullFacets {
  int dim = 0;
  std::vector<HullFacet> facets;
  double volume = 0.0;
};

/// One cell of a triangulation: a d-simplex spanned by data points.
struct SimplexCell {
  std::vector<int> vertices;  // d+1 point indices, ascending
  Mat edges;                  // column l is X_{j_{l+1}} - X_{j_1}
  Vec origin;                 // X_{j_1}
  double absdet = 0.0;        // |det edges|; cell volume is absdet / d!
  Mat inv_edges;              // inverse of edges; unset when the cell is a sliver
  bool invertible = false;
};

/// Triangulation of the convex hull of the data induced by lifted heights.
struct Triangulation {
  std::vector<SimplexCell> simplices;
  HullFacets hull;
};

/// Scale-aware default membership tolerance, 1e-8 * (1 + |x|).
double membership_tol(const Vec& x);

/// Convex hull of points in R^d (d >= 1). Throws DegenerateInput when the
/// affine hull of the points has dimension < d.
HullFacets convex_hull(const std::vector<Vec>& points);

/// True iff x satisfies every facet inequality within tol.
bool contains(const HullFacets& hull, const Vec& x, double tol);
bool contains(const HullFacets& hull, const Vec& x);

/// Triangulation of conv(X_1..X_n) on whose cells the least concave function
/// dominating the heights y is affine. Computed by projecting the upward
/// faces of the convex hull of the lifted points (X_i, y_i). Deterministic:
/// insertion order is seeded from a hash of the input and the cell list is
/// sorted by vertex tuple.
Triangulation lifted_triangulation(const DataSet& data, const Vec& y);

namespace detail {

/// The y-dependent part of lifted_triangulation; skips the hull of the data
/// itself, which callers evaluating many height vectors compute once.
std::vector<SimplexCell> lift_cells(const DataSet& data, const Vec& y);

std::uint64_t hash_bytes(const void* data, std::size_t len, std::uint64_t seed);

}  // namespace detail

}  // namespace logcave
