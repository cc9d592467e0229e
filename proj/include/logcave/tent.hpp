#pragma once

#include <optional>
#include <span>
#include <vector>

#include "logcave/geometry.hpp"

namespace logcave {

/// Affine piece of a tent function on one triangulation cell:
/// h(x) = <x, gradient> - offset there.
struct TentPiece {
  Vec gradient;        // b_j
  double offset = 0.0; // beta_j
  Vec z;               // z_{j,l} = y_{j_{l+1}} - y_{j_1}
  bool valid = false;  // false on sliver cells, which carry no usable plane
};

/// The least concave function dominating heights y at the data points:
/// piecewise affine on a triangulation of the convex hull, -infinity outside.
struct TentFunction {
  Vec y;
  Triangulation tri;
  std::vector<TentPiece> pieces;
};

TentFunction make_tent(const DataSet& data, const Vec& y);

/// Tent value at x: min over the affine pieces inside the hull, -infinity
/// outside.
double tent_evaluate(const TentFunction& tent, const Vec& x);

/// Batch tent evaluation; the parallel flag selects the OpenMP kernel.
std::vector<double> tent_evaluate_batch(const TentFunction& tent, const std::vector<Vec>& xs,
                                        bool parallel = true);

struct ObjectiveReport {
  double sigma = 0.0;
  double tau = 0.0;
  double integral = 0.0;  // integral of exp(tent) over the hull
  Vec subgradient;
  bool differentiable = false;  // no tent pole touches a face it does not support
};

/// The convex objective whose unique minimizer carries the density estimate,
/// with its subgradient, the companion diagnostic tau, and the integral of
/// exp of the tent. Weighted throughout by the data weights (uniform weights
/// reduce to the unweighted form).
ObjectiveReport objective(const DataSet& data, const Vec& y);

/// tau(y) = -sum_i w_i tent_y(X_i) + integral(exp tent_y); diagnostic only.
double tau(const DataSet& data, const Vec& y);

namespace detail {

/// Per-cell masses and subgradient coefficients for a fixed triangulation.
/// masses[c] integrates exp(tent) over cell c; coefs[c*(d+1)+l] is the
/// partial contribution of cell c to the subgradient entry of its l-th
/// vertex. Throws OverflowError when a cell's exponent is out of range.
/// Serial and parallel variants produce bit-identical output.
void cell_integral_terms_serial(const std::vector<SimplexCell>& cells, const Vec& y,
                                bool with_subgradient, std::span<double> masses,
                                std::span<double> coefs);
void cell_integral_terms_parallel(const std::vector<SimplexCell>& cells, const Vec& y,
                                  bool with_subgradient, std::span<double> masses,
                                  std::span<double> coefs);

std::vector<TentPiece> make_pieces(const std::vector<SimplexCell>& cells, const Vec& y);

/// Hot-path objective evaluator: hulls the data once per height vector and
/// memoizes the few most recent evaluations so solver callbacks for value,
/// subgradient and the normalization criterion share one triangulation.
class ObjectiveEngine {
 public:
  explicit ObjectiveEngine(const DataSet& data, bool parallel = true);

  struct Value {
    double sigma = 0.0;
    double integral = 0.0;
    Vec subgradient;
  };

  Value eval(const Vec& y);
  std::optional<double> cached_integral(const Vec& y) const;
  const DataSet& data() const { return *data_; }
  long evaluations() const { return evaluations_; }

 private:
  const DataSet* data_;
  bool parallel_;
  struct Entry {
    Vec y;
    Value v;
    std::uint64_t stamp = 0;
  };
  std::vector<Entry> cache_;
  std::uint64_t stamp_ = 0;
  long evaluations_ = 0;
};

}  // namespace detail

}  // namespace logcave
