#pragma once

#include <iosfwd>
#include <string>

#include "logcave/solver.hpp"
#include "logcave/tent.hpp"

namespace logcave {

/// Fitted log-concave maximum likelihood density: the optimal tent function
/// together with the per-cell masses of exp(tent). Immutable after
/// construction and freely shareable across threads.
struct LogConcaveDensity {
  DataSet data;
  Vec y_star;
  TentFunction tent;
  std::vector<double> masses;  // integral of the density over each cell
  double total_integral = 0.0;

  double log_density(const Vec& x) const { return tent_evaluate(tent, x); }
};

/// exp(tent) inside the support, exactly 0 outside.
double density_evaluate(const LogConcaveDensity& model, const Vec& x);

struct FitOptions {
  SolverOptions solver;
  /// Plain-method polish budget after the space-dilation solver (0 = none).
  int polish_iterations = 0;
  /// Starting heights; default is a moment-matched Gaussian log-density
  /// shifted so the initial tent integrates to 1.
  std::optional<Vec> initial_heights;
  bool parallel = true;
};

struct FitResult {
  LogConcaveDensity model;
  bool converged = true;  // false when the iteration budget ran out first
  SolveResult stats;
};

/// Maximum likelihood log-concave density from (optionally weighted) data.
/// Deterministic given data and options. Points with weight below 1e-12 are
/// dropped. Solver termination combines the objective-change, argument-change
/// and |1 - integral| <= eta criteria.
FitResult fit(const DataSet& data, const FitOptions& opts = {});

/// Serialization: a self-describing JSON document with shortest round-trip
/// number encoding, so reloaded models evaluate bit-identically.
void save(const LogConcaveDensity& model, std::ostream& sink);
void save(const LogConcaveDensity& model, const std::string& path);
LogConcaveDensity load(std::istream& source);
LogConcaveDensity load(const std::string& path);

}  // namespace logcave
