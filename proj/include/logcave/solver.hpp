#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "logcave/geometry.hpp"

namespace logcave {

struct SolverOptions {
  double delta = 1e-8;        // objective-change tolerance
  double eps = 1e-4;          // per-coordinate argument tolerance
  double eta = 1e-4;          // normalization tolerance used by caller criteria
  double dilation = 2.0;      // space dilation coefficient, > 1
  double initial_step = 1.0;
  int max_iter = 20000;
  /// Step length h_l for the plain method; default initial_step / l.
  std::function<double(int)> step_schedule;
  /// When set, the space-dilation method takes its step directly from
  /// step_schedule instead of line searching (test hook: with dilation 1
  /// this reproduces the plain normalized subgradient step exactly).
  bool fixed_step = false;
  /// Optional iteration trace sink; receives "iter,objective" per iteration.
  std::function<void(int, double)> trace_sink;

  double step(int iteration) const {
    return step_schedule ? step_schedule(iteration) : initial_step / iteration;
  }
};

enum class TerminationReason { ObjectiveChange, ArgumentChange, CallerCriterion, MaxIter };

struct SolveResult {
  Vec y_opt;                   // best iterate visited
  double objective_value = 0;  // objective at y_opt
  int iterations = 0;
  TerminationReason termination_reason = TerminationReason::MaxIter;
  std::vector<std::pair<int, double>> trace;  // (iteration, best objective so far)
};

using ObjectiveFn = std::function<double(const Vec&)>;
using SubgradientFn = std::function<Vec(const Vec&)>;
using CallerCriterion = std::function<bool(const Vec&)>;

/// True iff all termination criteria hold: |f_curr - f_prev| <= delta,
/// per-coordinate |curr - prev| <= eps, and the caller predicate (treated as
/// true when absent).
bool stopping_check(const Vec& prev, const Vec& curr, double f_prev, double f_curr,
                    const CallerCriterion& caller, const SolverOptions& opts);

/// Normalized subgradient method with divergent-series step lengths.
/// Returns the best iterate visited. Objective values of +infinity are
/// treated as failed trial points.
SolveResult minimize_subgradient(const ObjectiveFn& f, const SubgradientFn& g, const Vec& y0,
                                 const SolverOptions& opts,
                                 const CallerCriterion& caller = nullptr);

/// Space-dilation subgradient method: transformed subgradient steps with an
/// approximate monotone line search, dilating along the difference of
/// successive transformed subgradients.
SolveResult minimize_r_algorithm(const ObjectiveFn& f, const SubgradientFn& g, const Vec& y0,
                                 const SolverOptions& opts,
                                 const CallerCriterion& caller = nullptr);

}  // namespace logcave
