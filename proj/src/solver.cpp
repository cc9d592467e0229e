#include "logcave/solver.hpp"

#include <cmath>
#include <limits>

namespace logcave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const SolverOptions& opts) {
  if (!(opts.delta > 0.0) || !(opts.eps > 0.0) || !(opts.eta > 0.0))
    throw InvalidInput("solver tolerances must be positive");
  if (!(opts.dilation >= 1.0)) throw InvalidInput("dilation must be >= 1");
  if (opts.max_iter < 1) throw InvalidInput("max_iter must be positive");
}

struct Best {
  Vec y;
  double f = kInf;
  void offer(const Vec& cand, double fc) {
    if (std::isfinite(fc) && fc < f) {
      f = fc;
      y = cand;
    }
  }
};

// Binding-criterion bookkeeping: the reported reason is the termination
// criterion satisfied for the fewest consecutive iterations when all hold.
struct Streaks {
  int obj = 0, arg = 0, caller = 0;
  TerminationReason binding(bool caller_present) const {
    TerminationReason r = TerminationReason::ObjectiveChange;
    int s = obj;
    if (arg < s) {
      s = arg;
      r = TerminationReason::ArgumentChange;
    }
    if (caller_present && caller < s) r = TerminationReason::CallerCriterion;
    return r;
  }
};

}  // namespace

bool stopping_check(const Vec& prev, const Vec& curr, double f_prev, double f_curr,
                    const CallerCriterion& caller, const SolverOptions& opts) {
  if (std::abs(f_curr - f_prev) > opts.delta) return false;
  if ((curr - prev).cwiseAbs().maxCoeff() > opts.eps) return false;
  return caller ? caller(curr) : true;
}

SolveResult minimize_subgradient(const ObjectiveFn& f, const SubgradientFn& g, const Vec& y0,
                                 const SolverOptions& opts, const CallerCriterion& caller) {
  validate(opts);
  SolveResult res;
  Vec y = y0;
  double fy = f(y);
  Best best;
  best.offer(y, fy);
  Streaks streaks;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    Vec gv = g(y);
    const double ng = gv.norm();
    res.iterations = iter;
    if (ng == 0.0) {  // exact optimum
      res.termination_reason = TerminationReason::ObjectiveChange;
      best.offer(y, fy);
      break;
    }
    Vec dir = -gv / ng;
    double h = opts.step(iter);
    Vec y_new = y + h * dir;
    double f_new = f(y_new);
    for (int back = 0; back < 60 && !std::isfinite(f_new); ++back) {
      h *= 0.5;  // overflow signal from the objective: clamp the step
      y_new = y + h * dir;
      f_new = f(y_new);
    }
    best.offer(y_new, f_new);
    res.trace.emplace_back(iter, best.f);
    if (opts.trace_sink) opts.trace_sink(iter, best.f);

    const bool obj_ok = std::abs(f_new - fy) <= opts.delta;
    const bool arg_ok = (y_new - y).cwiseAbs().maxCoeff() <= opts.eps;
    streaks.obj = obj_ok ? streaks.obj + 1 : 0;
    streaks.arg = arg_ok ? streaks.arg + 1 : 0;
    bool caller_ok = false;
    if (obj_ok && arg_ok) caller_ok = caller ? caller(y_new) : true;
    streaks.caller = caller_ok ? streaks.caller + 1 : 0;
    y = std::move(y_new);
    fy = f_new;
    if (obj_ok && arg_ok && caller_ok) {
      res.termination_reason = streaks.binding(static_cast<bool>(caller));
      break;
    }
  }
  res.y_opt = best.f <= fy ? std::move(best.y) : std::move(y);
  res.objective_value = std::min(best.f, fy);
  return res;
}

SolveResult minimize_r_algorithm(const ObjectiveFn& f, const SubgradientFn& g, const Vec& y0,
                                 const SolverOptions& opts, const CallerCriterion& caller) {
  validate(opts);
  const int n = static_cast<int>(y0.size());
  SolveResult res;
  Vec y = y0;
  double fy = f(y);
  Vec gv = g(y);
  Best best;
  best.offer(y, fy);
  Streaks streaks;

  Mat B = Mat::Identity(n, n);
  const double beta = 1.0 / opts.dilation - 1.0;
  double carry_step = opts.initial_step;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    res.iterations = iter;
    if (gv.norm() == 0.0) {
      res.termination_reason = TerminationReason::ObjectiveChange;
      break;
    }
    Vec gt = B.transpose() * gv;
    const double ng = gt.norm();
    if (!(ng > 0.0)) {
      res.termination_reason = TerminationReason::ObjectiveChange;
      break;
    }
    Vec dir = -(B * gt) / ng;

    Vec y_new;
    double f_new;
    if (opts.fixed_step) {
      y_new = y + opts.step(iter) * dir;
      f_new = f(y_new);
    } else {
      // Doubling/halving search requiring simple decrease, at most 30 trials.
      int trials = 0;
      double h = carry_step;
      double accepted = -1.0, accepted_f = kInf;
      double f_try = f(y + h * dir);
      ++trials;
      if (std::isfinite(f_try) && f_try < fy) {
        accepted = h;
        accepted_f = f_try;
        while (trials < 30) {
          const double h2 = 2.0 * h;
          const double f2 = f(y + h2 * dir);
          ++trials;
          if (std::isfinite(f2) && f2 < accepted_f) {
            h = h2;
            accepted = h2;
            accepted_f = f2;
          } else {
            break;
          }
        }
      } else {
        while (trials < 30) {
          h *= 0.5;
          f_try = f(y + h * dir);
          ++trials;
          if (std::isfinite(f_try) && f_try < fy) {
            accepted = h;
            accepted_f = f_try;
            break;
          }
        }
      }
      if (accepted < 0.0) {
        // Line search stall: no decrease at the minimum step. Report via
        // MaxIter semantics with the best iterate found so far.
        res.termination_reason = TerminationReason::MaxIter;
        res.y_opt = best.y;
        res.objective_value = best.f;
        return res;
      }
      carry_step = accepted;
      y_new = y + accepted * dir;
      f_new = accepted_f;
    }

    Vec g_new = g(y_new);
    Vec r = B.transpose() * (g_new - gv);
    const double nr = r.norm();
    if (nr > 1e-300 && beta != 0.0) {
      r /= nr;
      B += beta * (B * r) * r.transpose();
    }

    best.offer(y_new, f_new);
    res.trace.emplace_back(iter, best.f);
    if (opts.trace_sink) opts.trace_sink(iter, best.f);

    const bool obj_ok = std::abs(f_new - fy) <= opts.delta;
    const bool arg_ok = (y_new - y).cwiseAbs().maxCoeff() <= opts.eps;
    streaks.obj = obj_ok ? streaks.obj + 1 : 0;
    streaks.arg = arg_ok ? streaks.arg + 1 : 0;
    bool caller_ok = false;
    if (obj_ok && arg_ok) caller_ok = caller ? caller(y_new) : true;
    streaks.caller = caller_ok ? streaks.caller + 1 : 0;

    y = std::move(y_new);
    fy = f_new;
    gv = std::move(g_new);
    if (obj_ok && arg_ok && caller_ok) {
      res.termination_reason = streaks.binding(static_cast<bool>(caller));
      break;
    }
  }
  if (best.f <= fy) {
    res.y_opt = std::move(best.y);
    res.objective_value = best.f;
  } else {
    res.y_opt = std::move(y);
    res.objective_value = fy;
  }
  return res;
}

}  // namespace logcave
