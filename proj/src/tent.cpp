#include "logcave/tent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logcave/simplex_integrals.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace logcave {

namespace detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Contribution of one cell: its mass and, if requested, the subgradient
// coefficients of its d+1 vertices. All integrals are evaluated with the
// exponent shift max(0, max z) factored out, so only the final scaling can
// overflow, and that is guarded.
inline void one_cell(const SimplexCell& cell, const Vec& y, bool with_subgradient,
                     double* mass, double* coef) {
  const int d = static_cast<int>(cell.edges.rows());
  double zbuf[16];
  const double y0 = y[cell.vertices[0]];
  double shift = 0.0;
  for (int l = 0; l < d; ++l) {
    zbuf[l] = y[cell.vertices[l + 1]] - y0;
    shift = std::max(shift, zbuf[l]);
  }
  if (y0 + shift > kMaxExpArgument)
    throw OverflowError("tent exponent " + std::to_string(y0 + shift) +
                        " exceeds representable range");
  const std::span<const double> z(zbuf, static_cast<std::size_t>(d));
  const double scale = cell.absdet * std::exp(y0 + shift);
  const double base = unit_integral_shifted(z);
  *mass = scale * base;
  if (!with_subgradient) return;
  double rest = base;
  for (int l = 0; l < d; ++l) {
    const double wl = weighted_unit_integral_shifted(z, l);
    coef[l + 1] = scale * wl;
    rest -= wl;
  }
  coef[0] = scale * rest;
}

template <bool Parallel>
void cell_terms_impl(const std::vector<SimplexCell>& cells, const Vec& y, bool with_subgradient,
                     std::span<double> masses, std::span<double> coefs) {
  const int m = static_cast<int>(cells.size());
  const int stride = cells.empty() ? 1 : static_cast<int>(cells[0].edges.rows()) + 1;
  bool overflow = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel)
#endif
  for (int c = 0; c < m; ++c) {
    try {
      one_cell(cells[c], y, with_subgradient, &masses[c],
               with_subgradient ? &coefs[c * stride] : nullptr);
    } catch (const OverflowError&) {
#ifdef _OPENMP
#pragma omp atomic write
#endif
      overflow = true;
      masses[c] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (overflow) throw OverflowError("tent exponent exceeds representable range");
}

struct Assembly {
  double sigma;
  double integral;
  Vec subgradient;
};

Assembly assemble(const DataSet& data, const std::vector<SimplexCell>& cells, const Vec& y,
                  bool parallel) {
  const int d = data.dim;
  const int m = static_cast<int>(cells.size());
  std::vector<double> masses(m);
  std::vector<double> coefs(static_cast<std::size_t>(m) * (d + 1));
  if (parallel)
    cell_integral_terms_parallel(cells, y, true, masses, coefs);
  else
    cell_integral_terms_serial(cells, y, true, masses, coefs);

  // Fixed-order reductions keep results identical across thread counts.
  double integral = 0.0;
  for (int c = 0; c < m; ++c) integral += masses[c];
  Assembly out;
  out.integral = integral;
  out.sigma = integral - data.weights.dot(y);
  out.subgradient = -data.weights;
  for (int c = 0; c < m; ++c)
    for (int l = 0; l <= d; ++l)
      out.subgradient[cells[c].vertices[l]] += coefs[c * (d + 1) + l];
  return out;
}

}  // namespace

void cell_integral_terms_serial(const std::vector<SimplexCell>& cells, const Vec& y,
                                bool with_subgradient, std::span<double> masses,
                                std::span<double> coefs) {
  cell_terms_impl<false>(cells, y, with_subgradient, masses, coefs);
}

void cell_integral_terms_parallel(const std::vector<SimplexCell>& cells, const Vec& y,
                                  bool with_subgradient, std::span<double> masses,
                                  std::span<double> coefs) {
  cell_terms_impl<true>(cells, y, with_subgradient, masses, coefs);
}

std::vector<TentPiece> make_pieces(const std::vector<SimplexCell>& cells, const Vec& y) {
  std::vector<TentPiece> pieces(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const int d = static_cast<int>(cell.edges.rows());
    TentPiece p;
    p.z.resize(d);
    for (int l = 0; l < d; ++l) p.z[l] = y[cell.vertices[l + 1]] - y[cell.vertices[0]];
    if (cell.invertible) {
      p.gradient = cell.inv_edges.transpose() * p.z;
      p.offset = p.gradient.dot(cell.origin) - y[cell.vertices[0]];
      p.valid = true;
    }
    pieces[c] = std::move(p);
  }
  return pieces;
}

ObjectiveEngine::ObjectiveEngine(const DataSet& data, bool parallel)
    : data_(&data), parallel_(parallel) {}

ObjectiveEngine::Value ObjectiveEngine::eval(const Vec& y) {
  for (auto& e : cache_) {
    if (e.y.size() == y.size() && e.y == y) {
      e.stamp = ++stamp_;
      return e.v;
    }
  }
  auto cells = lift_cells(*data_, y);
  Assembly a = assemble(*data_, cells, y, parallel_);
  Value v{a.sigma, a.integral, std::move(a.subgradient)};
  ++evaluations_;
  if (cache_.size() < 4) {
    cache_.push_back(Entry{y, v, ++stamp_});
  } else {
    auto oldest = std::min_element(cache_.begin(), cache_.end(),
                                   [](const Entry& a, const Entry& b) { return a.stamp < b.stamp; });
    *oldest = Entry{y, v, ++stamp_};
  }
  return v;
}

std::optional<double> ObjectiveEngine::cached_integral(const Vec& y) const {
  for (const auto& e : cache_)
    if (e.y.size() == y.size() && e.y == y) return e.v.integral;
  return std::nullopt;
}

}  // namespace detail

TentFunction make_tent(const DataSet& data, const Vec& y) {
  TentFunction tent;
  tent.y = y;
  tent.tri = lifted_triangulation(data, y);
  tent.pieces = detail::make_pieces(tent.tri.simplices, y);
  return tent;
}

double tent_evaluate(const TentFunction& tent, const Vec& x) {
  if (!contains(tent.tri.hull, x, membership_tol(x)))
    return -std::numeric_limits<double>::infinity();
  double v = std::numeric_limits<double>::infinity();
  for (const auto& p : tent.pieces) {
    if (!p.valid) continue;
    v = std::min(v, p.gradient.dot(x) - p.offset);
  }
  return v;
}

std::vector<double> tent_evaluate_batch(const TentFunction& tent, const std::vector<Vec>& xs,
                                        bool parallel) {
  std::vector<double> out(xs.size());
  const int n = static_cast<int>(xs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int i = 0; i < n; ++i) out[i] = tent_evaluate(tent, xs[i]);
#ifndef _OPENMP
  (void)parallel;
#endif
  return out;
}

ObjectiveReport objective(const DataSet& data, const Vec& y) {
  auto cells = detail::lift_cells(data, y);
  auto a = detail::assemble(data, cells, y, true);

  ObjectiveReport rep;
  rep.sigma = a.sigma;
  rep.integral = a.integral;
  rep.subgradient = std::move(a.subgradient);

  const int n = data.size();
  const int d = data.dim;
  auto pieces = detail::make_pieces(cells, y);

  // Tent values at the data points: vertex poles touch by construction,
  // interior poles take the minimum over the affine pieces.
  std::vector<char> is_vertex(n, 0);
  for (const auto& c : cells)
    for (int v : c.vertices) is_vertex[v] = 1;
  double tent_at_points = 0.0;
  for (int i = 0; i < n; ++i) {
    double h = y[i];
    if (!is_vertex[i]) {
      h = std::numeric_limits<double>::infinity();
      for (const auto& p : pieces) {
        if (!p.valid) continue;
        h = std::min(h, p.gradient.dot(data.points[i]) - p.offset);
      }
    }
    tent_at_points += data.weights[i] * h;
  }
  rep.tau = a.integral - tent_at_points;

  // y is a non-differentiability point iff some lifted data point lies on
  // the affine span of a face it is not a vertex of.
  double scale = 1.0 + y.cwiseAbs().maxCoeff();
  for (const auto& p : data.points) scale = std::max(scale, 1.0 + p.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  rep.differentiable = true;
  for (std::size_t c = 0; c < cells.size() && rep.differentiable; ++c) {
    if (!pieces[c].valid) continue;
    const double norm = std::sqrt(1.0 + pieces[c].gradient.squaredNorm());
    for (int i = 0; i < n; ++i) {
      bool member = false;
      for (int l = 0; l <= d; ++l) member = member || cells[c].vertices[l] == i;
      if (member) continue;
      const double gap =
          std::abs(pieces[c].gradient.dot(data.points[i]) - pieces[c].offset - y[i]);
      if (gap <= tol * norm) {
        rep.differentiable = false;
        break;
      }
    }
  }
  return rep;
}

double tau(const DataSet& data, const Vec& y) { return objective(data, y).tau; }

}  // namespace logcave
