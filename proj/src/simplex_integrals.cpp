#include "logcave/simplex_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "logcave/errors.hpp"

namespace logcave {

namespace detail {

bool well_separated(std::span<const double> z) {
  double zmax = 0.0;
  for (double v : z) zmax = std::max(zmax, std::abs(v));
  const double threshold = 1e-4 * (1.0 + zmax);
  const int d = static_cast<int>(z.size());
  for (int r = 0; r < d; ++r) {
    if (std::abs(z[r]) <= threshold) return false;
    for (int s = r + 1; s < d; ++s)
      if (std::abs(z[r] - z[s]) <= threshold) return false;
  }
  return true;
}

namespace {

constexpr double kClusterSpan = 1.0;

// Divided difference of exp over nodes[i..j] with span < kClusterSpan,
// by a Taylor series around the midpoint: with delta_l = x_l - mu,
//   exp[x_i..x_j] = e^mu * sum_{t>=0} h_t(delta) / (m+t)!
// where m = j-i and h_t is the complete homogeneous symmetric polynomial.
double cluster_series(const double* nodes, int count) {
  const int m = count - 1;
  double lo = nodes[0], hi = nodes[0];
  for (int i = 1; i < count; ++i) {
    lo = std::min(lo, nodes[i]);
    hi = std::max(hi, nodes[i]);
  }
  const double mu = 0.5 * (lo + hi);
  std::vector<double> delta(count);
  for (int i = 0; i < count; ++i) delta[i] = nodes[i] - mu;

  // h[i] accumulates h_t(delta_0..delta_i) as t advances.
  std::vector<double> h(count, 1.0);
  double inv_fact = 1.0;
  for (int q = 2; q <= m; ++q) inv_fact /= q;
  double sum = inv_fact;  // t = 0 term: 1/m!
  for (int t = 1; t <= 64; ++t) {
    h[0] *= delta[0];
    for (int i = 1; i < count; ++i) h[i] = h[i - 1] + delta[i] * h[i];
    inv_fact /= (m + t);
    const double term = h[m] * inv_fact;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return std::exp(mu) * sum;
}

}  // namespace

double exp_divided_difference(std::span<const double> nodes) {
  const int count = static_cast<int>(nodes.size());
  std::vector<double> x(nodes.begin(), nodes.end());
  std::sort(x.begin(), x.end());
  if (count == 1) return std::exp(x[0]);

  // table[i] holds exp[x_i..x_{i+len}] for the current level.
  std::vector<double> table(count);
  for (int i = 0; i < count; ++i) table[i] = std::exp(x[i]);
  for (int len = 1; len < count; ++len) {
    for (int i = 0; i + len < count; ++i) {
      const double span = x[i + len] - x[i];
      if (span >= kClusterSpan)
        table[i] = (table[i + 1] - table[i]) / span;
      else
        table[i] = cluster_series(&x[i], len + 1);
    }
  }
  return table[0];
}

double unit_integral_shifted(std::span<const double> z) {
  const int d = static_cast<int>(z.size());
  double shift = 0.0;
  for (double v : z) shift = std::max(shift, v);

  if (well_separated(z)) {
    double sum = 0.0;
    for (int r = 0; r < d; ++r) {
      double denom = z[r];
      for (int s = 0; s < d; ++s)
        if (s != r) denom *= z[r] - z[s];
      const double numer =
          shift == 0.0 ? std::expm1(z[r]) : std::exp(z[r] - shift) - std::exp(-shift);
      sum += numer / denom;
    }
    return sum;
  }

  std::vector<double> nodes(d + 1);
  nodes[0] = -shift;
  for (int i = 0; i < d; ++i) nodes[i + 1] = z[i] - shift;
  return exp_divided_difference(nodes);
}

double weighted_unit_integral_shifted(std::span<const double> z, int u) {
  const int d = static_cast<int>(z.size());
  double shift = 0.0;
  for (double v : z) shift = std::max(shift, v);

  if (well_separated(z)) {
    const double eu = std::exp(z[u] - shift);
    double sum = 0.0;
    for (int r = 0; r < d; ++r) {
      if (r == u) continue;
      double denom = z[r] * (z[r] - z[u]);
      for (int s = 0; s < d; ++s)
        if (s != r) denom *= z[r] - z[s];
      sum += (std::exp(z[r] - shift) - eu) / denom;
    }
    double prod_z = 1.0;
    for (int s = 0; s < d; ++s) prod_z *= z[s];
    const double sign = (d % 2 == 0) ? 1.0 : -1.0;
    const double numer =
        shift == 0.0 ? std::expm1(z[u]) : std::exp(z[u] - shift) - std::exp(-shift);
    sum += sign * numer / (z[u] * prod_z);
    double denom_u = z[u];
    for (int s = 0; s < d; ++s)
      if (s != u) denom_u *= z[u] - z[s];
    sum += eu / denom_u;
    return sum;
  }

  // d/dz_u of the unshifted integral equals the divided difference with the
  // node z_u repeated.
  std::vector<double> nodes(d + 2);
  nodes[0] = -shift;
  for (int i = 0; i < d; ++i) nodes[i + 1] = z[i] - shift;
  nodes[d + 1] = z[u] - shift;
  return exp_divided_difference(nodes);
}

}  // namespace detail

double unit_simplex_exp_integral(std::span<const double> z) {
  double shift = 0.0;
  for (double v : z) shift = std::max(shift, v);
  return std::exp(shift) * detail::unit_integral_shifted(z);
}

double unit_simplex_weighted_exp_integral(std::span<const double> z, int u) {
  if (u < 0 || u >= static_cast<int>(z.size()))
    throw InvalidInput("coordinate index out of range");
  double shift = 0.0;
  for (double v : z) shift = std::max(shift, v);
  return std::exp(shift) * detail::weighted_unit_integral_shifted(z, u);
}

double simplex_exp_integral(std::span<const double> z, double absdet, double y_base) {
  if (!(absdet > 0.0)) throw InvalidInput("absdet must be positive");
  double shift = 0.0;
  for (double v : z) {
    if (!std::isfinite(v)) throw InvalidInput("z must be finite");
    shift = std::max(shift, v);
  }
  if (y_base + shift > detail::kMaxExpArgument)
    throw OverflowError("tent exponent " + std::to_string(y_base + shift) +
                        " exceeds representable range");
  return absdet * std::exp(y_base + shift) * detail::unit_integral_shifted(z);
}

}  // namespace logcave
