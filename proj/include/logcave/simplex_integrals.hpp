#pragma once

#include <span>

namespace logcave {

/// Integral of exp(<w,z>) over the unit simplex T_d = {w >= 0, sum w <= 1},
/// where d = z.size(). Evaluated by the closed product formula when the
/// entries of z are pairwise well separated and away from zero, and by
/// divided differences of exp (scaled Taylor series on clustered arguments)
/// otherwise; both regimes are accurate to ~1e-12 relative.
double unit_simplex_exp_integral(std::span<const double> z);

/// Integral of w_u * exp(<w,z>) over T_d, u zero-based. Same two-regime
/// strategy; symmetric under simultaneous permutation of z and u.
double unit_simplex_weighted_exp_integral(std::span<const double> z, int u);

/// absdet * exp(y_base) * unit_simplex_exp_integral(z): the mass contributed
/// by one triangulation cell. Throws OverflowError when
/// y_base + max(0, max z) exceeds the representable exponent range, giving
/// optimizers a finite failure signal instead of infinity.
double simplex_exp_integral(std::span<const double> z, double absdet, double y_base);

namespace detail {

/// Largest exponent argument accepted before simplex_exp_integral reports
/// overflow.
inline constexpr double kMaxExpArgument = 700.0;

/// True when the closed product formulas are numerically safe for z: all
/// |z_r| and all pairwise gaps |z_r - z_s| exceed 1e-4 * (1 + max |z_r|).
bool well_separated(std::span<const double> z);

/// Divided difference of exp over the given nodes (any order, repeats
/// allowed). Hybrid table: standard recurrence across spans >= 1, shifted
/// Taylor series within clusters.
double exp_divided_difference(std::span<const double> nodes);

/// exp(-shift) * unit_simplex_exp_integral(z) with shift = max(0, max z).
double unit_integral_shifted(std::span<const double> z);

/// exp(-shift) * unit_simplex_weighted_exp_integral(z, u), same shift.
double weighted_unit_integral_shifted(std::span<const double> z, int u);

}  // namespace detail

}  // namespace logcave
