#pragma once

#include <span>
#include <vector>

namespace spdelab {
namespace poly {

// Dense univariate polynomials, coefficients in ascending degree order
// (c[0] + c[1] t + ...). Used by the drift analysis for exact small-degree
// work; no external linear algebra needed.

double eval(std::span<const double> c, double t);
std::vector<double> derivative(std::span<const double> c);

// Index of the highest coefficient with |c_k| above a relative floor; -1 for
// the zero polynomial.
int effective_degree(std::span<const double> c);

// 1 + max_k |c_k / c_d|: all real roots lie in [-bound, bound].
double cauchy_bound(std::span<const double> c);

// All real roots, ascending and deduplicated. Recursively splits the line at
// the critical points (roots of the derivative), then bisects each monotone
// segment with a sign change. Exact enough for certificate work at modest
// degree; multiple roots collapse onto their critical point.
std::vector<double> real_roots(std::span<const double> c);

}  // namespace poly
}  // namespace spdelab
