#include "spdelab/poly.hpp"

#include <algorithm>
#include <cmath>

namespace spdelab {
namespace poly {

double eval(std::span<const double> c, double t) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
    return acc;
}

std::vector<double> derivative(std::span<const double> c) {
    if (c.size() <= 1) return {};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = k * c[k];
    return d;
}

int effective_degree(std::span<const double> c) {
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return -1;
    for (std::size_t k = c.size(); k-- > 0;)
        if (std::abs(c[k]) > 1e-14 * scale) return static_cast<int>(k);
    return -1;
}

double cauchy_bound(std::span<const double> c) {
    const int d = effective_degree(c);
    if (d <= 0) return 0.0;
    double m = 0.0;
    for (int k = 0; k < d; ++k) m = std::max(m, std::abs(c[k] / c[d]));
    return 1.0 + m;
}

namespace {

double bisect(std::span<const double> c, double a, double b) {
    double fa = eval(c, a);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = eval(c, mid);
        if (fm == 0.0) return mid;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) break;
    }
    return 0.5 * (a + b);
}

}  // namespace

std::vector<double> real_roots(std::span<const double> c) {
    const int d = effective_degree(c);
    std::vector<double> roots;
    if (d <= 0) return roots;  // constants (incl. zero poly): no isolated roots reported
    if (d == 1) {
        roots.push_back(-c[0] / c[1]);
        return roots;
    }

    std::vector<double> trimmed(c.begin(), c.begin() + d + 1);
    const auto der = derivative(trimmed);
    auto crit = real_roots(der);
    std::sort(crit.begin(), crit.end());

    const double bound = cauchy_bound(trimmed) + 1.0;
    std::vector<double> knots;
    knots.push_back(-bound);
    for (double t : crit)
        if (t > -bound && t < bound) knots.push_back(t);
    knots.push_back(bound);

    double scale = 0.0;
    for (double v : trimmed) scale = std::max(scale, std::abs(v));

    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double fa = eval(trimmed, a), fb = eval(trimmed, b);
        // Tangential roots sit at a critical point with f numerically zero.
        if (std::abs(fa) <= 1e-12 * scale * std::max(1.0, std::pow(std::abs(a), d))) {
            roots.push_back(a);
            continue;
        }
        if ((fa < 0.0) != (fb < 0.0)) roots.push_back(bisect(trimmed, a, b));
    }
    const double fb = eval(trimmed, knots.back());
    if (std::abs(fb) <= 1e-12 * scale * std::max(1.0, std::pow(knots.back(), d)))
        roots.push_back(knots.back());

    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); }),
                roots.end());
    return roots;
}

}  // namespace poly
}  // namespace spdelab
