#include "spdelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdelab {
namespace stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("stats::mean: empty sample");
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc / x.size();
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return acc / (x.size() - 1);
}

double ci_halfwidth95(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    return 1.96 * std::sqrt(variance(x) / x.size());
}

namespace {

// sum_{i<j} |v_i - v_j| for sorted v.
double pair_abs_sum_sorted(std::span<const double> v) {
    double acc = 0.0, prefix = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc += v[i] * static_cast<double>(i) - prefix;
        prefix += v[i];
    }
    return acc;
}

// sum_{i,j} |x_i - y_j| for sorted x, y.
double cross_abs_sum_sorted(std::span<const double> x, std::span<const double> y) {
    // Pairs with x_i <= y_j contribute (y_j - x_i) in the first pass, pairs
    // with y_j <= x_i contribute (x_i - y_j) in the second; ties add 0 twice.
    double acc = 0.0, prefix = 0.0;
    std::size_t k = 0;
    for (double yv : y) {
        while (k < x.size() && x[k] <= yv) prefix += x[k++];
        acc += yv * static_cast<double>(k) - prefix;
    }
    prefix = 0.0;
    k = 0;
    for (double xv : x) {
        while (k < y.size() && y[k] <= xv) prefix += y[k++];
        acc += xv * static_cast<double>(k) - prefix;
    }
    return acc;
}

double energy_distance_sorted(std::span<const double> xs, std::span<const double> ys) {
    const double m = static_cast<double>(xs.size());
    const double n = static_cast<double>(ys.size());
    const double cross = cross_abs_sum_sorted(xs, ys);
    const double within_x = pair_abs_sum_sorted(xs);
    const double within_y = pair_abs_sum_sorted(ys);
    return 2.0 * cross / (m * n) - 2.0 * within_x / (m * (m - 1.0)) -
           2.0 * within_y / (n * (n - 1.0));
}

}  // namespace

double energy_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2)
        throw std::invalid_argument("energy_distance: need at least two samples per side");
    std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    return energy_distance_sorted(xs, ys);
}

PermutationResult permutation_energy_test(std::span<const double> x,
                                          std::span<const double> y,
                                          int n_permutations, GaussianStream& rng) {
    PermutationResult r;
    r.observed = energy_distance(x, y);
    r.permutations = n_permutations;

    std::vector<double> pool(x.begin(), x.end());
    pool.insert(pool.end(), y.begin(), y.end());
    const std::size_t m = x.size();

    std::vector<double> null_stats(n_permutations);
    std::vector<double> xs(m), ys(pool.size() - m);
    for (int p = 0; p < n_permutations; ++p) {
        // Fisher-Yates on the pooled sample.
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.uniform_index(i)]);
        std::copy(pool.begin(), pool.begin() + m, xs.begin());
        std::copy(pool.begin() + m, pool.end(), ys.begin());
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        null_stats[p] = energy_distance_sorted(xs, ys);
    }
    std::sort(null_stats.begin(), null_stats.end());
    const std::size_t idx = static_cast<std::size_t>(std::ceil(0.95 * n_permutations)) - 1;
    r.threshold95 = null_stats[std::min(idx, null_stats.size() - 1)];
    r.distinguishable = r.observed > r.threshold95;
    return r;
}

namespace {

double ratio_of_means(std::span<const double> num, std::span<const double> den,
                      std::span<const std::size_t> idx) {
    double n = 0.0, d = 0.0;
    for (std::size_t i : idx) {
        n += num[i];
        d += den[i];
    }
    return n / d;
}

}  // namespace

RatioCI bootstrap_ratio(std::span<const double> num, std::span<const double> den,
                        int n_boot, GaussianStream& rng) {
    if (num.size() != den.size() || num.empty())
        throw std::invalid_argument("bootstrap_ratio: size mismatch");
    RatioCI out;
    out.ratio = mean(num) / mean(den);
    std::vector<double> draws(n_boot);
    std::vector<std::size_t> idx(num.size());
    for (int b = 0; b < n_boot; ++b) {
        for (auto& i : idx) i = rng.uniform_index(num.size());
        draws[b] = ratio_of_means(num, den, idx);
    }
    std::sort(draws.begin(), draws.end());
    out.lo = draws[static_cast<std::size_t>(0.025 * (n_boot - 1))];
    out.hi = draws[static_cast<std::size_t>(0.975 * (n_boot - 1))];
    return out;
}

double bootstrap_ratio_diff_upper95(std::span<const double> numA,
                                    std::span<const double> denA,
                                    std::span<const double> numB,
                                    std::span<const double> denB,
                                    int n_boot, GaussianStream& rng) {
    const std::size_t n = numA.size();
    if (denA.size() != n || numB.size() != n || denB.size() != n || n == 0)
        throw std::invalid_argument("bootstrap_ratio_diff_upper95: size mismatch");
    std::vector<double> draws(n_boot);
    std::vector<std::size_t> idx(n);
    for (int b = 0; b < n_boot; ++b) {
        for (auto& i : idx) i = rng.uniform_index(n);
        draws[b] = ratio_of_means(numA, denA, idx) - ratio_of_means(numB, denB, idx);
    }
    std::sort(draws.begin(), draws.end());
    return draws[static_cast<std::size_t>(0.95 * (n_boot - 1))];
}

}  // namespace stats
}  // namespace spdelab
