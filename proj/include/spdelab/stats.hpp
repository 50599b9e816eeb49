#pragma once

#include <span>
#include <vector>

#include "spdelab/rng.hpp"

namespace spdelab {
namespace stats {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased (n-1)
// 1.96 * sd / sqrt(n); 0 for n < 2.
double ci_halfwidth95(std::span<const double> x);

// Unbiased two-sample energy distance in 1-d:
// 2 E|X-Y| - E|X-X'| - E|Y-Y'|, U-statistics, computed exactly in
// O((m+n) log(m+n)) via sorted prefix sums.
double energy_distance(std::span<const double> x, std::span<const double> y);

struct PermutationResult {
    double observed = 0.0;
    double threshold95 = 0.0;  // 95th percentile of the permutation null
    int permutations = 0;
    bool distinguishable = false;  // observed > threshold95
};

PermutationResult permutation_energy_test(std::span<const double> x,
                                          std::span<const double> y,
                                          int n_permutations, GaussianStream& rng);

struct RatioCI {
    double ratio = 0.0;
    double lo = 0.0;  // 2.5% bootstrap percentile
    double hi = 0.0;  // 97.5% bootstrap percentile
};

// Ratio of means mean(num)/mean(den) with a paired bootstrap over indices.
RatioCI bootstrap_ratio(std::span<const double> num, std::span<const double> den,
                        int n_boot, GaussianStream& rng);

// 95th percentile of the bootstrap distribution of
// mean(numA)/mean(denA) - mean(numB)/mean(denB), resampling pair indices
// (all four arrays share the index). Negative result: A < B at 95% confidence.
double bootstrap_ratio_diff_upper95(std::span<const double> numA,
                                    std::span<const double> denA,
                                    std::span<const double> numB,
                                    std::span<const double> denB,
                                    int n_boot, GaussianStream& rng);

}  // namespace stats
}  // namespace spdelab
