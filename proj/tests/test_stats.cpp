#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdelab/rng.hpp"
#include "spdelab/stats.hpp"

using namespace spdelab;

namespace {

std::vector<double> normal_sample(std::size_t n, double shift, GaussianStream& rng) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal() + shift;
    return x;
}

// Quadratic-time U-statistic reference for the energy distance.
double energy_reference(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    const double n = static_cast<double>(y.size());
    double cross = 0.0;
    for (double a : x)
        for (double b : y) cross += std::abs(a - b);
    double within_x = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) within_x += std::abs(x[i] - x[j]);
    double within_y = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = i + 1; j < y.size(); ++j) within_y += std::abs(y[i] - y[j]);
    return 2.0 * cross / (m * n) - 2.0 * within_x / (m * (m - 1.0)) -
           2.0 * within_y / (n * (n - 1.0));
}

}  // namespace

TEST_CASE("sample moments") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    CHECK(stats::mean(x) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(stats::variance(x) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(stats::ci_halfwidth95(x) ==
          doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));

    const std::vector<double> single = {7.0};
    CHECK(stats::mean(single) == 7.0);
    CHECK(stats::ci_halfwidth95(single) == 0.0);
}

TEST_CASE("energy distance equals the quadratic-time reference") {
    GaussianStream rng(101, 1);
    for (int trial = 0; trial < 5; ++trial) {
        const auto x = normal_sample(37, 0.0, rng);
        const auto y = normal_sample(23, 0.7 * trial, rng);
        const double fast = stats::energy_distance(x, y);
        const double slow = energy_reference(x, y);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("energy distance separates laws and shrinks within one law") {
    GaussianStream rng(102, 1);
    const auto x = normal_sample(400, 0.0, rng);
    const auto same = normal_sample(400, 0.0, rng);
    const auto far = normal_sample(400, 3.0, rng);
    const double d_same = stats::energy_distance(x, same);
    const double d_far = stats::energy_distance(x, far);
    // E|X-Y| ~ shift for well-separated laws, so d_far ~ 2*3 - 2*E|X-X'|.
    CHECK(d_far > 1.0);
    CHECK(std::abs(d_same) < 0.2);
    CHECK(d_far > 10.0 * std::abs(d_same));
}

TEST_CASE("permutation test keeps same-law samples and flags shifted ones") {
    GaussianStream rng(103, 1);
    const auto x = normal_sample(150, 0.0, rng);
    const auto y_same = normal_sample(150, 0.0, rng);
    const auto y_far = normal_sample(150, 2.0, rng);

    GaussianStream perm1(103, make_stream(stream_purpose::permutation, 0));
    const auto same = stats::permutation_energy_test(x, y_same, 199, perm1);
    CHECK(same.permutations == 199);
    CHECK_FALSE(same.distinguishable);
    CHECK(same.observed <= same.threshold95);

    GaussianStream perm2(103, make_stream(stream_purpose::permutation, 0));
    const auto far = stats::permutation_energy_test(x, y_far, 199, perm2);
    CHECK(far.distinguishable);
    CHECK(far.observed > far.threshold95);
    // A mean shift of two standard deviations dwarfs the permutation null.
    CHECK(far.observed > 5.0 * far.threshold95);
}

TEST_CASE("permutation test is deterministic for a fixed stream") {
    GaussianStream rng(104, 1);
    const auto x = normal_sample(80, 0.0, rng);
    const auto y = normal_sample(80, 0.5, rng);
    GaussianStream a(42, make_stream(stream_purpose::permutation, 9));
    GaussianStream b(42, make_stream(stream_purpose::permutation, 9));
    const auto r1 = stats::permutation_energy_test(x, y, 99, a);
    const auto r2 = stats::permutation_energy_test(x, y, 99, b);
    CHECK(r1.observed == r2.observed);
    CHECK(r1.threshold95 == r2.threshold95);
    CHECK(r1.distinguishable == r2.distinguishable);
}

TEST_CASE("bootstrap ratio is exact for proportional samples") {
    const std::vector<double> den = {1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> num;
    for (double d : den) num.push_back(2.0 * d);
    GaussianStream rng(7, make_stream(stream_purpose::bootstrap, 0));
    const auto r = stats::bootstrap_ratio(num, den, 500, rng);
    CHECK(r.ratio == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.lo == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.hi == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bootstrap ratio brackets the true value under noise") {
    GaussianStream data(11, 1);
    std::vector<double> den, num;
    for (int i = 0; i < 200; ++i) {
        const double d = 2.0 + 0.1 * data.normal();
        den.push_back(d);
        num.push_back(3.0 * d + 0.05 * data.normal());
    }
    GaussianStream rng(11, make_stream(stream_purpose::bootstrap, 1));
    const auto r = stats::bootstrap_ratio(num, den, 1000, rng);
    CHECK(r.lo <= r.ratio);
    CHECK(r.ratio <= r.hi);
    CHECK(r.lo <= 3.0);
    CHECK(3.0 <= r.hi + 0.05);  // slack: the noise floor shifts the ratio slightly
    CHECK(r.hi - r.lo < 0.1);
}

TEST_CASE("paired ratio difference detects ordering and ties") {
    GaussianStream data(12, 1);
    std::vector<double> denA, numA, denB, numB;
    for (int i = 0; i < 300; ++i) {
        const double d = 1.0 + 0.05 * data.normal();
        denA.push_back(d);
        numA.push_back(1.0 * d + 0.02 * data.normal());
        denB.push_back(d);
        numB.push_back(2.0 * d + 0.02 * data.normal());
    }
    GaussianStream rng(12, make_stream(stream_purpose::bootstrap, 2));
    const double upper = stats::bootstrap_ratio_diff_upper95(numA, denA, numB, denB, 800, rng);
    CHECK(upper < 0.0);  // ratio A ~ 1 sits below ratio B ~ 2 at 95%

    // Identical pairs resample to a difference of exactly zero.
    GaussianStream rng2(12, make_stream(stream_purpose::bootstrap, 3));
    const double tie = stats::bootstrap_ratio_diff_upper95(numA, denA, numA, denA, 800, rng2);
    CHECK(tie == doctest::Approx(0.0).epsilon(1e-14));
}
