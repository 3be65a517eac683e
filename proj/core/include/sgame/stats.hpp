#pragma once

#include <cstddef>
#include <span>

namespace sgame {

// Outcome of a two-sample test (Welch t, DTW permutation, ...). Fields that a
// given test does not populate stay at their defaults.
struct StatTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double mean_before = 0.0;
    double mean_after = 0.0;
    double delta_percent = 0.0;  // 100 * (before - after) / before
    double degrees_of_freedom = 0.0;
    std::size_t n_before = 0;
    std::size_t n_after = 0;
    bool reject = false;
    double alpha = 0.05;
};

// Welch unequal-variance t-test with Welch-Satterthwaite degrees of freedom;
// two-sided p-value.
StatTestResult two_sample_ttest(std::span<const double> before, std::span<const double> after,
                                double alpha = 0.05);

double mean_of(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // 1/(n-1)

}  // namespace sgame
