#pragma once

#include <span>

#include "sgame/rng.hpp"
#include "sgame/stats.hpp"

namespace sgame {

// Classic dynamic time warping with absolute-difference local cost and an
// unconstrained warping window; the returned value is the unnormalized
// cumulative cost of the best monotone alignment.
double dtw(std::span<const double> a, std::span<const double> b);

enum class PermutationScheme {
    within_series,  // shuffle the time order of each series independently
    cross_swap,     // pool both series, reshuffle, split back
};

// observed = dtw(original, generated); p-value = fraction of permuted scores
// <= observed, so a LOW p flags the observed similarity as extreme.
StatTestResult dtw_permutation_test(std::span<const double> original,
                                    std::span<const double> generated, int n_permutations,
                                    Rng& rng,
                                    PermutationScheme scheme = PermutationScheme::within_series);

}  // namespace sgame
