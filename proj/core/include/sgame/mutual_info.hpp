#pragma once

#include <span>
#include <vector>

#include "sgame/feature_matrix.hpp"

namespace sgame {

// Equal-width bin indices over [min, max]; a constant column lands in bin 0.
std::vector<int> equal_width_bins(std::span<const double> x, int bins);

// Plug-in mutual information (nats) of the equal-width-binned columns.
// Symmetric in its arguments bit-for-bit.
double mutual_information(std::span<const double> x, std::span<const double> y, int bins);

// Entropy (nats) of a binned column.
double binned_entropy(std::span<const double> x, int bins);

// Greedy mRMR with the MID (difference) criterion: the first pick maximizes
// MI(x; y); each later pick maximizes relevance minus mean redundancy against
// the already-selected set. Ties break toward the lower column index.
// Dummy-tagged columns are binned with their natural 2 bins.
std::vector<int> mrmr_select(const FeatureMatrix& X, std::span<const int> labels, std::size_t k,
                             int bins = 10);

}  // namespace sgame
