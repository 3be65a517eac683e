#pragma once

#include <span>
#include <vector>

#include "sgame/feature_matrix.hpp"
#include "sgame/rng.hpp"

namespace sgame {

// Synthetic minority over-sampling: appends rows p + u * (q - p), u in [0, 1],
// where q is one of p's k nearest minority neighbors (Euclidean), until the
// classes are exactly balanced. Original rows are preserved verbatim.
// k is clipped to minority_size - 1 when the minority class is small.
std::pair<FeatureMatrix, std::vector<int>> smote(const FeatureMatrix& X,
                                                 std::span<const int> labels, int k_neighbors,
                                                 Rng& rng);

}  // namespace sgame
