#pragma once

#include <map>
#include <string>
#include <vector>

namespace sgame {

// Rank-derived energy-efficiency classes; rank 1 is the best player and lands
// in the high-efficiency class.
struct PlayerClasses {
    std::vector<std::string> high;    // best-ranked third (plus remainder)
    std::vector<std::string> medium;
    std::vector<std::string> low;
    std::string representative_high;  // median-rank member of each class
    std::string representative_medium;
    std::string representative_low;
};

// Splits rank-sorted occupants into three contiguous near-equal classes,
// remainders going to the better-ranked classes first. Representatives are
// the median-rank member per class (the better-ranked of the two middles when
// the class size is even). Ranks must be distinct.
PlayerClasses stratify_players(const std::map<std::string, int>& final_ranks);

}  // namespace sgame
