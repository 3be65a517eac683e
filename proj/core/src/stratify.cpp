#include "sgame/stratify.hpp"

#include <algorithm>
#include <set>

#include "sgame/errors.hpp"

namespace sgame {

PlayerClasses stratify_players(const std::map<std::string, int>& final_ranks) {
    const std::size_t n = final_ranks.size();
    if (n < 3) throw TooFewPlayers(n);

    std::vector<std::pair<int, std::string>> by_rank;
    std::set<int> seen;
    for (const auto& [occupant, rank] : final_ranks) {
        if (!seen.insert(rank).second) throw Error("ranks must be distinct");
        by_rank.emplace_back(rank, occupant);
    }
    std::sort(by_rank.begin(), by_rank.end());

    const std::size_t q = n / 3;
    const std::size_t r = n % 3;
    const std::size_t size_high = q + (r >= 1 ? 1 : 0);
    const std::size_t size_medium = q + (r >= 2 ? 1 : 0);

    PlayerClasses out;
    std::size_t i = 0;
    for (; i < size_high; ++i) out.high.push_back(by_rank[i].second);
    for (; i < size_high + size_medium; ++i) out.medium.push_back(by_rank[i].second);
    for (; i < n; ++i) out.low.push_back(by_rank[i].second);

    // median member; even sizes take the better-ranked middle
    auto median_member = [](const std::vector<std::string>& cls) {
        return cls[(cls.size() - 1) / 2];
    };
    out.representative_high = median_member(out.high);
    out.representative_medium = median_member(out.medium);
    out.representative_low = median_member(out.low);
    return out;
}

}  // namespace sgame
