#include "sgame/stats.hpp"

#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/special.hpp"

namespace sgame {

double mean_of(std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    const double m = mean_of(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

StatTestResult two_sample_ttest(std::span<const double> before, std::span<const double> after,
                                double alpha) {
    if (before.size() < 2) throw SampleTooSmall(before.size());
    if (after.size() < 2) throw SampleTooSmall(after.size());

    StatTestResult res;
    res.alpha = alpha;
    res.n_before = before.size();
    res.n_after = after.size();
    res.mean_before = mean_of(before);
    res.mean_after = mean_of(after);
    if (res.mean_before != 0.0) {
        res.delta_percent = 100.0 * (res.mean_before - res.mean_after) / res.mean_before;
    }

    const double va = sample_variance(before);
    const double vb = sample_variance(after);
    if (va == 0.0 && vb == 0.0) {
        if (res.mean_before == res.mean_after) {
            // identical constants: no evidence of difference
            res.statistic = 0.0;
            res.p_value = 1.0;
            return res;
        }
        throw ZeroVariance();
    }

    const double na = static_cast<double>(before.size());
    const double nb = static_cast<double>(after.size());
    const double se2 = va / na + vb / nb;
    res.statistic = (res.mean_before - res.mean_after) / std::sqrt(se2);
    res.degrees_of_freedom =
        se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    res.p_value = student_t_two_sided_p(res.statistic, res.degrees_of_freedom);
    res.reject = res.p_value < alpha;
    return res;
}

}  // namespace sgame
