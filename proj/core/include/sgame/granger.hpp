#pragma once

#include <span>

namespace sgame {

struct GrangerResult {
    double f_statistic = 0.0;
    double p_value = 1.0;
    int lag = 1;
    double rss_restricted = 0.0;
    double rss_unrestricted = 0.0;
    std::size_t n_effective = 0;  // usable regression rows (length - lag)
    bool reject = false;          // H0: "x does not Granger-cause y"
    double alpha = 0.05;
};

// Restricted model: y_t on {y_{t-1}..y_{t-p}, intercept}; unrestricted adds
// {x_{t-1}..x_{t-p}}. F = ((RSS_r - RSS_u)/p) / (RSS_u/(n - 2p - 1)) with n
// the number of usable regression rows; p-value from the F distribution.
GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag,
                           double alpha = 0.05);

// BIC scan over lag orders 1..max_lag on the unrestricted model, for callers
// that want the lag picked from the data.
int granger_select_lag_bic(std::span<const double> x, std::span<const double> y, int max_lag);

}  // namespace sgame
