#include "sgame/granger.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/special.hpp"

namespace sgame {

namespace {

// least squares via column-pivoted QR so collinear lags are caught explicitly
double regression_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        throw RankDeficient("perfectly collinear lag columns (rank " + std::to_string(qr.rank()) +
                            " of " + std::to_string(X.cols()) + ")");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    return (y - X * beta).squaredNorm();
}

}  // namespace

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag,
                           double alpha) {
    if (lag < 1) throw Error("lag order must be at least 1");
    if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
    const std::size_t len = y.size();
    const std::size_t p = static_cast<std::size_t>(lag);
    const std::size_t n = len > p ? len - p : 0;  // usable regression rows
    // denominator degrees of freedom n - 2p - 1 must be positive
    if (n < 2 * p + 2) throw SeriesTooShort(n, lag);

    for (double v : x) {
        if (!std::isfinite(v)) throw Error("series must be finite");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw Error("series must be finite");
    }

    Eigen::VectorXd target(n);
    Eigen::MatrixXd restricted(n, p + 1);
    Eigen::MatrixXd unrestricted(n, 2 * p + 1);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t row = t + p;  // index into the raw series
        target(static_cast<Eigen::Index>(t)) = y[row];
        restricted(static_cast<Eigen::Index>(t), 0) = 1.0;
        unrestricted(static_cast<Eigen::Index>(t), 0) = 1.0;
        for (std::size_t l = 1; l <= p; ++l) {
            restricted(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = y[row - l];
            unrestricted(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = y[row - l];
            unrestricted(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p + l)) = x[row - l];
        }
    }

    GrangerResult res;
    res.lag = lag;
    res.alpha = alpha;
    res.n_effective = n;
    res.rss_restricted = regression_rss(restricted, target);
    res.rss_unrestricted = regression_rss(unrestricted, target);

    const double df2 = static_cast<double>(n) - 2.0 * static_cast<double>(p) - 1.0;
    double f = ((res.rss_restricted - res.rss_unrestricted) / static_cast<double>(p)) /
               (res.rss_unrestricted / df2);
    if (f < 0.0) f = 0.0;  // guard tiny negative differences from roundoff
    res.f_statistic = f;
    res.p_value = f_distribution_sf(f, static_cast<double>(p), df2);
    res.reject = res.p_value < alpha;
    return res;
}

int granger_select_lag_bic(std::span<const double> x, std::span<const double> y, int max_lag) {
    if (max_lag < 1) throw Error("max lag must be at least 1");
    int best_lag = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int lag = 1; lag <= max_lag; ++lag) {
        const std::size_t p = static_cast<std::size_t>(lag);
        if (y.size() < 3 * p + 2) break;
        const std::size_t n = y.size() - p;
        Eigen::VectorXd target(n);
        Eigen::MatrixXd X(n, 2 * p + 1);
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t row = t + p;
            target(static_cast<Eigen::Index>(t)) = y[row];
            X(static_cast<Eigen::Index>(t), 0) = 1.0;
            for (std::size_t l = 1; l <= p; ++l) {
                X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = y[row - l];
                X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p + l)) = x[row - l];
            }
        }
        const double rss = regression_rss(X, target);
        const double k = static_cast<double>(2 * p + 1);
        const double bic = static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
                           k * std::log(static_cast<double>(n));
        if (bic < best_bic) {
            best_bic = bic;
            best_lag = lag;
        }
    }
    return best_lag;
}

}  // namespace sgame
