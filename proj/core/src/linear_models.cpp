#include "sgame/linear_models.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "sgame/errors.hpp"

namespace sgame {

namespace {

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// mean cross-entropy, numerically stable in z
double logistic_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        loss += std::max(z(i), 0.0) - y(i) * z(i) + std::log1p(std::exp(-std::fabs(z(i))));
    }
    return loss / static_cast<double>(z.size());
}

}  // namespace

Eigen::VectorXd LinearModel::predict_proba(const Eigen::MatrixXd& X) const {
    check_arity(X);
    Eigen::VectorXd z = X * w_;
    z.array() += b_;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
    return z;
}

nlohmann::json LinearModel::params_json() const {
    nlohmann::json j;
    j["weights"] = std::vector<double>(w_.data(), w_.data() + w_.size());
    j["intercept"] = b_;
    return j;
}

Eigen::VectorXd BaggedLogisticModel::member_proba(std::size_t m, const Eigen::MatrixXd& X) const {
    Eigen::VectorXd z = X * ws_[m];
    z.array() += bs_[m];
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
    return z;
}

Eigen::VectorXd BaggedLogisticModel::predict_proba(const Eigen::MatrixXd& X) const {
    check_arity(X);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(X.rows());
    for (std::size_t m = 0; m < ws_.size(); ++m) acc += member_proba(m, X);
    return acc / static_cast<double>(ws_.size());
}

nlohmann::json BaggedLogisticModel::params_json() const {
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t m = 0; m < ws_.size(); ++m) {
        nlohmann::json j;
        j["weights"] = std::vector<double>(ws_[m].data(), ws_[m].data() + ws_[m].size());
        j["intercept"] = bs_[m];
        members.push_back(std::move(j));
    }
    return nlohmann::json{{"members", std::move(members)}};
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y, double tol,
                         int max_iters) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = static_cast<double>(y[static_cast<std::size_t>(i)]);

    LogisticFit fit;
    fit.w = Eigen::VectorXd::Zero(d);
    fit.b = 0.0;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    double loss = logistic_loss(z, yv);
    double step = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) p(i) = sigmoid(z(i));
        const Eigen::VectorXd resid = p - yv;
        const Eigen::VectorXd gw = X.transpose() * resid / static_cast<double>(n);
        const double gb = resid.mean();
        const double gnorm = std::max(gw.lpNorm<Eigen::Infinity>(), std::fabs(gb));
        fit.final_grad_norm = gnorm;
        fit.iterations = it;
        if (gnorm < tol) {
            fit.converged = true;
            break;
        }
        // Armijo backtracking; the previous accepted step seeds the next try
        const double g2 = gw.squaredNorm() + gb * gb;
        double eta = std::min(step * 2.0, 1e4);
        while (true) {
            Eigen::VectorXd w_try = fit.w - eta * gw;
            const double b_try = fit.b - eta * gb;
            Eigen::VectorXd z_try = X * w_try;
            z_try.array() += b_try;
            const double loss_try = logistic_loss(z_try, yv);
            if (loss_try <= loss - 1e-4 * eta * g2 || eta < 1e-14) {
                fit.w = std::move(w_try);
                fit.b = b_try;
                z = std::move(z_try);
                loss = loss_try;
                step = eta;
                break;
            }
            eta *= 0.5;
        }
        if (!std::isfinite(loss)) throw NonFiniteLoss("logistic regression");
        fit.loss_trace.push_back(loss);
    }
    return fit;
}

LogisticFit fit_l1_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y, double lambda,
                            double tol, int max_iters) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = static_cast<double>(y[static_cast<std::size_t>(i)]);

    LogisticFit fit;
    fit.w = Eigen::VectorXd::Zero(d);
    fit.b = 0.0;

    auto smooth_loss = [&](const Eigen::VectorXd& w, double b) {
        Eigen::VectorXd z = X * w;
        z.array() += b;
        return logistic_loss(z, yv);
    };

    double step = 1.0;
    double loss = smooth_loss(fit.w, fit.b);
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd z = X * fit.w;
        z.array() += fit.b;
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) p(i) = sigmoid(z(i));
        const Eigen::VectorXd resid = p - yv;
        const Eigen::VectorXd gw = X.transpose() * resid / static_cast<double>(n);
        const double gb = resid.mean();

        double eta = std::min(step * 2.0, 1e4);
        Eigen::VectorXd w_next;
        double b_next = 0.0;
        while (true) {
            w_next = fit.w - eta * gw;
            for (Eigen::Index j = 0; j < d; ++j) {
                const double t = eta * lambda;
                w_next(j) = std::copysign(std::max(std::fabs(w_next(j)) - t, 0.0), w_next(j));
            }
            b_next = fit.b - eta * gb;  // intercept is unpenalized
            const double loss_next = smooth_loss(w_next, b_next);
            const Eigen::VectorXd dw = w_next - fit.w;
            const double db = b_next - fit.b;
            const double quad = loss + gw.dot(dw) + gb * db +
                                (dw.squaredNorm() + db * db) / (2.0 * eta);
            if (loss_next <= quad + 1e-12 || eta < 1e-14) {
                const double move =
                    std::max(dw.lpNorm<Eigen::Infinity>(), std::fabs(db));
                fit.w = w_next;
                fit.b = b_next;
                loss = loss_next;
                step = eta;
                fit.iterations = it;
                fit.final_grad_norm = move / eta;
                if (move < tol * eta || move < 1e-15) fit.converged = true;
                break;
            }
            eta *= 0.5;
        }
        if (!std::isfinite(loss)) throw NonFiniteLoss("l1 logistic regression");
        fit.loss_trace.push_back(loss);
        if (fit.converged) break;
    }
    return fit;
}

}  // namespace sgame
