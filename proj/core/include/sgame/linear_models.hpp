#pragma once

#include "sgame/model.hpp"

namespace sgame {

// Linear scorer sigma(w . x + b); covers plain/L1 logistic regression, LDA in
// reduced form, and the SVM with its logistic link on margins.
class LinearModel : public Model {
public:
    LinearModel(std::string kind, Eigen::VectorXd w, double b)
        : kind_(std::move(kind)), w_(std::move(w)), b_(b) {}

    std::string kind() const override { return kind_; }
    std::size_t arity() const override { return static_cast<std::size_t>(w_.size()); }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;

    const Eigen::VectorXd& weights() const { return w_; }
    double intercept() const { return b_; }

protected:
    nlohmann::json params_json() const override;

private:
    std::string kind_;
    Eigen::VectorXd w_;
    double b_;
};

class BaggedLogisticModel : public Model {
public:
    BaggedLogisticModel(std::vector<Eigen::VectorXd> ws, std::vector<double> bs)
        : ws_(std::move(ws)), bs_(std::move(bs)) {}

    std::string kind() const override { return "bagged_logistic"; }
    std::size_t arity() const override { return static_cast<std::size_t>(ws_.at(0).size()); }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;

    std::size_t n_members() const { return ws_.size(); }
    Eigen::VectorXd member_proba(std::size_t m, const Eigen::MatrixXd& X) const;

protected:
    nlohmann::json params_json() const override;

private:
    std::vector<Eigen::VectorXd> ws_;
    std::vector<double> bs_;
};

struct LogisticFit {
    Eigen::VectorXd w;
    double b = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_grad_norm = 0.0;
    std::vector<double> loss_trace;
};

// Full-batch gradient descent with Armijo backtracking on the mean
// cross-entropy; stops at gradient infinity-norm < tol.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y, double tol,
                         int max_iters);

// Proximal gradient (soft-thresholding of the non-intercept weights).
LogisticFit fit_l1_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y, double lambda,
                            double tol, int max_iters);

}  // namespace sgame
