#pragma once

#include <memory>
#include <optional>

#include "sgame/grad_check.hpp"
#include "sgame/model.hpp"

namespace sgame {

struct MlpConfig {
    std::vector<int> hidden{32, 16};  // empty reduces to logistic regression
    double dropout_drop = 0.5;        // probability a hidden unit is dropped
    bool batch_norm = false;          // normalization before the activation
    double learning_rate = 0.05;
    double momentum = 0.9;  // Nesterov coefficient
    int epochs = 30;
    int batch_size = 64;
    std::uint64_t seed = 1;

    void validate() const;  // dropout in [0,1), positive sizes
    nlohmann::json to_json() const;
    static MlpConfig from_json(const nlohmann::json& doc);
};

// Feed-forward net: He-initialized, ELU hidden activations, sigmoid output,
// inverted dropout at training time, optional per-layer batch normalization.
// Exposed (rather than buried in the trainer) so the gradient checker can
// bind a loss on a fixed batch.
class MlpNet {
public:
    MlpNet(int input_dim, const MlpConfig& config, Rng& init_rng);

    ParamPack& params() { return params_; }
    const ParamPack& params() const { return params_; }

    // Mean cross-entropy on the batch; fills `grads` when non-null. Dropout
    // fires only when `dropout_rng` is non-null (training steps); the running
    // batch-norm statistics update only then as well.
    double loss_and_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ParamPack* grads,
                         Rng* dropout_rng);

    // Inference-mode probabilities (running statistics, no dropout).
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

    int input_dim() const { return input_dim_; }
    const MlpConfig& config() const { return config_; }
    const std::vector<Eigen::VectorXd>& running_mean() const { return running_mean_; }
    const std::vector<Eigen::VectorXd>& running_var() const { return running_var_; }
    void set_running_stats(std::vector<Eigen::VectorXd> mean, std::vector<Eigen::VectorXd> var);

private:
    int input_dim_;
    MlpConfig config_;
    ParamPack params_;  // per hidden layer: W, b [, gamma, beta]; then W_out, b_out
    std::vector<Eigen::VectorXd> running_mean_, running_var_;
};

DiffFunction bind_mlp_loss(MlpNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

class MlpModel : public Model {
public:
    MlpModel(std::unique_ptr<MlpNet> net) : net_(std::move(net)) {}

    std::string kind() const override { return "mlp"; }
    std::size_t arity() const override { return static_cast<std::size_t>(net_->input_dim()); }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;
    const MlpNet& net() const { return *net_; }

protected:
    nlohmann::json params_json() const override;

private:
    std::unique_ptr<MlpNet> net_;
};

std::unique_ptr<MlpModel> train_mlp(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                    const MlpConfig& config, Rng& rng,
                                    std::vector<EpochLogEntry>* log = nullptr);

}  // namespace sgame
