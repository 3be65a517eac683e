#pragma once

#include <memory>

#include "sgame/feature_matrix.hpp"
#include "sgame/grad_check.hpp"
#include "sgame/model.hpp"

namespace sgame {

struct VaeConfig {
    std::vector<int> encoder_hidden{64, 32};  // decoder mirrors these
    int latent_dim = 8;
    double learning_rate = 0.005;
    double momentum = 0.9;
    int epochs = 50;
    int batch_size = 64;
    bool sample_bernoulli = true;  // sample vs threshold dummy columns
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static VaeConfig from_json(const nlohmann::json& doc);
};

// Dense variational auto-encoder: two ELU hidden layers on each side, a
// diagonal-Gaussian latent with reparameterized sampling, and a per-column
// likelihood — Bernoulli for dummy-tagged columns, unit-variance Gaussian for
// the rest. Loss = reconstruction NLL + KL(q || N(0, I)).
class VaeNet {
public:
    VaeNet(int data_dim, const VaeConfig& config, Rng& init_rng);

    ParamPack& params() { return params_; }
    const ParamPack& params() const { return params_; }

    void set_bernoulli_columns(std::vector<std::uint8_t> mask);
    const std::vector<std::uint8_t>& bernoulli_columns() const { return bernoulli_; }

    // Negative ELBO on the batch; `noise` holds the frozen standard-normal
    // draws (B x latent). The two loss components come back separately so the
    // decomposition can be checked exactly.
    double loss_and_grad(const Eigen::MatrixXd& X, const Eigen::MatrixXd& noise, ParamPack* grads,
                         double* reconstruction_out = nullptr, double* kl_out = nullptr);

    Eigen::MatrixXd decode(const Eigen::MatrixXd& z) const;  // Bernoulli columns as probabilities
    void encode(const Eigen::MatrixXd& X, Eigen::MatrixXd& mu, Eigen::MatrixXd& logvar) const;

    int data_dim() const { return data_dim_; }
    int latent_dim() const { return config_.latent_dim; }
    const VaeConfig& config() const { return config_; }

private:
    int data_dim_;
    VaeConfig config_;
    ParamPack params_;
    std::vector<std::uint8_t> bernoulli_;
};

DiffFunction bind_vae_loss(VaeNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& noise);

// The trained generator: draws latents from the standard-normal prior and
// decodes rows with the training arity.
class VaeModel {
public:
    VaeModel(std::unique_ptr<VaeNet> net, std::vector<ColumnInfo> columns)
        : net_(std::move(net)), columns_(std::move(columns)) {}

    Eigen::MatrixXd sample(std::size_t n, Rng& rng) const;
    FeatureMatrix sample_matrix(std::size_t n, Rng& rng) const;

    const VaeNet& net() const { return *net_; }
    const std::vector<ColumnInfo>& columns() const { return columns_; }
    const std::vector<double>& elbo_by_epoch() const { return elbo_by_epoch_; }
    void set_elbo_log(std::vector<double> log) { elbo_by_epoch_ = std::move(log); }

    nlohmann::json to_json() const;

private:
    std::unique_ptr<VaeNet> net_;
    std::vector<ColumnInfo> columns_;
    std::vector<double> elbo_by_epoch_;
};

std::unique_ptr<VaeModel> train_vae(const FeatureMatrix& X, const VaeConfig& config, Rng& rng,
                                    std::vector<EpochLogEntry>* log = nullptr);

}  // namespace sgame
