#pragma once

#include <memory>
#include <span>

#include "sgame/grad_check.hpp"
#include "sgame/model.hpp"

namespace sgame {

struct LstmConfig {
    int window = 120;   // N minutes per sequence
    int layers = 3;
    int hidden = 32;
    int fc = 16;
    double dropout = 0.6;  // drop probability on inter-layer connections
    double learning_rate = 0.05;
    double momentum = 0.9;   // Nesterov coefficient
    double lr_decay = 0.85;  // exponential per-epoch factor
    int patience = 5;        // early stopping on validation AUC
    int max_epochs = 35;
    int batch_size = 0;  // 0 = 2 * window, the "multiple of the time step" default
    double validation_fraction = 0.2;
    bool class_weighted = true;
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static LstmConfig from_json(const nlohmann::json& doc);
};

struct WindowSet {
    std::vector<Eigen::MatrixXd> windows;  // each N x n_cols, time-ordered
    std::vector<int> labels;               // label at each window's final minute
};

// Sliding windows ending at each labeled minute; count = n_rows - N + 1.
WindowSet make_windows(const Eigen::MatrixXd& X, std::span<const int> y, int window);

// Stacked bi-directional LSTM: each layer runs a forward and a backward pass
// over the window and concatenates the per-step outputs; a fully connected
// ELU layer reads the two ending-step states and feeds a 2-way soft-max.
class BiLstmNet {
public:
    BiLstmNet(int input_dim, const LstmConfig& config, Rng& init_rng);

    ParamPack& params() { return params_; }
    const ParamPack& params() const { return params_; }

    // Class-weighted soft-max cross-entropy over the batch; dropout fires only
    // when dropout_rng is non-null.
    double loss_and_grad(const std::vector<Eigen::MatrixXd>& windows,
                         const std::vector<int>& labels, const Eigen::Vector2d& class_weights,
                         ParamPack* grads, Rng* dropout_rng);

    Eigen::MatrixXd predict_logits(const std::vector<Eigen::MatrixXd>& windows) const;
    Eigen::VectorXd predict(const std::vector<Eigen::MatrixXd>& windows) const;  // P(on)

    // Exchanges the forward/backward weight blocks (including the concat-input
    // row halves); with every window reversed this leaves the pre-softmax
    // outputs unchanged.
    void swap_directions();

    int input_dim() const { return input_dim_; }
    const LstmConfig& config() const { return config_; }

private:
    int input_dim_;
    LstmConfig config_;
    ParamPack params_;

    std::size_t layer_base(int layer, int dir) const;  // index of Wx; Wh, b follow
    std::size_t fc_base() const;
};

DiffFunction bind_bilstm_loss(BiLstmNet& net, const std::vector<Eigen::MatrixXd>& windows,
                              const std::vector<int>& labels, const Eigen::Vector2d& class_weights);

class BiLstmModel : public Model {
public:
    explicit BiLstmModel(std::unique_ptr<BiLstmNet> net) : net_(std::move(net)) {}

    std::string kind() const override { return "bilstm"; }
    std::size_t arity() const override { return static_cast<std::size_t>(net_->input_dim()); }
    // Rows of X are read as flattened windows only through score_windows;
    // predict_proba over plain rows is not meaningful for a sequence model.
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;
    Eigen::VectorXd score_windows(const std::vector<Eigen::MatrixXd>& windows) const;
    const BiLstmNet& net() const { return *net_; }

protected:
    nlohmann::json params_json() const override;

private:
    std::unique_ptr<BiLstmNet> net_;
};

// Trains with Nesterov momentum and an exponentially decaying learning rate;
// stops on validation-AUC patience and restores the best-epoch weights.
std::unique_ptr<BiLstmModel> train_bilstm(const WindowSet& data, const LstmConfig& config,
                                          Rng& rng, std::vector<EpochLogEntry>* log = nullptr);

}  // namespace sgame
