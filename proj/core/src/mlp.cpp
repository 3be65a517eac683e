#include "sgame/mlp.hpp"

#include <cmath>

#include "sgame/errors.hpp"

namespace sgame {

namespace {

constexpr double kBnEps = 1e-8;
constexpr double kRunningMomentum = 0.9;

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

}  // namespace

void MlpConfig::validate() const {
    if (dropout_drop < 0.0 || dropout_drop >= 1.0) {
        throw ConfigError("dropout drop-probability must lie in [0, 1)");
    }
    for (int h : hidden) {
        if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
    }
    if (learning_rate <= 0.0 || epochs < 1 || batch_size < 1) {
        throw ConfigError("learning rate, epochs and batch size must be positive");
    }
}

nlohmann::json MlpConfig::to_json() const {
    return nlohmann::json{{"hidden", hidden},
                          {"dropout_drop", dropout_drop},
                          {"batch_norm", batch_norm},
                          {"learning_rate", learning_rate},
                          {"momentum", momentum},
                          {"epochs", epochs},
                          {"batch_size", batch_size},
                          {"seed", seed}};
}

MlpConfig MlpConfig::from_json(const nlohmann::json& doc) {
    MlpConfig c;
    c.hidden = doc.value("hidden", c.hidden);
    c.dropout_drop = doc.value("dropout_drop", c.dropout_drop);
    c.batch_norm = doc.value("batch_norm", c.batch_norm);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.momentum = doc.value("momentum", c.momentum);
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.seed = doc.value("seed", c.seed);
    return c;
}

MlpNet::MlpNet(int input_dim, const MlpConfig& config, Rng& init_rng)
    : input_dim_(input_dim), config_(config) {
    config_.validate();
    int in = input_dim;
    for (int h : config_.hidden) {
        // He normal: sd = sqrt(2 / fan_in)
        const double sd = std::sqrt(2.0 / static_cast<double>(in));
        Eigen::MatrixXd W(in, h);
        for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = sd * init_rng.normal();
        params_.mats.push_back(std::move(W));
        params_.mats.push_back(Eigen::MatrixXd::Zero(1, h));  // bias
        if (config_.batch_norm) {
            params_.mats.push_back(Eigen::MatrixXd::Ones(1, h));   // gamma
            params_.mats.push_back(Eigen::MatrixXd::Zero(1, h));   // beta
            running_mean_.push_back(Eigen::VectorXd::Zero(h));
            running_var_.push_back(Eigen::VectorXd::Ones(h));
        }
        in = h;
    }
    const double sd = std::sqrt(2.0 / static_cast<double>(in));
    Eigen::MatrixXd W(in, 1);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = sd * init_rng.normal();
    params_.mats.push_back(std::move(W));
    params_.mats.push_back(Eigen::MatrixXd::Zero(1, 1));
}

void MlpNet::set_running_stats(std::vector<Eigen::VectorXd> mean, std::vector<Eigen::VectorXd> var) {
    running_mean_ = std::move(mean);
    running_var_ = std::move(var);
}

double MlpNet::loss_and_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ParamPack* grads,
                             Rng* dropout_rng) {
    const Eigen::Index B = X.rows();
    const std::size_t L = config_.hidden.size();
    const std::size_t per_layer = config_.batch_norm ? 4 : 2;
    const bool training_step = dropout_rng != nullptr;

    // forward caches
    std::vector<Eigen::MatrixXd> inputs(L + 1);   // layer inputs (post-dropout)
    std::vector<Eigen::MatrixXd> pre_bn(L);       // z before normalization
    std::vector<Eigen::MatrixXd> normalized(L);   // x-hat
    std::vector<Eigen::MatrixXd> pre_act(L);      // u (after gamma/beta or z)
    std::vector<Eigen::MatrixXd> masks(L);
    std::vector<Eigen::VectorXd> mu(L), var(L);

    inputs[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
        const Eigen::MatrixXd& W = params_.mats[l * per_layer];
        const Eigen::MatrixXd& b = params_.mats[l * per_layer + 1];
        Eigen::MatrixXd z = inputs[l] * W;
        z.rowwise() += b.row(0);
        pre_bn[l] = z;
        if (config_.batch_norm) {
            const Eigen::MatrixXd& gamma = params_.mats[l * per_layer + 2];
            const Eigen::MatrixXd& beta = params_.mats[l * per_layer + 3];
            mu[l] = z.colwise().mean();
            var[l] = (z.rowwise() - mu[l].transpose()).array().square().colwise().mean();
            if (training_step) {
                running_mean_[l] = kRunningMomentum * running_mean_[l] + (1 - kRunningMomentum) * mu[l];
                running_var_[l] = kRunningMomentum * running_var_[l] + (1 - kRunningMomentum) * var[l];
            }
            Eigen::MatrixXd xhat = z.rowwise() - mu[l].transpose();
            for (Eigen::Index j = 0; j < xhat.cols(); ++j) {
                xhat.col(j) /= std::sqrt(var[l](j) + kBnEps);
            }
            normalized[l] = xhat;
            Eigen::MatrixXd u = xhat.array().rowwise() * gamma.row(0).array();
            u.rowwise() += beta.row(0);
            pre_act[l] = u;
        } else {
            pre_act[l] = z;
        }
        Eigen::MatrixXd h = pre_act[l].unaryExpr([](double v) { return elu(v); });
        if (training_step && config_.dropout_drop > 0.0) {
            const double keep = 1.0 - config_.dropout_drop;
            masks[l].resize(h.rows(), h.cols());
            for (Eigen::Index i = 0; i < h.size(); ++i) {
                masks[l].data()[i] = dropout_rng->uniform01() < keep ? 1.0 / keep : 0.0;
            }
            h.array() *= masks[l].array();
        }
        inputs[l + 1] = std::move(h);
    }

    const Eigen::MatrixXd& W_out = params_.mats[L * per_layer];
    const Eigen::MatrixXd& b_out = params_.mats[L * per_layer + 1];
    Eigen::VectorXd logits = inputs[L] * W_out.col(0);
    logits.array() += b_out(0, 0);

    double loss = 0.0;
    Eigen::VectorXd p(B);
    for (Eigen::Index i = 0; i < B; ++i) {
        loss += std::max(logits(i), 0.0) - y(i) * logits(i) +
                std::log1p(std::exp(-std::fabs(logits(i))));
        p(i) = sigmoid(logits(i));
    }
    loss /= static_cast<double>(B);
    if (!std::isfinite(loss)) throw NonFiniteLoss("mlp forward pass");
    if (grads == nullptr) return loss;

    *grads = params_.zeros_like();
    Eigen::VectorXd dlogits = (p - y) / static_cast<double>(B);
    grads->mats[L * per_layer] = inputs[L].transpose() * dlogits;
    grads->mats[L * per_layer + 1](0, 0) = dlogits.sum();
    Eigen::MatrixXd dh = dlogits * W_out.col(0).transpose();

    for (std::size_t l = L; l-- > 0;) {
        if (training_step && config_.dropout_drop > 0.0) dh.array() *= masks[l].array();
        Eigen::MatrixXd du =
            dh.array() * pre_act[l].unaryExpr([](double v) { return elu_grad(v); }).array();
        Eigen::MatrixXd dz;
        if (config_.batch_norm) {
            const Eigen::MatrixXd& gamma = params_.mats[l * per_layer + 2];
            grads->mats[l * per_layer + 2].row(0) =
                (du.array() * normalized[l].array()).colwise().sum();
            grads->mats[l * per_layer + 3].row(0) = du.colwise().sum();
            // backprop through the batch statistics
            const double Bd = static_cast<double>(B);
            dz.resize(du.rows(), du.cols());
            for (Eigen::Index j = 0; j < du.cols(); ++j) {
                const double inv_sd = 1.0 / std::sqrt(var[l](j) + kBnEps);
                const Eigen::VectorXd dxhat = du.col(j) * gamma(0, j);
                const double sum_dxhat = dxhat.sum();
                const double sum_dxhat_xhat = dxhat.dot(normalized[l].col(j));
                dz.col(j) = (inv_sd / Bd) *
                            (Bd * dxhat.array() - sum_dxhat -
                             normalized[l].col(j).array() * sum_dxhat_xhat);
            }
        } else {
            dz = std::move(du);
        }
        grads->mats[l * per_layer] = inputs[l].transpose() * dz;
        grads->mats[l * per_layer + 1].row(0) = dz.colwise().sum();
        if (l > 0) dh = dz * params_.mats[l * per_layer].transpose();
    }
    return loss;
}

Eigen::VectorXd MlpNet::predict(const Eigen::MatrixXd& X) const {
    const std::size_t L = config_.hidden.size();
    const std::size_t per_layer = config_.batch_norm ? 4 : 2;
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < L; ++l) {
        const Eigen::MatrixXd& W = params_.mats[l * per_layer];
        const Eigen::MatrixXd& b = params_.mats[l * per_layer + 1];
        Eigen::MatrixXd z = a * W;
        z.rowwise() += b.row(0);
        if (config_.batch_norm) {
            const Eigen::MatrixXd& gamma = params_.mats[l * per_layer + 2];
            const Eigen::MatrixXd& beta = params_.mats[l * per_layer + 3];
            for (Eigen::Index j = 0; j < z.cols(); ++j) {
                z.col(j) = (z.col(j).array() - running_mean_[l](j)) /
                           std::sqrt(running_var_[l](j) + kBnEps);
            }
            z = z.array().rowwise() * gamma.row(0).array();
            z.rowwise() += beta.row(0);
        }
        a = z.unaryExpr([](double v) { return elu(v); });
    }
    const Eigen::MatrixXd& W_out = params_.mats[L * per_layer];
    const Eigen::MatrixXd& b_out = params_.mats[L * per_layer + 1];
    Eigen::VectorXd logits = a * W_out.col(0);
    logits.array() += b_out(0, 0);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits(i) = sigmoid(logits(i));
    return logits;
}

DiffFunction bind_mlp_loss(MlpNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    DiffFunction f;
    f.value = [&net, &X, &y](const Eigen::VectorXd& theta) {
        net.params().unflatten(theta);
        return net.loss_and_grad(X, y, nullptr, nullptr);
    };
    f.gradient = [&net, &X, &y](const Eigen::VectorXd& theta) {
        net.params().unflatten(theta);
        ParamPack grads;
        net.loss_and_grad(X, y, &grads, nullptr);
        return grads.flatten();
    };
    return f;
}

Eigen::VectorXd MlpModel::predict_proba(const Eigen::MatrixXd& X) const {
    check_arity(X);
    return net_->predict(X);
}

nlohmann::json MlpModel::params_json() const {
    nlohmann::json j;
    j["config"] = net_->config().to_json();
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& m : net_->params().mats) {
        mats.push_back({{"rows", m.rows()},
                        {"cols", m.cols()},
                        {"data", std::vector<double>(m.data(), m.data() + m.size())}});
    }
    j["weights"] = std::move(mats);
    nlohmann::json stats = nlohmann::json::array();
    for (std::size_t l = 0; l < net_->running_mean().size(); ++l) {
        stats.push_back(
            {{"mean", std::vector<double>(net_->running_mean()[l].data(),
                                          net_->running_mean()[l].data() + net_->running_mean()[l].size())},
             {"var", std::vector<double>(net_->running_var()[l].data(),
                                         net_->running_var()[l].data() + net_->running_var()[l].size())}});
    }
    j["running_stats"] = std::move(stats);
    j["input_dim"] = net_->input_dim();
    return j;
}

std::unique_ptr<MlpModel> train_mlp(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                    const MlpConfig& config, Rng& rng,
                                    std::vector<EpochLogEntry>* log) {
    config.validate();
    require_both_classes(y);
    const Eigen::Index n = X.rows();
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = static_cast<double>(y[static_cast<std::size_t>(i)]);

    Rng init_rng = rng.fork(1);
    Rng dropout_rng = rng.fork(2);
    Rng shuffle_rng = rng.fork(3);
    auto net = std::make_unique<MlpNet>(static_cast<int>(X.cols()), config, init_rng);

    ParamPack velocity = net->params().zeros_like();
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const Eigen::Index bs = static_cast<Eigen::Index>(stop - start);
            if (bs < 2) continue;  // batch statistics need at least two rows
            Eigen::MatrixXd Xb(bs, X.cols());
            Eigen::VectorXd yb(bs);
            for (Eigen::Index i = 0; i < bs; ++i) {
                Xb.row(i) = X.row(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
                yb(i) = yv(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
            }
            // Nesterov: evaluate the gradient at the lookahead point
            ParamPack saved = net->params();
            net->params().axpy(config.momentum, velocity);
            ParamPack grads;
            const double loss = net->loss_and_grad(Xb, yb, &grads, &dropout_rng);
            net->params() = std::move(saved);
            velocity.scale(config.momentum);
            velocity.axpy(-config.learning_rate, grads);
            net->params().axpy(1.0, velocity);
            epoch_loss += loss;
            ++batches;
        }
        if (log != nullptr) {
            log->push_back({epoch + 1, batches ? epoch_loss / static_cast<double>(batches) : 0.0, 0.0});
        }
    }

    auto model = std::make_unique<MlpModel>(std::move(net));
    model->metadata["seed"] = rng.seed();
    model->metadata["config"] = config.to_json();
    return model;
}

}  // namespace sgame
