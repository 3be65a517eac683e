#include "sgame/vae.hpp"

#include <cmath>
#include <numbers>

#include "sgame/errors.hpp"

namespace sgame {

namespace {

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

Eigen::MatrixXd he_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const double sd = std::sqrt(2.0 / static_cast<double>(rows));
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = sd * rng.normal();
    return W;
}

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2 pi)

// parameter indices
enum : std::size_t { We1, Be1, We2, Be2, Wmu, Bmu, Wlv, Blv, Wd1, Bd1, Wd2, Bd2, Wout, Bout };

}  // namespace

void VaeConfig::validate() const {
    if (encoder_hidden.size() != 2) throw ConfigError("encoder uses exactly two hidden layers");
    for (int h : encoder_hidden) {
        if (h <= 0) throw ConfigError("hidden sizes must be positive");
    }
    if (latent_dim < 1) throw ConfigError("latent dimension must be at least 1");
    if (learning_rate <= 0.0 || epochs < 1 || batch_size < 1) {
        throw ConfigError("learning rate, epochs and batch size must be positive");
    }
}

nlohmann::json VaeConfig::to_json() const {
    return nlohmann::json{{"encoder_hidden", encoder_hidden}, {"latent_dim", latent_dim},
                          {"learning_rate", learning_rate},  {"momentum", momentum},
                          {"epochs", epochs},                {"batch_size", batch_size},
                          {"sample_bernoulli", sample_bernoulli}, {"seed", seed}};
}

VaeConfig VaeConfig::from_json(const nlohmann::json& doc) {
    VaeConfig c;
    c.encoder_hidden = doc.value("encoder_hidden", c.encoder_hidden);
    c.latent_dim = doc.value("latent_dim", c.latent_dim);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.momentum = doc.value("momentum", c.momentum);
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.sample_bernoulli = doc.value("sample_bernoulli", c.sample_bernoulli);
    c.seed = doc.value("seed", c.seed);
    return c;
}

VaeNet::VaeNet(int data_dim, const VaeConfig& config, Rng& init_rng)
    : data_dim_(data_dim), config_(config) {
    config_.validate();
    const int h1 = config_.encoder_hidden[0];
    const int h2 = config_.encoder_hidden[1];
    const int L = config_.latent_dim;
    params_.mats.resize(14);
    params_.mats[We1] = he_matrix(data_dim, h1, init_rng);
    params_.mats[Be1] = Eigen::MatrixXd::Zero(1, h1);
    params_.mats[We2] = he_matrix(h1, h2, init_rng);
    params_.mats[Be2] = Eigen::MatrixXd::Zero(1, h2);
    params_.mats[Wmu] = he_matrix(h2, L, init_rng);
    params_.mats[Bmu] = Eigen::MatrixXd::Zero(1, L);
    // the log-variance head starts at zero so the latent begins at unit scale
    params_.mats[Wlv] = Eigen::MatrixXd::Zero(h2, L);
    params_.mats[Blv] = Eigen::MatrixXd::Zero(1, L);
    params_.mats[Wd1] = he_matrix(L, h2, init_rng);
    params_.mats[Bd1] = Eigen::MatrixXd::Zero(1, h2);
    params_.mats[Wd2] = he_matrix(h2, h1, init_rng);
    params_.mats[Bd2] = Eigen::MatrixXd::Zero(1, h1);
    params_.mats[Wout] = he_matrix(h1, data_dim, init_rng);
    params_.mats[Bout] = Eigen::MatrixXd::Zero(1, data_dim);
    bernoulli_.assign(static_cast<std::size_t>(data_dim), 0);
}

void VaeNet::set_bernoulli_columns(std::vector<std::uint8_t> mask) {
    if (mask.size() != static_cast<std::size_t>(data_dim_)) {
        throw LengthMismatch(mask.size(), static_cast<std::size_t>(data_dim_));
    }
    bernoulli_ = std::move(mask);
}

double VaeNet::loss_and_grad(const Eigen::MatrixXd& X, const Eigen::MatrixXd& noise,
                             ParamPack* grads, double* reconstruction_out, double* kl_out) {
    const Eigen::Index B = X.rows();
    if (X.cols() != data_dim_) throw ArityMismatch(static_cast<std::size_t>(X.cols()),
                                                   static_cast<std::size_t>(data_dim_));
    if (noise.rows() != B || noise.cols() != config_.latent_dim) {
        throw LengthMismatch(static_cast<std::size_t>(noise.rows()), static_cast<std::size_t>(B));
    }
    const double invB = 1.0 / static_cast<double>(B);

    // encoder
    Eigen::MatrixXd ze1 = X * params_.mats[We1];
    ze1.rowwise() += params_.mats[Be1].row(0);
    Eigen::MatrixXd he1 = ze1.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd ze2 = he1 * params_.mats[We2];
    ze2.rowwise() += params_.mats[Be2].row(0);
    Eigen::MatrixXd he2 = ze2.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd mu = he2 * params_.mats[Wmu];
    mu.rowwise() += params_.mats[Bmu].row(0);
    Eigen::MatrixXd lv = he2 * params_.mats[Wlv];
    lv.rowwise() += params_.mats[Blv].row(0);

    // reparameterized latent
    Eigen::MatrixXd sigma = (0.5 * lv).array().exp();
    Eigen::MatrixXd z = mu + (sigma.array() * noise.array()).matrix();

    // decoder
    Eigen::MatrixXd zd1 = z * params_.mats[Wd1];
    zd1.rowwise() += params_.mats[Bd1].row(0);
    Eigen::MatrixXd hd1 = zd1.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd zd2 = hd1 * params_.mats[Wd2];
    zd2.rowwise() += params_.mats[Bd2].row(0);
    Eigen::MatrixXd hd2 = zd2.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd out = hd2 * params_.mats[Wout];
    out.rowwise() += params_.mats[Bout].row(0);

    // reconstruction NLL (Bernoulli via logits, Gaussian with unit variance)
    double recon = 0.0;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (bernoulli_[static_cast<std::size_t>(j)]) {
            for (Eigen::Index i = 0; i < B; ++i) {
                const double o = out(i, j);
                recon += std::max(o, 0.0) - X(i, j) * o + std::log1p(std::exp(-std::fabs(o)));
            }
        } else {
            recon += 0.5 * (out.col(j) - X.col(j)).squaredNorm() +
                     static_cast<double>(B) * kHalfLog2Pi;
        }
    }
    recon *= invB;
    const double kl = -0.5 * invB *
                      (1.0 + lv.array() - mu.array().square() - lv.array().exp()).sum();
    const double loss = recon + kl;
    if (!std::isfinite(loss)) throw NonFiniteLoss("vae forward pass");
    if (reconstruction_out != nullptr) *reconstruction_out = recon;
    if (kl_out != nullptr) *kl_out = kl;
    if (grads == nullptr) return loss;

    *grads = params_.zeros_like();
    Eigen::MatrixXd dout(B, data_dim_);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (bernoulli_[static_cast<std::size_t>(j)]) {
            for (Eigen::Index i = 0; i < B; ++i) {
                dout(i, j) = (sigmoid(out(i, j)) - X(i, j)) * invB;
            }
        } else {
            dout.col(j) = (out.col(j) - X.col(j)) * invB;
        }
    }
    grads->mats[Wout] = hd2.transpose() * dout;
    grads->mats[Bout].row(0) = dout.colwise().sum();
    Eigen::MatrixXd dhd2 = dout * params_.mats[Wout].transpose();
    Eigen::MatrixXd dzd2 = dhd2.array() * zd2.unaryExpr([](double v) { return elu_grad(v); }).array();
    grads->mats[Wd2] = hd1.transpose() * dzd2;
    grads->mats[Bd2].row(0) = dzd2.colwise().sum();
    Eigen::MatrixXd dhd1 = dzd2 * params_.mats[Wd2].transpose();
    Eigen::MatrixXd dzd1 = dhd1.array() * zd1.unaryExpr([](double v) { return elu_grad(v); }).array();
    grads->mats[Wd1] = z.transpose() * dzd1;
    grads->mats[Bd1].row(0) = dzd1.colwise().sum();
    Eigen::MatrixXd dz = dzd1 * params_.mats[Wd1].transpose();

    // reparameterization + KL terms
    Eigen::MatrixXd dmu = dz + invB * mu;
    Eigen::MatrixXd dlv = (dz.array() * noise.array() * 0.5 * sigma.array()).matrix() +
                          (invB * 0.5 * (lv.array().exp() - 1.0)).matrix();

    grads->mats[Wmu] = he2.transpose() * dmu;
    grads->mats[Bmu].row(0) = dmu.colwise().sum();
    grads->mats[Wlv] = he2.transpose() * dlv;
    grads->mats[Blv].row(0) = dlv.colwise().sum();
    Eigen::MatrixXd dhe2 = dmu * params_.mats[Wmu].transpose() + dlv * params_.mats[Wlv].transpose();
    Eigen::MatrixXd dze2 = dhe2.array() * ze2.unaryExpr([](double v) { return elu_grad(v); }).array();
    grads->mats[We2] = he1.transpose() * dze2;
    grads->mats[Be2].row(0) = dze2.colwise().sum();
    Eigen::MatrixXd dhe1 = dze2 * params_.mats[We2].transpose();
    Eigen::MatrixXd dze1 = dhe1.array() * ze1.unaryExpr([](double v) { return elu_grad(v); }).array();
    grads->mats[We1] = X.transpose() * dze1;
    grads->mats[Be1].row(0) = dze1.colwise().sum();
    return loss;
}

void VaeNet::encode(const Eigen::MatrixXd& X, Eigen::MatrixXd& mu, Eigen::MatrixXd& logvar) const {
    Eigen::MatrixXd h = (X * params_.mats[We1]).rowwise() + params_.mats[Be1].row(0);
    h = h.unaryExpr([](double v) { return elu(v); });
    h = (h * params_.mats[We2]).rowwise() + params_.mats[Be2].row(0);
    h = h.unaryExpr([](double v) { return elu(v); });
    mu = (h * params_.mats[Wmu]).rowwise() + params_.mats[Bmu].row(0);
    logvar = (h * params_.mats[Wlv]).rowwise() + params_.mats[Blv].row(0);
}

Eigen::MatrixXd VaeNet::decode(const Eigen::MatrixXd& z) const {
    Eigen::MatrixXd h = (z * params_.mats[Wd1]).rowwise() + params_.mats[Bd1].row(0);
    h = h.unaryExpr([](double v) { return elu(v); });
    h = (h * params_.mats[Wd2]).rowwise() + params_.mats[Bd2].row(0);
    h = h.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd out = (h * params_.mats[Wout]).rowwise() + params_.mats[Bout].row(0);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (bernoulli_[static_cast<std::size_t>(j)]) {
            out.col(j) = out.col(j).unaryExpr([](double v) { return sigmoid(v); });
        }
    }
    return out;
}

DiffFunction bind_vae_loss(VaeNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& noise) {
    DiffFunction f;
    f.value = [&net, &X, &noise](const Eigen::VectorXd& theta) {
        net.params().unflatten(theta);
        return net.loss_and_grad(X, noise, nullptr);
    };
    f.gradient = [&net, &X, &noise](const Eigen::VectorXd& theta) {
        net.params().unflatten(theta);
        ParamPack grads;
        net.loss_and_grad(X, noise, &grads);
        return grads.flatten();
    };
    return f;
}

Eigen::MatrixXd VaeModel::sample(std::size_t n, Rng& rng) const {
    if (n < 1) throw Error("sample count must be at least 1");
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), net_->latent_dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    Eigen::MatrixXd out = net_->decode(z);
    const auto& bern = net_->bernoulli_columns();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (!bern[static_cast<std::size_t>(j)]) continue;
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            if (net_->config().sample_bernoulli) {
                out(i, j) = rng.uniform01() < out(i, j) ? 1.0 : 0.0;
            } else {
                out(i, j) = out(i, j) > 0.5 ? 1.0 : 0.0;
            }
        }
    }
    return out;
}

FeatureMatrix VaeModel::sample_matrix(std::size_t n, Rng& rng) const {
    FeatureMatrix fm;
    fm.values = sample(n, rng);
    fm.columns = columns_;
    return fm;
}

nlohmann::json VaeModel::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "vae";
    j["config"] = net_->config().to_json();
    j["data_dim"] = net_->data_dim();
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : columns_) cols.push_back({{"name", c.name}, {"tag", tag_name(c.tag)}});
    j["columns"] = std::move(cols);
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& m : net_->params().mats) {
        mats.push_back({{"rows", m.rows()},
                        {"cols", m.cols()},
                        {"data", std::vector<double>(m.data(), m.data() + m.size())}});
    }
    j["weights"] = std::move(mats);
    j["elbo_by_epoch"] = elbo_by_epoch_;
    return j;
}

std::unique_ptr<VaeModel> train_vae(const FeatureMatrix& X, const VaeConfig& config, Rng& rng,
                                    std::vector<EpochLogEntry>* log) {
    config.validate();
    X.validate();
    const Eigen::Index n = X.values.rows();
    if (n < 2) throw EmptyTable();

    Rng init_rng = rng.fork(1);
    Rng noise_rng = rng.fork(2);
    Rng shuffle_rng = rng.fork(3);
    auto net = std::make_unique<VaeNet>(static_cast<int>(X.values.cols()), config, init_rng);
    // Bernoulli for dummy and device-state columns, Gaussian for the rest;
    // state columns are recognized by their {0,1} contents
    std::vector<std::uint8_t> bern(X.n_cols(), 0);
    for (std::size_t j = 0; j < X.n_cols(); ++j) {
        bool binary = true;
        for (Eigen::Index i = 0; i < X.values.rows() && binary; ++i) {
            const double v = X.values(i, static_cast<Eigen::Index>(j));
            binary = v == 0.0 || v == 1.0;
        }
        bern[j] = (X.columns[j].tag == ColumnTag::dummy || binary) ? 1 : 0;
    }
    net->set_bernoulli_columns(std::move(bern));

    ParamPack velocity = net->params().zeros_like();
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> elbo_log;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const Eigen::Index bs = static_cast<Eigen::Index>(stop - start);
            Eigen::MatrixXd Xb(bs, X.values.cols());
            for (Eigen::Index i = 0; i < bs; ++i) {
                Xb.row(i) = X.values.row(
                    static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
            }
            Eigen::MatrixXd noise(bs, config.latent_dim);
            for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = noise_rng.normal();

            ParamPack saved = net->params();
            net->params().axpy(config.momentum, velocity);
            ParamPack grads;
            const double loss = net->loss_and_grad(Xb, noise, &grads);
            net->params() = std::move(saved);
            // clip the global gradient norm; the Gaussian head can spike early
            double norm2 = 0.0;
            for (const auto& m : grads.mats) norm2 += m.squaredNorm();
            const double norm = std::sqrt(norm2);
            if (norm > 50.0) grads.scale(50.0 / norm);
            velocity.scale(config.momentum);
            velocity.axpy(-config.learning_rate, grads);
            net->params().axpy(1.0, velocity);
            epoch_loss += loss;
            ++batches;
        }
        const double mean_loss = batches ? epoch_loss / static_cast<double>(batches) : 0.0;
        elbo_log.push_back(-mean_loss);
        if (log != nullptr) log->push_back({epoch + 1, mean_loss, 0.0});
    }

    auto model = std::make_unique<VaeModel>(std::move(net), X.columns);
    model->set_elbo_log(std::move(elbo_log));
    return model;
}

}  // namespace sgame
