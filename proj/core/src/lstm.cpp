#include "sgame/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/metrics.hpp"

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

// gate blocks inside the 4H-wide pre-activation: [i | f | g | o]
struct DirCache {
    std::vector<Eigen::MatrixXd> i, f, g, o, c, tanh_c, h;
};

}  // namespace

void LstmConfig::validate() const {
    if (window < 2) throw ConfigError("window length must be at least 2");
    if (layers < 1) throw ConfigError("at least one hidden layer required");
    if (hidden < 1 || fc < 1) throw ConfigError("layer widths must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
    if (lr_decay <= 0.0 || lr_decay > 1.0) throw ConfigError("lr decay factor must lie in (0, 1]");
    if (validation_fraction <= 0.0 || validation_fraction > 0.5) {
        throw ConfigError("validation fraction must lie in (0, 0.5]");
    }
    if (max_epochs < 1 || patience < 1) throw ConfigError("epochs and patience must be positive");
}

nlohmann::json LstmConfig::to_json() const {
    return nlohmann::json{{"window", window},
                          {"layers", layers},
                          {"hidden", hidden},
                          {"fc", fc},
                          {"dropout", dropout},
                          {"learning_rate", learning_rate},
                          {"momentum", momentum},
                          {"lr_decay", lr_decay},
                          {"patience", patience},
                          {"max_epochs", max_epochs},
                          {"batch_size", batch_size},
                          {"validation_fraction", validation_fraction},
                          {"class_weighted", class_weighted},
                          {"seed", seed}};
}

LstmConfig LstmConfig::from_json(const nlohmann::json& doc) {
    LstmConfig c;
    c.window = doc.value("window", c.window);
    c.layers = doc.value("layers", c.layers);
    c.hidden = doc.value("hidden", c.hidden);
    c.fc = doc.value("fc", c.fc);
    c.dropout = doc.value("dropout", c.dropout);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.momentum = doc.value("momentum", c.momentum);
    c.lr_decay = doc.value("lr_decay", c.lr_decay);
    c.patience = doc.value("patience", c.patience);
    c.max_epochs = doc.value("max_epochs", c.max_epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.validation_fraction = doc.value("validation_fraction", c.validation_fraction);
    c.class_weighted = doc.value("class_weighted", c.class_weighted);
    c.seed = doc.value("seed", c.seed);
    return c;
}

WindowSet make_windows(const Eigen::MatrixXd& X, std::span<const int> y, int window) {
    if (window < 2) throw ConfigError("window length must be at least 2");
    const Eigen::Index n = X.rows();
    if (n < window) throw TooFewRows(static_cast<std::size_t>(n), static_cast<std::size_t>(window));
    if (y.size() != static_cast<std::size_t>(n)) throw LengthMismatch(y.size(), n);
    WindowSet set;
    const Eigen::Index count = n - window + 1;
    set.windows.reserve(static_cast<std::size_t>(count));
    set.labels.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index start = 0; start < count; ++start) {
        set.windows.push_back(X.middleRows(start, window));
        set.labels.push_back(y[static_cast<std::size_t>(start + window - 1)]);
    }
    return set;
}

BiLstmNet::BiLstmNet(int input_dim, const LstmConfig& config, Rng& init_rng)
    : input_dim_(input_dim), config_(config) {
    config_.validate();
    const int H = config_.hidden;
    for (int l = 0; l < config_.layers; ++l) {
        const int in = l == 0 ? input_dim : 2 * H;
        for (int dir = 0; dir < 2; ++dir) {
            params_.mats.push_back(he_matrix(in, 4 * H, init_rng));   // Wx
            params_.mats.push_back(he_matrix(H, 4 * H, init_rng));    // Wh
            params_.mats.push_back(Eigen::MatrixXd::Zero(1, 4 * H));  // b
        }
    }
    params_.mats.push_back(he_matrix(2 * H, config_.fc, init_rng));  // W_fc
    params_.mats.push_back(Eigen::MatrixXd::Zero(1, config_.fc));
    params_.mats.push_back(he_matrix(config_.fc, 2, init_rng));  // W_out
    params_.mats.push_back(Eigen::MatrixXd::Zero(1, 2));
}

std::size_t BiLstmNet::layer_base(int layer, int dir) const {
    return static_cast<std::size_t>((layer * 2 + dir) * 3);
}

std::size_t BiLstmNet::fc_base() const {
    return static_cast<std::size_t>(config_.layers * 2 * 3);
}

void BiLstmNet::swap_directions() {
    const int H = config_.hidden;
    for (int l = 0; l < config_.layers; ++l) {
        for (int k = 0; k < 3; ++k) {
            std::swap(params_.mats[layer_base(l, 0) + static_cast<std::size_t>(k)],
                      params_.mats[layer_base(l, 1) + static_cast<std::size_t>(k)]);
        }
        if (l > 0) {
            // the layer reads a [fwd | bwd] concat: swap the input row halves
            for (int dir = 0; dir < 2; ++dir) {
                Eigen::MatrixXd& Wx = params_.mats[layer_base(l, dir)];
                Eigen::MatrixXd top = Wx.topRows(H);
                Wx.topRows(H) = Wx.bottomRows(H);
                Wx.bottomRows(H) = top;
            }
        }
    }
    Eigen::MatrixXd& Wfc = params_.mats[fc_base()];
    Eigen::MatrixXd top = Wfc.topRows(H);
    Wfc.topRows(H) = Wfc.bottomRows(H);
    Wfc.bottomRows(H) = top;
}

namespace {

struct LayerForward {
    DirCache dir[2];
    std::vector<Eigen::MatrixXd> inputs;  // per-timestep layer input (post-dropout)
    std::vector<Eigen::MatrixXd> masks;   // dropout masks on the layer OUTPUT
};

// runs one direction of one layer; xs holds per-timestep (B x in) inputs
void run_direction(const std::vector<Eigen::MatrixXd>& xs, const Eigen::MatrixXd& Wx,
                   const Eigen::MatrixXd& Wh, const Eigen::MatrixXd& b, bool backward_dir,
                   DirCache& cache) {
    const int N = static_cast<int>(xs.size());
    const Eigen::Index B = xs[0].rows();
    const Eigen::Index H = Wh.rows();
    cache.i.resize(xs.size());
    cache.f.resize(xs.size());
    cache.g.resize(xs.size());
    cache.o.resize(xs.size());
    cache.c.resize(xs.size());
    cache.tanh_c.resize(xs.size());
    cache.h.resize(xs.size());

    Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(B, H);
    Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(B, H);
    for (int s = 0; s < N; ++s) {
        const int t = backward_dir ? N - 1 - s : s;
        Eigen::MatrixXd A = xs[static_cast<std::size_t>(t)] * Wx + h_prev * Wh;
        A.rowwise() += b.row(0);
        auto& ci = cache.i[static_cast<std::size_t>(t)];
        auto& cf = cache.f[static_cast<std::size_t>(t)];
        auto& cg = cache.g[static_cast<std::size_t>(t)];
        auto& co = cache.o[static_cast<std::size_t>(t)];
        ci = A.leftCols(H).unaryExpr([](double v) { return sigmoid(v); });
        cf = A.middleCols(H, H).unaryExpr([](double v) { return sigmoid(v); });
        cg = A.middleCols(2 * H, H).array().tanh();
        co = A.rightCols(H).unaryExpr([](double v) { return sigmoid(v); });
        cache.c[static_cast<std::size_t>(t)] =
            cf.array() * c_prev.array() + ci.array() * cg.array();
        cache.tanh_c[static_cast<std::size_t>(t)] =
            cache.c[static_cast<std::size_t>(t)].array().tanh();
        cache.h[static_cast<std::size_t>(t)] =
            co.array() * cache.tanh_c[static_cast<std::size_t>(t)].array();
        h_prev = cache.h[static_cast<std::size_t>(t)];
        c_prev = cache.c[static_cast<std::size_t>(t)];
    }
}

// BPTT for one direction; dseq[t] = dL/dh[t] contributions from above.
// Accumulates parameter grads and dL/dx[t] into dxs.
void backprop_direction(const std::vector<Eigen::MatrixXd>& xs, const Eigen::MatrixXd& Wx,
                        const Eigen::MatrixXd& Wh, bool backward_dir, const DirCache& cache,
                        const std::vector<Eigen::MatrixXd>& dseq, Eigen::MatrixXd& dWx,
                        Eigen::MatrixXd& dWh, Eigen::MatrixXd& db,
                        std::vector<Eigen::MatrixXd>& dxs) {
    const int N = static_cast<int>(xs.size());
    const Eigen::Index B = xs[0].rows();
    const Eigen::Index H = Wh.rows();
    Eigen::MatrixXd carry_dh = Eigen::MatrixXd::Zero(B, H);
    Eigen::MatrixXd carry_dc = Eigen::MatrixXd::Zero(B, H);
    for (int s = N - 1; s >= 0; --s) {
        const int t = backward_dir ? N - 1 - s : s;
        const int t_prev = backward_dir ? t + 1 : t - 1;  // processing predecessor
        const auto& i = cache.i[static_cast<std::size_t>(t)];
        const auto& f = cache.f[static_cast<std::size_t>(t)];
        const auto& g = cache.g[static_cast<std::size_t>(t)];
        const auto& o = cache.o[static_cast<std::size_t>(t)];
        const auto& tc = cache.tanh_c[static_cast<std::size_t>(t)];

        Eigen::MatrixXd dh = dseq[static_cast<std::size_t>(t)] + carry_dh;
        Eigen::MatrixXd do_ = dh.array() * tc.array();
        Eigen::MatrixXd dc =
            (dh.array() * o.array() * (1.0 - tc.array().square())).matrix() + carry_dc;
        Eigen::MatrixXd di = dc.array() * g.array();
        Eigen::MatrixXd dg = dc.array() * i.array();
        Eigen::MatrixXd c_prev =
            (s > 0) ? cache.c[static_cast<std::size_t>(t_prev)] : Eigen::MatrixXd::Zero(B, H);
        Eigen::MatrixXd df = dc.array() * c_prev.array();
        carry_dc = dc.array() * f.array();

        Eigen::MatrixXd dA(B, 4 * H);
        dA.leftCols(H) = di.array() * i.array() * (1.0 - i.array());
        dA.middleCols(H, H) = df.array() * f.array() * (1.0 - f.array());
        dA.middleCols(2 * H, H) = dg.array() * (1.0 - g.array().square());
        dA.rightCols(H) = do_.array() * o.array() * (1.0 - o.array());

        const Eigen::MatrixXd h_prev =
            (s > 0) ? cache.h[static_cast<std::size_t>(t_prev)] : Eigen::MatrixXd::Zero(B, H);
        dWx.noalias() += xs[static_cast<std::size_t>(t)].transpose() * dA;
        dWh.noalias() += h_prev.transpose() * dA;
        db.row(0) += dA.colwise().sum();
        dxs[static_cast<std::size_t>(t)].noalias() += dA * Wx.transpose();
        carry_dh.noalias() = dA * Wh.transpose();
    }
}

}  // namespace

double BiLstmNet::loss_and_grad(const std::vector<Eigen::MatrixXd>& windows,
                                const std::vector<int>& labels,
                                const Eigen::Vector2d& class_weights, ParamPack* grads,
                                Rng* dropout_rng) {
    const std::size_t B = windows.size();
    if (B == 0 || labels.size() != B) throw LengthMismatch(B, labels.size());
    const int N = static_cast<int>(windows[0].rows());
    const int H = config_.hidden;
    const bool training = dropout_rng != nullptr && config_.dropout > 0.0;
    const double keep = 1.0 - config_.dropout;

    // per-timestep batch view of the input
    std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(N));
    for (int t = 0; t < N; ++t) {
        xs[static_cast<std::size_t>(t)].resize(static_cast<Eigen::Index>(B), input_dim_);
        for (std::size_t w = 0; w < B; ++w) {
            xs[static_cast<std::size_t>(t)].row(static_cast<Eigen::Index>(w)) = windows[w].row(t);
        }
    }

    std::vector<LayerForward> layers(static_cast<std::size_t>(config_.layers));
    std::vector<Eigen::MatrixXd>* current = &xs;
    for (int l = 0; l < config_.layers; ++l) {
        LayerForward& lf = layers[static_cast<std::size_t>(l)];
        lf.inputs = *current;
        for (int dir = 0; dir < 2; ++dir) {
            const std::size_t base = layer_base(l, dir);
            run_direction(lf.inputs, params_.mats[base], params_.mats[base + 1],
                          params_.mats[base + 2], dir == 1, lf.dir[dir]);
        }
        if (l + 1 < config_.layers) {
            // concat outputs feed the next layer, with inverted dropout
            std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(N));
            lf.masks.resize(static_cast<std::size_t>(N));
            for (int t = 0; t < N; ++t) {
                Eigen::MatrixXd out(static_cast<Eigen::Index>(B), 2 * H);
                out.leftCols(H) = lf.dir[0].h[static_cast<std::size_t>(t)];
                out.rightCols(H) = lf.dir[1].h[static_cast<std::size_t>(t)];
                if (training) {
                    auto& mask = lf.masks[static_cast<std::size_t>(t)];
                    mask.resize(out.rows(), out.cols());
                    for (Eigen::Index k = 0; k < mask.size(); ++k) {
                        mask.data()[k] = dropout_rng->uniform01() < keep ? 1.0 / keep : 0.0;
                    }
                    out.array() *= mask.array();
                }
                next[static_cast<std::size_t>(t)] = std::move(out);
            }
            layers[static_cast<std::size_t>(l) + 1].inputs = std::move(next);
            current = &layers[static_cast<std::size_t>(l) + 1].inputs;
        }
    }

    // classifier reads the two ending-step states
    const LayerForward& top = layers.back();
    Eigen::MatrixXd cls_in(static_cast<Eigen::Index>(B), 2 * H);
    cls_in.leftCols(H) = top.dir[0].h[static_cast<std::size_t>(N - 1)];
    cls_in.rightCols(H) = top.dir[1].h[0];
    Eigen::MatrixXd cls_mask;
    if (training) {
        cls_mask.resize(cls_in.rows(), cls_in.cols());
        for (Eigen::Index k = 0; k < cls_mask.size(); ++k) {
            cls_mask.data()[k] = dropout_rng->uniform01() < keep ? 1.0 / keep : 0.0;
        }
        cls_in.array() *= cls_mask.array();
    }

    const std::size_t fb = fc_base();
    Eigen::MatrixXd zf = cls_in * params_.mats[fb];
    zf.rowwise() += params_.mats[fb + 1].row(0);
    Eigen::MatrixXd af = zf.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd logits = af * params_.mats[fb + 2];
    logits.rowwise() += params_.mats[fb + 3].row(0);

    // weighted soft-max cross-entropy
    double weight_sum = 0.0;
    double loss = 0.0;
    Eigen::MatrixXd probs(logits.rows(), 2);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = std::max(logits(r, 0), logits(r, 1));
        const double z0 = std::exp(logits(r, 0) - m);
        const double z1 = std::exp(logits(r, 1) - m);
        probs(r, 0) = z0 / (z0 + z1);
        probs(r, 1) = z1 / (z0 + z1);
        const int y = labels[static_cast<std::size_t>(r)];
        const double w = class_weights(y);
        loss -= w * std::log(std::max(probs(r, y), 1e-300));
        weight_sum += w;
    }
    loss /= weight_sum;
    if (!std::isfinite(loss)) throw NonFiniteLoss("bilstm forward pass");
    if (grads == nullptr) return loss;

    *grads = params_.zeros_like();
    Eigen::MatrixXd dlogits = probs;
    for (Eigen::Index r = 0; r < dlogits.rows(); ++r) {
        const int y = labels[static_cast<std::size_t>(r)];
        dlogits(r, y) -= 1.0;
        dlogits.row(r) *= class_weights(y) / weight_sum;
    }
    grads->mats[fb + 2] = af.transpose() * dlogits;
    grads->mats[fb + 3].row(0) = dlogits.colwise().sum();
    Eigen::MatrixXd daf = dlogits * params_.mats[fb + 2].transpose();
    Eigen::MatrixXd dzf = daf.array() * zf.unaryExpr([](double v) { return elu_grad(v); }).array();
    grads->mats[fb] = cls_in.transpose() * dzf;
    grads->mats[fb + 1].row(0) = dzf.colwise().sum();
    Eigen::MatrixXd dcls = dzf * params_.mats[fb].transpose();
    if (training) dcls.array() *= cls_mask.array();

    // sequence gradients for the top layer: only the ending steps see the
    // classifier
    std::vector<Eigen::MatrixXd> dseq_top[2];
    for (int dir = 0; dir < 2; ++dir) {
        dseq_top[dir].assign(static_cast<std::size_t>(N),
                             Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), H));
    }
    dseq_top[0][static_cast<std::size_t>(N - 1)] = dcls.leftCols(H);
    dseq_top[1][0] = dcls.rightCols(H);

    std::vector<Eigen::MatrixXd> dseq_fwd = std::move(dseq_top[0]);
    std::vector<Eigen::MatrixXd> dseq_bwd = std::move(dseq_top[1]);
    for (int l = config_.layers - 1; l >= 0; --l) {
        LayerForward& lf = layers[static_cast<std::size_t>(l)];
        const Eigen::Index in_dim = lf.inputs[0].cols();
        std::vector<Eigen::MatrixXd> dxs(static_cast<std::size_t>(N),
                                         Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), in_dim));
        for (int dir = 0; dir < 2; ++dir) {
            const std::size_t base = layer_base(l, dir);
            backprop_direction(lf.inputs, params_.mats[base], params_.mats[base + 1], dir == 1,
                               lf.dir[dir], dir == 0 ? dseq_fwd : dseq_bwd, grads->mats[base],
                               grads->mats[base + 1], grads->mats[base + 2], dxs);
        }
        if (l > 0) {
            // dxs is the gradient on the dropped-out concat output of layer l-1
            dseq_fwd.assign(static_cast<std::size_t>(N),
                            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), H));
            dseq_bwd.assign(static_cast<std::size_t>(N),
                            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), H));
            LayerForward& below = layers[static_cast<std::size_t>(l - 1)];
            for (int t = 0; t < N; ++t) {
                Eigen::MatrixXd d = std::move(dxs[static_cast<std::size_t>(t)]);
                if (training) d.array() *= below.masks[static_cast<std::size_t>(t)].array();
                dseq_fwd[static_cast<std::size_t>(t)] = d.leftCols(H);
                dseq_bwd[static_cast<std::size_t>(t)] = d.rightCols(H);
            }
        }
    }
    return loss;
}

Eigen::MatrixXd BiLstmNet::predict_logits(const std::vector<Eigen::MatrixXd>& windows) const {
    const std::size_t B = windows.size();
    const int N = static_cast<int>(windows[0].rows());
    const int H = config_.hidden;

    std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(N));
    for (int t = 0; t < N; ++t) {
        xs[static_cast<std::size_t>(t)].resize(static_cast<Eigen::Index>(B), input_dim_);
        for (std::size_t w = 0; w < B; ++w) {
            xs[static_cast<std::size_t>(t)].row(static_cast<Eigen::Index>(w)) = windows[w].row(t);
        }
    }
    std::vector<Eigen::MatrixXd> current = std::move(xs);
    Eigen::MatrixXd ending_fwd, ending_bwd;
    for (int l = 0; l < config_.layers; ++l) {
        DirCache fwd, bwd;
        const std::size_t b0 = layer_base(l, 0);
        const std::size_t b1 = layer_base(l, 1);
        run_direction(current, params_.mats[b0], params_.mats[b0 + 1], params_.mats[b0 + 2], false,
                      fwd);
        run_direction(current, params_.mats[b1], params_.mats[b1 + 1], params_.mats[b1 + 2], true,
                      bwd);
        if (l + 1 < config_.layers) {
            std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(N));
            for (int t = 0; t < N; ++t) {
                Eigen::MatrixXd out(static_cast<Eigen::Index>(B), 2 * H);
                out.leftCols(H) = fwd.h[static_cast<std::size_t>(t)];
                out.rightCols(H) = bwd.h[static_cast<std::size_t>(t)];
                next[static_cast<std::size_t>(t)] = std::move(out);
            }
            current = std::move(next);
        } else {
            ending_fwd = fwd.h[static_cast<std::size_t>(N - 1)];
            ending_bwd = bwd.h[0];
        }
    }
    Eigen::MatrixXd cls_in(static_cast<Eigen::Index>(B), 2 * H);
    cls_in.leftCols(H) = ending_fwd;
    cls_in.rightCols(H) = ending_bwd;
    const std::size_t fb = fc_base();
    Eigen::MatrixXd zf = cls_in * params_.mats[fb];
    zf.rowwise() += params_.mats[fb + 1].row(0);
    Eigen::MatrixXd af = zf.unaryExpr([](double v) { return elu(v); });
    Eigen::MatrixXd logits = af * params_.mats[fb + 2];
    logits.rowwise() += params_.mats[fb + 3].row(0);
    return logits;
}

Eigen::VectorXd BiLstmNet::predict(const std::vector<Eigen::MatrixXd>& windows) const {
    const Eigen::MatrixXd logits = predict_logits(windows);
    Eigen::VectorXd p(logits.rows());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        p(r) = sigmoid(logits(r, 1) - logits(r, 0));  // soft-max over two classes
    }
    return p;
}

DiffFunction bind_bilstm_loss(BiLstmNet& net, const std::vector<Eigen::MatrixXd>& windows,
                              const std::vector<int>& labels,
                              const Eigen::Vector2d& class_weights) {
    DiffFunction f;
    f.value = [&net, &windows, &labels, class_weights](const Eigen::VectorXd& theta) {
        net.params().unflatten(theta);
        return net.loss_and_grad(windows, labels, class_weights, nullptr, nullptr);
    };
    f.gradient = [&net, &windows, &labels, class_weights](const Eigen::VectorXd& theta) {
        net.params().unflatten(theta);
        ParamPack grads;
        net.loss_and_grad(windows, labels, class_weights, &grads, nullptr);
        return grads.flatten();
    };
    return f;
}

Eigen::VectorXd BiLstmModel::predict_proba(const Eigen::MatrixXd& X) const {
    // one row = one flattened window (row-major time x features)
    const int N = net_->config().window;
    const int d = net_->input_dim();
    if (X.cols() != static_cast<Eigen::Index>(N) * d) {
        throw ArityMismatch(static_cast<std::size_t>(X.cols()),
                            static_cast<std::size_t>(N) * static_cast<std::size_t>(d));
    }
    std::vector<Eigen::MatrixXd> windows;
    windows.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        Eigen::MatrixXd w(N, d);
        for (int t = 0; t < N; ++t) {
            for (int j = 0; j < d; ++j) w(t, j) = X(r, static_cast<Eigen::Index>(t) * d + j);
        }
        windows.push_back(std::move(w));
    }
    return net_->predict(windows);
}

Eigen::VectorXd BiLstmModel::score_windows(const std::vector<Eigen::MatrixXd>& windows) const {
    return net_->predict(windows);
}

nlohmann::json BiLstmModel::params_json() const {
    nlohmann::json j;
    j["config"] = net_->config().to_json();
    j["input_dim"] = net_->input_dim();
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& m : net_->params().mats) {
        mats.push_back({{"rows", m.rows()},
                        {"cols", m.cols()},
                        {"data", std::vector<double>(m.data(), m.data() + m.size())}});
    }
    j["weights"] = std::move(mats);
    return j;
}

std::unique_ptr<BiLstmModel> train_bilstm(const WindowSet& data, const LstmConfig& config, Rng& rng,
                                          std::vector<EpochLogEntry>* log) {
    config.validate();
    require_both_classes(data.labels);
    const std::size_t n = data.windows.size();
    const int d = static_cast<int>(data.windows[0].cols());

    // stratified train/validation split
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (data.labels[i] ? pos : neg).push_back(i);
    if (pos.size() < 2 || neg.size() < 2) throw SingleClassError();
    Rng split_rng = rng.fork(11);
    split_rng.shuffle(pos);
    split_rng.shuffle(neg);
    std::vector<std::size_t> val_idx, train_idx;
    const auto take = [&](std::vector<std::size_t>& cls) {
        const std::size_t n_val =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                         config.validation_fraction * static_cast<double>(cls.size()))));
        for (std::size_t i = 0; i < cls.size(); ++i) {
            (i < n_val ? val_idx : train_idx).push_back(cls[i]);
        }
    };
    take(pos);
    take(neg);
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    // class weights from the training split
    Eigen::Vector2d class_weights(1.0, 1.0);
    if (config.class_weighted) {
        double n_pos = 0;
        for (std::size_t i : train_idx) n_pos += data.labels[i];
        const double n_tr = static_cast<double>(train_idx.size());
        class_weights(1) = n_tr / (2.0 * n_pos);
        class_weights(0) = n_tr / (2.0 * (n_tr - n_pos));
    }

    Rng init_rng = rng.fork(1);
    Rng dropout_rng = rng.fork(2);
    Rng shuffle_rng = rng.fork(3);
    auto net = std::make_unique<BiLstmNet>(d, config, init_rng);
    ParamPack velocity = net->params().zeros_like();
    ParamPack best_params = net->params();
    double best_auc = -1.0;
    int best_epoch = 0;
    int stale_epochs = 0;

    const std::size_t batch_size = config.batch_size > 0
                                       ? static_cast<std::size_t>(config.batch_size)
                                       : static_cast<std::size_t>(2 * config.window);

    std::vector<Eigen::MatrixXd> val_windows;
    std::vector<int> val_labels;
    for (std::size_t i : val_idx) {
        val_windows.push_back(data.windows[i]);
        val_labels.push_back(data.labels[i]);
    }

    int epochs_run = 0;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double lr = config.learning_rate * std::pow(config.lr_decay, epoch);
        shuffle_rng.shuffle(train_idx);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += batch_size) {
            const std::size_t stop = std::min(train_idx.size(), start + batch_size);
            std::vector<Eigen::MatrixXd> batch;
            std::vector<int> batch_labels;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(data.windows[train_idx[i]]);
                batch_labels.push_back(data.labels[train_idx[i]]);
            }
            ParamPack saved = net->params();
            net->params().axpy(config.momentum, velocity);
            ParamPack grads;
            const double loss =
                net->loss_and_grad(batch, batch_labels, class_weights, &grads, &dropout_rng);
            net->params() = std::move(saved);
            velocity.scale(config.momentum);
            velocity.axpy(-lr, grads);
            net->params().axpy(1.0, velocity);
            epoch_loss += loss;
            ++batches;
        }
        epochs_run = epoch + 1;

        const Eigen::VectorXd val_scores = net->predict(val_windows);
        const double val_auc =
            roc_auc(std::span<const double>(val_scores.data(), static_cast<std::size_t>(val_scores.size())),
                    val_labels)
                .auc;
        if (log != nullptr) {
            log->push_back({epoch + 1, batches ? epoch_loss / static_cast<double>(batches) : 0.0, val_auc});
        }
        if (val_auc > best_auc) {
            best_auc = val_auc;
            best_params = net->params();
            best_epoch = epoch + 1;
            stale_epochs = 0;
        } else if (++stale_epochs >= config.patience) {
            break;  // patience exhausted
        }
    }
    net->params() = std::move(best_params);

    auto model = std::make_unique<BiLstmModel>(std::move(net));
    model->metadata["seed"] = rng.seed();
    model->metadata["config"] = config.to_json();
    model->metadata["best_epoch"] = best_epoch;
    model->metadata["epochs_run"] = epochs_run;
    model->metadata["best_validation_auc"] = best_auc;
    return model;
}

}  // namespace sgame
