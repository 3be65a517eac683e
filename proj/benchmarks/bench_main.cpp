#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <vector>

#include "sgame/dtw.hpp"
#include "sgame/lasso.hpp"
#include "sgame/linear_models.hpp"
#include "sgame/lstm.hpp"
#include "sgame/metrics.hpp"
#include "sgame/mutual_info.hpp"
#include "sgame/rng.hpp"
#include "sgame/smote.hpp"

namespace {

using namespace sgame;

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> s(n);
    for (double& v : s) v = rng.normal();
    return s;
}

void BM_dtw(benchmark::State& state) {
    const auto a = random_series(static_cast<std::size_t>(state.range(0)), 1);
    const auto b = random_series(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dtw(a, b));
    }
}
BENCHMARK(BM_dtw)->Arg(256)->Arg(1024);

void BM_lasso_cd(benchmark::State& state) {
    Rng rng(3);
    const int n = 2000, d = static_cast<int>(state.range(0));
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
        y(i) = X(i, 0) - 0.5 * X(i, d - 1) + rng.normal();
    }
    for (int j = 0; j < d; ++j) X.col(j).array() -= X.col(j).mean();
    y.array() -= y.mean();
    for (auto _ : state) {
        LassoProblem p{y, X, 0.05, 1e-8, 2000};
        benchmark::DoNotOptimize(lasso_cd(p).beta);
    }
}
BENCHMARK(BM_lasso_cd)->Arg(4)->Arg(16);

void BM_mutual_information(benchmark::State& state) {
    const auto x = random_series(static_cast<std::size_t>(state.range(0)), 4);
    const auto y = random_series(static_cast<std::size_t>(state.range(0)), 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mutual_information(x, y, 10));
    }
}
BENCHMARK(BM_mutual_information)->Arg(10000)->Arg(100000);

void BM_roc_auc(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = rng.uniform01();
        labels[i] = rng.bernoulli(0.3);
    }
    labels[0] = 1;
    labels[1] = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(roc_auc(scores, labels).auc);
    }
}
BENCHMARK(BM_roc_auc)->Arg(10000)->Arg(100000);

void BM_smote(benchmark::State& state) {
    Rng rng(7);
    const std::size_t n_min = 50, n_maj = static_cast<std::size_t>(state.range(0));
    FeatureMatrix X;
    X.columns = {{"a", ColumnTag::external}, {"b", ColumnTag::external}};
    X.values.resize(static_cast<Eigen::Index>(n_min + n_maj), 2);
    std::vector<int> y;
    for (std::size_t i = 0; i < n_maj + n_min; ++i) {
        X.values(static_cast<Eigen::Index>(i), 0) = rng.normal();
        X.values(static_cast<Eigen::Index>(i), 1) = rng.normal();
        y.push_back(i >= n_maj ? 1 : 0);
    }
    for (auto _ : state) {
        Rng srng(8);
        benchmark::DoNotOptimize(smote(X, y, 5, srng).second);
    }
}
BENCHMARK(BM_smote)->Arg(1000)->Arg(5000);

void BM_logistic_fit(benchmark::State& state) {
    Rng rng(9);
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd X(n, 8);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 8; ++j) X(i, j) = rng.normal();
        y[static_cast<std::size_t>(i)] = rng.uniform01() < 1.0 / (1.0 + std::exp(-X(i, 0))) ? 1 : 0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_logistic(X, y, 1e-5, 500).w);
    }
}
BENCHMARK(BM_logistic_fit)->Arg(5000);

void BM_bilstm_step(benchmark::State& state) {
    LstmConfig cfg;
    cfg.window = static_cast<int>(state.range(0));
    cfg.layers = 2;
    cfg.hidden = 16;
    cfg.fc = 8;
    cfg.dropout = 0.0;
    Rng init(10);
    BiLstmNet net(6, cfg, init);
    Rng rng(11);
    std::vector<Eigen::MatrixXd> windows;
    std::vector<int> labels;
    for (int w = 0; w < 32; ++w) {
        Eigen::MatrixXd m(cfg.window, 6);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
        windows.push_back(std::move(m));
        labels.push_back(w % 2);
    }
    const Eigen::Vector2d weights(1.0, 1.0);
    for (auto _ : state) {
        ParamPack grads;
        benchmark::DoNotOptimize(net.loss_and_grad(windows, labels, weights, &grads, nullptr));
    }
}
BENCHMARK(BM_bilstm_step)->Arg(30)->Arg(120);

}  // namespace

BENCHMARK_MAIN();
