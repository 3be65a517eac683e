#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "sgame/rng.hpp"

namespace sgame {

// A set of trainable tensors with a flat-vector view; the deep models train
// on packs directly and expose the flat view to the gradient checker.
struct ParamPack {
    std::vector<Eigen::MatrixXd> mats;

    ParamPack zeros_like() const;
    std::size_t size() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& theta);

    void axpy(double a, const ParamPack& other);  // this += a * other
    void scale(double a);
};

struct DiffFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    Eigen::Index worst_index = -1;
    std::size_t checked = 0;
};

// Central finite differences against the analytic gradient at theta.
// Relative error per coordinate: |ga - gn| / max(|ga|, |gn|, 1e-6); the
// floor keeps zero-gradient coordinates (exactly what batch normalization
// does to a layer bias) from amplifying cancellation noise. With
// max_checks > 0 a seeded subset of coordinates is probed instead of all.
GradCheckReport grad_check(const DiffFunction& f, const Eigen::VectorXd& theta, double epsilon,
                           std::size_t max_checks = 0, Rng* sampler = nullptr);

}  // namespace sgame
