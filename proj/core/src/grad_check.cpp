#include "sgame/grad_check.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sgame {

ParamPack ParamPack::zeros_like() const {
    ParamPack out;
    out.mats.reserve(mats.size());
    for (const auto& m : mats) out.mats.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
    return out;
}

std::size_t ParamPack::size() const {
    std::size_t n = 0;
    for (const auto& m : mats) n += static_cast<std::size_t>(m.size());
    return n;
}

Eigen::VectorXd ParamPack::flatten() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
    Eigen::Index at = 0;
    for (const auto& m : mats) {
        v.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    }
    return v;
}

void ParamPack::unflatten(const Eigen::VectorXd& theta) {
    if (theta.size() != static_cast<Eigen::Index>(size())) {
        throw std::invalid_argument("flat parameter length mismatch");
    }
    Eigen::Index at = 0;
    for (auto& m : mats) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = theta.segment(at, m.size());
        at += m.size();
    }
}

void ParamPack::axpy(double a, const ParamPack& other) {
    for (std::size_t i = 0; i < mats.size(); ++i) mats[i] += a * other.mats[i];
}

void ParamPack::scale(double a) {
    for (auto& m : mats) m *= a;
}

GradCheckReport grad_check(const DiffFunction& f, const Eigen::VectorXd& theta, double epsilon,
                           std::size_t max_checks, Rng* sampler) {
    if (epsilon < 1e-7 || epsilon > 1e-3) {
        throw std::invalid_argument("epsilon outside [1e-7, 1e-3]");
    }
    const Eigen::VectorXd analytic = f.gradient(theta);

    std::vector<Eigen::Index> coords;
    if (max_checks == 0 || max_checks >= static_cast<std::size_t>(theta.size())) {
        coords.resize(static_cast<std::size_t>(theta.size()));
        std::iota(coords.begin(), coords.end(), 0);
    } else {
        Rng fallback(12345);
        Rng& rng = sampler ? *sampler : fallback;
        for (std::size_t k = 0; k < max_checks; ++k) {
            coords.push_back(static_cast<Eigen::Index>(
                rng.uniform_index(static_cast<std::size_t>(theta.size()))));
        }
    }

    GradCheckReport report;
    Eigen::VectorXd probe = theta;
    for (Eigen::Index i : coords) {
        const double orig = probe(i);
        probe(i) = orig + epsilon;
        const double up = f.value(probe);
        probe(i) = orig - epsilon;
        const double down = f.value(probe);
        probe(i) = orig;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::fabs(numeric), std::fabs(analytic(i)), 1e-6});
        const double rel = std::fabs(numeric - analytic(i)) / denom;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
        ++report.checked;
    }
    return report;
}

}  // namespace sgame
