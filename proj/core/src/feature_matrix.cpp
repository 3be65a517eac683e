#include "sgame/feature_matrix.hpp"

#include <cmath>

#include "sgame/errors.hpp"

namespace sgame {

const char* tag_name(ColumnTag tag) {
    switch (tag) {
        case ColumnTag::iot: return "iot";
        case ColumnTag::external: return "external";
        case ColumnTag::engagement: return "engagement";
        case ColumnTag::dummy: return "dummy";
        case ColumnTag::resource: return "resource";
    }
    return "?";
}

ColumnTag tag_from_name(const std::string& name) {
    if (name == "iot") return ColumnTag::iot;
    if (name == "external") return ColumnTag::external;
    if (name == "engagement") return ColumnTag::engagement;
    if (name == "dummy") return ColumnTag::dummy;
    if (name == "resource") return ColumnTag::resource;
    throw ConfigError("unknown column tag '" + name + "'");
}

int FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].name == name) return static_cast<int>(j);
    }
    return -1;
}

void FeatureMatrix::validate() const {
    if (columns.size() != n_cols()) {
        throw SchemaError("column metadata length does not match matrix width");
    }
    if (!target.empty() && target.size() != n_rows()) {
        throw SchemaError("target length does not match row count");
    }
    for (int y : target) {
        if (y != 0 && y != 1) throw SchemaError("target values must be 0/1");
    }
    for (std::size_t j = 0; j < n_cols(); ++j) {
        const auto col = values.col(static_cast<Eigen::Index>(j));
        if (!col.allFinite()) throw SchemaError("column '" + columns[j].name + "' has non-finite values");
        if (columns[j].tag == ColumnTag::dummy) {
            for (Eigen::Index i = 0; i < col.size(); ++i) {
                if (col(i) != 0.0 && col(i) != 1.0) {
                    throw SchemaError("dummy column '" + columns[j].name + "' contains values outside {0,1}");
                }
            }
        }
    }
}

FeatureMatrix FeatureMatrix::select(const std::vector<int>& column_indices) const {
    FeatureMatrix out;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(column_indices.size()));
    for (std::size_t k = 0; k < column_indices.size(); ++k) {
        const int j = column_indices[k];
        if (j < 0 || static_cast<std::size_t>(j) >= n_cols()) {
            throw UnknownColumn("index " + std::to_string(j));
        }
        out.values.col(static_cast<Eigen::Index>(k)) = values.col(j);
        out.columns.push_back(columns[static_cast<std::size_t>(j)]);
    }
    out.target = target;
    return out;
}

FeatureMatrix FeatureMatrix::drop_tags(const std::vector<ColumnTag>& tags) const {
    std::vector<int> keep;
    for (std::size_t j = 0; j < n_cols(); ++j) {
        bool dropped = false;
        for (ColumnTag t : tags) dropped = dropped || columns[j].tag == t;
        if (!dropped) keep.push_back(static_cast<int>(j));
    }
    return select(keep);
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& X) const {
    if (X.cols() != mean.size()) {
        throw ArityMismatch(static_cast<std::size_t>(X.cols()), static_cast<std::size_t>(mean.size()));
    }
    Eigen::MatrixXd out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (!scaled[static_cast<std::size_t>(j)]) continue;
        out.col(j) = (X.col(j).array() - mean(j)) / std(j);
    }
    return out;
}

Eigen::MatrixXd Scaler::invert(const Eigen::MatrixXd& X) const {
    if (X.cols() != mean.size()) {
        throw ArityMismatch(static_cast<std::size_t>(X.cols()), static_cast<std::size_t>(mean.size()));
    }
    Eigen::MatrixXd out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (!scaled[static_cast<std::size_t>(j)]) continue;
        out.col(j) = X.col(j).array() * std(j) + mean(j);
    }
    return out;
}

std::pair<FeatureMatrix, Scaler> standardize(const FeatureMatrix& X) {
    const Eigen::Index n = X.values.rows();
    const Eigen::Index d = X.values.cols();
    Scaler scaler;
    scaler.mean = Eigen::VectorXd::Zero(d);
    scaler.std = Eigen::VectorXd::Ones(d);
    scaler.scaled.assign(static_cast<std::size_t>(d), 1);

    for (Eigen::Index j = 0; j < d; ++j) {
        if (X.columns[static_cast<std::size_t>(j)].tag == ColumnTag::dummy) {
            scaler.scaled[static_cast<std::size_t>(j)] = 0;
            continue;
        }
        const double mean = X.values.col(j).mean();
        const double var =
            (X.values.col(j).array() - mean).square().sum() / static_cast<double>(n);
        if (var <= 0.0) throw ConstantColumn(X.columns[static_cast<std::size_t>(j)].name);
        scaler.mean(j) = mean;
        scaler.std(j) = std::sqrt(var);
    }

    FeatureMatrix out = X;
    out.values = scaler.apply(X.values);
    return {std::move(out), std::move(scaler)};
}

}  // namespace sgame
