#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace sgame {

enum class ColumnTag { iot, external, engagement, dummy, resource };

const char* tag_name(ColumnTag tag);
ColumnTag tag_from_name(const std::string& name);

struct ColumnInfo {
    std::string name;
    ColumnTag tag = ColumnTag::external;
};

// The currency of the pipeline: a dense numeric matrix plus per-column
// metadata and an optional aligned binary target.
struct FeatureMatrix {
    Eigen::MatrixXd values;           // n_rows x n_cols
    std::vector<ColumnInfo> columns;  // size n_cols
    std::vector<int> target;          // empty, or size n_rows with values in {0,1}

    std::size_t n_rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t n_cols() const { return static_cast<std::size_t>(values.cols()); }

    int column_index(const std::string& name) const;  // -1 when missing

    // Checks metadata length, finiteness, dummy-column {0,1} contents, and
    // target alignment; throws on violation.
    void validate() const;

    // Column subset in the given order; target carried over.
    FeatureMatrix select(const std::vector<int>& column_indices) const;

    // Drops every column whose tag is in `tags`.
    FeatureMatrix drop_tags(const std::vector<ColumnTag>& tags) const;
};

// Per-column centering/scaling transform. Dummy-tagged columns pass through
// untouched so one-hot semantics survive.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
    std::vector<std::uint8_t> scaled;  // per column: 0 = pass-through

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& X) const;
};

// Population (1/n) standard deviation; throws ConstantColumn for a non-dummy
// zero-variance column.
std::pair<FeatureMatrix, Scaler> standardize(const FeatureMatrix& X);

}  // namespace sgame
