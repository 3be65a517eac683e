#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "sgame/minute_table.hpp"
#include "sgame/pooling.hpp"

namespace sgame {

// FNV-1a over the canonical dump; stamps every artifact a run writes.
std::uint64_t config_hash(const nlohmann::json& config);

// Feature-matrix round trip: header cells are "tag:name", the label column is
// "__target__".
void write_features(std::ostream& out, const FeatureMatrix& X, char delimiter = ',');
FeatureMatrix read_features(std::istream& in, char delimiter = ',');

struct AucRow {
    std::string learner;
    std::string resource;
    std::string mode;
    double auc = 0.0;
};

struct PipelineReport {
    std::vector<AucRow> rows;
    std::vector<std::string> artifacts;  // files written under out_dir
};

// ingest -> pool (mode-filtered) -> mRMR -> standardize -> (SMOTE for
// non-sequence learners) -> train -> evaluate on the held-out period.
// Writes auc_table.csv in the learner x resource x mode layout plus the
// effective config and a hash-stamped summary. Rerunning with the same
// config and inputs reproduces every artifact byte for byte.
PipelineReport run_pipeline(const nlohmann::json& config, const std::string& out_dir);

// Occupant stratification + per-class dependence graph and Granger table.
void run_explain(const nlohmann::json& config, const std::string& out_dir);

// Trains the generative model, samples rows, and scores column-wise DTW with
// the permutation test.
void run_generate(const nlohmann::json& config, const std::string& out_dir);

// --- shared helpers ----------------------------------------------------------

MinuteTable load_table_from_config(const nlohmann::json& config);

// Non-dummy zero-variance columns cannot be standardized; every consumer
// drops them right after pooling.
FeatureMatrix drop_constant_columns(const FeatureMatrix& X);
PoolingConfig parse_pooling_config(const nlohmann::json& doc, const MinuteTable& table,
                                   const std::string& target_resource);
void write_text_file(const std::string& path, const std::string& content);
nlohmann::json read_json_file(const std::string& path);
void ensure_directory(const std::string& path);

}  // namespace sgame
