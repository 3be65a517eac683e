#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgame/feature_matrix.hpp"
#include "sgame/minute_table.hpp"

namespace sgame {

enum class PoolingMode { step_ahead, sensor_free };

PoolingMode pooling_mode_from_name(const std::string& name);
const char* pooling_mode_name(PoolingMode mode);

// Controls the pooled feature set: lag orders for device states, the academic
// calendar behind the break/midterm/final dummies, and baselines for the
// daily-percentage-of-baseline features.
struct PoolingConfig {
    std::string target_resource;
    std::vector<int> lags{1, 2, 3};
    std::vector<DateRange> break_ranges;
    std::vector<DateRange> midterm_ranges;
    std::vector<DateRange> final_ranges;
    std::map<std::string, std::array<double, 2>> baselines;  // optional; enables usage_frac
    std::vector<CivilDate> holidays;
};

// Builds the labeled feature matrix for one target resource. The label is the
// resource's state at the row's minute; lagged states, usage fractions, and
// engagement columns only use information from strictly earlier minutes, so
// nothing leaks the label. Rows whose lag window is not contiguous in time
// are skipped. In sensor_free mode every IoT-derived column (iot and resource
// tags) is excluded, leaving external weather, engagement, and dummies.
FeatureMatrix pool_features(const MinuteTable& table, const PoolingConfig& config,
                            PoolingMode mode);

}  // namespace sgame
