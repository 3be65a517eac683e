#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgame/rng.hpp"

namespace sgame {

// --- stratified k-fold ---------------------------------------------------

struct CvResult {
    std::vector<double> fold_scores;
    double mean = 0.0;
    std::vector<int> assignment;  // row -> fold
};

// Evaluates one fold: trains on `train_idx`, scores on `val_idx`.
using FoldEvaluator = std::function<double(const std::vector<std::size_t>& train_idx,
                                           const std::vector<std::size_t>& val_idx)>;

// Stratified on binary labels; every row is validated exactly once. Throws
// FoldTooSmall when a validation fold would lose a class.
CvResult kfold_cv(std::span<const int> labels, int k, const FoldEvaluator& evaluate, Rng& rng);

// Fold assignment only (rows dealt round-robin per class after a seeded
// shuffle); used by consumers that manage their own training loop.
std::vector<int> stratified_fold_assignment(std::span<const int> labels, int k, Rng& rng);

// Unstratified variant for regression-style losses.
std::vector<int> fold_assignment(std::size_t n, int k, Rng& rng);

// --- randomized hyperparameter search ----------------------------------------

struct UniformRange { double lo, hi; };
struct LogUniformRange { double lo, hi; };
struct IntegerRange { long long lo, hi; };  // inclusive
struct ChoiceRange { std::vector<nlohmann::json> values; };

using ParamRange = std::variant<UniformRange, LogUniformRange, IntegerRange, ChoiceRange>;
using SearchSpace = std::map<std::string, ParamRange>;

struct SearchTraceEntry {
    nlohmann::json config;
    double score;
};

struct SearchResult {
    nlohmann::json best_config;
    double best_score;
    std::vector<SearchTraceEntry> trace;
};

// Draws `budget` configurations, evaluates each, returns the argmax. The
// trace records every (config, score) pair in draw order.
SearchResult random_search(const SearchSpace& space, int budget,
                           const std::function<double(const nlohmann::json&)>& objective,
                           Rng& rng);

// Parses {"name": {"type": "uniform"|"log_uniform"|"int"|"choice", ...}}.
SearchSpace parse_search_space(const nlohmann::json& doc);

}  // namespace sgame
