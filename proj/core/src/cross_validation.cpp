#include "sgame/cross_validation.hpp"

#include <cmath>

#include "sgame/errors.hpp"

namespace sgame {

std::vector<int> stratified_fold_assignment(std::span<const int> labels, int k, Rng& rng) {
    if (k < 2) throw FoldTooSmall("k must be at least 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k)) {
        throw FoldTooSmall("a class has fewer rows than folds (" + std::to_string(pos.size()) +
                           " positive, " + std::to_string(neg.size()) + " negative, k = " +
                           std::to_string(k) + ")");
    }
    std::vector<int> assignment(labels.size(), -1);
    for (auto* cls : {&pos, &neg}) {
        rng.shuffle(*cls);
        for (std::size_t i = 0; i < cls->size(); ++i) {
            assignment[(*cls)[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    return assignment;
}

std::vector<int> fold_assignment(std::size_t n, int k, Rng& rng) {
    if (k < 2) throw FoldTooSmall("k must be at least 2");
    if (n < static_cast<std::size_t>(k)) throw FoldTooSmall("fewer rows than folds");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<int> assignment(n);
    for (std::size_t i = 0; i < n; ++i) {
        assignment[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return assignment;
}

CvResult kfold_cv(std::span<const int> labels, int k, const FoldEvaluator& evaluate, Rng& rng) {
    CvResult res;
    res.assignment = stratified_fold_assignment(labels, k, rng);
    res.fold_scores.reserve(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_idx, val_idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            (res.assignment[i] == fold ? val_idx : train_idx).push_back(i);
        }
        const double score = evaluate(train_idx, val_idx);
        res.fold_scores.push_back(score);
        total += score;
    }
    res.mean = total / static_cast<double>(k);
    return res;
}

namespace {

nlohmann::json draw_param(const ParamRange& range, Rng& rng) {
    if (const auto* u = std::get_if<UniformRange>(&range)) {
        return rng.uniform(u->lo, u->hi);
    }
    if (const auto* lg = std::get_if<LogUniformRange>(&range)) {
        return std::exp(rng.uniform(std::log(lg->lo), std::log(lg->hi)));
    }
    if (const auto* iv = std::get_if<IntegerRange>(&range)) {
        const auto span = static_cast<std::size_t>(iv->hi - iv->lo + 1);
        return iv->lo + static_cast<long long>(rng.uniform_index(span));
    }
    const auto& choice = std::get<ChoiceRange>(range);
    if (choice.values.empty()) throw EmptySpace();
    return choice.values[rng.uniform_index(choice.values.size())];
}

}  // namespace

SearchResult random_search(const SearchSpace& space, int budget,
                           const std::function<double(const nlohmann::json&)>& objective,
                           Rng& rng) {
    if (space.empty()) throw EmptySpace();
    if (budget < 1) throw Error("search budget must be at least 1");
    SearchResult res;
    res.best_score = -std::numeric_limits<double>::infinity();
    for (int draw = 0; draw < budget; ++draw) {
        nlohmann::json config = nlohmann::json::object();
        for (const auto& [name, range] : space) config[name] = draw_param(range, rng);
        const double score = objective(config);
        res.trace.push_back({config, score});
        if (score > res.best_score) {
            res.best_score = score;
            res.best_config = config;
        }
    }
    return res;
}

SearchSpace parse_search_space(const nlohmann::json& doc) {
    SearchSpace space;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const nlohmann::json& spec = it.value();
        const std::string type = spec.at("type").get<std::string>();
        if (type == "uniform") {
            space.emplace(it.key(), UniformRange{spec.at("lo").get<double>(), spec.at("hi").get<double>()});
        } else if (type == "log_uniform") {
            space.emplace(it.key(), LogUniformRange{spec.at("lo").get<double>(), spec.at("hi").get<double>()});
        } else if (type == "int") {
            space.emplace(it.key(), IntegerRange{spec.at("lo").get<long long>(), spec.at("hi").get<long long>()});
        } else if (type == "choice") {
            ChoiceRange c;
            for (const auto& v : spec.at("values")) c.values.push_back(v);
            space.emplace(it.key(), std::move(c));
        } else {
            throw ConfigError("unknown hyperparameter range type '" + type + "'");
        }
    }
    return space;
}

}  // namespace sgame
