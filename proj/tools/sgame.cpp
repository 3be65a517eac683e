// sgame — occupant energy social-game analytics CLI.
//
// Subcommands: simulate, ingest, baseline, features, train, evaluate,
// explain, generate, report. Every run is determined by (config, input
// files); the effective config is written next to the outputs.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sgame/csv.hpp"
#include "sgame/errors.hpp"
#include "sgame/lstm.hpp"
#include "sgame/metrics.hpp"
#include "sgame/minute_table.hpp"
#include "sgame/mlp.hpp"
#include "sgame/model.hpp"
#include "sgame/mutual_info.hpp"
#include "sgame/pipeline.hpp"
#include "sgame/pooling.hpp"
#include "sgame/simulate.hpp"
#include "sgame/smote.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    long long seed_override = -1;
    std::string mode_override;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "path to the JSON run config");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed_override, "global seed override");
    cmd->add_option("--mode", args.mode_override, "step_ahead|sensor_free override");
}

nlohmann::json load_config(const CommonArgs& args) {
    nlohmann::json config =
        args.config_path.empty() ? nlohmann::json::object() : sgame::read_json_file(args.config_path);
    if (args.seed_override >= 0) {
        config["seed"] = static_cast<std::uint64_t>(args.seed_override);
    } else if (const char* env = std::getenv("SGAME_SEED"); env != nullptr && !config.contains("seed")) {
        config["seed"] = static_cast<std::uint64_t>(std::stoull(env));
    }
    if (!args.mode_override.empty()) {
        config["modes"] = {args.mode_override};
        config["mode"] = args.mode_override;
    }
    return config;
}

void write_table_file(const std::string& path, const sgame::MinuteTable& table) {
    std::ostringstream out;
    sgame::write_minutes(out, table);
    sgame::write_text_file(path, out.str());
}

int cmd_simulate(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::ensure_directory(args.out_dir);
    sgame::SimConfig sim = sgame::parse_sim_config(config);
    if (config.contains("seed")) sim.seed = config["seed"].get<std::uint64_t>();
    sgame::Rng rng(sim.seed);
    sgame::MinuteTable table =
        sim.profiles.size() == 1
            ? sgame::simulate_occupant(sim.profiles[0], sim.exogenous, sim.horizon_minutes,
                                       sim.game, rng)
            : sgame::simulate_cohort(sim.profiles, sim.exogenous, sim.horizon_minutes, sim.game,
                                     rng);
    write_table_file(args.out_dir + "/table.csv", table);
    sgame::write_text_file(args.out_dir + "/effective_config.json", config.dump(2) + "\n");
    std::cout << "wrote " << table.n_rows() << " rows for " << table.occupant_spans().size()
              << " occupant(s) to " << args.out_dir << "/table.csv\n";
    return 0;
}

int cmd_ingest(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::ensure_directory(args.out_dir);
    sgame::MinuteTable table = sgame::load_table_from_config(config);
    table.validate();
    write_table_file(args.out_dir + "/table.csv", table);
    sgame::write_text_file(args.out_dir + "/effective_config.json", config.dump(2) + "\n");
    std::cout << "ingested " << table.n_rows() << " rows, " << table.resources.size()
              << " resource(s)\n";
    return 0;
}

int cmd_baseline(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::ensure_directory(args.out_dir);
    sgame::MinuteTable table = sgame::load_table_from_config(config);
    std::vector<sgame::CivilDate> holidays;
    if (config.contains("holidays")) {
        for (const auto& h : config.at("holidays")) {
            holidays.push_back(sgame::parse_date(h.get<std::string>()));
        }
    }
    const auto& range_doc = config.at("pre_game_range");
    sgame::DateRange range{sgame::parse_date(range_doc.at(0).get<std::string>()),
                           sgame::parse_date(range_doc.at(1).get<std::string>())};
    const auto baselines = sgame::compute_baselines(table, range, holidays);

    nlohmann::json doc;
    for (const auto& [occ, by_resource] : baselines) {
        for (const auto& [res, b] : by_resource) {
            doc[occ][res] = {b[0], b[1]};
        }
    }
    nlohmann::json cohort;
    for (const auto& [res, b] : sgame::mean_baselines(baselines)) cohort[res] = {b[0], b[1]};
    nlohmann::json out{{"per_occupant", doc}, {"cohort_mean", cohort}};
    sgame::write_text_file(args.out_dir + "/baselines.json", out.dump(2) + "\n");
    sgame::write_text_file(args.out_dir + "/effective_config.json", config.dump(2) + "\n");
    std::cout << "baselines for " << baselines.size() << " occupant(s) written\n";
    return 0;
}

int cmd_features(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::ensure_directory(args.out_dir);
    sgame::MinuteTable table = sgame::load_table_from_config(config);
    const std::string resource = config.at("resource").get<std::string>();
    const auto mode = sgame::pooling_mode_from_name(
        config.value("mode", std::string("step_ahead")));
    const sgame::PoolingConfig pc = sgame::parse_pooling_config(
        config.value("pooling", nlohmann::json::object()), table, resource);
    sgame::FeatureMatrix X = sgame::drop_constant_columns(sgame::pool_features(table, pc, mode));

    if (config.contains("select_k")) {
        const std::size_t k =
            std::min<std::size_t>(config.at("select_k").get<std::size_t>(), X.n_cols());
        const auto idx = sgame::mrmr_select(X, X.target, k);
        X = X.select(idx);
        std::string listing;
        for (const auto& c : X.columns) listing += c.name + "\n";
        sgame::write_text_file(args.out_dir + "/selected_features.txt", listing);
    }
    std::ostringstream out;
    sgame::write_features(out, X);
    sgame::write_text_file(args.out_dir + "/features.csv", out.str());
    sgame::write_text_file(args.out_dir + "/effective_config.json", config.dump(2) + "\n");
    std::cout << "pooled " << X.n_rows() << " rows x " << X.n_cols() << " features\n";
    return 0;
}

sgame::FeatureMatrix load_features_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sgame::Error("cannot open features file '" + path + "'");
    return sgame::read_features(in);
}

int cmd_train(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::ensure_directory(args.out_dir);
    sgame::FeatureMatrix X =
        sgame::drop_constant_columns(load_features_file(config.at("features").get<std::string>()));
    if (X.target.empty()) throw sgame::Error("features file has no __target__ column");
    const std::string kind = config.value("kind", std::string("logistic"));
    const std::uint64_t seed = config.value("seed", 0ULL);
    sgame::Rng rng(seed);

    auto [X_std, scaler] = sgame::standardize(X);
    Eigen::MatrixXd Xfit = X_std.values;
    std::vector<int> yfit = X_std.target;
    if (config.value("smote", true) && kind != "bilstm") {
        sgame::Rng smote_rng = rng.fork(91);
        auto [Xb, yb] = sgame::smote(X_std, X_std.target, config.value("smote_k", 5), smote_rng);
        Xfit = std::move(Xb.values);
        yfit = std::move(yb);
    }

    std::vector<sgame::EpochLogEntry> log;
    nlohmann::json model_doc;
    if (kind == "mlp") {
        auto model = sgame::train_mlp(Xfit, yfit, sgame::MlpConfig::from_json(config), rng, &log);
        for (const auto& c : X.columns) model->feature_names.push_back(c.name);
        model_doc = model->to_json();
    } else if (kind == "bilstm") {
        const sgame::LstmConfig lc = sgame::LstmConfig::from_json(config);
        const sgame::WindowSet windows = sgame::make_windows(X_std.values, X_std.target, lc.window);
        auto model = sgame::train_bilstm(windows, lc, rng, &log);
        for (const auto& c : X.columns) model->feature_names.push_back(c.name);
        model_doc = model->to_json();
    } else {
        auto model = sgame::train_baseline_classifier(sgame::learner_kind_from_name(kind), Xfit,
                                                      yfit, sgame::LearnerConfig::from_json(config),
                                                      rng);
        for (const auto& c : X.columns) model->feature_names.push_back(c.name);
        model_doc = model->to_json();
    }
    sgame::write_text_file(args.out_dir + "/model.json", model_doc.dump() + "\n");
    std::ostringstream metrics;
    metrics << "epoch,loss,validation_auc\n";
    for (const auto& e : log) {
        metrics << e.epoch << ',' << sgame::format_double(e.train_loss) << ','
                << sgame::format_double(e.validation_auc) << '\n';
    }
    sgame::write_text_file(args.out_dir + "/metrics.csv", metrics.str());
    sgame::write_text_file(args.out_dir + "/effective_config.json", config.dump(2) + "\n");
    std::cout << "trained " << kind << " on " << X.n_rows() << " rows\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::ensure_directory(args.out_dir);
    sgame::FeatureMatrix X =
        sgame::drop_constant_columns(load_features_file(config.at("features").get<std::string>()));
    if (X.target.empty()) throw sgame::Error("features file has no __target__ column");
    auto [X_std, scaler] = sgame::standardize(X);

    const nlohmann::json model_doc = sgame::read_json_file(config.at("model").get<std::string>());
    auto model = sgame::model_from_json(model_doc);
    const Eigen::VectorXd scores = model->predict_proba(X_std.values);
    const sgame::RocResult roc = sgame::roc_auc(
        std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
        X_std.target);

    std::ostringstream roc_csv;
    roc_csv << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : roc.points) {
        roc_csv << sgame::format_double(fpr) << ',' << sgame::format_double(tpr) << '\n';
    }
    sgame::write_text_file(args.out_dir + "/roc.csv", roc_csv.str());
    nlohmann::json summary{{"auc", roc.auc},
                           {"n_pos", roc.n_pos},
                           {"n_neg", roc.n_neg},
                           {"kind", model->kind()}};
    sgame::write_text_file(args.out_dir + "/evaluation.json", summary.dump(2) + "\n");
    sgame::write_text_file(args.out_dir + "/effective_config.json", config.dump(2) + "\n");
    std::cout << "auc " << roc.auc << " on " << X.n_rows() << " rows\n";
    return 0;
}

int cmd_report(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    const sgame::PipelineReport report = sgame::run_pipeline(config, args.out_dir);
    std::cout << "auc table with " << report.rows.size() << " row(s) under " << args.out_dir
              << "\n";
    return 0;
}

int cmd_explain(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::run_explain(config, args.out_dir);
    std::cout << "explainability artifacts written under " << args.out_dir << "\n";
    return 0;
}

int cmd_generate(const CommonArgs& args) {
    nlohmann::json config = load_config(args);
    sgame::run_generate(config, args.out_dir);
    std::cout << "generative-model artifacts written under " << args.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occupant energy social-game analytics"};
    app.require_subcommand(1);

    CommonArgs args;
    std::map<std::string, std::function<int(const CommonArgs&)>> handlers{
        {"simulate", cmd_simulate}, {"ingest", cmd_ingest},     {"baseline", cmd_baseline},
        {"features", cmd_features}, {"train", cmd_train},       {"evaluate", cmd_evaluate},
        {"explain", cmd_explain},   {"generate", cmd_generate}, {"report", cmd_report}};
    const std::map<std::string, std::string> blurbs{
        {"simulate", "simulate a cohort with known ground-truth utilities"},
        {"ingest", "parse, validate and canonicalize a minute table"},
        {"baseline", "compute weekday/weekend usage baselines"},
        {"features", "pool (and optionally select) features"},
        {"train", "train one learner on a features file"},
        {"evaluate", "score a trained model on a features file"},
        {"explain", "stratification, dependence graphs, Granger tests"},
        {"generate", "train the generative model and score DTW fidelity"},
        {"report", "end-to-end pipeline producing the AUC table"}};

    std::string chosen;
    for (const auto& [name, fn] : handlers) {
        CLI::App* cmd = app.add_subcommand(name, blurbs.at(name));
        add_common(cmd, args);
        cmd->callback([&chosen, name = name]() { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        return handlers.at(chosen)(args);
    } catch (const sgame::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
