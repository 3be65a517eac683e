#include "sgame/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgame/cross_validation.hpp"
#include "sgame/csv.hpp"
#include "sgame/dtw.hpp"
#include "sgame/errors.hpp"
#include "sgame/granger.hpp"
#include "sgame/lasso.hpp"
#include "sgame/lstm.hpp"
#include "sgame/metrics.hpp"
#include "sgame/mlp.hpp"
#include "sgame/mutual_info.hpp"
#include "sgame/simulate.hpp"
#include "sgame/smote.hpp"
#include "sgame/stratify.hpp"
#include "sgame/vae.hpp"

namespace sgame {

std::uint64_t config_hash(const nlohmann::json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    nlohmann::json doc;
    in >> doc;
    return doc;
}

void ensure_directory(const std::string& path) {
    std::filesystem::create_directories(path);
}

void write_features(std::ostream& out, const FeatureMatrix& X, char delimiter) {
    std::vector<std::string> header;
    for (const auto& c : X.columns) header.push_back(std::string(tag_name(c.tag)) + ":" + c.name);
    if (!X.target.empty()) header.push_back("__target__");
    out << join(header, delimiter) << '\n';
    std::vector<std::string> fields;
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        fields.clear();
        for (std::size_t j = 0; j < X.n_cols(); ++j) {
            fields.push_back(format_double(
                X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
        if (!X.target.empty()) fields.push_back(std::to_string(X.target[i]));
        out << join(fields, delimiter) << '\n';
    }
}

FeatureMatrix read_features(std::istream& in, char delimiter) {
    std::string line;
    if (!read_csv_line(in, line)) throw SchemaError("missing feature header");
    const auto header = split_delimited(line, delimiter);
    FeatureMatrix X;
    int target_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "__target__") {
            target_col = static_cast<int>(j);
            continue;
        }
        const auto pos = header[j].find(':');
        if (pos == std::string::npos) throw SchemaError("feature header cells are tag:name");
        X.columns.push_back({header[j].substr(pos + 1), tag_from_name(header[j].substr(0, pos))});
    }
    std::vector<std::vector<double>> rows;
    std::vector<int> target;
    std::size_t line_no = 1;
    while (read_csv_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_delimited(line, delimiter);
        if (fields.size() != header.size()) {
            throw RowParseError(line_no, "", "wrong field count");
        }
        std::vector<double> row;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (static_cast<int>(j) == target_col) {
                target.push_back(static_cast<int>(parse_int(fields[j])));
            } else {
                try {
                    row.push_back(parse_double(fields[j]));
                } catch (const std::exception& e) {
                    throw RowParseError(line_no, header[j], e.what());
                }
            }
        }
        rows.push_back(std::move(row));
    }
    X.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(X.columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < X.columns.size(); ++j) {
            X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    X.target = std::move(target);
    return X;
}

MinuteTable load_table_from_config(const nlohmann::json& config) {
    const nlohmann::json& data = config.at("data");
    if (data.contains("simulate")) {
        const SimConfig sim = parse_sim_config(data.at("simulate"));
        Rng rng(sim.seed);
        if (sim.profiles.size() == 1) {
            return simulate_occupant(sim.profiles[0], sim.exogenous, sim.horizon_minutes, sim.game,
                                     rng);
        }
        return simulate_cohort(sim.profiles, sim.exogenous, sim.horizon_minutes, sim.game, rng);
    }
    if (!data.contains("table")) throw ConfigError("data needs either 'table' or 'simulate'");
    std::string path = data.at("table").get<std::string>();
    if (const char* env = std::getenv("SGAME_DATA_DIR"); env != nullptr && !path.empty() &&
                                                         path.front() != '/') {
        path = std::string(env) + "/" + path;
    }
    IngestSchema schema;
    if (data.contains("delimiter")) {
        schema.delimiter = data.at("delimiter").get<std::string>().at(0);
    }
    if (data.contains("schema")) {
        for (auto it = data.at("schema").begin(); it != data.at("schema").end(); ++it) {
            schema.columns[it.key()] = it.value().get<std::string>();
        }
    }
    schema.utc_offset_minutes = data.value("utc_offset_minutes", 0);
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file '" + path + "'");
    return ingest_minutes(in, schema);
}

PoolingConfig parse_pooling_config(const nlohmann::json& doc, const MinuteTable& table,
                                   const std::string& target_resource) {
    PoolingConfig pc;
    pc.target_resource = target_resource;
    if (doc.contains("lags")) pc.lags = doc.at("lags").get<std::vector<int>>();
    auto ranges = [&](const char* key) {
        std::vector<DateRange> out;
        if (doc.contains(key)) {
            for (const auto& r : doc.at(key)) {
                out.push_back({parse_date(r.at(0).get<std::string>()),
                               parse_date(r.at(1).get<std::string>())});
            }
        }
        return out;
    };
    pc.break_ranges = ranges("break_ranges");
    pc.midterm_ranges = ranges("midterm_ranges");
    pc.final_ranges = ranges("final_ranges");
    if (doc.contains("holidays")) {
        for (const auto& h : doc.at("holidays")) pc.holidays.push_back(parse_date(h.get<std::string>()));
    }
    if (doc.contains("baselines")) {
        for (auto it = doc.at("baselines").begin(); it != doc.at("baselines").end(); ++it) {
            if (table.resource_index(it.key()) < 0) throw UnknownColumn(it.key());
            pc.baselines[it.key()] = {it.value().at(0).get<double>(),
                                      it.value().at(1).get<double>()};
        }
    }
    return pc;
}

FeatureMatrix drop_constant_columns(const FeatureMatrix& X) {
    std::vector<int> keep;
    for (std::size_t j = 0; j < X.n_cols(); ++j) {
        const auto col = X.values.col(static_cast<Eigen::Index>(j));
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum();
        if (X.columns[j].tag == ColumnTag::dummy || var > 0.0) {
            keep.push_back(static_cast<int>(j));
        }
    }
    return X.select(keep);
}

namespace {

DateRange parse_date_range(const nlohmann::json& j) {
    return {parse_date(j.at(0).get<std::string>()), parse_date(j.at(1).get<std::string>())};
}

std::vector<int> indices_by_names(const FeatureMatrix& X, const std::vector<std::string>& names) {
    std::vector<int> idx;
    for (const auto& name : names) {
        const int j = X.column_index(name);
        if (j < 0) throw UnknownColumn(name);
        idx.push_back(j);
    }
    return idx;
}

MinuteTable occupant_subtable(const MinuteTable& table, std::size_t first, std::size_t last) {
    MinuteTable out;
    out.resources = table.resources;
    out.present = table.present;
    out.rows.assign(table.rows.begin() + static_cast<std::ptrdiff_t>(first),
                    table.rows.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

// per-occupant windows over the selected+standardized feature rows
WindowSet build_windows(const MinuteTable& table, const PoolingConfig& pc, PoolingMode mode,
                        const std::vector<std::string>& selected_names, const Scaler& scaler,
                        int window) {
    WindowSet all;
    for (const auto& [first, last] : table.occupant_spans()) {
        const MinuteTable sub = occupant_subtable(table, first, last);
        FeatureMatrix pooled = pool_features(sub, pc, mode);
        FeatureMatrix sel = pooled.select(indices_by_names(pooled, selected_names));
        sel.values = scaler.apply(sel.values);
        if (sel.values.rows() < window) continue;
        WindowSet w = make_windows(sel.values, sel.target, window);
        for (auto& m : w.windows) all.windows.push_back(std::move(m));
        all.labels.insert(all.labels.end(), w.labels.begin(), w.labels.end());
    }
    if (all.windows.empty()) throw TooFewRows(0, static_cast<std::size_t>(window));
    return all;
}

std::string stage(const std::string& name) { return "[stage " + name + "] "; }

void write_run_stamp(const std::string& out_dir, const std::string& command,
                     const nlohmann::json& config, std::vector<std::string>* artifacts) {
    nlohmann::json effective = config;
    write_text_file(out_dir + "/effective_config.json", effective.dump(2) + "\n");
    nlohmann::json summary;
    summary["command"] = command;
    summary["config_hash"] = config_hash(config);
    summary["seed"] = config.value("seed", 0ULL);
    write_text_file(out_dir + "/run_summary.json", summary.dump(2) + "\n");
    if (artifacts != nullptr) {
        artifacts->push_back(out_dir + "/effective_config.json");
        artifacts->push_back(out_dir + "/run_summary.json");
    }
}

}  // namespace

PipelineReport run_pipeline(const nlohmann::json& config, const std::string& out_dir) {
    ensure_directory(out_dir);
    PipelineReport report;

    MinuteTable table;
    try {
        table = load_table_from_config(config);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(stage("ingest") + e.what());
    }

    MinuteTable train_table, test_table;
    try {
        const DateRange train = parse_date_range(config.at("train_range"));
        const DateRange test = parse_date_range(config.at("test_range"));
        std::tie(train_table, test_table) = split_periods(table, train, test);
        if (train_table.rows.empty() || test_table.rows.empty()) {
            throw Error("a split period holds no rows");
        }
    } catch (const std::exception& e) {
        throw Error(stage("split") + e.what());
    }

    std::vector<std::string> resources =
        config.value("resources", std::vector<std::string>{});
    if (resources.empty()) resources = table.resources;
    std::vector<std::string> modes =
        config.value("modes", std::vector<std::string>{"step_ahead", "sensor_free"});
    const std::size_t select_k = config.value("select_k", 25UL);
    const int smote_k = config.value("smote_k", 5);
    const bool use_smote = config.value("smote", true);
    const std::uint64_t seed = config.value("seed", 0ULL);

    std::ostringstream auc_csv;
    auc_csv << "learner,resource,mode,auc\n";

    for (const std::string& resource : resources) {
        for (const std::string& mode_name : modes) {
            const PoolingMode mode = pooling_mode_from_name(mode_name);
            const PoolingConfig pc = parse_pooling_config(
                config.value("pooling", nlohmann::json::object()), table, resource);

            FeatureMatrix Xtr, Xte;
            try {
                Xtr = drop_constant_columns(pool_features(train_table, pc, mode));
                Xte = pool_features(test_table, pc, mode);
                Xte = Xte.select(indices_by_names(
                    Xte, [&] {
                        std::vector<std::string> names;
                        for (const auto& c : Xtr.columns) names.push_back(c.name);
                        return names;
                    }()));
            } catch (const std::exception& e) {
                throw Error(stage("pool:" + resource + ":" + mode_name) + e.what());
            }

            std::vector<int> selected;
            try {
                const std::size_t k = std::min(select_k, Xtr.n_cols());
                selected = mrmr_select(Xtr, Xtr.target, k);
            } catch (const std::exception& e) {
                throw Error(stage("mrmr:" + resource + ":" + mode_name) + e.what());
            }
            FeatureMatrix Xtr_sel = Xtr.select(selected);
            std::vector<std::string> selected_names;
            for (const auto& c : Xtr_sel.columns) selected_names.push_back(c.name);
            FeatureMatrix Xte_sel = Xte.select(indices_by_names(Xte, selected_names));

            FeatureMatrix Xtr_std;
            Scaler scaler;
            try {
                std::tie(Xtr_std, scaler) = standardize(Xtr_sel);
            } catch (const std::exception& e) {
                throw Error(stage("standardize:" + resource + ":" + mode_name) + e.what());
            }
            Eigen::MatrixXd Xte_std = scaler.apply(Xte_sel.values);

            {
                std::string listing;
                for (const auto& name : selected_names) listing += name + "\n";
                const std::string path =
                    out_dir + "/selected_features_" + resource + "_" + mode_name + ".txt";
                write_text_file(path, listing);
                report.artifacts.push_back(path);
            }

            for (const auto& learner_spec : config.at("learners")) {
                const std::string kind = learner_spec.at("kind").get<std::string>();
                Rng rng(Rng::splitmix64(seed ^ config_hash(learner_spec)) ^
                        Rng::splitmix64(std::hash<std::string>{}(resource + mode_name)));
                nlohmann::json learner = learner_spec;
                double auc = 0.0;
                try {
                    // optional randomized hyperparameter search, scored by
                    // stratified k-fold AUC on the training matrix
                    if (learner.contains("search") && kind != "bilstm") {
                        const nlohmann::json& search_cfg = learner.at("search");
                        const SearchSpace space = parse_search_space(search_cfg.at("space"));
                        const int budget = search_cfg.value("budget", 10);
                        const int folds = config.value("cv_folds", 5);
                        Rng search_rng = rng.fork(7);
                        const std::uint64_t fold_seed = search_rng.fork(1).seed();
                        auto objective = [&](const nlohmann::json& draw) {
                            nlohmann::json merged = learner;
                            for (auto it = draw.begin(); it != draw.end(); ++it) {
                                merged[it.key()] = it.value();
                            }
                            Rng fold_rng(fold_seed);  // common folds across draws
                            const CvResult cv = kfold_cv(
                                Xtr_std.target, folds,
                                [&](const std::vector<std::size_t>& tr,
                                    const std::vector<std::size_t>& va) {
                                    Eigen::MatrixXd Xa(tr.size(), Xtr_std.values.cols());
                                    std::vector<int> ya(tr.size());
                                    for (std::size_t i = 0; i < tr.size(); ++i) {
                                        Xa.row(static_cast<Eigen::Index>(i)) =
                                            Xtr_std.values.row(static_cast<Eigen::Index>(tr[i]));
                                        ya[i] = Xtr_std.target[tr[i]];
                                    }
                                    Eigen::MatrixXd Xv(va.size(), Xtr_std.values.cols());
                                    std::vector<int> yv(va.size());
                                    for (std::size_t i = 0; i < va.size(); ++i) {
                                        Xv.row(static_cast<Eigen::Index>(i)) =
                                            Xtr_std.values.row(static_cast<Eigen::Index>(va[i]));
                                        yv[i] = Xtr_std.target[va[i]];
                                    }
                                    Rng fit_rng = fold_rng.fork(config_hash(merged));
                                    const LearnerConfig lc = LearnerConfig::from_json(merged);
                                    auto m = train_baseline_classifier(
                                        learner_kind_from_name(kind), Xa, ya, lc, fit_rng);
                                    const Eigen::VectorXd s = m->predict_proba(Xv);
                                    return roc_auc(
                                               std::span<const double>(
                                                   s.data(), static_cast<std::size_t>(s.size())),
                                               yv)
                                        .auc;
                                },
                                fold_rng);
                            return cv.mean;
                        };
                        const SearchResult best = random_search(space, budget, objective, search_rng);
                        for (auto it = best.best_config.begin(); it != best.best_config.end(); ++it) {
                            learner[it.key()] = it.value();
                        }
                        std::ostringstream trace_csv;
                        trace_csv << "draw,cv_auc,config\n";
                        for (std::size_t t = 0; t < best.trace.size(); ++t) {
                            trace_csv << t << ',' << format_double(best.trace[t].score) << ','
                                      << best.trace[t].config.dump() << '\n';
                        }
                        const std::string trace_path = out_dir + "/search_trace_" + kind + "_" +
                                                       resource + "_" + mode_name + ".csv";
                        write_text_file(trace_path, trace_csv.str());
                        report.artifacts.push_back(trace_path);
                    }

                    if (kind == "bilstm") {
                        LstmConfig lc = LstmConfig::from_json(learner);
                        const WindowSet train_w = build_windows(train_table, pc, mode,
                                                                selected_names, scaler, lc.window);
                        const WindowSet test_w = build_windows(test_table, pc, mode,
                                                               selected_names, scaler, lc.window);
                        auto model = train_bilstm(train_w, lc, rng);
                        const Eigen::VectorXd scores = model->score_windows(test_w.windows);
                        auc = roc_auc(std::span<const double>(scores.data(),
                                                              static_cast<std::size_t>(scores.size())),
                                      test_w.labels)
                                  .auc;
                    } else {
                        Eigen::MatrixXd Xfit = Xtr_std.values;
                        std::vector<int> yfit = Xtr_std.target;
                        if (use_smote) {
                            Rng smote_rng = rng.fork(91);
                            auto [Xb, yb] = smote(Xtr_std, Xtr_std.target, smote_k, smote_rng);
                            Xfit = std::move(Xb.values);
                            yfit = std::move(yb);
                        }
                        Eigen::VectorXd scores;
                        if (kind == "mlp") {
                            MlpConfig mc = MlpConfig::from_json(learner);
                            auto model = train_mlp(Xfit, yfit, mc, rng);
                            scores = model->predict_proba(Xte_std);
                        } else {
                            const LearnerConfig lc = LearnerConfig::from_json(learner);
                            auto model = train_baseline_classifier(learner_kind_from_name(kind),
                                                                   Xfit, yfit, lc, rng);
                            scores = model->predict_proba(Xte_std);
                        }
                        auc = roc_auc(std::span<const double>(scores.data(),
                                                              static_cast<std::size_t>(scores.size())),
                                      Xte_sel.target)
                                  .auc;
                    }
                } catch (const std::exception& e) {
                    throw Error(stage("train:" + kind + ":" + resource + ":" + mode_name) +
                                e.what());
                }
                report.rows.push_back({kind, resource, mode_name, auc});
                auc_csv << kind << ',' << resource << ',' << mode_name << ','
                        << format_double(auc) << '\n';
            }
        }
    }

    write_text_file(out_dir + "/auc_table.csv", auc_csv.str());
    report.artifacts.push_back(out_dir + "/auc_table.csv");
    write_run_stamp(out_dir, "report", config, &report.artifacts);
    return report;
}

namespace {

// named per-minute series of one occupant for the Granger tests
std::vector<double> extract_series(const MinuteTable& table, std::size_t first, std::size_t last,
                                   const std::string& name) {
    std::vector<double> out;
    out.reserve(last - first);
    int res_idx = -1;
    enum class Kind { status, usage, ext_t, ext_h, ext_s, morning, afternoon, evening } kind;
    if (name.rfind("status:", 0) == 0) {
        kind = Kind::status;
        res_idx = table.resource_index(name.substr(7));
        if (res_idx < 0) throw UnknownColumn(name);
    } else if (name.rfind("usage:", 0) == 0) {
        kind = Kind::usage;
        res_idx = table.resource_index(name.substr(6));
        if (res_idx < 0) throw UnknownColumn(name);
    } else if (name == "ext_temperature") {
        kind = Kind::ext_t;
    } else if (name == "ext_humidity") {
        kind = Kind::ext_h;
    } else if (name == "ext_solar") {
        kind = Kind::ext_s;
    } else if (name == "morning") {
        kind = Kind::morning;
    } else if (name == "afternoon") {
        kind = Kind::afternoon;
    } else if (name == "evening") {
        kind = Kind::evening;
    } else {
        throw UnknownColumn(name);
    }
    for (std::size_t i = first; i < last; ++i) {
        const MinuteRecord& r = table.rows[i];
        const int mod = minute_of_day(r.timestamp);
        switch (kind) {
            case Kind::status: out.push_back(r.states[static_cast<std::size_t>(res_idx)]); break;
            case Kind::usage: out.push_back(r.usage[static_cast<std::size_t>(res_idx)]); break;
            case Kind::ext_t: out.push_back(r.ext_temperature); break;
            case Kind::ext_h: out.push_back(r.ext_humidity); break;
            case Kind::ext_s: out.push_back(r.ext_solar); break;
            case Kind::morning: out.push_back(mod >= 360 && mod < 720 ? 1.0 : 0.0); break;
            case Kind::afternoon: out.push_back(mod >= 720 && mod < 1080 ? 1.0 : 0.0); break;
            case Kind::evening: out.push_back(mod >= 1080 ? 1.0 : 0.0); break;
        }
    }
    return out;
}

std::map<std::string, int> final_ranks(const MinuteTable& table) {
    std::map<std::string, int> ranks;
    if (table.present.rank) {
        for (const auto& [first, last] : table.occupant_spans()) {
            ranks[table.rows[first].occupant_id] = table.rows[last - 1].rank;
        }
        return ranks;
    }
    // rank by final cumulative points, most points first
    std::vector<std::pair<double, std::string>> points;
    for (const auto& [first, last] : table.occupant_spans()) {
        points.emplace_back(-table.rows[last - 1].points_total, table.rows[first].occupant_id);
    }
    std::sort(points.begin(), points.end());
    for (std::size_t i = 0; i < points.size(); ++i) {
        ranks[points[i].second] = static_cast<int>(i) + 1;
    }
    return ranks;
}

}  // namespace

void run_explain(const nlohmann::json& config, const std::string& out_dir) {
    ensure_directory(out_dir);
    MinuteTable table = load_table_from_config(config);
    if (config.contains("range")) {
        table = filter_range(table, parse_date_range(config.at("range")));
    }
    const std::uint64_t seed = config.value("seed", 0ULL);

    const auto ranks = final_ranks(table);
    const PlayerClasses classes = stratify_players(ranks);

    nlohmann::json classes_doc;
    classes_doc["high"] = classes.high;
    classes_doc["medium"] = classes.medium;
    classes_doc["low"] = classes.low;
    classes_doc["representatives"] = {{"high", classes.representative_high},
                                      {"medium", classes.representative_medium},
                                      {"low", classes.representative_low}};
    write_text_file(out_dir + "/classes.json", classes_doc.dump(2) + "\n");

    const nlohmann::json granger_cfg = config.value("granger", nlohmann::json::object());
    const int lag = granger_cfg.value("lag", 1);
    const double alpha = granger_cfg.value("alpha", 0.05);
    const int bic_max_lag = granger_cfg.value("bic_max_lag", 0);
    std::vector<std::pair<std::string, std::string>> pairs;
    if (granger_cfg.contains("pairs")) {
        for (const auto& p : granger_cfg.at("pairs")) {
            pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        }
    }

    const std::vector<std::pair<std::string, std::string>> reps = {
        {"high", classes.representative_high},
        {"medium", classes.representative_medium},
        {"low", classes.representative_low}};

    std::ostringstream granger_csv;
    granger_csv << "class,x,y,lag,p_value,f_statistic,decision\n";
    const auto spans = table.occupant_spans();
    auto span_of = [&](const std::string& occupant) {
        for (const auto& s : spans) {
            if (table.rows[s.first].occupant_id == occupant) return s;
        }
        throw UnknownColumn(occupant);
    };

    for (const auto& [cls, occupant] : reps) {
        const auto [first, last] = span_of(occupant);
        for (const auto& [xname, yname] : pairs) {
            const auto xs = extract_series(table, first, last, xname);
            const auto ys = extract_series(table, first, last, yname);
            int use_lag = lag;
            if (bic_max_lag > 0) use_lag = granger_select_lag_bic(xs, ys, bic_max_lag);
            const GrangerResult res = granger_test(xs, ys, use_lag, alpha);
            granger_csv << cls << ',' << xname << ',' << yname << ',' << res.lag << ','
                        << format_double(res.p_value) << ',' << format_double(res.f_statistic)
                        << ',' << (res.reject ? "reject" : "accept") << '\n';
        }
    }
    write_text_file(out_dir + "/granger_table.csv", granger_csv.str());

    // dependence graph per representative player
    const nlohmann::json glasso_cfg = config.value("glasso", nlohmann::json::object());
    GlassoOptions options;
    options.folds = glasso_cfg.value("folds", 5);
    options.one_se_rule = glasso_cfg.value("one_se", false);
    options.combine = glasso_cfg.value("combine", std::string("or")) == "and" ? CombineRule::And
                                                                              : CombineRule::Or;
    for (const auto& [cls, occupant] : reps) {
        const auto [first, last] = span_of(occupant);
        const MinuteTable sub = occupant_subtable(table, first, last);
        PoolingConfig pc = parse_pooling_config(config.value("pooling", nlohmann::json::object()),
                                                table, table.resources.at(0));
        FeatureMatrix pooled = drop_constant_columns(pool_features(sub, pc, PoolingMode::step_ahead));
        // glasso wants every column centered and scaled, dummies included
        Eigen::MatrixXd Y = pooled.values;
        std::vector<std::string> names;
        std::vector<int> keep;
        for (std::size_t j = 0; j < pooled.n_cols(); ++j) {
            const auto col = Y.col(static_cast<Eigen::Index>(j));
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().mean());
            if (sd <= 0.0) continue;
            keep.push_back(static_cast<int>(j));
        }
        Eigen::MatrixXd Ys(Y.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const auto col = Y.col(keep[k]);
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().mean());
            Ys.col(static_cast<Eigen::Index>(k)) = (col.array() - mean) / sd;
            names.push_back(pooled.columns[static_cast<std::size_t>(keep[k])].name);
        }
        Rng rng(Rng::splitmix64(seed) ^ std::hash<std::string>{}(occupant));
        const DependenceGraph graph = neighborhood_glasso(Ys, names, rng, options);

        std::ostringstream edges_csv;
        edges_csv << "vertex_a,vertex_b,beta_ab,beta_ba\n";
        auto beta_of = [&](int from, int to) {
            // index of `to` inside from's neighborhood vector (column `from` removed)
            const int col = to < from ? to : to - 1;
            return graph.neighborhoods[static_cast<std::size_t>(from)](col);
        };
        for (const auto& [a, b] : graph.edges) {
            edges_csv << names[static_cast<std::size_t>(a)] << ','
                      << names[static_cast<std::size_t>(b)] << ',' << format_double(beta_of(a, b))
                      << ',' << format_double(beta_of(b, a)) << '\n';
        }
        write_text_file(out_dir + "/graph_" + cls + "_edges.csv", edges_csv.str());

        nlohmann::json adjacency;
        adjacency["vertices"] = names;
        nlohmann::json edge_list = nlohmann::json::array();
        for (const auto& [a, b] : graph.edges) edge_list.push_back({a, b});
        adjacency["edges"] = edge_list;
        nlohmann::json lambdas = nlohmann::json::array();
        for (double l : graph.chosen_lambda) lambdas.push_back(l);
        adjacency["chosen_lambda"] = lambdas;
        write_text_file(out_dir + "/graph_" + cls + "_adjacency.json", adjacency.dump(2) + "\n");
    }

    write_run_stamp(out_dir, "explain", config, nullptr);
}

void run_generate(const nlohmann::json& config, const std::string& out_dir) {
    ensure_directory(out_dir);
    MinuteTable table = load_table_from_config(config);
    if (config.contains("occupant")) {
        const std::string occupant = config.at("occupant").get<std::string>();
        MinuteTable filtered;
        filtered.resources = table.resources;
        filtered.present = table.present;
        for (const auto& r : table.rows) {
            if (r.occupant_id == occupant) filtered.rows.push_back(r);
        }
        table = std::move(filtered);
        if (table.rows.empty()) throw Error("occupant '" + occupant + "' has no rows");
    }
    const std::uint64_t seed = config.value("seed", 0ULL);
    const PoolingMode mode =
        pooling_mode_from_name(config.value("mode", std::string("step_ahead")));
    const PoolingConfig pc = parse_pooling_config(
        config.value("pooling", nlohmann::json::object()), table, table.resources.at(0));

    FeatureMatrix pooled = drop_constant_columns(pool_features(table, pc, mode));
    pooled.target.clear();
    // binary columns (device states, dummies) keep their 0/1 coding so the
    // Bernoulli likelihood applies; everything else is standardized
    FeatureMatrix retagged = pooled;
    for (std::size_t j = 0; j < retagged.n_cols(); ++j) {
        bool binary = true;
        for (Eigen::Index i = 0; i < retagged.values.rows() && binary; ++i) {
            const double v = retagged.values(i, static_cast<Eigen::Index>(j));
            binary = v == 0.0 || v == 1.0;
        }
        if (binary) retagged.columns[j].tag = ColumnTag::dummy;
    }
    auto [X_tmp, scaler] = standardize(retagged);
    FeatureMatrix X_std = std::move(X_tmp);
    X_std.columns = pooled.columns;  // emit the original tags downstream

    VaeConfig vc = VaeConfig::from_json(config.value("vae", nlohmann::json::object()));
    Rng rng(seed);
    std::vector<EpochLogEntry> epoch_log;
    auto model = train_vae(X_std, vc, rng, &epoch_log);

    const std::size_t n_samples = config.value("n_samples", pooled.n_rows());
    Rng sample_rng = rng.fork(17);
    FeatureMatrix samples = model->sample_matrix(n_samples, sample_rng);
    samples.values = scaler.invert(samples.values);

    {
        std::ostringstream out;
        write_features(out, samples);
        write_text_file(out_dir + "/samples.csv", out.str());
    }
    {
        std::ostringstream metrics;
        metrics << "epoch,loss,elbo\n";
        for (const auto& e : epoch_log) {
            metrics << e.epoch << ',' << format_double(e.train_loss) << ','
                    << format_double(-e.train_loss) << '\n';
        }
        write_text_file(out_dir + "/vae_metrics.csv", metrics.str());
    }
    write_text_file(out_dir + "/vae_model.json", model->to_json().dump() + "\n");

    const nlohmann::json dtw_cfg = config.value("dtw", nlohmann::json::object());
    const int n_perm = dtw_cfg.value("n_permutations", 200);
    const PermutationScheme scheme =
        dtw_cfg.value("scheme", std::string("within_series")) == "cross_swap"
            ? PermutationScheme::cross_swap
            : PermutationScheme::within_series;
    std::vector<std::string> columns;
    if (dtw_cfg.contains("columns")) {
        columns = dtw_cfg.at("columns").get<std::vector<std::string>>();
    } else {
        for (const auto& c : pooled.columns) columns.push_back(c.name);
    }
    std::ostringstream dtw_csv;
    dtw_csv << "feature,dtw_score,p_value\n";
    Rng perm_rng = rng.fork(23);
    for (const auto& name : columns) {
        const int j = pooled.column_index(name);
        if (j < 0) throw UnknownColumn(name);
        const int js = samples.column_index(name);
        std::vector<double> original(pooled.n_rows());
        for (std::size_t i = 0; i < pooled.n_rows(); ++i) {
            original[i] = pooled.values(static_cast<Eigen::Index>(i), j);
        }
        std::vector<double> generated(samples.n_rows());
        for (std::size_t i = 0; i < samples.n_rows(); ++i) {
            generated[i] = samples.values(static_cast<Eigen::Index>(i), js);
        }
        const StatTestResult res =
            dtw_permutation_test(original, generated, n_perm, perm_rng, scheme);
        dtw_csv << name << ',' << format_double(res.statistic) << ','
                << format_double(res.p_value) << '\n';
    }
    write_text_file(out_dir + "/dtw_report.csv", dtw_csv.str());
    write_run_stamp(out_dir, "generate", config, nullptr);
}

}  // namespace sgame
