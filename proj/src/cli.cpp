#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <sstream>

#include "hdi/error.hpp"
#include "hdi/pipeline.hpp"
#include "hdi/synth.hpp"

namespace hdi::cli {

namespace fs = std::filesystem;
using pipeline::PipelineConfig;

namespace {

/// Flag values that are copied onto the config only when given, so that
/// flags win over `--config` and the file wins over built-in defaults.
class Overrides {
public:
    template <class T, class Apply>
    void bind(CLI::App& app, const std::string& name, const std::string& help, Apply apply) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app.add_option(name, *value, help);
        actions_.push_back([opt, value, apply](PipelineConfig& c) {
            if (opt->count() > 0) apply(c, *value);
        });
    }

    void flag(CLI::App& app, const std::string& name, const std::string& help,
              std::function<void(PipelineConfig&)> apply) {
        CLI::Option* opt = app.add_flag(name, help);
        actions_.push_back([opt, apply](PipelineConfig& c) {
            if (opt->count() > 0) apply(c);
        });
    }

    void apply(PipelineConfig& c) const {
        for (const auto& a : actions_) a(c);
    }

private:
    std::vector<std::function<void(PipelineConfig&)>> actions_;
};

template <class E, class Parse>
E parse_or_usage(const std::string& text, Parse parse, const char* what) {
    auto v = parse(text);
    if (!v) throw_usage("InvalidArgument", std::string("unknown ") + what + " '" + text + "'");
    return *v;
}

void add_common(CLI::App& app, Overrides& ov, std::string& config_path) {
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    ov.bind<std::string>(app, "-o,--output", "output directory",
                         [](PipelineConfig& c, const std::string& v) { c.output_dir = v; });
    ov.bind<std::uint64_t>(app, "--seed", "global seed",
                           [](PipelineConfig& c, std::uint64_t v) { c.seed = v; });
}

void add_data(CLI::App& app, Overrides& ov) {
    ov.bind<std::string>(app, "-i,--input", "wide-format indicator CSV",
                         [](PipelineConfig& c, const std::string& v) { c.input = v; });
    ov.bind<char>(app, "--delimiter", "CSV delimiter", [](PipelineConfig& c, char v) { c.csv.delimiter = v; });
    ov.flag(app, "--drop-noise", "drop unparsable rows instead of failing",
            [](PipelineConfig& c) { c.csv.drop_noise = true; });
    ov.flag(app, "--permissive-thousands", "accept thousands separators in quoted numbers",
            [](PipelineConfig& c) { c.csv.permissive_thousands = true; });
}

void add_features(CLI::App& app, Overrides& ov) {
    ov.bind<int>(app, "--classification-year", "year used for classification",
                 [](PipelineConfig& c, int v) { c.classification_year = v; });
    ov.bind<int>(app, "--clustering-year", "year used for clustering",
                 [](PipelineConfig& c, int v) { c.clustering_year = v; });
    ov.bind<std::vector<double>>(app, "--thresholds", "three category cutoffs t1 t2 t3",
                                 [](PipelineConfig& c, const std::vector<double>& v) {
                                     if (v.size() != 3) throw_usage("InvalidArgument", "--thresholds takes 3 values");
                                     c.thresholds = {v[0], v[1], v[2]};
                                 });
    ov.flag(app, "--hdi-unit-interval", "source HDI is on a 0-1 scale",
            [](PipelineConfig& c) { c.hdi_unit_interval = true; });
    ov.bind<std::string>(app, "--scaling", "none, min-max or z-score", [](PipelineConfig& c, const std::string& v) {
        c.scaling = parse_or_usage<features::ScalingMethod>(v, features::parse_scaling, "scaling");
    });
}

void add_training(CLI::App& app, Overrides& ov) {
    ov.bind<double>(app, "--test-fraction", "held-out fraction",
                    [](PipelineConfig& c, double v) { c.split.test_fraction = v; });
    ov.bind<std::uint64_t>(app, "--split-seed", "split seed",
                           [](PipelineConfig& c, std::uint64_t v) { c.split_seed = v; });
    ov.bind<std::size_t>(app, "--epochs", "training epochs", [](PipelineConfig& c, std::size_t v) { c.train.epochs = v; });
    ov.bind<double>(app, "--learning-rate", "gradient descent step",
                    [](PipelineConfig& c, double v) { c.train.learning_rate = v; });
    ov.bind<std::size_t>(app, "--batch-size", "minibatch size (implies minibatch mode)",
                         [](PipelineConfig& c, std::size_t v) {
                             c.train.batch_size = v;
                             c.train.batch_mode = ann::BatchMode::MiniBatch;
                         });
    ov.bind<std::string>(app, "--activation", "hidden activation: sigmoid or tanh",
                         [](PipelineConfig& c, const std::string& v) {
                             c.hidden_activation = parse_or_usage<ann::Activation>(v, ann::parse_activation,
                                                                                    "activation");
                         });
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return kUsage;
        case ErrorKind::Data: return kData;
        case ErrorKind::Numeric: return kNumeric;
    }
    return kData;
}

std::string describe(const Error& e) {
    std::string msg = e.code() + ": " + e.what();
    if (const auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->line() > 0) {
        msg += " (line " + std::to_string(pe->line());
        if (pe->column() > 0) msg += ", column " + std::to_string(pe->column());
        msg += ")";
    }
    return msg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"HDI indicator analytics: ingest, classify, cluster, evaluate"};
    app.name(args.empty() ? "hdi" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::function<void(PipelineConfig&)> action;
    auto set_action = [&](CLI::App* sub, std::function<void(PipelineConfig&)> f) {
        sub->callback([&action, f] { action = f; });
    };

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "parse a wide CSV and report indicator completeness");
    add_common(*ingest_cmd, ov, config_path);
    add_data(*ingest_cmd, ov);
    set_action(ingest_cmd, [&](PipelineConfig& c) {
        auto o = pipeline::run_ingest(c, c.output_dir);
        std::size_t complete = 0;
        for (const auto& e : o.report.entries) complete += e.complete ? 1 : 0;
        out << o.table.regions().size() << " regions, " << complete << " complete (indicator, year) pairs\n";
    });

    // classify train|sweep|predict
    auto* classify_cmd = app.add_subcommand("classify", "train, sweep or apply the HDI category network");
    classify_cmd->require_subcommand(1);
    auto* train_cmd = classify_cmd->add_subcommand("train", "train one network");
    auto* sweep_cmd = classify_cmd->add_subcommand("sweep", "hidden-size sweep with restarts");
    auto* predict_cmd = classify_cmd->add_subcommand("predict", "predict categories with a saved model");
    for (auto* sub : {train_cmd, sweep_cmd, predict_cmd}) {
        add_common(*sub, ov, config_path);
        add_data(*sub, ov);
        add_features(*sub, ov);
    }
    for (auto* sub : {train_cmd, sweep_cmd}) add_training(*sub, ov);
    ov.bind<std::size_t>(*train_cmd, "--hidden", "hidden neurons",
                         [](PipelineConfig& c, std::size_t v) { c.hidden_neurons = v; });
    ov.bind<std::uint64_t>(*train_cmd, "--train-seed", "weight initialisation seed",
                           [](PipelineConfig& c, std::uint64_t v) { c.train_seed = v; });
    ov.bind<std::vector<std::size_t>>(*sweep_cmd, "--hidden-sizes", "hidden sizes to sweep",
                                      [](PipelineConfig& c, const std::vector<std::size_t>& v) {
                                          c.sweep.hidden_sizes = v;
                                      });
    ov.bind<std::size_t>(*sweep_cmd, "--runs", "runs per hidden size",
                         [](PipelineConfig& c, std::size_t v) { c.sweep.runs_per_config = v; });
    ov.bind<std::string>(*sweep_cmd, "--metric", "misclassification-count, sse or cross-entropy",
                         [](PipelineConfig& c, const std::string& v) {
                             c.sweep.metric = parse_or_usage<ann::ErrorMetric>(v, ann::parse_error_metric, "metric");
                         });
    ov.bind<std::uint64_t>(*sweep_cmd, "--sweep-seed", "seed of run 0",
                           [](PipelineConfig& c, std::uint64_t v) { c.sweep_seed = v; });
    ov.bind<std::size_t>(*sweep_cmd, "-j,--jobs", "parallel training runs",
                         [](PipelineConfig& c, std::size_t v) { c.jobs = v; });
    ov.bind<std::string>(*predict_cmd, "-m,--model", "model JSON file",
                         [](PipelineConfig& c, const std::string& v) { c.model = v; });
    ov.flag(*predict_cmd, "--clamp", "clamp predictors to the training range", [](PipelineConfig& c) { c.clamp = true; });

    set_action(train_cmd, [&](PipelineConfig& c) {
        auto table = pipeline::run_ingest(c, fs::path(c.output_dir) / "ingest").table;
        pipeline::run_train(c, table, c.output_dir, out);
    });
    set_action(sweep_cmd, [&](PipelineConfig& c) {
        auto table = pipeline::run_ingest(c, fs::path(c.output_dir) / "ingest").table;
        pipeline::run_sweep(c, table, c.output_dir, out);
    });
    set_action(predict_cmd, [&](PipelineConfig& c) {
        if (c.model.empty()) throw_usage("MissingModel", "--model is required");
        std::ifstream in(c.model, std::ios::binary);
        if (!in) throw_data("FileNotFound", "cannot open " + c.model);
        const auto model = ann::load_model(in);
        auto table = ingest::parse_wide_csv_file(c.input, c.csv);
        auto o = pipeline::run_predict(c, table, model, c.output_dir, err);
        out << o.predicted.size() << " predictions";
        if (o.out_of_range_rows > 0) out << ", " << o.out_of_range_rows << " outside the training range";
        out << '\n';
    });

    // cluster
    auto* cluster_cmd = app.add_subcommand("cluster", "k-means on (HDI, GDP)");
    add_common(*cluster_cmd, ov, config_path);
    add_data(*cluster_cmd, ov);
    add_features(*cluster_cmd, ov);
    ov.bind<std::size_t>(*cluster_cmd, "-k,--k", "number of clusters", [](PipelineConfig& c, std::size_t v) { c.kmeans.k = v; });
    ov.bind<std::string>(*cluster_cmd, "--init", "kmeanspp, random or provided",
                         [](PipelineConfig& c, const std::string& v) {
                             c.kmeans.init = parse_or_usage<kmeans::InitMethod>(v, kmeans::parse_init, "init");
                         });
    ov.bind<std::string>(*cluster_cmd, "--centroids", "centroid CSV for provided init",
                         [](PipelineConfig& c, const std::string& v) { c.centroids = v; });
    ov.bind<std::size_t>(*cluster_cmd, "--max-iters", "iteration cap",
                         [](PipelineConfig& c, std::size_t v) { c.kmeans.max_iters = v; });
    ov.bind<std::size_t>(*cluster_cmd, "--restarts", "seeded initializations, lowest WCSS kept",
                         [](PipelineConfig& c, std::size_t v) { c.kmeans.restarts = v; });
    ov.bind<double>(*cluster_cmd, "--tol", "centroid movement tolerance",
                    [](PipelineConfig& c, double v) { c.kmeans.tol = v; });
    ov.flag(*cluster_cmd, "--prescale", "min-max scale both axes first",
            [](PipelineConfig& c) { c.kmeans.prescale = true; });
    ov.bind<std::uint64_t>(*cluster_cmd, "--kmeans-seed", "initialisation seed",
                           [](PipelineConfig& c, std::uint64_t v) { c.kmeans_seed = v; });
    set_action(cluster_cmd, [&](PipelineConfig& c) {
        auto table = ingest::parse_wide_csv_file(c.input, c.csv);
        auto o = pipeline::run_cluster(c, table, c.output_dir);
        out << o.data.points.rows() << " regions in " << o.model.k << " clusters, wcss " << o.model.wcss << '\n';
    });

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "confusion matrix and metrics");
    add_common(*evaluate_cmd, ov, config_path);
    ov.bind<std::string>(*evaluate_cmd, "-p,--predictions", "predictions CSV with actual_category",
                         [](PipelineConfig& c, const std::string& v) { c.predictions = v; });
    ov.bind<std::string>(*evaluate_cmd, "--matrix", "count matrix CSV",
                         [](PipelineConfig& c, const std::string& v) { c.matrix = v; });
    ov.bind<std::vector<std::string>>(*evaluate_cmd, "--display-order", "class order for rendering",
                                      [](PipelineConfig& c, const std::vector<std::string>& v) {
                                          c.display_order.clear();
                                          for (const auto& n : v) {
                                              c.display_order.push_back(
                                                  parse_or_usage<HdiCategory>(n, parse_category, "category"));
                                          }
                                      });
    ov.bind<std::uint64_t>(*evaluate_cmd, "--stated-total", "separately reported total",
                           [](PipelineConfig& c, std::uint64_t v) { c.stated_total = v; });
    ov.bind<std::uint64_t>(*evaluate_cmd, "--stated-correct", "separately reported correct count",
                           [](PipelineConfig& c, std::uint64_t v) { c.stated_correct = v; });
    set_action(evaluate_cmd, [&](PipelineConfig& c) {
        if (c.predictions.empty() == c.matrix.empty()) {
            throw_usage("InvalidArgument", "give exactly one of --predictions or --matrix");
        }
        std::size_t skipped = 0;
        const auto matrix =
            c.matrix.empty() ? pipeline::read_predictions_matrix(c.predictions, &skipped) : pipeline::read_matrix_csv(c.matrix);
        auto o = pipeline::run_evaluate(c, matrix, c.output_dir);
        if (skipped > 0) err << "warning: " << skipped << " rows without actual_category skipped\n";
        out << "accuracy " << o.metrics.correct << '/' << o.metrics.total << ", prediction error "
            << eval::format_percent(o.metrics.prediction_error_percent) << '\n';
        for (const auto& n : o.notes) out << "note: " << n << '\n';
    });

    // report
    auto* report_cmd = app.add_subcommand("report", "full workflow: ingest, sweep, evaluate, cluster");
    add_common(*report_cmd, ov, config_path);
    add_data(*report_cmd, ov);
    add_features(*report_cmd, ov);
    add_training(*report_cmd, ov);
    ov.bind<std::size_t>(*report_cmd, "--runs", "runs per hidden size",
                         [](PipelineConfig& c, std::size_t v) { c.sweep.runs_per_config = v; });
    ov.bind<std::size_t>(*report_cmd, "-j,--jobs", "parallel training runs",
                         [](PipelineConfig& c, std::size_t v) { c.jobs = v; });
    set_action(report_cmd, [&](PipelineConfig& c) {
        pipeline::run_report(c, c.output_dir, out);
        out << "report written to " << (fs::path(c.output_dir) / "report.md").string() << '\n';
    });

    // synth: fixture generator, no config
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic indicator CSV");
    synth::IndicatorOptions synth_opts;
    std::string synth_out;
    synth_cmd->add_option("--regions", synth_opts.regions, "number of regions");
    synth_cmd->add_option("--seed", synth_opts.seed, "generator seed");
    synth_cmd->add_option("-o,--output", synth_out, "output CSV path")->required();
    bool synth_ran = false;
    synth_cmd->callback([&] { synth_ran = true; });

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (e.get_exit_code() == 0) return kOk;
        err << "run with --help for usage\n";
        return kUsage;
    }

    try {
        if (synth_ran) {
            pipeline::write_file(synth_out, synth::indicator_csv(synth_opts));
            out << "wrote " << synth_out << '\n';
            return kOk;
        }
        PipelineConfig config = config_path.empty() ? PipelineConfig{} : pipeline::load_config(config_path);
        ov.apply(config);
        config.resolve();
        fs::create_directories(config.output_dir);
        // The output location is left out so that identical runs into
        // different directories echo identical files.
        auto echoed = pipeline::config_to_json(config);
        echoed.erase("output_dir");
        pipeline::write_json(fs::path(config.output_dir) / "effective_config.json", echoed);
        if (action) action(config);
        return kOk;
    } catch (const Error& e) {
        err << "error: " << describe(e) << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
}

}  // namespace hdi::cli
