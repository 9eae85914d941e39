// Command-line surface for the sals library: schedule dumps, label
// generation, synthetic data, training and evaluation.
//
// Every command is deterministic given its flags and seeds; output files
// carry no timestamps or absolute paths, so reruns are byte-identical.
// Values from --config <json> are applied first and explicit flags override
// them.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sals/sals.hpp"

namespace {

using nlohmann::json;

// Applies config-file values to bound option variables, rejecting keys the
// command does not know.
class ConfigBinder {
public:
    template <typename T>
    void bind(const std::string& key, T& var) {
        setters_[key] = [&var](const json& v) { var = v.get<T>(); };
    }

    void apply(const json& doc) const {
        if (doc.is_null()) return;
        sals::detail::require(doc.is_object(), sals::ErrorCode::config,
                              "config file must hold a JSON object");
        for (const auto& [key, value] : doc.items()) {
            const auto it = setters_.find(key);
            sals::detail::require(it != setters_.end(), sals::ErrorCode::config,
                                  "unknown config key '" + key + "'");
            try {
                it->second(value);
            } catch (const json::exception& e) {
                sals::detail::fail(sals::ErrorCode::config,
                                   "bad value for config key '" + key + "': " + e.what());
            }
        }
    }

private:
    std::map<std::string, std::function<void(const json&)>> setters_;
};

// The config file must be loaded and applied before CLI11 writes flag
// values, so flags override it. A light pre-scan finds the subcommand name
// and the --config argument ahead of the real parse.
struct Prescan {
    std::string command;
    json config;
};

Prescan prescan_config(int argc, char** argv) {
    Prescan p;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        if (p.command.empty() && !arg.empty() && arg[0] != '-') {
            p.command = std::string(arg);
        }
        if (arg == "--config" && i + 1 < argc) {
            p.config = sals::read_json_file(argv[i + 1]);
        } else if (arg.rfind("--config=", 0) == 0) {
            p.config = sals::read_json_file(std::string(arg.substr(9)));
        }
    }
    return p;
}

sals::GradingScale pick_scale(const std::string& name, int z_max, int width) {
    if (name == "hayashi") return sals::hayashi_scale(z_max);
    if (name == "uniform") return sals::uniform_scale(z_max, width);
    sals::detail::fail(sals::ErrorCode::config, "unknown scale '" + name + "'");
}

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    sals::detail::require(out.good(), sals::ErrorCode::io, "cannot write '" + path + "'");
    out << text;
    sals::detail::require(out.good(), sals::ErrorCode::io, "write to '" + path + "' failed");
}

std::string fmt(double v) { return sals::detail::format_double(v); }

// ---- schedule -------------------------------------------------------------

struct ScheduleOpts {
    std::string scale = "hayashi";
    int z_max = 65;
    int width = 5;
    double eps_min = 0.6;
    std::string out;
};

void run_schedule(const ScheduleOpts& o) {
    const sals::GradingScale scale = pick_scale(o.scale, o.z_max, o.width);
    std::string csv = "count,epsilon\n";
    for (int c = 1; c <= scale.z_max(); ++c) {
        csv += std::to_string(c) + "," + fmt(sals::epsilon_schedule(c, scale, o.eps_min)) + "\n";
    }
    write_text_file(csv, o.out);
}

// ---- gen-labels -----------------------------------------------------------

struct GenLabelsOpts {
    std::string counts;
    int z_max = 65;
    int width = 5;
    double sigma = 3.0;
    double eps_min = 0.6;
    std::string out;
    std::string csv_out;
};

void run_gen_labels(const GenLabelsOpts& o) {
    const sals::Dataset data = sals::load_csv(o.counts, o.z_max);
    const sals::GradingScale coarse = sals::hayashi_scale(o.z_max);
    const sals::GradingScale fine = sals::uniform_scale(o.z_max, o.width);
    const sals::SmoothingParams params{o.sigma, o.eps_min};

    json labels = json::array();
    std::string csv = "z,c,q_prime\n";
    for (const auto& s : data.samples) {
        const sals::CountLabelDistribution q = sals::smooth_label(s.count, coarse, params);
        labels.push_back({{"id", s.id},
                          {"count", s.count},
                          {"smoothed", q.values},
                          {"fine", sals::aggregate(q.values, fine)},
                          {"coarse", sals::aggregate(q.values, coarse)}});
        if (!o.csv_out.empty()) {
            for (int c = 1; c <= o.z_max; ++c) {
                csv += std::to_string(s.count) + "," + std::to_string(c) + "," + fmt(q.at(c)) +
                       "\n";
            }
        }
    }
    if (!o.csv_out.empty()) write_text_file(csv, o.csv_out);
    const json doc = {{"format_version", sals::k_format_version},
                      {"kind", "labels"},
                      {"z_max", o.z_max},
                      {"sigma", o.sigma},
                      {"eps_min", o.eps_min},
                      {"coarse_scale", sals::scale_to_json(coarse)},
                      {"fine_scale", sals::scale_to_json(fine)},
                      {"labels", labels}};
    sals::write_json_file(doc, o.out);
}

// ---- synth ----------------------------------------------------------------

struct SynthOpts {
    std::size_t n = 1000;
    std::size_t input_dim = 8;
    double noise_sigma = 0.0;
    int z_max = 65;
    std::string dist = "uniform";
    std::uint64_t seed = 1;
    std::string out;
};

void run_synth(const SynthOpts& o) {
    sals::SynthConfig config;
    config.n = o.n;
    config.input_dim = o.input_dim;
    config.noise_sigma = o.noise_sigma;
    config.z_max = o.z_max;
    if (o.dist == "uniform") {
        config.count_distribution = sals::CountDist::uniform;
    } else if (o.dist == "log-uniform") {
        config.count_distribution = sals::CountDist::log_uniform;
    } else {
        sals::detail::fail(sals::ErrorCode::config, "unknown count distribution '" + o.dist + "'");
    }
    config.seed = o.seed;
    sals::save_csv(sals::synth(config), o.out);
}

// ---- train ----------------------------------------------------------------

struct TrainOpts {
    std::string data;
    int z_max = 65;
    int width = 5;
    std::size_t hidden_dim = 32;
    sals::TrainConfig config;
    std::string out;
    std::string history;
};

void run_train(const TrainOpts& o) {
    const sals::Dataset data = sals::load_csv(o.data, o.z_max);
    const sals::ScaleRefinement scales =
        sals::refine(sals::uniform_scale(o.z_max, o.width), sals::hayashi_scale(o.z_max));
    sals::TwoHeadModel model =
        sals::init_model(data.input_dim, o.hidden_dim, scales, o.config.seed);
    sals::TrainResult result = sals::train(std::move(model), data, o.config);

    sals::write_json_file(sals::model_to_json(result.model, o.config), o.out);
    if (!o.history.empty()) {
        std::string csv = "epoch,l_cnt,l_cls,l_cnt2cls,total\n";
        for (std::size_t e = 0; e < result.history.size(); ++e) {
            const auto& h = result.history[e];
            csv += std::to_string(e + 1) + "," + fmt(h.l_cnt) + "," + fmt(h.l_cls) + "," +
                   fmt(h.l_cnt2cls) + "," + fmt(h.total) + "\n";
        }
        write_text_file(csv, o.history);
    }
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        std::cout << "final: total=" << fmt(last.total) << " l_cnt=" << fmt(last.l_cnt)
                  << " l_cls=" << fmt(last.l_cls) << " l_cnt2cls=" << fmt(last.l_cnt2cls)
                  << " lambda=" << fmt(last.lambda) << " epochs=" << result.history.size()
                  << "\n";
    }
}

// ---- eval -----------------------------------------------------------------

struct EvalOpts {
    std::string model;
    std::string data;
    std::string out;
    std::string confusion_out;
};

void run_eval(const EvalOpts& o) {
    auto [model, config] = sals::model_from_json(sals::read_json_file(o.model));
    const sals::Dataset data =
        sals::load_csv(o.data, model.scales.coarse.z_max(), model.input_dim);
    sals::detail::require(data.input_dim == model.input_dim, sals::ErrorCode::dimension_mismatch,
                          "data feature dimension " + std::to_string(data.input_dim) +
                              " does not match model input_dim " +
                              std::to_string(model.input_dim));
    const sals::EvalResult result = sals::evaluate(model, data);

    json doc = sals::metrics_to_json(result.metrics);
    doc["format_version"] = sals::k_format_version;
    doc["kind"] = "metrics";
    doc["count_mae"] = result.count_mae;
    doc["num_samples"] = data.size();
    json rows = json::array();
    for (std::size_t i = 0; i < result.confusion.num_classes; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < result.confusion.num_classes; ++j) {
            row.push_back(result.confusion.at(i, j));
        }
        rows.push_back(row);
    }
    doc["confusion"] = rows;
    sals::write_json_file(doc, o.out);
    if (!o.confusion_out.empty()) {
        write_text_file(sals::confusion_csv(result.confusion), o.confusion_out);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Scale-adaptive label-distribution smoothing for count-based severity "
        "grading.\nValues from --config <json> are applied first; explicit flags "
        "override them."};
    app.require_subcommand(1);

    Prescan pre;
    try {
        pre = prescan_config(argc, argv);
    } catch (const sals::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    ScheduleOpts sched;
    GenLabelsOpts gen;
    SynthOpts synth_opts;
    TrainOpts train_opts;
    EvalOpts eval_opts;
    ConfigBinder sched_keys;
    ConfigBinder gen_keys;
    ConfigBinder synth_keys;
    ConfigBinder train_keys;
    ConfigBinder eval_keys;
    std::string config_path;

    auto* cmd_schedule =
        app.add_subcommand("schedule", "Dump the smoothing-weight schedule as CSV rows "
                                       "(count,epsilon) for counts 1..Z.");
    cmd_schedule->add_option("--config", config_path, "JSON config file");
    cmd_schedule->add_option("--scale", sched.scale, "Grading scale: hayashi|uniform")
        ->check(CLI::IsMember({"hayashi", "uniform"}));
    cmd_schedule->add_option("--z-max", sched.z_max, "Maximum lesion count Z");
    cmd_schedule->add_option("--width", sched.width, "Counts per grade for --scale uniform");
    cmd_schedule->add_option("--eps-min", sched.eps_min, "Minimum smoothing weight");
    cmd_schedule->add_option("--out", sched.out, "Output CSV path")->required();
    sched_keys.bind("scale", sched.scale);
    sched_keys.bind("z_max", sched.z_max);
    sched_keys.bind("width", sched.width);
    sched_keys.bind("eps_min", sched.eps_min);
    sched_keys.bind("out", sched.out);
    cmd_schedule->callback([&] { run_schedule(sched); });

    auto* cmd_gen = app.add_subcommand(
        "gen-labels", "Generate smoothed count-label distributions plus their fine and "
                      "coarse aggregations for a counts CSV.");
    cmd_gen->add_option("--config", config_path, "JSON config file");
    cmd_gen->add_option("--counts", gen.counts, "Input CSV with header id,count")->required();
    cmd_gen->add_option("--z-max", gen.z_max, "Maximum lesion count Z");
    cmd_gen->add_option("--width", gen.width, "Counts per fine grade");
    cmd_gen->add_option("--sigma", gen.sigma, "Gaussian standard deviation");
    cmd_gen->add_option("--eps-min", gen.eps_min, "Minimum smoothing weight");
    cmd_gen->add_option("--out", gen.out, "Output JSON path")->required();
    cmd_gen->add_option("--csv-out", gen.csv_out,
                        "Optional CSV dump of rows (z,c,q_prime), one row per count");
    gen_keys.bind("counts", gen.counts);
    gen_keys.bind("z_max", gen.z_max);
    gen_keys.bind("width", gen.width);
    gen_keys.bind("sigma", gen.sigma);
    gen_keys.bind("eps_min", gen.eps_min);
    gen_keys.bind("out", gen.out);
    gen_keys.bind("csv_out", gen.csv_out);
    cmd_gen->callback([&] { run_gen_labels(gen); });

    auto* cmd_synth = app.add_subcommand(
        "synth", "Generate a deterministic synthetic dataset CSV from a seed.");
    cmd_synth->add_option("--config", config_path, "JSON config file");
    cmd_synth->add_option("--n", synth_opts.n, "Number of samples");
    cmd_synth->add_option("--input-dim", synth_opts.input_dim, "Feature dimension");
    cmd_synth->add_option("--noise-sigma", synth_opts.noise_sigma, "Feature noise sigma");
    cmd_synth->add_option("--z-max", synth_opts.z_max, "Maximum lesion count Z");
    cmd_synth->add_option("--dist", synth_opts.dist, "Count distribution: uniform|log-uniform")
        ->check(CLI::IsMember({"uniform", "log-uniform"}));
    cmd_synth->add_option("--seed", synth_opts.seed, "Generator seed");
    cmd_synth->add_option("--out", synth_opts.out, "Output CSV path")->required();
    synth_keys.bind("n", synth_opts.n);
    synth_keys.bind("input_dim", synth_opts.input_dim);
    synth_keys.bind("noise_sigma", synth_opts.noise_sigma);
    synth_keys.bind("z_max", synth_opts.z_max);
    synth_keys.bind("dist", synth_opts.dist);
    synth_keys.bind("seed", synth_opts.seed);
    synth_keys.bind("out", synth_opts.out);
    cmd_synth->callback([&] { run_synth(synth_opts); });

    auto* cmd_train = app.add_subcommand(
        "train", "Train the two-headed model on a counts CSV and write the model JSON.");
    cmd_train->add_option("--config", config_path, "JSON config file");
    cmd_train->add_option("--data", train_opts.data, "Training CSV")->required();
    cmd_train->add_option("--z-max", train_opts.z_max, "Maximum lesion count Z");
    cmd_train->add_option("--width", train_opts.width, "Counts per fine grade");
    cmd_train->add_option("--hidden-dim", train_opts.hidden_dim, "Hidden layer size (0=linear)");
    cmd_train->add_option("--learning-rate", train_opts.config.learning_rate, "Step size");
    cmd_train->add_option("--epochs", train_opts.config.epochs, "Training epochs");
    cmd_train->add_option("--batch-size", train_opts.config.batch_size, "Mini-batch size");
    cmd_train->add_option("--lambda", train_opts.config.lambda, "Multi-task trade-off weight");
    cmd_train->add_option("--sigma", train_opts.config.sigma, "Gaussian standard deviation");
    cmd_train->add_option("--eps-min", train_opts.config.eps_min, "Minimum smoothing weight");
    cmd_train->add_option("--seed", train_opts.config.seed, "Init and shuffle seed");
    cmd_train->add_option("--out", train_opts.out, "Output model JSON path")->required();
    cmd_train->add_option("--history", train_opts.history, "Optional per-epoch loss CSV path");
    train_keys.bind("data", train_opts.data);
    train_keys.bind("z_max", train_opts.z_max);
    train_keys.bind("width", train_opts.width);
    train_keys.bind("hidden_dim", train_opts.hidden_dim);
    train_keys.bind("learning_rate", train_opts.config.learning_rate);
    train_keys.bind("epochs", train_opts.config.epochs);
    train_keys.bind("batch_size", train_opts.config.batch_size);
    train_keys.bind("lambda", train_opts.config.lambda);
    train_keys.bind("sigma", train_opts.config.sigma);
    train_keys.bind("eps_min", train_opts.config.eps_min);
    train_keys.bind("seed", train_opts.config.seed);
    train_keys.bind("out", train_opts.out);
    train_keys.bind("history", train_opts.history);
    cmd_train->callback([&] { run_train(train_opts); });

    auto* cmd_eval = app.add_subcommand(
        "eval", "Evaluate a trained model on a counts CSV and write a metrics JSON.");
    cmd_eval->add_option("--config", config_path, "JSON config file");
    cmd_eval->add_option("--model", eval_opts.model, "Model JSON path")->required();
    cmd_eval->add_option("--data", eval_opts.data, "Evaluation CSV")->required();
    cmd_eval->add_option("--out", eval_opts.out, "Output metrics JSON path")->required();
    cmd_eval->add_option("--confusion-out", eval_opts.confusion_out,
                         "Optional confusion matrix CSV path");
    eval_keys.bind("model", eval_opts.model);
    eval_keys.bind("data", eval_opts.data);
    eval_keys.bind("out", eval_opts.out);
    eval_keys.bind("confusion_out", eval_opts.confusion_out);
    cmd_eval->callback([&] { run_eval(eval_opts); });

    try {
        if (pre.command == "schedule") {
            sched_keys.apply(pre.config);
        } else if (pre.command == "gen-labels") {
            gen_keys.apply(pre.config);
        } else if (pre.command == "synth") {
            synth_keys.apply(pre.config);
        } else if (pre.command == "train") {
            train_keys.apply(pre.config);
        } else if (pre.command == "eval") {
            eval_keys.apply(pre.config);
        }
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const sals::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
