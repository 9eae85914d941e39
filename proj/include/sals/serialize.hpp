#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sals/error.hpp"
#include "sals/metrics.hpp"
#include "sals/model.hpp"
#include "sals/scale.hpp"

namespace sals {

inline constexpr int k_format_version = 1;

inline nlohmann::json scale_to_json(const GradingScale& scale) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : scale.ranges()) {
        ranges.push_back({{"lo", r.lo}, {"hi", r.hi}, {"label", r.label}});
    }
    return {{"name", scale.name()}, {"z_max", scale.z_max()}, {"ranges", ranges}};
}

inline GradingScale scale_from_json(const nlohmann::json& j) {
    try {
        std::vector<GradeRange> ranges;
        for (const auto& r : j.at("ranges")) {
            ranges.push_back({r.at("lo").get<int>(), r.at("hi").get<int>(),
                              r.at("label").get<std::string>()});
        }
        return GradingScale(j.at("name").get<std::string>(), j.at("z_max").get<int>(),
                            std::move(ranges));
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::parse, std::string("bad scale document: ") + e.what());
    }
}

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
            {"batch_size", c.batch_size},       {"lambda", c.lambda},
            {"sigma", c.sigma},                 {"eps_min", c.eps_min},
            {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    try {
        TrainConfig c;
        c.learning_rate = j.at("learning_rate").get<double>();
        c.epochs = j.at("epochs").get<std::size_t>();
        c.batch_size = j.at("batch_size").get<std::size_t>();
        c.lambda = j.at("lambda").get<double>();
        c.sigma = j.at("sigma").get<double>();
        c.eps_min = j.at("eps_min").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::parse, std::string("bad train config: ") + e.what());
    }
}

/// Model document: dims, both scale definitions, flat row-major parameter
/// arrays and an echo of the training configuration.
inline nlohmann::json model_to_json(const TwoHeadModel& m, const TrainConfig& config) {
    return {{"format_version", k_format_version},
            {"kind", "two_head_model"},
            {"input_dim", m.input_dim},
            {"hidden_dim", m.hidden_dim},
            {"scales",
             {{"fine", scale_to_json(m.scales.fine)}, {"coarse", scale_to_json(m.scales.coarse)}}},
            {"params",
             {{"w_shared", m.w_shared},
              {"b_shared", m.b_shared},
              {"w_cnt", m.w_cnt},
              {"b_cnt", m.b_cnt},
              {"w_cls", m.w_cls},
              {"b_cls", m.b_cls}}},
            {"train_config", train_config_to_json(config)}};
}

inline std::pair<TwoHeadModel, TrainConfig> model_from_json(const nlohmann::json& j) {
    try {
        detail::require(j.at("format_version").get<int>() == k_format_version,
                        ErrorCode::validation, "unsupported model format_version");
        detail::require(j.at("kind").get<std::string>() == "two_head_model",
                        ErrorCode::validation, "document is not a model");
        GradingScale fine = scale_from_json(j.at("scales").at("fine"));
        GradingScale coarse = scale_from_json(j.at("scales").at("coarse"));
        TwoHeadModel m(j.at("input_dim").get<std::size_t>(), j.at("hidden_dim").get<std::size_t>(),
                       refine(fine, coarse));
        const auto& p = j.at("params");
        const auto load = [&p, &m](const char* key, std::vector<double>& dst) {
            std::vector<double> v = p.at(key).get<std::vector<double>>();
            detail::require(v.size() == dst.size(), ErrorCode::dimension_mismatch,
                            std::string("parameter array '") + key + "' has length " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(dst.size()));
            dst = std::move(v);
        };
        load("w_shared", m.w_shared);
        load("b_shared", m.b_shared);
        load("w_cnt", m.w_cnt);
        load("b_cnt", m.b_cnt);
        load("w_cls", m.w_cls);
        load("b_cls", m.b_cls);
        return {std::move(m), train_config_from_json(j.at("train_config"))};
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::parse, std::string("bad model document: ") + e.what());
    }
}

/// Metric fractions scaled to percentages and rounded to two decimals.
inline double to_percent(double fraction) {
    return std::round(fraction * 10000.0) / 100.0;
}

inline nlohmann::json metrics_to_json(const MetricsReport& rep) {
    return {{"accuracy", to_percent(rep.accuracy)},
            {"precision", to_percent(rep.precision)},
            {"specificity", to_percent(rep.specificity)},
            {"sensitivity", to_percent(rep.sensitivity)},
            {"youden_index", to_percent(rep.youden)},
            {"mcc", to_percent(rep.mcc)},
            {"warnings", rep.warnings}};
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    detail::require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::parse, "'" + path + "': " + e.what());
    }
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    detail::require(out.good(), ErrorCode::io, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    detail::require(out.good(), ErrorCode::io, "write to '" + path + "' failed");
}

}  // namespace sals
