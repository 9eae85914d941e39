#pragma once

#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sals/error.hpp"
#include "sals/rng.hpp"
#include "sals/scale.hpp"

namespace sals {

/// One annotated instance: a feature vector standing in for the image, the
/// ground-truth lesion count, and the Hayashi grade derived from it.
struct Sample {
    std::string id;
    std::vector<double> features;
    int count = 1;
    std::size_t grade = 0;
};

struct Dataset {
    int z_max = 65;
    std::size_t input_dim = 0;
    std::vector<Sample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

enum class CountDist { uniform, log_uniform };

struct SynthConfig {
    std::size_t n = 1;
    std::size_t input_dim = 8;
    double noise_sigma = 0.0;
    int z_max = 65;
    CountDist count_distribution = CountDist::uniform;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::size_t line_no) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorCode::parse,
            "line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
    return v;
}

inline long parse_int(std::string_view text, std::size_t line_no) {
    long v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorCode::parse,
            "line " + std::to_string(line_no) + ": bad integer '" + std::string(text) + "'");
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace detail

/// Deterministic feature embedding of a count: with zt = count / z_max, the
/// base pattern [zt, zt^2, sin(2 pi zt), cos(2 pi zt)] is cycled out to
/// input_dim entries. Injective over 1..z_max already through the first
/// entry.
inline std::vector<double> encode_count(int count, std::size_t input_dim, int z_max) {
    detail::require(z_max >= 1, ErrorCode::invalid_argument, "z_max must be >= 1");
    detail::require(count >= 1 && count <= z_max, ErrorCode::out_of_range,
                          "count " + std::to_string(count) + " outside 1.." +
                              std::to_string(z_max));
    detail::require(input_dim >= 1, ErrorCode::invalid_argument, "input_dim must be >= 1");
    const double zt = static_cast<double>(count) / static_cast<double>(z_max);
    const double base[4] = {zt, zt * zt, std::sin(2.0 * std::numbers::pi * zt),
                            std::cos(2.0 * std::numbers::pi * zt)};
    std::vector<double> out(input_dim);
    for (std::size_t k = 0; k < input_dim; ++k) out[k] = base[k % 4];
    return out;
}

/// Seeded synthetic dataset: counts drawn from the configured distribution,
/// features = encode_count(count) plus optional Gaussian noise. Same seed,
/// same dataset, bit for bit.
inline Dataset synth(const SynthConfig& config) {
    detail::require(config.n >= 1, ErrorCode::invalid_argument, "n must be >= 1");
    detail::require(config.input_dim >= 2, ErrorCode::invalid_argument,
                          "input_dim must be >= 2");
    detail::require(config.noise_sigma >= 0.0, ErrorCode::invalid_argument,
                          "noise_sigma must be >= 0");
    const GradingScale hayashi = hayashi_scale(config.z_max);
    Rng rng(config.seed);
    Dataset data{config.z_max, config.input_dim, {}};
    data.samples.reserve(config.n);
    const double log_span = std::log(static_cast<double>(config.z_max) + 1.0);
    for (std::size_t i = 0; i < config.n; ++i) {
        int count = 0;
        if (config.count_distribution == CountDist::uniform) {
            count = rng.uniform_int(1, config.z_max);
        } else {
            count = static_cast<int>(std::floor(std::exp(rng.u01() * log_span)));
            count = std::min(std::max(count, 1), config.z_max);
        }
        Sample s;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "s%06zu", i + 1);
        s.id = idbuf;
        s.count = count;
        s.grade = hayashi.grade_of(count);
        s.features = encode_count(count, config.input_dim, config.z_max);
        if (config.noise_sigma > 0.0) {
            for (double& f : s.features) f += rng.normal(0.0, config.noise_sigma);
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

/// Reads a dataset from CSV with header "id,count[,f0,f1,...]". When the
/// file carries no feature columns, features are synthesized from the count
/// via encode_count with fallback_input_dim entries.
inline Dataset load_csv(const std::string& path, int z_max = 65,
                        std::size_t fallback_input_dim = 8) {
    std::ifstream in(path);
    detail::require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
    const GradingScale hayashi = hayashi_scale(z_max);

    std::string line;
    detail::require(static_cast<bool>(std::getline(in, line)), ErrorCode::parse,
                          "empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_fields(line);
    detail::require(header.size() >= 2 && header[0] == "id" && header[1] == "count",
                          ErrorCode::parse, "header must start with 'id,count'");
    const std::size_t feature_cols = header.size() - 2;
    for (std::size_t k = 0; k < feature_cols; ++k) {
        detail::require(header[k + 2] == "f" + std::to_string(k), ErrorCode::parse,
                              "feature columns must be named f0,f1,...");
    }

    Dataset data{z_max, feature_cols > 0 ? feature_cols : fallback_input_dim, {}};
    std::vector<std::string> bad_count_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_fields(line);
        detail::require(fields.size() == header.size(), ErrorCode::parse,
                              "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        Sample s;
        s.id = std::string(fields[0]);
        detail::require(!s.id.empty(), ErrorCode::parse,
                              "line " + std::to_string(line_no) + ": empty id");
        const long count = detail::parse_int(fields[1], line_no);
        if (count < 1 || count > z_max) {
            bad_count_ids.push_back(s.id);
            continue;
        }
        s.count = static_cast<int>(count);
        s.grade = hayashi.grade_of(s.count);
        if (feature_cols > 0) {
            s.features.reserve(feature_cols);
            for (std::size_t k = 0; k < feature_cols; ++k) {
                s.features.push_back(detail::parse_double(fields[k + 2], line_no));
            }
        } else {
            s.features = encode_count(s.count, fallback_input_dim, z_max);
        }
        data.samples.push_back(std::move(s));
    }
    if (!bad_count_ids.empty()) {
        std::string msg = "counts outside 1.." + std::to_string(z_max) + " for ids:";
        for (const auto& id : bad_count_ids) msg += " " + id;
        detail::fail(ErrorCode::validation, msg);
    }
    return data;
}

/// Writes the CSV form read back by load_csv; floats use shortest
/// round-trip formatting, so a save/load cycle is exact.
inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    detail::require(out.good(), ErrorCode::io, "cannot write '" + path + "'");
    out << "id,count";
    for (std::size_t k = 0; k < data.input_dim; ++k) out << ",f" << k;
    out << '\n';
    for (const auto& s : data.samples) {
        detail::require(s.features.size() == data.input_dim, ErrorCode::dimension_mismatch,
                              "sample '" + s.id + "' has inconsistent feature length");
        out << s.id << ',' << s.count;
        for (double f : s.features) out << ',' << detail::format_double(f);
        out << '\n';
    }
    detail::require(out.good(), ErrorCode::io, "write to '" + path + "' failed");
}

/// Seeded shuffle followed by a head/tail split; both sides must be
/// non-empty.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                         std::uint64_t seed) {
    detail::require(train_fraction > 0.0 && train_fraction < 1.0,
                          ErrorCode::invalid_argument, "train_fraction must be in (0,1)");
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(data.size()) * train_fraction));
    detail::require(n_train >= 1 && n_train < data.size(), ErrorCode::degenerate_split,
                          "split would leave an empty side (" + std::to_string(n_train) + "/" +
                              std::to_string(data.size() - n_train) + ")");
    Dataset train{data.z_max, data.input_dim, {}};
    Dataset test{data.z_max, data.input_dim, {}};
    train.samples.reserve(n_train);
    test.samples.reserve(data.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? train : test).samples.push_back(data.samples[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace sals
