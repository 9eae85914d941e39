#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sals/data.hpp"
#include "sals/error.hpp"
#include "sals/labelgen.hpp"
#include "sals/loss.hpp"
#include "sals/metrics.hpp"
#include "sals/rng.hpp"
#include "sals/scale.hpp"

namespace sals {

struct TrainConfig {
    double learning_rate = 1.0;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double lambda = 0.3;
    double sigma = 3.0;
    double eps_min = 0.6;
    std::uint64_t seed = 1;
};

/// Two softmax heads over a shared representation: one across the Z lesion
/// counts, one across the fine grades. hidden_dim == 0 wires both heads
/// straight to the input; otherwise a single tanh layer sits in between.
/// Weight matrices are row-major with rows indexing outputs.
struct TwoHeadModel {
    TwoHeadModel(std::size_t in_dim, std::size_t hid_dim, ScaleRefinement scale_refinement)
        : input_dim(in_dim), hidden_dim(hid_dim), scales(std::move(scale_refinement)) {
        detail::require(input_dim >= 1, ErrorCode::invalid_argument, "input_dim must be >= 1");
        if (hidden_dim > 0) {
            w_shared.assign(hidden_dim * input_dim, 0.0);
            b_shared.assign(hidden_dim, 0.0);
        }
        w_cnt.assign(num_counts() * feature_dim(), 0.0);
        b_cnt.assign(num_counts(), 0.0);
        w_cls.assign(num_fine() * feature_dim(), 0.0);
        b_cls.assign(num_fine(), 0.0);
    }

    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    ScaleRefinement scales;
    std::vector<double> w_shared, b_shared, w_cnt, b_cnt, w_cls, b_cls;

    std::size_t num_counts() const noexcept {
        return static_cast<std::size_t>(scales.coarse.z_max());
    }
    std::size_t num_fine() const noexcept { return scales.fine.num_grades(); }
    std::size_t num_coarse() const noexcept { return scales.coarse.num_grades(); }
    std::size_t feature_dim() const noexcept { return hidden_dim > 0 ? hidden_dim : input_dim; }
};

struct HeadLogits {
    Logits cnt;
    Logits cls;
};

/// Parameter-shaped gradient accumulator.
struct Gradients {
    std::vector<double> w_shared, b_shared, w_cnt, b_cnt, w_cls, b_cls;
};

struct Prediction {
    std::vector<double> count_dist;
    std::vector<double> fine_dist;
    std::vector<double> fused_grade_dist;
    std::size_t predicted_grade = 0;
    int predicted_count = 1;
};

struct TrainResult {
    TwoHeadModel model;
    std::vector<LossBreakdown> history;
};

namespace detail {

inline void affine(const std::vector<double>& w, const std::vector<double>& b,
                   std::span<const double> x, std::vector<double>& out) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

/// out[r][c] += g[r] * x[c], the rank-one weight gradient contribution.
inline void add_outer(std::vector<double>& out, const std::vector<double>& g,
                      std::span<const double> x) {
    const std::size_t cols = x.size();
    for (std::size_t r = 0; r < g.size(); ++r) {
        double* row = out.data() + r * cols;
        const double gr = g[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
    }
}

inline void add_to(std::vector<double>& out, const std::vector<double>& g) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
}

inline void axpy(std::vector<double>& params, double alpha, const std::vector<double>& g) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += alpha * g[i];
}

inline std::size_t argmax_low_tie(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace detail

/// Deterministic initialization: weights uniform in +-1/sqrt(fan_in) from the
/// seeded generator, biases zero. Same seed, same parameters, bit for bit.
inline TwoHeadModel init_model(std::size_t input_dim, std::size_t hidden_dim,
                               ScaleRefinement scales, std::uint64_t seed) {
    TwoHeadModel m(input_dim, hidden_dim, std::move(scales));
    Rng rng(seed);
    const auto fill = [&rng](std::vector<double>& w, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : w) v = rng.uniform(-bound, bound);
    };
    if (m.hidden_dim > 0) fill(m.w_shared, m.input_dim);
    fill(m.w_cnt, m.feature_dim());
    fill(m.w_cls, m.feature_dim());
    return m;
}

inline Gradients zero_gradients(const TwoHeadModel& m) {
    Gradients g;
    g.w_shared.assign(m.w_shared.size(), 0.0);
    g.b_shared.assign(m.b_shared.size(), 0.0);
    g.w_cnt.assign(m.w_cnt.size(), 0.0);
    g.b_cnt.assign(m.b_cnt.size(), 0.0);
    g.w_cls.assign(m.w_cls.size(), 0.0);
    g.b_cls.assign(m.b_cls.size(), 0.0);
    return g;
}

inline HeadLogits forward(const TwoHeadModel& m, std::span<const double> features) {
    detail::require(features.size() == m.input_dim, ErrorCode::dimension_mismatch,
                    "feature length " + std::to_string(features.size()) + " != input_dim " +
                        std::to_string(m.input_dim));
    for (double f : features) {
        detail::require(std::isfinite(f), ErrorCode::numeric, "feature is not finite");
    }
    HeadLogits out;
    if (m.hidden_dim == 0) {
        detail::affine(m.w_cnt, m.b_cnt, features, out.cnt);
        detail::affine(m.w_cls, m.b_cls, features, out.cls);
        return out;
    }
    std::vector<double> hidden;
    detail::affine(m.w_shared, m.b_shared, features, hidden);
    for (double& h : hidden) h = std::tanh(h);
    detail::affine(m.w_cnt, m.b_cnt, hidden, out.cnt);
    detail::affine(m.w_cls, m.b_cls, hidden, out.cls);
    return out;
}

/// Targets for one sample: the smoothed count label (schedule driven by the
/// coarse severity scale) and its aggregations onto both scales.
inline SampleTargets build_targets(int count, const ScaleRefinement& scales,
                                   const SmoothingParams& params) {
    SampleTargets t{smooth_label(count, scales.coarse, params), {}, {}};
    t.fine_target = aggregate(t.smoothed.values, scales.fine);
    t.coarse_target = aggregate(t.smoothed.values, scales.coarse);
    return t;
}

/// Loss and analytic parameter gradients for one sample.
inline std::pair<LossBreakdown, Gradients> backprop(const TwoHeadModel& m,
                                                    std::span<const double> features,
                                                    const SampleTargets& targets, double lambda) {
    detail::require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::invalid_argument,
                    "lambda must be in [0,1]");
    detail::require(targets.smoothed.values.size() == m.num_counts(),
                    ErrorCode::dimension_mismatch, "count target length mismatch");
    detail::require(targets.fine_target.size() == m.num_fine(), ErrorCode::dimension_mismatch,
                    "fine target length mismatch");
    detail::require(targets.coarse_target.size() == m.num_coarse(), ErrorCode::dimension_mismatch,
                    "coarse target length mismatch");

    // Forward pass, keeping the hidden activations for the backward pass.
    detail::require(features.size() == m.input_dim, ErrorCode::dimension_mismatch,
                    "feature length mismatch");
    std::vector<double> hidden;
    std::span<const double> feat = features;
    if (m.hidden_dim > 0) {
        detail::affine(m.w_shared, m.b_shared, features, hidden);
        for (double& h : hidden) h = std::tanh(h);
        feat = hidden;
    }
    Logits cnt_logits;
    Logits cls_logits;
    detail::affine(m.w_cnt, m.b_cnt, feat, cnt_logits);
    detail::affine(m.w_cls, m.b_cls, feat, cls_logits);

    const std::vector<double> p_cnt = softmax(cnt_logits);
    const std::vector<double> p_cls = softmax(cls_logits);
    const std::vector<double> pred_coarse = aggregate(p_cnt, m.scales.coarse);

    LossBreakdown loss;
    loss.lambda = lambda;
    loss.l_cnt = kl_div(targets.smoothed.values, p_cnt);
    loss.l_cls = kl_div(targets.fine_target, p_cls);
    loss.l_cnt2cls = kl_div(targets.coarse_target, pred_coarse);
    loss.total = (1.0 - lambda) * loss.l_cnt + 0.5 * lambda * (loss.l_cls + loss.l_cnt2cls);

    // Logit gradients. The count head takes both the direct KL term and the
    // aggregated count-to-class term.
    const std::vector<double> g_agg =
        detail::grad_cnt2cls_from_probs(p_cnt, targets.coarse_target, pred_coarse, m.scales.coarse);
    std::vector<double> g_cnt(p_cnt.size());
    for (std::size_t i = 0; i < g_cnt.size(); ++i) {
        g_cnt[i] = (1.0 - lambda) * (p_cnt[i] - targets.smoothed.values[i]) +
                   0.5 * lambda * g_agg[i];
    }
    std::vector<double> g_cls(p_cls.size());
    for (std::size_t i = 0; i < g_cls.size(); ++i) {
        g_cls[i] = 0.5 * lambda * (p_cls[i] - targets.fine_target[i]);
    }

    Gradients grads = zero_gradients(m);
    detail::add_outer(grads.w_cnt, g_cnt, feat);
    detail::add_to(grads.b_cnt, g_cnt);
    detail::add_outer(grads.w_cls, g_cls, feat);
    detail::add_to(grads.b_cls, g_cls);

    if (m.hidden_dim > 0) {
        std::vector<double> d_hidden(m.hidden_dim, 0.0);
        for (std::size_t r = 0; r < g_cnt.size(); ++r) {
            const double* wr = m.w_cnt.data() + r * m.hidden_dim;
            for (std::size_t c = 0; c < m.hidden_dim; ++c) d_hidden[c] += wr[c] * g_cnt[r];
        }
        for (std::size_t r = 0; r < g_cls.size(); ++r) {
            const double* wr = m.w_cls.data() + r * m.hidden_dim;
            for (std::size_t c = 0; c < m.hidden_dim; ++c) d_hidden[c] += wr[c] * g_cls[r];
        }
        for (std::size_t c = 0; c < m.hidden_dim; ++c) {
            d_hidden[c] *= 1.0 - hidden[c] * hidden[c];
        }
        detail::add_outer(grads.w_shared, d_hidden, features);
        detail::add_to(grads.b_shared, d_hidden);
    }
    return {loss, grads};
}

/// Mini-batch gradient descent on the mean combined loss. Deterministic for
/// a given seed: the shuffle sequence, batch order and arithmetic are all
/// fixed. history[e] holds the mean per-sample loss seen during epoch e.
inline TrainResult train(TwoHeadModel model, const Dataset& data, const TrainConfig& config) {
    detail::require(!data.empty(), ErrorCode::validation, "dataset is empty");
    detail::require(config.learning_rate >= 0.0, ErrorCode::invalid_argument,
                    "learning_rate must be >= 0");
    detail::require(config.batch_size >= 1, ErrorCode::invalid_argument,
                    "batch_size must be >= 1");
    detail::require(config.lambda >= 0.0 && config.lambda <= 1.0, ErrorCode::invalid_argument,
                    "lambda must be in [0,1]");
    detail::require(config.sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
    detail::require(config.eps_min >= 0.0 && config.eps_min <= 1.0, ErrorCode::invalid_argument,
                    "eps_min must be in [0,1]");
    detail::require(data.z_max == model.scales.coarse.z_max(), ErrorCode::dimension_mismatch,
                    "dataset z_max does not match the model scales");

    const SmoothingParams params{config.sigma, config.eps_min};
    std::vector<SampleTargets> targets;
    targets.reserve(data.size());
    for (const auto& s : data.samples) {
        detail::require(s.features.size() == model.input_dim, ErrorCode::dimension_mismatch,
                        "sample '" + s.id + "' feature length does not match input_dim");
        detail::require(s.count >= 1 && s.count <= data.z_max, ErrorCode::validation,
                        "sample '" + s.id + "' count outside 1.." + std::to_string(data.z_max));
        targets.push_back(build_targets(s.count, model.scales, params));
    }

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(config.seed);

    TrainResult result{std::move(model), {}};
    result.history.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double sum_cnt = 0.0;
        double sum_cls = 0.0;
        double sum_c2c = 0.0;
        try {
            for (std::size_t start = 0; start < n; start += config.batch_size) {
                const std::size_t stop = std::min(n, start + config.batch_size);
                Gradients acc = zero_gradients(result.model);
                for (std::size_t k = start; k < stop; ++k) {
                    const std::size_t i = order[k];
                    auto [loss, grads] = backprop(result.model, data.samples[i].features,
                                                  targets[i], config.lambda);
                    sum_cnt += loss.l_cnt;
                    sum_cls += loss.l_cls;
                    sum_c2c += loss.l_cnt2cls;
                    detail::add_to(acc.w_shared, grads.w_shared);
                    detail::add_to(acc.b_shared, grads.b_shared);
                    detail::add_to(acc.w_cnt, grads.w_cnt);
                    detail::add_to(acc.b_cnt, grads.b_cnt);
                    detail::add_to(acc.w_cls, grads.w_cls);
                    detail::add_to(acc.b_cls, grads.b_cls);
                }
                const double step =
                    -config.learning_rate / static_cast<double>(stop - start);
                detail::axpy(result.model.w_shared, step, acc.w_shared);
                detail::axpy(result.model.b_shared, step, acc.b_shared);
                detail::axpy(result.model.w_cnt, step, acc.w_cnt);
                detail::axpy(result.model.b_cnt, step, acc.b_cnt);
                detail::axpy(result.model.w_cls, step, acc.w_cls);
                detail::axpy(result.model.b_cls, step, acc.b_cls);
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::divergence_infinite || e.code() == ErrorCode::numeric) {
                detail::fail(ErrorCode::training_diverged,
                             "training diverged at epoch " + std::to_string(epoch) + " (" +
                                 e.what() + ")");
            }
            throw;
        }
        LossBreakdown epoch_loss;
        epoch_loss.lambda = config.lambda;
        epoch_loss.l_cnt = sum_cnt / static_cast<double>(n);
        epoch_loss.l_cls = sum_cls / static_cast<double>(n);
        epoch_loss.l_cnt2cls = sum_c2c / static_cast<double>(n);
        epoch_loss.total = (1.0 - config.lambda) * epoch_loss.l_cnt +
                           0.5 * config.lambda * (epoch_loss.l_cls + epoch_loss.l_cnt2cls);
        detail::require(std::isfinite(epoch_loss.total), ErrorCode::training_diverged,
                        "training diverged at epoch " + std::to_string(epoch) +
                            " (non-finite loss)");
        result.history.push_back(epoch_loss);
    }
    return result;
}

/// Fused prediction: the count head aggregated to coarse grades is averaged
/// with the fine head coarsened through the refinement, equal weights.
/// Argmax ties break toward the lower grade / lower count.
inline Prediction predict(const TwoHeadModel& m, std::span<const double> features) {
    const HeadLogits logits = forward(m, features);
    Prediction pr;
    pr.count_dist = softmax(logits.cnt);
    pr.fine_dist = softmax(logits.cls);
    const std::vector<double> from_counts = aggregate(pr.count_dist, m.scales.coarse);
    const std::vector<double> from_fine = coarsen(pr.fine_dist, m.scales);
    pr.fused_grade_dist.resize(m.num_coarse());
    for (std::size_t g = 0; g < pr.fused_grade_dist.size(); ++g) {
        pr.fused_grade_dist[g] = 0.5 * (from_counts[g] + from_fine[g]);
    }
    pr.predicted_grade = detail::argmax_low_tie(pr.fused_grade_dist);
    pr.predicted_count = static_cast<int>(detail::argmax_low_tie(pr.count_dist)) + 1;
    return pr;
}

struct EvalResult {
    ConfusionMatrix confusion;
    MetricsReport metrics;
    double count_mae = 0.0;
};

/// Runs predict over the dataset, builds the coarse-grade confusion from
/// fused predictions and reports metrics plus the count MAE.
inline EvalResult evaluate(const TwoHeadModel& m, const Dataset& data) {
    detail::require(!data.empty(), ErrorCode::validation, "dataset is empty");
    detail::require(data.z_max == m.scales.coarse.z_max(), ErrorCode::dimension_mismatch,
                    "dataset z_max does not match the model scales");
    std::vector<std::size_t> truth;
    std::vector<std::size_t> predicted;
    truth.reserve(data.size());
    predicted.reserve(data.size());
    double abs_err = 0.0;
    for (const auto& s : data.samples) {
        const Prediction pr = predict(m, s.features);
        truth.push_back(m.scales.coarse.grade_of(s.count));
        predicted.push_back(pr.predicted_grade);
        abs_err += std::abs(pr.predicted_count - s.count);
    }
    EvalResult out{confusion(truth, predicted, m.num_coarse()), {}, 0.0};
    out.metrics = report(out.confusion);
    out.count_mae = abs_err / static_cast<double>(data.size());
    return out;
}

}  // namespace sals
