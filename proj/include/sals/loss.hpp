#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sals/error.hpp"
#include "sals/labelgen.hpp"
#include "sals/scale.hpp"

namespace sals {

/// Unnormalized per-class scores.
using Logits = std::vector<double>;

/// Per-sample targets for the multi-task objective: the smoothed count
/// distribution and its aggregations onto the fine and coarse scales.
struct SampleTargets {
    CountLabelDistribution smoothed;
    std::vector<double> fine_target;
    std::vector<double> coarse_target;
};

struct LossBreakdown {
    double l_cnt = 0.0;
    double l_cls = 0.0;
    double l_cnt2cls = 0.0;
    double total = 0.0;
    double lambda = 0.0;
};

/// Numerically stabilized softmax (max subtraction), so any finite input is
/// safe. Non-finite entries raise a numeric error.
inline std::vector<double> softmax(const Logits& logits) {
    detail::require(!logits.empty(), ErrorCode::dimension_mismatch, "softmax of empty vector");
    double max_v = logits[0];
    for (double v : logits) {
        detail::require(std::isfinite(v), ErrorCode::numeric, "softmax input is not finite");
        max_v = std::max(max_v, v);
    }
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_v);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

/// KL divergence sum_k target_k ln(target_k / pred_k), with the convention
/// 0 ln(0/p) = 0. A positive target entry over a zero prediction raises a
/// divergence-infinite error rather than returning a sentinel.
inline double kl_div(const std::vector<double>& target, const std::vector<double>& pred) {
    detail::require(target.size() == pred.size(), ErrorCode::dimension_mismatch,
                    "kl_div lengths differ (" + std::to_string(target.size()) + " vs " +
                        std::to_string(pred.size()) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] <= 0.0) continue;
        detail::require(pred[i] > 0.0, ErrorCode::divergence_infinite,
                        "target has mass at index " + std::to_string(i) +
                            " where prediction is zero");
        acc += target[i] * std::log(target[i] / pred[i]);
    }
    return std::max(0.0, acc);
}

/// Counting-branch loss: KL of the smoothed count label against the
/// softmax of the count logits.
inline double loss_cnt(const CountLabelDistribution& smoothed, const Logits& logits) {
    return kl_div(smoothed.values, softmax(logits));
}

/// Severity-branch loss: KL of the fine-grade target against the softmax
/// of the class logits.
inline double loss_cls(const std::vector<double>& target, const Logits& logits) {
    return kl_div(target, softmax(logits));
}

/// Count-to-class loss: both the smoothed label and the predicted count
/// distribution are aggregated onto `scale` before the KL.
inline double loss_cnt2cls(const CountLabelDistribution& smoothed, const Logits& cnt_logits,
                           const GradingScale& scale) {
    return kl_div(aggregate(smoothed.values, scale), aggregate(softmax(cnt_logits), scale));
}

/// Multi-task objective: (1-lambda) L_cnt + lambda/2 (L_cls + L_cnt2cls).
inline LossBreakdown combined_loss(const SampleTargets& targets, const Logits& cnt_logits,
                                   const Logits& cls_logits, const GradingScale& coarse,
                                   double lambda) {
    detail::require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::invalid_argument,
                    "lambda must be in [0,1]");
    LossBreakdown b;
    b.lambda = lambda;
    b.l_cnt = loss_cnt(targets.smoothed, cnt_logits);
    b.l_cls = loss_cls(targets.fine_target, cls_logits);
    b.l_cnt2cls = kl_div(targets.coarse_target, aggregate(softmax(cnt_logits), coarse));
    b.total = (1.0 - lambda) * b.l_cnt + 0.5 * lambda * (b.l_cls + b.l_cnt2cls);
    return b;
}

/// Gradient of kl_div(target, softmax(logits)) in the logits: softmax - target.
inline std::vector<double> grad_kl_wrt_logits(const std::vector<double>& target,
                                              const Logits& logits) {
    detail::require(target.size() == logits.size(), ErrorCode::dimension_mismatch,
                    "gradient lengths differ");
    std::vector<double> out = softmax(logits);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= target[i];
    return out;
}

namespace detail {

/// Core of the aggregated-loss gradient, shared with model backprop: given
/// p = softmax(logits) and the two aggregated simplexes, computes
/// p (g - <p, g>) with g_c = -Q_{grade(c)} / P_{grade(c)}.
inline std::vector<double> grad_cnt2cls_from_probs(const std::vector<double>& p,
                                                   const std::vector<double>& target_grades,
                                                   const std::vector<double>& pred_grades,
                                                   const GradingScale& scale) {
    std::vector<double> ratio(scale.num_grades(), 0.0);
    for (std::size_t g = 0; g < ratio.size(); ++g) {
        if (target_grades[g] <= 0.0) continue;
        require(pred_grades[g] > 0.0, ErrorCode::divergence_infinite,
                "target grade " + std::to_string(g) + " has mass but zero predicted mass");
        ratio[g] = -target_grades[g] / pred_grades[g];
    }
    std::vector<double> out(p.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = ratio[scale.grade_of(static_cast<int>(i) + 1)];
        dot += p[i] * out[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = p[i] * (out[i] - dot);
    }
    return out;
}

}  // namespace detail

/// Gradient of loss_cnt2cls in the count logits, chained through the
/// aggregation.
inline std::vector<double> grad_cnt2cls_wrt_logits(const CountLabelDistribution& smoothed,
                                                   const Logits& cnt_logits,
                                                   const GradingScale& scale) {
    const std::vector<double> p = softmax(cnt_logits);
    return detail::grad_cnt2cls_from_probs(p, aggregate(smoothed.values, scale),
                                           aggregate(p, scale), scale);
}

}  // namespace sals
