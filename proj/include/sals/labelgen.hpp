#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sals/error.hpp"
#include "sals/scale.hpp"

namespace sals {

/// Probability vector over lesion counts 1..Z; values[c-1] is the
/// description degree assigned to count c.
struct CountLabelDistribution {
    std::vector<double> values;

    double at(int count) const { return values.at(static_cast<std::size_t>(count) - 1); }
    int max_count() const noexcept { return static_cast<int>(values.size()); }

    /// Count with the largest degree; the lower count wins ties.
    int argmax_count() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (values[i] > values[best]) best = i;
        }
        return static_cast<int>(best) + 1;
    }
};

struct SmoothingParams {
    double sigma = 3.0;
    double eps_min = 0.6;
};

/// Gaussian description degrees centred on z, truncated to the counts 1..Z
/// and renormalized over exactly those Z support points.
inline CountLabelDistribution gaussian_ldl(int z, double sigma, const GradingScale& scale) {
    detail::require(z >= 1 && z <= scale.z_max(), ErrorCode::out_of_range,
                    "count " + std::to_string(z) + " outside 1.." + std::to_string(scale.z_max()));
    detail::require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
    const std::size_t n = static_cast<std::size_t>(scale.z_max());
    std::vector<double> values(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dc = static_cast<double>(i + 1) - static_cast<double>(z);
        values[i] = std::exp(-(dc * dc) / (2.0 * sigma * sigma));
        sum += values[i];
    }
    for (double& v : values) v /= sum;
    return CountLabelDistribution{std::move(values)};
}

/// Classic label smoothing: (1-eps) on the ground-truth class plus eps/K
/// spread over all K classes.
inline std::vector<double> uniform_smooth(std::size_t gt, std::size_t num_classes, double eps) {
    detail::require(num_classes >= 1, ErrorCode::invalid_argument, "need at least one class");
    detail::require(gt < num_classes, ErrorCode::out_of_range,
                    "ground-truth class " + std::to_string(gt) + " outside 0.." +
                        std::to_string(num_classes - 1));
    detail::require(eps >= 0.0 && eps <= 1.0, ErrorCode::invalid_argument,
                    "eps must be in [0,1]");
    std::vector<double> out(num_classes, eps / static_cast<double>(num_classes));
    out[gt] += 1.0 - eps;
    return out;
}

/// Piecewise-linear smoothing weight over the grade range containing
/// `count`: exactly 1 at both range boundaries, eps_min at the range
/// midpoint, linear in between. A width-1 range yields 1.
inline double epsilon_schedule(int count, const GradingScale& scale, double eps_min) {
    detail::require(eps_min >= 0.0 && eps_min <= 1.0, ErrorCode::invalid_argument,
                    "eps_min must be in [0,1]");
    const GradeRange& r = scale.range(scale.grade_of(count));
    if (count == r.lo || count == r.hi) return 1.0;
    const double mid = 0.5 * (static_cast<double>(r.lo) + static_cast<double>(r.hi));
    const double half_width = mid - static_cast<double>(r.lo);
    return eps_min + (1.0 - eps_min) * std::abs(static_cast<double>(count) - mid) / half_width;
}

/// Scale-adaptive smoothed label: a convex mix of the one-hot count label
/// and its Gaussian distribution, weighted by the schedule value at z.
inline CountLabelDistribution smooth_label(int z, const GradingScale& scale,
                                           const SmoothingParams& params) {
    CountLabelDistribution d = gaussian_ldl(z, params.sigma, scale);
    const double eps = epsilon_schedule(z, scale, params.eps_min);
    for (double& v : d.values) v *= eps;
    d.values[static_cast<std::size_t>(z) - 1] += 1.0 - eps;
    return d;
}

/// Shannon entropy in nats; zero entries contribute zero.
inline double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

}  // namespace sals
