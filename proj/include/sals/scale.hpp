#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sals/error.hpp"

namespace sals {

/// One contiguous block of lesion counts carrying a single grade label.
struct GradeRange {
    int lo = 1;
    int hi = 1;
    std::string label;
};

/// An ordered partition of the counts 1..z_max into grade ranges. The
/// constructor validates contiguity and full coverage; instances are
/// immutable afterwards and safe to share across threads.
class GradingScale {
public:
    GradingScale(std::string name, int z_max, std::vector<GradeRange> ranges)
        : name_(std::move(name)), z_max_(z_max), ranges_(std::move(ranges)) {
        detail::require(z_max_ >= 1, ErrorCode::invalid_scale, "z_max must be >= 1");
        detail::require(!ranges_.empty(), ErrorCode::invalid_scale, "scale has no ranges");
        int expected_lo = 1;
        for (const auto& r : ranges_) {
            detail::require(r.lo == expected_lo, ErrorCode::invalid_scale,
                            "ranges must be contiguous from 1 (got lo=" + std::to_string(r.lo) +
                                ", expected " + std::to_string(expected_lo) + ")");
            detail::require(r.lo <= r.hi, ErrorCode::invalid_scale,
                            "range [" + std::to_string(r.lo) + "," + std::to_string(r.hi) +
                                "] is empty");
            expected_lo = r.hi + 1;
        }
        detail::require(ranges_.back().hi == z_max_, ErrorCode::invalid_scale,
                        "last range must end at z_max=" + std::to_string(z_max_));
        grade_by_count_.resize(static_cast<std::size_t>(z_max_));
        for (std::size_t g = 0; g < ranges_.size(); ++g) {
            for (int c = ranges_[g].lo; c <= ranges_[g].hi; ++c) {
                grade_by_count_[static_cast<std::size_t>(c) - 1] = g;
            }
        }
    }

    const std::string& name() const noexcept { return name_; }
    int z_max() const noexcept { return z_max_; }
    std::size_t num_grades() const noexcept { return ranges_.size(); }
    const std::vector<GradeRange>& ranges() const noexcept { return ranges_; }

    const GradeRange& range(std::size_t grade) const {
        detail::require(grade < ranges_.size(), ErrorCode::out_of_range,
                        "grade index " + std::to_string(grade) + " out of range");
        return ranges_[grade];
    }

    /// Index of the grade whose range contains `count`.
    std::size_t grade_of(int count) const {
        detail::require(count >= 1 && count <= z_max_, ErrorCode::out_of_range,
                        "count " + std::to_string(count) + " outside 1.." + std::to_string(z_max_));
        return grade_by_count_[static_cast<std::size_t>(count) - 1];
    }

private:
    std::string name_;
    int z_max_ = 0;
    std::vector<GradeRange> ranges_;
    std::vector<std::size_t> grade_by_count_;
};

/// Four-grade clinical scale: 1-5 mild, 6-20 moderate, 21-50 severe and
/// 51..z_max very severe. z_max must be at least 51 so the top grade is
/// non-empty.
inline GradingScale hayashi_scale(int z_max) {
    detail::require(z_max >= 51, ErrorCode::invalid_scale,
                    "hayashi scale needs z_max >= 51, got " + std::to_string(z_max) +
                        " (top grade would be empty)");
    return GradingScale("hayashi", z_max,
                        {{1, 5, "mild"},
                         {6, 20, "moderate"},
                         {21, 50, "severe"},
                         {51, z_max, "very severe"}});
}

/// Evenly re-binned scale with exactly `width` counts per grade; `width`
/// must divide z_max.
inline GradingScale uniform_scale(int z_max, int width) {
    detail::require(width >= 1, ErrorCode::invalid_scale, "width must be >= 1");
    detail::require(z_max >= 1 && z_max % width == 0, ErrorCode::invalid_scale,
                    "width " + std::to_string(width) + " does not divide z_max " +
                        std::to_string(z_max));
    std::vector<GradeRange> ranges;
    ranges.reserve(static_cast<std::size_t>(z_max / width));
    for (int lo = 1; lo <= z_max; lo += width) {
        const int hi = lo + width - 1;
        ranges.push_back({lo, hi, std::to_string(lo) + "-" + std::to_string(hi)});
    }
    return GradingScale("uniform" + std::to_string(width), z_max, std::move(ranges));
}

/// Map from each fine grade to the coarse grade that fully contains it.
struct ScaleRefinement {
    GradingScale fine;
    GradingScale coarse;
    std::vector<std::size_t> fine_to_coarse;
};

/// Sum a per-count probability vector into per-grade masses.
inline std::vector<double> aggregate(const std::vector<double>& dist, const GradingScale& scale) {
    detail::require(dist.size() == static_cast<std::size_t>(scale.z_max()),
                    ErrorCode::dimension_mismatch,
                    "distribution length " + std::to_string(dist.size()) +
                        " does not match z_max " + std::to_string(scale.z_max()));
    double sum = 0.0;
    for (double v : dist) {
        detail::require(v >= 0.0, ErrorCode::validation, "distribution has a negative entry");
        sum += v;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::validation,
                    "distribution does not sum to 1 within 1e-9");
    std::vector<double> out(scale.num_grades(), 0.0);
    for (int c = 1; c <= scale.z_max(); ++c) {
        out[scale.grade_of(c)] += dist[static_cast<std::size_t>(c) - 1];
    }
    return out;
}

/// Build the fine-to-coarse mapping; fails if any fine range straddles a
/// coarse boundary, which would make aggregation ambiguous.
inline ScaleRefinement refine(const GradingScale& fine, const GradingScale& coarse) {
    detail::require(fine.z_max() == coarse.z_max(), ErrorCode::incompatible_scales,
                    "scales cover different count ranges (z_max " +
                        std::to_string(fine.z_max()) + " vs " + std::to_string(coarse.z_max()) +
                        ")");
    std::vector<std::size_t> mapping;
    mapping.reserve(fine.num_grades());
    for (const auto& r : fine.ranges()) {
        const std::size_t g_lo = coarse.grade_of(r.lo);
        const std::size_t g_hi = coarse.grade_of(r.hi);
        detail::require(g_lo == g_hi, ErrorCode::incompatible_scales,
                        "fine range [" + std::to_string(r.lo) + "," + std::to_string(r.hi) +
                            "] straddles a coarse grade boundary");
        mapping.push_back(g_lo);
    }
    return ScaleRefinement{fine, coarse, std::move(mapping)};
}

/// Sum a fine-grade simplex into coarse grades per the refinement mapping.
inline std::vector<double> coarsen(const std::vector<double>& fine_dist,
                                   const ScaleRefinement& refinement) {
    detail::require(fine_dist.size() == refinement.fine.num_grades(),
                    ErrorCode::dimension_mismatch,
                    "fine distribution length " + std::to_string(fine_dist.size()) +
                        " does not match " + std::to_string(refinement.fine.num_grades()) +
                        " fine grades");
    std::vector<double> out(refinement.coarse.num_grades(), 0.0);
    for (std::size_t i = 0; i < fine_dist.size(); ++i) {
        out[refinement.fine_to_coarse[i]] += fine_dist[i];
    }
    return out;
}

}  // namespace sals
