#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sals/error.hpp"

namespace sals {

/// Row-major confusion counts; rows are true grades, columns predictions.
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::int64_t> counts;

    std::int64_t& at(std::size_t true_grade, std::size_t predicted_grade) {
        return counts[true_grade * num_classes + predicted_grade];
    }
    std::int64_t at(std::size_t true_grade, std::size_t predicted_grade) const {
        return counts[true_grade * num_classes + predicted_grade];
    }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto v : counts) t += v;
        return t;
    }
    std::int64_t trace() const {
        std::int64_t t = 0;
        for (std::size_t k = 0; k < num_classes; ++k) t += at(k, k);
        return t;
    }
    std::int64_t row_sum(std::size_t k) const {
        std::int64_t t = 0;
        for (std::size_t j = 0; j < num_classes; ++j) t += at(k, j);
        return t;
    }
    std::int64_t col_sum(std::size_t k) const {
        std::int64_t t = 0;
        for (std::size_t i = 0; i < num_classes; ++i) t += at(i, k);
        return t;
    }
};

inline ConfusionMatrix confusion(const std::vector<std::size_t>& true_grades,
                                 const std::vector<std::size_t>& predicted_grades,
                                 std::size_t num_grades) {
    detail::require(true_grades.size() == predicted_grades.size(), ErrorCode::dimension_mismatch,
                    "true/predicted lists differ in length");
    detail::require(num_grades >= 1, ErrorCode::invalid_argument, "need at least one grade");
    ConfusionMatrix cm{num_grades, std::vector<std::int64_t>(num_grades * num_grades, 0)};
    for (std::size_t i = 0; i < true_grades.size(); ++i) {
        detail::require(true_grades[i] < num_grades && predicted_grades[i] < num_grades,
                        ErrorCode::out_of_range,
                        "grade out of range at sample " + std::to_string(i));
        ++cm.at(true_grades[i], predicted_grades[i]);
    }
    return cm;
}

/// Scalar classification metrics. accuracy/precision/specificity/sensitivity
/// and youden are fractions in [0,1]; mcc is in [-1,1]. Degenerate per-class
/// denominators contribute 0 to the macro average and add a warning entry.
struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double specificity = 0.0;
    double sensitivity = 0.0;
    double youden = 0.0;
    double mcc = 0.0;
    std::vector<std::string> warnings;
};

/// Macro-averaged one-vs-rest metrics plus the multi-class MCC in its
/// confusion-matrix covariance form.
inline MetricsReport report(const ConfusionMatrix& cm) {
    const double total = static_cast<double>(cm.total());
    detail::require(total > 0.0, ErrorCode::validation, "confusion matrix is empty");
    const std::size_t k_classes = cm.num_classes;

    MetricsReport rep;
    rep.accuracy = static_cast<double>(cm.trace()) / total;

    double prec_sum = 0.0;
    double sens_sum = 0.0;
    double spec_sum = 0.0;
    for (std::size_t k = 0; k < k_classes; ++k) {
        const double tp = static_cast<double>(cm.at(k, k));
        const double row = static_cast<double>(cm.row_sum(k));
        const double col = static_cast<double>(cm.col_sum(k));
        const double fn = row - tp;
        const double fp = col - tp;
        const double tn = total - row - col + tp;
        if (tp + fp > 0.0) {
            prec_sum += tp / (tp + fp);
        } else {
            rep.warnings.push_back("class " + std::to_string(k) +
                                   " has no predicted positives; precision counted as 0");
        }
        if (tp + fn > 0.0) {
            sens_sum += tp / (tp + fn);
        } else {
            rep.warnings.push_back("class " + std::to_string(k) +
                                   " has no true positives; sensitivity counted as 0");
        }
        if (tn + fp > 0.0) {
            spec_sum += tn / (tn + fp);
        } else {
            rep.warnings.push_back("class " + std::to_string(k) +
                                   " has no true negatives; specificity counted as 0");
        }
    }
    rep.precision = prec_sum / static_cast<double>(k_classes);
    rep.sensitivity = sens_sum / static_cast<double>(k_classes);
    rep.specificity = spec_sum / static_cast<double>(k_classes);
    rep.youden = rep.sensitivity + rep.specificity - 1.0;

    // Multi-class MCC, covariance form over the full matrix.
    const double c = static_cast<double>(cm.trace());
    const double s = total;
    double pt = 0.0;
    double pp = 0.0;
    double tt = 0.0;
    for (std::size_t k = 0; k < k_classes; ++k) {
        const double p_k = static_cast<double>(cm.col_sum(k));
        const double t_k = static_cast<double>(cm.row_sum(k));
        pt += p_k * t_k;
        pp += p_k * p_k;
        tt += t_k * t_k;
    }
    const double denom = std::sqrt((s * s - pp) * (s * s - tt));
    rep.mcc = denom > 0.0 ? (c * s - pt) / denom : 0.0;
    return rep;
}

/// Plain CSV dump of the counts, one row of comma-separated integers per
/// true grade.
inline std::string confusion_csv(const ConfusionMatrix& cm) {
    std::string out;
    for (std::size_t i = 0; i < cm.num_classes; ++i) {
        for (std::size_t j = 0; j < cm.num_classes; ++j) {
            if (j > 0) out += ',';
            out += std::to_string(cm.at(i, j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace sals
