#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "limbnet/model.hpp"

namespace limbnet {

// ======================================================================
// Confusion matrix: rows = true class, columns = predicted class
// ======================================================================

struct ConfusionMatrix {
    std::size_t n_classes = 3;
    std::vector<std::int64_t> counts;  // row-major n×n

    ConfusionMatrix() : counts(9, 0) {}
    explicit ConfusionMatrix(std::size_t n) : n_classes(n), counts(n * n, 0) {}

    std::int64_t& at(std::size_t true_c, std::size_t pred_c) {
        return counts[true_c * n_classes + pred_c];
    }
    std::int64_t at(std::size_t true_c, std::size_t pred_c) const {
        return counts[true_c * n_classes + pred_c];
    }
    std::int64_t row_sum(std::size_t r) const;
    std::int64_t col_sum(std::size_t c) const;
    std::int64_t diagonal() const;
    std::int64_t total() const;
};

// ======================================================================
// Scalar metrics
// ======================================================================

// Percentages are in [0,100]; AUC entries in [0,1]. A class with an empty
// row/column gets 0 for the affected metric and raises zero_denominator.
struct MetricsReport {
    std::vector<double> precision_pct;
    std::vector<double> recall_pct;
    std::vector<double> f1_pct;
    double accuracy_pct = 0.0;
    double balanced_accuracy_pct = 0.0;  // mean of per-class recalls, pre-rounding
    std::vector<double> auc;             // filled by the ROC pass; empty otherwise
    bool zero_denominator = false;
};

// Throws std::invalid_argument on an all-zero matrix. AUC is left empty.
MetricsReport metrics_from_confusion(const ConfusionMatrix& m);

// ======================================================================
// One-vs-rest ROC
// ======================================================================

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    int class_index = 0;
    // points[0] = (0,0) at threshold +inf; last point = (1,1). Equal scores
    // collapse into one step, so trapezoidal AUC matches the pairwise
    // ordering count with ties worth one half.
    std::vector<double> thresholds;  // same length as points
    std::vector<RocPoint> points;
    double auc = 0.0;
};

// scores[i] is the positive-class score of frame i. Throws
// std::invalid_argument unless both positives and negatives are present.
RocCurve roc_from_scores(const std::vector<double>& scores,
                         const std::vector<bool>& is_positive, int class_index);

// One-vs-rest over the class-c probability column of per-frame outputs.
RocCurve roc_auc(const std::vector<ClassProbs>& probs, const std::vector<int>& labels,
                 int positive_class);

}  // namespace limbnet
