#include "limbnet/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace limbnet {

std::int64_t ConfusionMatrix::row_sum(std::size_t r) const {
    std::int64_t s = 0;
    for (std::size_t c = 0; c < n_classes; ++c) s += at(r, c);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t c) const {
    std::int64_t s = 0;
    for (std::size_t r = 0; r < n_classes; ++r) s += at(r, c);
    return s;
}

std::int64_t ConfusionMatrix::diagonal() const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n_classes; ++i) s += at(i, i);
    return s;
}

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& m) {
    const std::int64_t total = m.total();
    if (total <= 0) throw std::invalid_argument("metrics: confusion matrix is empty");
    for (std::int64_t c : m.counts)
        if (c < 0) throw std::invalid_argument("metrics: negative confusion count");

    MetricsReport rep;
    const std::size_t n = m.n_classes;
    rep.precision_pct.resize(n);
    rep.recall_pct.resize(n);
    rep.f1_pct.resize(n);

    double recall_sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const double tp = static_cast<double>(m.at(c, c));
        const std::int64_t col = m.col_sum(c);
        const std::int64_t row = m.row_sum(c);

        double precision = 0.0;
        if (col > 0) precision = tp / static_cast<double>(col);
        else rep.zero_denominator = true;

        double recall = 0.0;
        if (row > 0) recall = tp / static_cast<double>(row);
        else rep.zero_denominator = true;

        double f1 = 0.0;
        if (precision + recall > 0.0) f1 = 2.0 * precision * recall / (precision + recall);
        else rep.zero_denominator = true;

        rep.precision_pct[c] = 100.0 * precision;
        rep.recall_pct[c] = 100.0 * recall;
        rep.f1_pct[c] = 100.0 * f1;
        recall_sum += recall;
    }

    rep.accuracy_pct = 100.0 * static_cast<double>(m.diagonal()) / static_cast<double>(total);
    rep.balanced_accuracy_pct = 100.0 * recall_sum / static_cast<double>(n);
    return rep;
}

RocCurve roc_from_scores(const std::vector<double>& scores,
                         const std::vector<bool>& is_positive, int class_index) {
    if (scores.size() != is_positive.size())
        throw std::invalid_argument("roc: scores/labels length mismatch");
    std::int64_t n_pos = 0, n_neg = 0;
    for (bool p : is_positive) (p ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc: class " + std::to_string(class_index) +
                                    " needs both positive and negative examples");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.class_index = class_index;
    curve.points.push_back({0.0, 0.0});
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());

    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    double auc = 0.0;
    while (i < order.size()) {
        const double score = scores[order[i]];
        // One step per distinct score: consume the whole tie group.
        while (i < order.size() && scores[order[i]] == score) {
            (is_positive[order[i]] ? tp : fp)++;
            ++i;
        }
        const RocPoint prev = curve.points.back();
        RocPoint pt{static_cast<double>(fp) / static_cast<double>(n_neg),
                    static_cast<double>(tp) / static_cast<double>(n_pos)};
        auc += (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr) / 2.0;
        curve.points.push_back(pt);
        curve.thresholds.push_back(score);
    }
    curve.auc = auc;
    return curve;
}

RocCurve roc_auc(const std::vector<ClassProbs>& probs, const std::vector<int>& labels,
                 int positive_class) {
    if (probs.size() != labels.size())
        throw std::invalid_argument("roc: probs/labels length mismatch");
    std::vector<double> scores(probs.size());
    std::vector<bool> pos(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (static_cast<std::size_t>(positive_class) >= probs[i].probabilities.size())
            throw std::invalid_argument("roc: class index out of range");
        scores[i] = probs[i].probabilities[static_cast<std::size_t>(positive_class)];
        pos[i] = labels[i] == positive_class;
    }
    return roc_from_scores(scores, pos, positive_class);
}

}  // namespace limbnet
