#include "recompress/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "recompress/errors.hpp"

namespace recompress {

namespace {

double f1_from_counts(long tp, long fp, long fn) {
    const long denom = 2 * tp + fp + fn;
    return denom > 0 ? 2.0 * tp / denom : 0.0;
}

} // namespace

double pixel_f1(const Heatmap& h, const BinaryMask& gt, double threshold) {
    if (h.values.rows() != gt.pixels.rows() || h.values.cols() != gt.pixels.cols())
        throw ShapeMismatch("heatmap and ground truth must share one geometry");
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        const bool pred = h.values.data()[i] >= threshold;
        const bool truth = gt.pixels.data()[i] != 0;
        if (pred && truth) ++tp;
        else if (pred) ++fp;
        else if (truth) ++fn;
    }
    return f1_from_counts(tp, fp, fn);
}

std::pair<double, double> best_threshold_f1(const Heatmap& h, const BinaryMask& gt) {
    if (h.values.rows() != gt.pixels.rows() || h.values.cols() != gt.pixels.cols())
        throw ShapeMismatch("heatmap and ground truth must share one geometry");
    const std::size_t n = h.values.size();
    // Sort pixels by heatmap value descending; sweeping a threshold down the
    // distinct values then gives TP/FP by prefix sums.
    std::vector<std::pair<double, bool>> items(n);
    long positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool truth = gt.pixels.data()[i] != 0;
        items[i] = {h.values.data()[i], truth};
        positives += truth;
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    // Candidate thresholds: every distinct value plus 0 and 1.
    double best_f1 = -1.0, best_thr = 1.0;
    auto consider = [&](double thr, long tp, long pred_pos) {
        const long fp = pred_pos - tp;
        const long fn = positives - tp;
        const double f1 = f1_from_counts(tp, fp, fn);
        // Strictly-better keeps the first (i.e. highest-F1) candidate; among
        // equals prefer the lower threshold, so keep scanning with >=? No:
        // thresholds are visited in descending order, so replace on >= to end
        // at the lowest tying threshold.
        if (f1 > best_f1 || (f1 == best_f1 && thr < best_thr)) {
            best_f1 = f1;
            best_thr = thr;
        }
    };
    consider(1.0, 0, 0); // prediction empty unless some value reaches 1
    long tp = 0;
    std::size_t i = 0;
    while (i < n) {
        const double value = items[i].first;
        std::size_t j = i;
        while (j < n && items[j].first == value) {
            tp += items[j].second;
            ++j;
        }
        if (value < 1.0) // threshold == value predicts everything >= value
            consider(value, tp, static_cast<long>(j));
        else
            consider(1.0, tp, static_cast<long>(j));
        i = j;
    }
    consider(0.0, tp, static_cast<long>(n)); // all-positive prediction
    return {best_f1, best_thr};
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw LengthMismatch("scores and labels must have equal length");
    long n_pos = 0, n_neg = 0;
    for (int label : labels) (label ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateLabels("AUC needs at least one positive and one negative label");
    // Mid-rank Mann-Whitney U.
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) rank_sum_pos += mid_rank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double image_accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                      double threshold) {
    if (scores.size() != labels.size())
        throw LengthMismatch("scores and labels must have equal length");
    if (scores.empty()) throw LengthMismatch("accuracy needs at least one item");
    long correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        correct += (scores[i] >= threshold) == (labels[i] != 0);
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

EvalReport summarize(std::vector<PerImageResult> per_image) {
    std::sort(per_image.begin(), per_image.end(),
              [](const PerImageResult& a, const PerImageResult& b) { return a.id < b.id; });
    EvalReport report;
    report.per_image = std::move(per_image);
    report.n_images = static_cast<int>(report.per_image.size());

    int n_tampered = 0;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& row : report.per_image) {
        scores.push_back(row.score);
        labels.push_back(row.label == "double" ? 1 : 0);
        if (row.label == "double") {
            report.f1_fixed += row.f1_fixed;
            report.f1_best += row.f1_best;
            report.best_threshold += row.best_threshold;
            ++n_tampered;
        }
    }
    if (n_tampered > 0) {
        report.f1_fixed /= n_tampered;
        report.f1_best /= n_tampered;
        report.best_threshold /= n_tampered;
    }
    const bool two_class =
        std::count(labels.begin(), labels.end(), 1) > 0 &&
        std::count(labels.begin(), labels.end(), 0) > 0;
    report.auc = two_class ? roc_auc(scores, labels) : 0.5;
    report.accuracy = scores.empty() ? 0.0 : image_accuracy(scores, labels);
    return report;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["f1_fixed"] = report.f1_fixed;
    doc["f1_best"] = report.f1_best;
    doc["best_threshold"] = report.best_threshold;
    doc["auc"] = report.auc;
    doc["accuracy"] = report.accuracy;
    doc["n_images"] = report.n_images;
    doc["score_kind"] = report.score_kind;
    doc["positive_label"] = "double";
    nlohmann::json list = nlohmann::json::array();
    for (const auto& row : report.per_image) {
        list.push_back({{"id", row.id},
                        {"f1_fixed", row.f1_fixed},
                        {"f1_best", row.f1_best},
                        {"best_threshold", row.best_threshold},
                        {"score", row.score},
                        {"label", row.label}});
    }
    doc["per_image"] = list;
    doc["skipped"] = report.skipped;
    return doc.dump(2) + "\n";
}

} // namespace recompress
