#pragma once

#include <string>
#include <utility>
#include <vector>

#include "recompress/localization.hpp"

namespace recompress {

/// Pixel F1 of binarize(h, threshold) against the ground truth,
/// 2TP / (2TP + FP + FN); an empty denominator counts as 0.
double pixel_f1(const Heatmap& h, const BinaryMask& gt, double threshold);

/// Maximize pixel F1 over the distinct heatmap values plus {0, 1}.
/// Returns (best F1, threshold); the lowest optimal threshold wins ties.
std::pair<double, double> best_threshold_f1(const Heatmap& h, const BinaryMask& gt);

/// Mann-Whitney AUC; ties contribute 1/2. Throws DegenerateLabels when only
/// one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Fraction of (score >= threshold) == label.
double image_accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                      double threshold = 0.5);

struct PerImageResult {
    std::string id;
    double f1_fixed = 0.0;
    double f1_best = 0.0;
    double best_threshold = 0.0;
    double score = 0.0;
    std::string label;
};

struct EvalReport {
    double f1_fixed = 0.0;      // mean over tampered images, threshold 0.5
    double f1_best = 0.0;       // mean over tampered images, per-image best
    double best_threshold = 0.0; // mean per-image best threshold
    double auc = 0.0;
    double accuracy = 0.0;
    int n_images = 0;
    std::vector<PerImageResult> per_image;
    std::vector<std::string> skipped; // ids of manifest entries with missing files
    std::string score_kind;           // how the image-level score was produced
};

/// Assemble the aggregate report. Localization means run over rows whose
/// label is "double" (the tampered ones); AUC/accuracy use every row with
/// "double" as the positive class.
EvalReport summarize(std::vector<PerImageResult> per_image);

std::string eval_report_to_json(const EvalReport& report);

} // namespace recompress
