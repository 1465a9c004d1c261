#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedflip {

// counts[true_class][predicted_class]
struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<std::int64_t> counts;  // row-major, num_classes^2

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int c) : num_classes(c), counts(std::size_t(c) * c, 0) {}

    std::int64_t& at(int t, int p) { return counts[std::size_t(t) * num_classes + p]; }
    std::int64_t at(int t, int p) const { return counts[std::size_t(t) * num_classes + p]; }

    std::int64_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels,
                          int num_classes);

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct ClassificationReport {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    double accuracy = 0.0;
    std::int64_t total_support = 0;
};

// Per-class precision/recall/F1/support from the confusion matrix, plus macro
// (unweighted) and support-weighted averages and trace/total accuracy.
// Zero-division convention: a class with no predictions has precision 0.00,
// with no support recall 0.00, and F1 0.00 when precision + recall = 0.
ClassificationReport report(const ConfusionMatrix& cm,
                            const std::vector<std::string>& class_names);

// Fixed-width text table: header, one row per class, macro avg, weighted avg,
// and a final accuracy row with the total support. Byte-stable.
std::string format_report(const ClassificationReport& r);

// Flat key=value rendering of the same numbers, full precision.
std::string report_key_values(const ClassificationReport& r);

// "67.099"-style percent with three decimals.
std::string percent3(double fraction);

}  // namespace fedflip
