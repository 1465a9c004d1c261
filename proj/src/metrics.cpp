#include "fedflip/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fedflip/errors.hpp"

namespace fedflip {

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void pad_to(std::string& out, const std::string& cell, int width) {
    const int pad = width - static_cast<int>(cell.size());
    out.append(pad > 0 ? pad : 0, ' ');
    out += cell;
}

void append_shortest(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels,
                          int num_classes) {
    if (preds.size() != labels.size()) {
        std::ostringstream msg;
        msg << "confusion: " << preds.size() << " predictions vs " << labels.size()
            << " labels";
        throw ShapeError(msg.str());
    }
    if (num_classes < 1) throw ShapeError("confusion: need at least one class");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes || preds[i] < 0 ||
            preds[i] >= num_classes) {
            std::ostringstream msg;
            msg << "confusion: entry " << i << " (" << labels[i] << ", " << preds[i]
                << ") outside " << num_classes << " classes";
            throw ShapeError(msg.str());
        }
        ++cm.at(labels[i], preds[i]);
    }
    return cm;
}

ClassificationReport report(const ConfusionMatrix& cm,
                            const std::vector<std::string>& class_names) {
    const int c = cm.num_classes;
    if (class_names.size() != static_cast<std::size_t>(c)) {
        throw ShapeError("report: class name count does not match the matrix");
    }
    const std::int64_t total = cm.total();
    if (total == 0) throw ShapeError("report: empty confusion matrix");

    ClassificationReport r;
    r.total_support = total;
    std::int64_t trace = 0;
    for (int t = 0; t < c; ++t) {
        std::int64_t tp = cm.at(t, t);
        std::int64_t row = 0, col = 0;
        for (int j = 0; j < c; ++j) {
            row += cm.at(t, j);
            col += cm.at(j, t);
        }
        trace += tp;
        ClassMetrics m;
        m.name = class_names[t];
        m.support = row;
        m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        r.per_class.push_back(std::move(m));
    }

    r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    for (const auto& m : r.per_class) {
        r.macro_precision += m.precision / c;
        r.macro_recall += m.recall / c;
        r.macro_f1 += m.f1 / c;
        const double w = static_cast<double>(m.support) / static_cast<double>(total);
        r.weighted_precision += w * m.precision;
        r.weighted_f1 += w * m.f1;
    }
    // Support-weighted recall telescopes to trace/total; computed that way so
    // the recall = accuracy identity holds exactly.
    r.weighted_recall = r.accuracy;
    return r;
}

std::string format_report(const ClassificationReport& r) {
    int name_w = 12;
    for (const auto& m : r.per_class) {
        name_w = std::max(name_w, static_cast<int>(m.name.size()));
    }
    const int col_w = 10;

    std::string out;
    pad_to(out, "", name_w);
    for (const char* h : {"precision", "recall", "f1-score", "support"}) pad_to(out, h, col_w);
    out += "\n\n";

    auto metric_row = [&](const std::string& name, double p, double rec, double f1,
                          std::int64_t support) {
        pad_to(out, name, name_w);
        pad_to(out, fixed2(p), col_w);
        pad_to(out, fixed2(rec), col_w);
        pad_to(out, fixed2(f1), col_w);
        pad_to(out, std::to_string(support), col_w);
        out += '\n';
    };

    for (const auto& m : r.per_class) metric_row(m.name, m.precision, m.recall, m.f1, m.support);
    metric_row("macro avg", r.macro_precision, r.macro_recall, r.macro_f1, r.total_support);
    metric_row("weighted avg", r.weighted_precision, r.weighted_recall, r.weighted_f1,
               r.total_support);

    pad_to(out, "accuracy", name_w);
    pad_to(out, "", col_w);
    pad_to(out, "", col_w);
    pad_to(out, fixed2(r.accuracy), col_w);
    pad_to(out, std::to_string(r.total_support), col_w);
    out += '\n';
    return out;
}

std::string report_key_values(const ClassificationReport& r) {
    std::string out;
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
        const auto& m = r.per_class[i];
        const std::string prefix = "class" + std::to_string(i) + ".";
        out += prefix + "name=" + m.name + "\n";
        out += prefix + "precision=";
        append_shortest(out, m.precision);
        out += "\n" + prefix + "recall=";
        append_shortest(out, m.recall);
        out += "\n" + prefix + "f1=";
        append_shortest(out, m.f1);
        out += "\n" + prefix + "support=" + std::to_string(m.support) + "\n";
    }
    for (auto [key, value] : {std::pair<const char*, double>{"macro.precision", r.macro_precision},
                              {"macro.recall", r.macro_recall},
                              {"macro.f1", r.macro_f1},
                              {"weighted.precision", r.weighted_precision},
                              {"weighted.recall", r.weighted_recall},
                              {"weighted.f1", r.weighted_f1},
                              {"accuracy", r.accuracy}}) {
        out += key;
        out += '=';
        append_shortest(out, value);
        out += '\n';
    }
    out += "total_support=" + std::to_string(r.total_support) + "\n";
    return out;
}

std::string percent3(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", fraction * 100.0);
    return buf;
}

}  // namespace fedflip
