#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fedflip/errors.hpp"
#include "fedflip/metrics.hpp"
#include "fedflip/rng.hpp"

using namespace fedflip;

namespace {

std::vector<std::string> index_names(int c) {
    std::vector<std::string> names;
    for (int i = 0; i < c; ++i) names.push_back(std::to_string(i));
    return names;
}

// Confusion counts consistent with the reference 7-class evaluation table:
// supports 61/96/228/37/1327/32/222, 1344 of 2003 correct (67.099%).
ConfusionMatrix reference_matrix() {
    const std::int64_t rows[7][7] = {
        {0, 0, 31, 3, 13, 2, 12},
        {0, 1, 0, 0, 95, 0, 0},
        {0, 0, 19, 0, 209, 0, 0},
        {0, 0, 0, 0, 37, 0, 0},
        {4, 2, 13, 0, 1308, 0, 0},
        {0, 0, 0, 0, 32, 0, 0},
        {0, 0, 0, 0, 206, 0, 16},
    };
    ConfusionMatrix cm(7);
    for (int t = 0; t < 7; ++t) {
        for (int p = 0; p < 7; ++p) cm.at(t, p) = rows[t][p];
    }
    return cm;
}

// Per-example recount, independent of the confusion-matrix path.
struct BruteMetrics {
    std::vector<double> precision, recall, f1;
    std::vector<std::int64_t> support;
    double accuracy;
};

BruteMetrics brute_force(const std::vector<int>& preds, const std::vector<int>& labels, int c) {
    BruteMetrics m;
    m.precision.resize(c);
    m.recall.resize(c);
    m.f1.resize(c);
    m.support.resize(c);
    std::int64_t correct = 0;
    for (int cls = 0; cls < c; ++cls) {
        std::int64_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (labels[i] == cls) ++support;
            if (preds[i] == cls && labels[i] == cls) ++tp;
            if (preds[i] == cls && labels[i] != cls) ++fp;
            if (preds[i] != cls && labels[i] == cls) ++fn;
        }
        m.support[cls] = support;
        m.precision[cls] = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
        m.recall[cls] = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
        m.f1[cls] = (m.precision[cls] + m.recall[cls]) > 0
                        ? 2 * m.precision[cls] * m.recall[cls] / (m.precision[cls] + m.recall[cls])
                        : 0.0;
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == labels[i]) ++correct;
    }
    m.accuracy = double(correct) / double(preds.size());
    return m;
}

}  // namespace

TEST_CASE("confusion of a perfect prediction is diagonal") {
    const ConfusionMatrix cm = confusion({0, 1, 2}, {0, 1, 2}, 3);
    for (int t = 0; t < 3; ++t) {
        for (int p = 0; p < 3; ++p) CHECK(cm.at(t, p) == (t == p ? 1 : 0));
    }
}

TEST_CASE("confusion counts off-diagonal predictions") {
    const ConfusionMatrix cm = confusion({1, 1}, {0, 0}, 2);
    CHECK(cm.at(0, 1) == 2);
    CHECK(cm.at(0, 0) == 0);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 0);
    CHECK(cm.total() == 2);
}

TEST_CASE("confusion matches a naive recount on random vectors") {
    Rng rng(606);
    std::vector<int> preds(500), labels(500);
    for (auto& v : preds) v = static_cast<int>(rng.bounded(7));
    for (auto& v : labels) v = static_cast<int>(rng.bounded(7));
    const ConfusionMatrix cm = confusion(preds, labels, 7);
    for (int t = 0; t < 7; ++t) {
        for (int p = 0; p < 7; ++p) {
            std::int64_t count = 0;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                if (labels[i] == t && preds[i] == p) ++count;
            }
            CHECK(cm.at(t, p) == count);
        }
    }
}

TEST_CASE("confusion validates lengths and ranges") {
    CHECK_THROWS_AS(confusion({0, 1}, {0}, 2), ShapeError);
    CHECK_THROWS_AS(confusion({0, 2}, {0, 1}, 2), ShapeError);
    CHECK_THROWS_AS(confusion({0, -1}, {0, 1}, 2), ShapeError);
}

TEST_CASE("report reproduces the reference evaluation table") {
    const ClassificationReport r = report(reference_matrix(), index_names(7));

    CHECK(r.total_support == 2003);
    CHECK(r.per_class[4].support == 1327);
    CHECK(r.per_class[4].precision == doctest::Approx(0.69).epsilon(0.005));
    CHECK(r.per_class[4].recall == doctest::Approx(0.99).epsilon(0.005));
    CHECK(r.per_class[4].f1 == doctest::Approx(0.81).epsilon(0.005));
    CHECK(r.accuracy == doctest::Approx(0.67099).epsilon(1e-4));
    CHECK(percent3(r.accuracy) == "67.099");

    // zero-division rows: classes 0, 3 and 5 have no true positives
    for (int cls : {0, 3, 5}) {
        CHECK(r.per_class[cls].precision == 0.0);
        CHECK(r.per_class[cls].recall == 0.0);
        CHECK(r.per_class[cls].f1 == 0.0);
    }

    CHECK(r.macro_precision == doctest::Approx(0.27).epsilon(0.02));
    CHECK(r.macro_recall == doctest::Approx(0.16).epsilon(0.02));
    CHECK(r.macro_f1 == doctest::Approx(0.16).epsilon(0.02));
    CHECK(r.weighted_precision == doctest::Approx(0.57).epsilon(0.01));
    CHECK(r.weighted_recall == doctest::Approx(0.67).epsilon(0.01));
    CHECK(r.weighted_f1 == doctest::Approx(0.57).epsilon(0.01));
}

TEST_CASE("report of a diagonal matrix is all ones") {
    ConfusionMatrix cm(3);
    cm.at(0, 0) = 5;
    cm.at(1, 1) = 2;
    cm.at(2, 2) = 9;
    const ClassificationReport r = report(cm, index_names(3));
    for (const auto& m : r.per_class) {
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.f1 == 1.0);
    }
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("report hand-computed two-class case") {
    ConfusionMatrix cm(2);
    cm.at(0, 0) = 5;
    cm.at(0, 1) = 5;
    cm.at(1, 0) = 0;
    cm.at(1, 1) = 10;
    const ClassificationReport r = report(cm, index_names(2));
    CHECK(r.per_class[0].precision == doctest::Approx(1.0));
    CHECK(r.per_class[0].recall == doctest::Approx(0.5));
    CHECK(r.per_class[0].f1 == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(r.per_class[1].precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(r.per_class[1].recall == doctest::Approx(1.0));
    CHECK(r.per_class[1].f1 == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(0.75));
}

TEST_CASE("report rejects an empty matrix") {
    CHECK_THROWS_AS(report(ConfusionMatrix(3), index_names(3)), ShapeError);
}

TEST_CASE("format_report renders the reference table layout") {
    const std::string text = format_report(report(reference_matrix(), index_names(7)));
    const std::string expected =
        "             precision    recall  f1-score   support\n"
        "\n"
        "           0      0.00      0.00      0.00        61\n"
        "           1      0.33      0.01      0.02        96\n"
        "           2      0.30      0.08      0.13       228\n"
        "           3      0.00      0.00      0.00        37\n"
        "           4      0.69      0.99      0.81      1327\n"
        "           5      0.00      0.00      0.00        32\n"
        "           6      0.57      0.07      0.13       222\n"
        "   macro avg      0.27      0.16      0.16      2003\n"
        "weighted avg      0.57      0.67      0.57      2003\n"
        "    accuracy                          0.67      2003\n";
    CHECK(text == expected);
}

TEST_CASE("format_report round-trips its numbers within rounding") {
    const ClassificationReport r = report(reference_matrix(), index_names(7));
    const std::string text = format_report(r);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);  // blank
    for (const auto& m : r.per_class) {
        std::getline(in, line);
        std::istringstream row(line);
        std::string name;
        double p, rec, f1;
        long support;
        row >> name >> p >> rec >> f1 >> support;
        CHECK(name == m.name);
        CHECK(std::abs(p - m.precision) <= 0.005);
        CHECK(std::abs(rec - m.recall) <= 0.005);
        CHECK(std::abs(f1 - m.f1) <= 0.005);
        CHECK(support == m.support);
    }
}

TEST_CASE("weighted recall equals accuracy exactly on random matrices") {
    Rng rng(707);
    for (int trial = 0; trial < 300; ++trial) {
        const int c = 2 + static_cast<int>(rng.bounded(8));  // up to 9 classes
        const std::size_t n = 1 + rng.bounded(60);
        std::vector<int> preds(n), labels(n);
        for (auto& v : preds) v = static_cast<int>(rng.bounded(c));
        for (auto& v : labels) v = static_cast<int>(rng.bounded(c));
        const ClassificationReport r = report(confusion(preds, labels, c), index_names(c));
        CHECK(r.weighted_recall == r.accuracy);
    }
}

TEST_CASE("f1 lies between precision and recall when both are nonzero") {
    Rng rng(808);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 2 + static_cast<int>(rng.bounded(5));
        const std::size_t n = 5 + rng.bounded(80);
        std::vector<int> preds(n), labels(n);
        for (auto& v : preds) v = static_cast<int>(rng.bounded(c));
        for (auto& v : labels) v = static_cast<int>(rng.bounded(c));
        const ClassificationReport r = report(confusion(preds, labels, c), index_names(c));
        for (const auto& m : r.per_class) {
            if (m.precision > 0.0 && m.recall > 0.0) {
                CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
                CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
            }
        }
    }
}

TEST_CASE("report agrees exactly with the per-example brute force") {
    Rng rng(909);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 2 + static_cast<int>(rng.bounded(8));
        const std::size_t n = 1 + rng.bounded(100);
        std::vector<int> preds(n), labels(n);
        for (auto& v : preds) v = static_cast<int>(rng.bounded(c));
        for (auto& v : labels) v = static_cast<int>(rng.bounded(c));

        const ClassificationReport r = report(confusion(preds, labels, c), index_names(c));
        const BruteMetrics oracle = brute_force(preds, labels, c);
        for (int cls = 0; cls < c; ++cls) {
            CHECK(r.per_class[cls].precision == oracle.precision[cls]);
            CHECK(r.per_class[cls].recall == oracle.recall[cls]);
            CHECK(r.per_class[cls].f1 == oracle.f1[cls]);
            CHECK(r.per_class[cls].support == oracle.support[cls]);
        }
        CHECK(r.accuracy == oracle.accuracy);
    }
}

TEST_CASE("self-consistent predictions give accuracy one") {
    Rng rng(1001);
    std::vector<int> labels(40);
    for (auto& v : labels) v = static_cast<int>(rng.bounded(5));
    const ClassificationReport r = report(confusion(labels, labels, 5), index_names(5));
    CHECK(r.accuracy == 1.0);
    CHECK(r.weighted_recall == 1.0);
}

TEST_CASE("report_key_values is a flat parsable record") {
    const std::string kv = report_key_values(report(reference_matrix(), index_names(7)));
    CHECK(kv.find("class4.recall=") != std::string::npos);
    CHECK(kv.find("accuracy=0.67") != std::string::npos);
    CHECK(kv.find("total_support=2003\n") != std::string::npos);
    for (char ch : kv) {
        CHECK((ch != '\t'));
    }
}
