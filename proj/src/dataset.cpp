#include "fedflip/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "fedflip/errors.hpp"
#include "fedflip/rng.hpp"

namespace fedflip {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw DataError(msg); }

double parse_double(std::string_view cell, std::size_t line_no, std::size_t col_no) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        std::ostringstream msg;
        msg << "line " << line_no << ", column " << col_no + 1 << ": non-numeric cell '"
            << std::string(cell) << "'";
        fail(msg.str());
    }
    return value;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

// Shortest decimal (non-scientific) representation that parses back to the
// same double; values here are always in [0, 1].
void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    out.append(buf, ptr);
}

LabeledDataset take_rows(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.features = Matrix(rows.size(), data.features.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = data.features.row(rows[i]);
        std::copy(src, src + data.features.cols(), out.features.row(i));
        out.labels[i] = data.labels[rows[i]];
    }
    return out;
}

}  // namespace

void SynthSpec::validate() const {
    if (n_samples == 0) fail("SynthSpec: n_samples must be positive");
    if (cluster_spread < 0.0) fail("SynthSpec: cluster_spread must be non-negative");
    double total = 0.0;
    for (double w : class_weights) {
        if (w < 0.0) fail("SynthSpec: class weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "SynthSpec: class weights sum to " << total << ", expected 1";
        fail(msg.str());
    }
}

std::array<double, kNumClasses> imbalanced_class_weights() {
    const std::array<double, kNumClasses> supports = {61, 96, 228, 37, 1327, 32, 222};
    std::array<double, kNumClasses> weights{};
    double total = 0.0;
    for (double s : supports) total += s;
    for (int c = 0; c < kNumClasses; ++c) weights[c] = supports[c] / total;
    return weights;
}

std::array<double, kNumClasses> balanced_class_weights() {
    std::array<double, kNumClasses> weights{};
    weights.fill(1.0 / kNumClasses);
    return weights;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) fail("empty dataset file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_line(line);
    if (header.size() != kInputDim + 1) {
        std::ostringstream msg;
        msg << "header: expected " << kInputDim + 1 << " columns (pixel0000..pixel0783,label), got "
            << header.size();
        fail(msg.str());
    }
    if (header.back() != "label") fail("header: last column must be 'label'");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != kInputDim + 1) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected " << kInputDim + 1 << " columns, got "
                << cells.size();
            fail(msg.str());
        }
        for (int c = 0; c < kInputDim; ++c) {
            values.push_back(parse_double(cells[c], line_no, c));
        }
        const double raw_label = parse_double(cells[kInputDim], line_no, kInputDim);
        if (raw_label != std::floor(raw_label) || raw_label < 0 || raw_label >= kNumClasses) {
            std::ostringstream msg;
            msg << "line " << line_no << ": label " << std::string(cells[kInputDim])
                << " outside {0..6}";
            fail(msg.str());
        }
        labels.push_back(static_cast<int>(raw_label));
    }

    LabeledDataset data;
    data.features = Matrix(labels.size(), kInputDim);
    data.features.data() = std::move(values);
    data.labels = std::move(labels);

    // Raw-greyscale auto-detection.
    bool rescale = false;
    for (double v : data.features.data()) {
        if (v > 1.0) {
            rescale = true;
            break;
        }
    }
    if (rescale) {
        for (double& v : data.features.data()) v /= 255.0;
    }
    for (std::size_t i = 0; i < data.features.data().size(); ++i) {
        const double v = data.features.data()[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            std::ostringstream msg;
            msg << "line " << i / kInputDim + 2 << ": pixel value "
                << (rescale ? v * 255.0 : v) << " outside the representable range";
            fail(msg.str());
        }
    }
    return data;
}

void save_csv(const LabeledDataset& data, const std::filesystem::path& path) {
    std::string out;
    out.reserve(data.size() * kInputDim * 10);
    for (int c = 0; c < kInputDim; ++c) {
        char name[16];
        std::snprintf(name, sizeof(name), "pixel%04d,", c);
        out += name;
    }
    out += "label\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double* row = data.features.row(r);
        for (int c = 0; c < kInputDim; ++c) {
            append_double(out, row[c]);
            out += ',';
        }
        out += std::to_string(data.labels[r]);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("cannot write dataset file: " + path.string());
    f << out;
    if (!f) fail("failed writing dataset file: " + path.string());
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data,
                                                           double test_fraction,
                                                           std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        fail("train_test_split: test_fraction must be in (0, 1)");
    }
    const std::size_t n = data.size();
    const auto n_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test == 0 || n_test >= n) {
        std::ostringstream msg;
        msg << "train_test_split: fraction " << test_fraction << " of " << n
            << " rows leaves an empty side";
        fail(msg.str());
    }
    const auto idx = shuffled_indices(n, seed);
    const std::vector<std::size_t> test_rows(idx.begin(), idx.begin() + n_test);
    const std::vector<std::size_t> train_rows(idx.begin() + n_test, idx.end());
    return {take_rows(data, train_rows), take_rows(data, test_rows)};
}

std::vector<ClientShard> partition_iid(const LabeledDataset& train, int n_clients,
                                       std::uint64_t seed) {
    if (n_clients < 1) fail("partition_iid: need at least one client");
    const std::size_t n = train.size();
    if (n < static_cast<std::size_t>(n_clients)) {
        std::ostringstream msg;
        msg << "partition_iid: " << n << " rows cannot cover " << n_clients << " clients";
        fail(msg.str());
    }
    const auto idx = shuffled_indices(n, seed);
    const std::size_t base = n / n_clients;
    const std::size_t extra = n % n_clients;
    std::vector<ClientShard> shards;
    shards.reserve(n_clients);
    std::size_t offset = 0;
    for (int i = 0; i < n_clients; ++i) {
        const std::size_t len = base + (static_cast<std::size_t>(i) < extra ? 1 : 0);
        const std::vector<std::size_t> rows(idx.begin() + offset, idx.begin() + offset + len);
        shards.push_back({i, take_rows(train, rows)});
        offset += len;
    }
    return shards;
}

std::vector<Batch> batches(const ClientShard& shard, int batch_size,
                           std::uint64_t epoch_seed) {
    if (batch_size < 1) fail("batches: batch_size must be positive");
    const std::size_t n = shard.data.size();
    const auto idx = shuffled_indices(n, epoch_seed);
    std::vector<Batch> out;
    out.reserve((n + batch_size - 1) / batch_size);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t len = std::min<std::size_t>(batch_size, n - start);
        Batch b;
        b.features = Matrix(len, shard.data.features.cols());
        b.labels.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
            const double* src = shard.data.features.row(idx[start + i]);
            std::copy(src, src + shard.data.features.cols(), b.features.row(i));
            b.labels[i] = shard.data.labels[idx[start + i]];
        }
        out.push_back(std::move(b));
    }
    return out;
}

LabeledDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);

    Matrix anchors(kNumClasses, kInputDim);
    for (double& v : anchors.data()) v = rng.uniform();

    std::array<double, kNumClasses> cdf{};
    double acc = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        acc += spec.class_weights[c];
        cdf[c] = acc;
    }
    cdf[kNumClasses - 1] = 1.0;

    LabeledDataset data;
    data.features = Matrix(spec.n_samples, kInputDim);
    data.labels.resize(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const double u = rng.uniform();
        int cls = 0;
        while (cls < kNumClasses - 1 && u >= cdf[cls]) ++cls;
        data.labels[i] = cls;
        const double* anchor = anchors.row(cls);
        double* row = data.features.row(i);
        for (int d = 0; d < kInputDim; ++d) {
            const double v = anchor[d] + rng.uniform(-spec.cluster_spread, spec.cluster_spread);
            row[d] = std::clamp(v, 0.0, 1.0);
        }
    }
    return data;
}

}  // namespace fedflip
