#include "fedflip/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fedflip/errors.hpp"
#include "fedflip/rng.hpp"

namespace fedflip {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(trim(part));
    return parts;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("key '" + key + "': cannot parse value '" + value + "'");
    }
    return out;
}

void append_shortest(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

// Writes through a temp file and renames, tracking what landed so a failed
// run can clean up after itself.
class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        const auto tmp = dir_ / (name + ".tmp");
        {
            std::ofstream f(tmp, std::ios::binary);
            if (!f) throw DataError("cannot write artifact: " + tmp.string());
            f << content;
            if (!f) throw DataError("failed writing artifact: " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
        written_.push_back(path);
    }

    void remove_written() {
        std::error_code ec;
        for (const auto& p : written_) std::filesystem::remove(p, ec);
        written_.clear();
    }

  private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

struct PreparedData {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<ClientShard> shards;
};

PreparedData prepare_data(const ExperimentConfig& config, const LabeledDataset* csv_data,
                          std::uint64_t seed) {
    PreparedData prep;
    LabeledDataset all;
    if (csv_data) {
        all = *csv_data;
    } else {
        SynthSpec spec{config.synth_samples, config.synth_weights, config.synth_spread};
        all = synth_dataset(spec, derive_seed(seed, kSynthStream));
    }
    auto [train, test] = train_test_split(all, config.test_fraction, derive_seed(seed, kSplitStream));
    prep.train = std::move(train);
    prep.test = std::move(test);
    prep.shards =
        partition_iid(prep.train, config.hyper.n_clients, derive_seed(seed, kPartitionStream));
    return prep;
}

std::string history_csv(const RunResult& result) {
    std::string out = "round,loss,accuracy\n";
    for (const RoundRecord& rec : result.history) {
        out += std::to_string(rec.round);
        out += ',';
        append_shortest(out, rec.global_loss);
        out += ',';
        append_shortest(out, rec.global_accuracy);
        out += '\n';
    }
    return out;
}

void run_single_mode(const ExperimentConfig& config, const LabeledDataset* csv_data,
                     ArtifactWriter& writer) {
    const bool both = config.mode == ExperimentConfig::Mode::Both;
    for (std::uint64_t seed : config.seeds) {
        const PreparedData prep = prepare_data(config, csv_data, seed);
        std::optional<AttackSpec> attack;
        if (config.flip_percent) {
            attack = AttackSpec{config.malicious_client, *config.flip_percent,
                                derive_seed(seed, kAttackStream)};
        }

        struct Setup {
            const char* name;
            bool federated;
        };
        std::vector<Setup> setups;
        if (config.mode != ExperimentConfig::Mode::Centralized) setups.push_back({"federated", true});
        if (config.mode != ExperimentConfig::Mode::Federated) setups.push_back({"centralized", false});

        for (const Setup& setup : setups) {
            const RunResult result =
                setup.federated
                    ? run_federated(prep.shards, prep.test, config.hyper, attack, seed)
                    : run_centralized(prep.train, prep.test, config.hyper, attack, seed);

            std::string suffix;
            if (both) suffix += std::string("_") + setup.name;
            if (config.seeds.size() > 1) suffix += "_seed" + std::to_string(seed);
            writer.write("report" + suffix + ".txt", format_report(result.report));
            writer.write("report" + suffix + ".kv", report_key_values(result.report));
            writer.write("history" + suffix + ".csv", history_csv(result));

            std::cout << setup.name << " seed " << seed << ": accuracy "
                      << percent3(result.report.accuracy) << "%, final loss "
                      << result.history.back().global_loss << "\n";
        }
    }
}

void run_sweep(const ExperimentConfig& config, const LabeledDataset* csv_data,
               ArtifactWriter& writer) {
    std::vector<SweepRow> rows;
    for (std::uint64_t seed : config.seeds) {
        const PreparedData prep = prepare_data(config, csv_data, seed);
        const double clean_fl =
            run_federated(prep.shards, prep.test, config.hyper, std::nullopt, seed)
                .report.accuracy;
        const double clean_ce =
            run_centralized(prep.train, prep.test, config.hyper, std::nullopt, seed)
                .report.accuracy;
        for (double p : config.sweep) {
            const AttackSpec attack{config.malicious_client, p, derive_seed(seed, kAttackStream)};
            const double pois_fl =
                run_federated(prep.shards, prep.test, config.hyper, attack, seed).report.accuracy;
            const double pois_ce =
                run_centralized(prep.train, prep.test, config.hyper, attack, seed)
                    .report.accuracy;
            rows.push_back({p, clean_fl, pois_fl, clean_ce, pois_ce, seed});
            std::cout << "p=" << p << "% seed " << seed << ": clean FL "
                      << percent3(clean_fl) << "%, poisoned FL " << percent3(pois_fl)
                      << "%, clean central " << percent3(clean_ce) << "%, poisoned central "
                      << percent3(pois_ce) << "%\n";
        }
    }

    // Table-style ordering: by flip percentage, seeds in the configured order.
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows[a].flip_percent < rows[b].flip_percent;
    });

    std::string out =
        "flip_percent,clean_fl_accuracy,poisoned_fl_accuracy,clean_central_accuracy,"
        "poisoned_central_accuracy,seed\n";
    for (std::size_t i : order) {
        const SweepRow& row = rows[i];
        append_shortest(out, row.flip_percent);
        out += ',';
        append_shortest(out, row.clean_fl_accuracy);
        out += ',';
        append_shortest(out, row.poisoned_fl_accuracy);
        out += ',';
        append_shortest(out, row.clean_central_accuracy);
        out += ',';
        append_shortest(out, row.poisoned_central_accuracy);
        out += ',';
        out += std::to_string(row.seed);
        out += '\n';
    }
    writer.write("sweep.csv", out);
}

}  // namespace

void ExperimentConfig::validate() const {
    hyper.validate();
    if (seeds.empty()) throw ConfigError("config: need at least one seed");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("config: test_fraction must be in (0, 1)");
    }
    if (flip_percent && !(*flip_percent >= 0.0 && *flip_percent <= 100.0)) {
        throw ConfigError("config: flip_percent must be in [0, 100]");
    }
    for (double p : sweep) {
        if (!(p >= 0.0 && p <= 100.0)) {
            throw ConfigError("config: sweep percentages must be in [0, 100]");
        }
    }
    if (!sweep.empty() && flip_percent) {
        throw ConfigError("config: contradictory keys 'sweep' and 'flip_percent'");
    }
    if (malicious_client < 0 || malicious_client >= hyper.n_clients) {
        throw ConfigError("config: malicious_client out of range");
    }
    if (csv_path.empty()) {
        SynthSpec spec{synth_samples, synth_weights, synth_spread};
        try {
            spec.validate();
        } catch (const DataError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value, got '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "learning_rate") {
            config.hyper.learning_rate = parse_number<double>(key, value);
        } else if (key == "momentum") {
            config.hyper.momentum = parse_number<double>(key, value);
        } else if (key == "batch_size") {
            config.hyper.batch_size = parse_number<int>(key, value);
        } else if (key == "comm_rounds") {
            config.hyper.comm_rounds = parse_number<int>(key, value);
        } else if (key == "num_clients") {
            config.hyper.n_clients = parse_number<int>(key, value);
        } else if (key == "local_epochs") {
            config.hyper.local_epochs = parse_number<int>(key, value);
        } else if (key == "flip_percent") {
            config.flip_percent = parse_number<double>(key, value);
        } else if (key == "malicious_client") {
            config.malicious_client = parse_number<int>(key, value);
        } else if (key == "seeds") {
            config.seeds.clear();
            for (const std::string& part : split_csv(value)) {
                config.seeds.push_back(parse_number<std::uint64_t>(key, part));
            }
        } else if (key == "sweep") {
            config.sweep.clear();
            for (const std::string& part : split_csv(value)) {
                config.sweep.push_back(parse_number<double>(key, part));
            }
        } else if (key == "mode") {
            if (value == "federated") config.mode = ExperimentConfig::Mode::Federated;
            else if (value == "centralized") config.mode = ExperimentConfig::Mode::Centralized;
            else if (value == "both") config.mode = ExperimentConfig::Mode::Both;
            else throw ConfigError("key 'mode': expected federated|centralized|both, got '" +
                                   value + "'");
        } else if (key == "data") {
            if (value != "synth") config.csv_path = value;
        } else if (key == "output_dir") {
            config.output_dir = value;
        } else if (key == "test_fraction") {
            config.test_fraction = parse_number<double>(key, value);
        } else if (key == "synth_samples") {
            config.synth_samples = parse_number<std::size_t>(key, value);
        } else if (key == "synth_spread") {
            config.synth_spread = parse_number<double>(key, value);
        } else if (key == "synth_weights") {
            const auto parts = split_csv(value);
            if (parts.size() != kNumClasses) {
                throw ConfigError("key 'synth_weights': expected " +
                                  std::to_string(kNumClasses) + " weights, got " +
                                  std::to_string(parts.size()));
            }
            for (int c = 0; c < kNumClasses; ++c) {
                config.synth_weights[c] = parse_number<double>(key, parts[c]);
            }
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void run_experiment(const ExperimentConfig& config) {
    config.validate();

    LabeledDataset csv_data;
    const LabeledDataset* csv_ptr = nullptr;
    if (!config.csv_path.empty()) {
        csv_data = load_csv(config.csv_path);
        csv_ptr = &csv_data;
    }

    ArtifactWriter writer(config.output_dir);
    try {
        if (!config.sweep.empty()) {
            run_sweep(config, csv_ptr, writer);
        } else {
            run_single_mode(config, csv_ptr, writer);
        }
    } catch (...) {
        writer.remove_written();
        throw;
    }
}

int run_experiment_cli(const ExperimentConfig& config) {
    try {
        run_experiment(config);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace fedflip
