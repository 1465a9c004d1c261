#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedflip/dataset.hpp"
#include "fedflip/federation.hpp"

namespace fedflip {

// Parsed experiment description. Defaults reproduce the reference
// hyperparameter table: lr 0.01, momentum 0.9, batch 32, 100 rounds,
// 10 clients, 1 local epoch.
struct ExperimentConfig {
    enum class Mode { Federated, Centralized, Both };

    std::filesystem::path csv_path;  // empty: synthesize the dataset
    std::size_t synth_samples = 5000;
    double synth_spread = 1.0;
    std::array<double, kNumClasses> synth_weights = imbalanced_class_weights();
    double test_fraction = 0.2;

    HyperParams hyper;
    Mode mode = Mode::Federated;

    std::optional<double> flip_percent;  // single-attack runs
    int malicious_client = 0;
    std::vector<double> sweep;  // non-empty: run the flip-percentage sweep

    std::vector<std::uint64_t> seeds = {1};
    std::filesystem::path output_dir = ".";

    void validate() const;
};

// Flat key=value configuration file; '#' starts a comment. Unknown keys,
// unparsable values and contradictory keys (sweep plus flip_percent) are
// reported by name. Missing keys keep their defaults.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

// One sweep.csv line: accuracies of the four matched runs for a
// (flip percentage, seed) cell. Clean columns are computed once per seed.
struct SweepRow {
    double flip_percent = 0.0;
    double clean_fl_accuracy = 0.0;
    double poisoned_fl_accuracy = 0.0;
    double clean_central_accuracy = 0.0;
    double poisoned_central_accuracy = 0.0;
    std::uint64_t seed = 0;
};

// Runs the configured experiment and writes artifacts into
// config.output_dir: report.txt / report.kv / history.csv per run, or
// sweep.csv for sweeps. Re-running an identical config reproduces every
// artifact byte for byte. On error, partial outputs are removed.
void run_experiment(const ExperimentConfig& config);

// Exception-to-exit-code wrapper used by the command line tool:
// 0 success, 1 config error, 2 data error, 3 runtime error.
int run_experiment_cli(const ExperimentConfig& config);

}  // namespace fedflip
