#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "fedflip/dataset.hpp"
#include "fedflip/errors.hpp"
#include "fedflip/experiment.hpp"
#include "fedflip/rng.hpp"

namespace {

// Flat key=value description of a synthetic dataset.
struct SynthFileSpec {
    fedflip::SynthSpec spec;
    std::uint64_t seed = 1;
};

SynthFileSpec parse_synth_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw fedflip::ConfigError("cannot open spec file: " + path.string());
    SynthFileSpec out;
    out.spec.class_weights = fedflip::imbalanced_class_weights();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        std::string key, value;
        if (eq != std::string::npos) {
            key = line.substr(0, eq);
            value = line.substr(eq + 1);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t\r") + 1);
            value.erase(0, value.find_first_not_of(" \t"));
            value.erase(value.find_last_not_of(" \t\r") + 1);
        } else {
            key = line;
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t\r") + 1);
        }
        if (key.empty()) continue;
        try {
            if (key == "n_samples") {
                out.spec.n_samples = std::stoull(value);
            } else if (key == "cluster_spread") {
                out.spec.cluster_spread = std::stod(value);
            } else if (key == "seed") {
                out.seed = std::stoull(value);
            } else if (key == "class_weights") {
                std::stringstream ss(value);
                std::string part;
                for (int c = 0; c < fedflip::kNumClasses; ++c) {
                    if (!std::getline(ss, part, ',')) {
                        throw fedflip::ConfigError("key 'class_weights': expected 7 weights");
                    }
                    out.spec.class_weights[c] = std::stod(part);
                }
            } else {
                throw fedflip::ConfigError("unknown key '" + key + "' in spec file");
            }
        } catch (const std::invalid_argument&) {
            throw fedflip::ConfigError("spec line " + std::to_string(line_no) +
                                       ": cannot parse value '" + value + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning label-flipping experiment runner"};
    app.require_subcommand(1);

    std::string config_path, output_dir, spec_path, out_csv;

    CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--output", output_dir, "override output directory");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Run the flip-percentage sweep (default 2,4,...,20)");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--output", output_dir, "override output directory");

    CLI::App* synth = app.add_subcommand("synth", "Materialize a synthetic dataset CSV");
    synth->add_option("--spec", spec_path, "synthetic dataset spec file")->required();
    synth->add_option("--out", out_csv, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) {
            const SynthFileSpec file_spec = parse_synth_spec(spec_path);
            fedflip::save_csv(fedflip::synth_dataset(file_spec.spec, file_spec.seed), out_csv);
            std::cout << "wrote " << file_spec.spec.n_samples << " rows to " << out_csv << "\n";
            return 0;
        }

        fedflip::ExperimentConfig config = fedflip::parse_config(config_path);
        if (sweep->parsed() && config.sweep.empty()) {
            config.sweep = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
        }
        if (!output_dir.empty()) config.output_dir = output_dir;
        return fedflip::run_experiment_cli(config);
    } catch (const fedflip::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fedflip::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
