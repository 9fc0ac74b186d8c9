// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cfbg
{

inline constexpr int kConfigSchema = 1;

// Every experiment reads the subset of fields it needs; the rest keep their defaults.
// Worker count is not part of the config because it must not change any output.
struct ExperimentConfig
{
    int schema = kConfigSchema;
    std::string kind = "pdpf";
    std::uint64_t seed = 1;
    std::uint64_t trials = 10000;

    // codebook
    int q = 7;
    int k = 2;

    // OFDM and noise
    int n_total = 128;
    int blocks = 1;
    int n_t = 8;
    int taps = 6;
    int cyclic_prefix = 16;
    double sigma2 = 1.0;
    std::vector<double> snr_db{10.0};

    // block detection
    int nnt = 60;
    double gamma = 3.0;
    double false_alarm = 1e-4;
    bool calibrate_gamma = false;
    std::vector<int> nnt_grid{20};
    std::string moment_method = "analytic"; // analytic | mc | both
    std::uint64_t draws = 1'000'000;

    // separation error: rows of {N_B, N_Total, N_T}
    std::vector<std::array<double, 3>> sep_grid{{100.0, 500.0, 100.0}};

    // attacks
    std::string attack = "all";           // silent | jamming | imitation | hybrid | all
    std::string imitation_target = "full"; // full | bob | charlie
    std::array<double, 3> hybrid_weights{1.0, 1.0, 1.0}; // silent, imitation, jamming
    bool ideal_counts = true;

    // estimation and identification
    std::vector<double> eva_power_db{0.0};
    int quantization_blocks = 0; // phase grid of 2^B points; 0 uses the codebook half size
    bool sqrt_weight = false;
    std::array<double, 3> aoa_deg{-30.0, 15.0, 50.0}; // Bob, Charlie, Eva
    double spread_deg = 10.0;
    double spacing = 0.5;
    double sector_deg = 60.0;
    double min_separation_deg = 10.0;
    std::vector<int> n_t_grid{8};
    bool same_correlation = false;
    std::uint64_t geometries = 200;
    std::uint64_t trials_per_geometry = 9;
};

inline const std::vector<std::string> kExperimentKinds{"pdpf",     "moments", "calibrate", "sep",
                                                        "roundtrip", "classify", "umse", "power-robustness",
                                                        "iep", "iep-asymptotic"};

// Thrown with one line per violated constraint.
class ConfigError : public std::invalid_argument
{
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string> &errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

// Empty when the config is valid.
std::vector<std::string> validation_errors(const ExperimentConfig &cfg);
void validate_config(const ExperimentConfig &cfg);

// Parses and validates. Unknown keys and type mismatches are reported together with
// range violations.
ExperimentConfig config_from_json(const nlohmann::json &j);
ExperimentConfig load_config(const std::string &path);
nlohmann::json config_to_json(const ExperimentConfig &cfg);

// FNV-1a over the canonical JSON form, excluding the seed.
std::uint64_t config_hash(const ExperimentConfig &cfg);

// Phase grid used by the estimation experiments.
int phase_grid_size(const ExperimentConfig &cfg);

} // namespace cfbg
