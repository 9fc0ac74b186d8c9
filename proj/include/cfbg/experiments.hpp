// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cfbg/authproto.hpp"
#include "cfbg/config.hpp"
#include "cfbg/detection.hpp"
#include "cfbg/moments.hpp"
#include "cfbg/report.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cfbg
{

struct PdpfPoint
{
    double snr_db = 0.0;
    double gamma = 0.0;
    PdPfResult result;
};

std::vector<PdpfPoint> run_pdpf(const ExperimentConfig &cfg, int threads);

std::vector<MomentSet> run_moments(const ExperimentConfig &cfg, int threads);

struct CalibrationOutcome
{
    std::vector<std::pair<int, Threshold>> thresholds; // per nnt_grid entry
    int required_nnt = 0;                              // smallest nnt meeting false_alarm at cfg.gamma
};

CalibrationOutcome run_calibrate(const ExperimentConfig &cfg);

// Per attack mode, ideal or detected counts.
struct ClassifyTally
{
    std::string mode;
    Proportion correct;           // verdict and recovered codewords as expected
    Proportion correct_distinct;  // imitation trials whose codeword differs from both users
    Proportion separation;        // any SeparationError verdict
    Proportion separation_on_bob; // SeparationError with Eva on Bob's codeword
    Proportion duplicate_flagged; // SeparationError among duplicate trials
    std::uint64_t duplicates = 0;
    std::uint64_t misclassified = 0; // verdict differs from the attack truth
    std::uint64_t lookup_miss = 0;

    void merge(const ClassifyTally &o);
};

// One tally per requested mode ("all" expands to silent, jamming, imitation). When `records`
// is non-null one verdict line per trial is appended in trial order.
std::vector<ClassifyTally> run_classify(const ExperimentConfig &cfg, int threads, std::string *records = nullptr);

struct SepOutcome
{
    std::vector<std::pair<std::array<double, 3>, SepValue>> formula;
    std::size_t codebook_size = 0; // q^k
    ClassifyTally empirical;
};

SepOutcome run_sep(const ExperimentConfig &cfg, int threads);

struct RoundtripOutcome
{
    bool ideal = true;
    double gamma = 0.0;
    std::uint64_t pairs = 0;             // exhaustive, ideal counts only
    std::uint64_t exhaustive_errors = 0;
    Proportion recovered;                // Monte-Carlo
    std::uint64_t misclassified = 0;
    std::uint64_t lookup_miss = 0;
};

RoundtripOutcome run_roundtrip(const ExperimentConfig &cfg, int threads);

struct UmsePoint
{
    int n_t = 0;
    double eva_db = 0.0;
    double snr_db = 0.0;
    double mmse = 0.0;         // quantized pilots
    double mmse_perfect = 0.0; // true pilot phases
    double ls = 0.0;           // contaminated least squares
    double cir_mmse = 0.0;     // whitened taps, quantized pilots
    std::uint64_t trials = 0;
    std::uint64_t regularized = 0;
};

// Grid n_t_grid x eva_power_db x snr_db with common random numbers across SNR and Eva power.
std::vector<UmsePoint> run_umse(const ExperimentConfig &cfg, int threads);

struct IepEmpirical
{
    int n_t = 0;
    Proportion iep; // authentic metric above the impostor's
};

std::vector<IepEmpirical> run_iep(const ExperimentConfig &cfg, int threads);

struct IepAgreement
{
    int n_t = 0;
    std::uint64_t geometries = 0;
    std::uint64_t empirical_majority_iep = 0;
    std::array<std::uint64_t, 3> agree{};         // Printed, PrintedEveTrace, Pipeline
    std::array<std::uint64_t, 3> predicted_iep{};

    void merge(const IepAgreement &o);
};

std::vector<IepAgreement> run_iep_asymptotic(const ExperimentConfig &cfg, int threads);

struct CheckOutcome
{
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentResult
{
    Manifest manifest;
    Table table;
    std::vector<CheckOutcome> checks;
};

Manifest make_manifest(const ExperimentConfig &cfg);

Table tabulate(const std::vector<PdpfPoint> &v);
Table tabulate(const std::vector<MomentSet> &v);
Table tabulate(const CalibrationOutcome &c, double gamma);
Table tabulate(const std::vector<ClassifyTally> &v);
Table tabulate(const SepOutcome &s);
Table tabulate(const RoundtripOutcome &r);
Table tabulate(const std::vector<UmsePoint> &v);
Table tabulate_power_robustness(const std::vector<UmsePoint> &v);
Table tabulate(const std::vector<IepEmpirical> &v);
Table tabulate(const std::vector<IepAgreement> &v);

// Validates, runs the configured kind, tabulates and evaluates the kind's pass criteria.
ExperimentResult run_experiment(const ExperimentConfig &cfg, int threads, std::string *records = nullptr);

} // namespace cfbg
