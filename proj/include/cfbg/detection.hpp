// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>

namespace cfbg
{

using Matrix4cd = Eigen::Matrix<std::complex<double>, 4, 4>;

// Y is 4 x M: one row per pilot symbol, one column per (subcarrier, antenna) sample of a block.
Matrix4cd sample_gram(const Eigen::MatrixXcd &Y, double sigma2);

struct EigenRatios
{
    std::array<double, 4> lambda{}; // descending
    double t_mm = 1.0;              // lambda1 / lambda4
    double t_smm = 1.0;             // lambda2 / lambda4
    double t_tmm = 1.0;             // lambda3 / lambda4
    bool degenerate = false;        // lambda4 at or below rank tolerance
    int rank = 4;
};

inline constexpr double kRankTolerance = 1e-12;

EigenRatios ordered_ratios(const Matrix4cd &R);

// Ordered test: TMM first, then SMM, then MM. A ratio equal to gamma does not exceed it.
int decide_count(const EigenRatios &ratios, double gamma);

int detect_signal_count(const Eigen::MatrixXcd &Y, double sigma2, double gamma);

// One proportion with its Wilson 95% interval.
struct Proportion
{
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;

    double rate() const { return trials ? static_cast<double>(hits) / trials : 0.0; }
    double lower() const;
    double upper() const;
    void merge(const Proportion &o)
    {
        hits += o.hits;
        trials += o.trials;
    }
};

struct DetectionScenario
{
    int nnt = 60;             // samples per block (subcarriers x antennas)
    double sigma2 = 1.0;
    double snr_db = 10.0;     // per-user receive SNR
    double gamma = 3.0;
    // phase increment of each transmitter's 4-symbol pilot (Bob, Charlie, Eva)
    std::array<double, 3> increments{2.0943951023931957, 4.1887902047863905, 0.0};
};

struct PdPfResult
{
    // detector index 0 = MM, 1 = SMM, 2 = TMM
    std::array<Proportion, 3> pd;
    // false alarm of detector i under each hypothesis with fewer than i+1 signals
    std::array<std::array<Proportion, 3>, 3> pf_by_hypothesis;
    std::array<Proportion, 4> correct_count;

    // worst case over the contrary hypotheses
    Proportion pf(int detector) const;
    void merge(const PdPfResult &o);
};

// Simulates H0..H3 per trial with i.i.d. Rayleigh entries and random initial pilot phases.
PdPfResult pd_pf_montecarlo(const DetectionScenario &scenario, std::uint64_t trials,
                            std::uint64_t seed, int threads = 1);

class Stream;

// Received 4 x nnt block with the given transmitters active.
Eigen::MatrixXcd simulate_block(const DetectionScenario &scenario, const std::array<bool, 3> &active,
                                Stream &rng);

} // namespace cfbg
