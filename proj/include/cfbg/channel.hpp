// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace cfbg
{

class Stream;

struct OfdmConfig
{
    int n_total = 128;    // subcarriers
    int blocks = 1;       // subcarrier blocks
    int n_t = 8;          // receive antennas
    int taps = 6;         // channel taps L
    int cyclic_prefix = 16;

    int block_size() const { return n_total / blocks; }
    // throws std::invalid_argument listing every violated constraint
    void validate() const;
};

// Angle-of-arrival correlation of a uniform linear array. Entry (a, b) integrates
// exp(-j 2 pi (a - b) spacing sin(theta)) against a Gaussian angular profile around theta0,
// truncated to [-pi, pi] about the mean and renormalized. Angles in radians, spacing in wavelengths.
Eigen::MatrixXcd ula_correlation(double theta0, double spread, double spacing, int n_t, int nodes = 128);

// Hermitian square root, inverse square root and inverse with eigenvalues floored at `floor`.
struct HermitianFactors
{
    Eigen::MatrixXcd sqrt;
    Eigen::MatrixXcd inv_sqrt;
    Eigen::MatrixXcd inv;
    Eigen::VectorXd eigenvalues;
};

inline constexpr double kEigenFloor = 1e-8;

HermitianFactors hermitian_factors(const Eigen::MatrixXcd &R, double floor = kEigenFloor);

// Per-tap variances. The default gives each tap unit variance, so an antenna's total power is L.
struct PowerDelayProfile
{
    std::vector<double> gains;

    static PowerDelayProfile unit(int taps);
    static PowerDelayProfile exponential(int taps, double decay, double total);
    double total() const;
};

// Channel impulse response as an N_T x L matrix (row = antenna). Spatial covariance R per tap:
// E[conj(G(a,l)) G(b,l)] = R(a,b) * gain_l.
Eigen::MatrixXcd draw_cir(const Eigen::MatrixXcd &r_sqrt, const PowerDelayProfile &pdp, Stream &rng);

// DFT taps: F_L(n, l) = exp(-j 2 pi n l / N), n < N, l < L.
Eigen::MatrixXcd dft_taps(int n, int taps);

// Frequency response, N_T x N (row = antenna): H = G F_L^T.
Eigen::MatrixXcd cir_to_fs(const Eigen::MatrixXcd &cir, const Eigen::MatrixXcd &f_l);

// Row-vector layout [antenna 0 subcarriers, antenna 1 subcarriers, ...].
Eigen::RowVectorXcd flatten_antenna_major(const Eigen::MatrixXcd &per_antenna);
Eigen::MatrixXcd unflatten_antenna_major(const Eigen::RowVectorXcd &row, int n_t);

struct PilotTone
{
    double initial_phase = 0.0;
    double increment = 0.0;
    double power = 1.0;

    std::complex<double> symbol(int k) const;
    Eigen::VectorXcd column(int symbols) const;
};

// Rows = pilot symbols, columns = flattened channel samples.
// y = sum_j x_j h_j + w, plus optional wideband jamming of the given power on every sample.
Eigen::MatrixXcd simulate_rx(const std::vector<Eigen::RowVectorXcd> &channels,
                             const std::vector<PilotTone> &pilots, int symbols, double sigma2,
                             Stream &rng, double jam_power = 0.0);

} // namespace cfbg
