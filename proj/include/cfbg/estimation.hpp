// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace cfbg
{

// Stacked observation: rows are the three pilot symbols, columns the N * N_T channel samples.
Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd &ybar);

struct MmseOptions
{
    // Scale the weight by the square root of the channel power instead of the power itself.
    bool sqrt_weight = false;
    // Relative Tikhonov load applied when the sample covariance is numerically singular.
    double ridge = 1e-10;
};

struct MmseEstimate
{
    Eigen::RowVectorXcd h;
    bool regularized = false;
};

// Semi-blind linear MMSE: h = s * x^H C^{-1} Ybar with C the sample covariance of Ybar and
// s the per-sample prior channel power (tap power * Tr(R) / N_T).
MmseEstimate mmse_fs_estimate(const Eigen::MatrixXcd &ybar, const Eigen::VectorXcd &xbar,
                              double channel_power, const MmseOptions &opt = {});

// Per-antenna least-squares taps from a flattened frequency response: N_T x L.
Eigen::MatrixXcd fs_to_taps(const Eigen::RowVectorXcd &h, const Eigen::MatrixXcd &f_l, int n_t);

// Taps decorrelated across antennas: conj(R^{-1/2}) * taps.
Eigen::MatrixXcd fs_to_cir_estimate(const Eigen::RowVectorXcd &h, const Eigen::MatrixXcd &r_inv_sqrt,
                                    const Eigen::MatrixXcd &f_l);

// Least squares against a single known pilot: x^+ Y.
Eigen::RowVectorXcd ls_estimate(const Eigen::MatrixXcd &y, const Eigen::VectorXcd &x);

// Quadratic form r (R^{-1} (x) I_L) r^H of a tap matrix.
double identification_metric(const Eigen::MatrixXcd &cir, const Eigen::MatrixXcd &r_inv);

struct IdentifyResult
{
    int pick = 0; // 0 for the first candidate, 1 for the second; ties go to the first
    double metric_a = 0.0;
    double metric_b = 0.0;
};

IdentifyResult ml_identify(const Eigen::MatrixXcd &cir_a, const Eigen::MatrixXcd &cir_b,
                           const Eigen::MatrixXcd &r_target_inv);

double umse(const Eigen::RowVectorXcd &est_b, const Eigen::RowVectorXcd &true_b,
            const Eigen::RowVectorXcd &est_c, const Eigen::RowVectorXcd &true_c, int n, int n_t);

enum class IepVariant
{
    Printed,          // A Tr(R_B^-2) > B Tr(R_E^-1 R_B^-1), B built from Tr(R_C)
    PrintedEveTrace,  // same inequality, B built from Tr(R_E)
    Pipeline          // large-sample metric means of the implemented identification chain
};

struct IepInputs
{
    Eigen::Matrix3cd x;      // columns: Bob, Charlie, Eva pilots over three symbols
    Eigen::MatrixXcd r_b, r_c, r_e;
    int taps = 6;
    double tap_power = 6.0;  // sum of per-tap variances
    int n = 128;             // subcarriers per antenna
    double sigma2 = 1.0;
};

struct IepAsymptotic
{
    double a = 0.0;
    double b = 0.0;
    double lhs = 0.0;  // authentic side
    double rhs = 0.0;  // impostor side
    bool iep_event = false; // authentic metric exceeds the impostor's
};

IepAsymptotic iep_asymptotic(const IepInputs &in, IepVariant variant);

} // namespace cfbg
