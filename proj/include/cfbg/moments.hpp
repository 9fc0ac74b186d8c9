// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

namespace cfbg
{

enum class MomentMethod
{
    Analytic,
    MonteCarlo
};

std::string to_string(MomentMethod m);

// Mean, standard deviation and correlation with the smallest eigenvalue for the ordered
// eigenvalues of a 4x4 complex Wishart matrix with nnt degrees of freedom and identity scale.
struct MomentSet
{
    int nnt = 0;
    MomentMethod method = MomentMethod::Analytic;
    std::uint64_t draws = 0;

    std::array<double, 4> mean{};
    std::array<double, 4> sd{};
    std::array<double, 3> rho{}; // corr(lambda_i, lambda_4), i = 1..3

    // standard errors, Monte-Carlo only (batch means)
    std::array<double, 4> mean_se{};
    std::array<double, 4> sd_se{};
    std::array<double, 3> rho_se{};
};

using Monomial = std::array<int, 4>;

// Coefficients of prod_{i<j} (x_i - x_j)^2 in four variables.
std::map<Monomial, long long> squared_vandermonde();

// Largest nnt whose analytic moments keep their normalization to 1e-12 (checked in tests).
inline constexpr int kMaxAnalyticNnt = 256;

// E[prod_i lambda_i^p_i] for the ordered eigenvalues lambda_1 > ... > lambda_4.
double ordered_wishart_moment(int nnt, const Monomial &powers);

MomentSet joint_eigen_moments(int nnt);

MomentSet joint_eigen_moments_mc(int nnt, std::uint64_t draws, std::uint64_t seed, int threads = 1);

// Gaussian-ratio approximation of P(lambda_i / lambda_4 <= gamma), i = 1..3.
double ratio_cdf(int i, double gamma, const MomentSet &m);

struct Threshold
{
    double gamma = 0.0;
    std::array<double, 3> per_detector{};
    int i_opt = 1; // detector (1..3) attaining the maximum
};

// Smallest common threshold meeting false-alarm probability P on every detector.
Threshold solve_threshold(double P, const MomentSet &m);
Threshold solve_threshold(double P, int nnt);

// Smallest nnt in [4, max_nnt] whose calibrated threshold does not exceed gamma.
int required_block_resource(double P, double gamma, int max_nnt = 256);

} // namespace cfbg
