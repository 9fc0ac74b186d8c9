// SPDX-License-Identifier: Apache-2.0
#include "cfbg/detection.hpp"

#include "cfbg/parallel.hpp"
#include "cfbg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cfbg
{

Matrix4cd sample_gram(const Eigen::MatrixXcd &Y, double sigma2)
{
    if (Y.rows() != 4)
        throw std::invalid_argument("sample_gram: expected 4 rows");
    if (Y.cols() < 4)
        throw std::invalid_argument("sample_gram: need at least 4 samples per block");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("sample_gram: noise power must be positive");
    return (Y * Y.adjoint()) / sigma2;
}

EigenRatios ordered_ratios(const Matrix4cd &R)
{
    const double scale = std::max(R.cwiseAbs().maxCoeff(), 1e-300);
    if ((R - R.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("ordered_ratios: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(R, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("ordered_ratios: eigen-solver failed");
    EigenRatios out;
    for (int i = 0; i < 4; ++i)
        out.lambda[i] = std::max(0.0, es.eigenvalues()[3 - i]);

    const double tol = kRankTolerance * out.lambda[0];
    if (out.lambda[0] <= 0.0 || out.lambda[3] <= tol) {
        out.degenerate = true;
        out.rank = 0;
        for (double l : out.lambda)
            out.rank += out.lambda[0] > 0.0 && l > tol;
        const double inf = std::numeric_limits<double>::infinity();
        out.t_mm = out.rank >= 1 ? inf : 1.0;
        out.t_smm = out.rank >= 2 ? inf : 1.0;
        out.t_tmm = out.rank >= 3 ? inf : 1.0;
        return out;
    }
    out.t_mm = out.lambda[0] / out.lambda[3];
    out.t_smm = out.lambda[1] / out.lambda[3];
    out.t_tmm = out.lambda[2] / out.lambda[3];
    return out;
}

int decide_count(const EigenRatios &r, double gamma)
{
    if (r.degenerate)
        return std::min(r.rank, 3);
    if (r.t_tmm > gamma)
        return 3;
    if (r.t_smm > gamma)
        return 2;
    if (r.t_mm > gamma)
        return 1;
    return 0;
}

int detect_signal_count(const Eigen::MatrixXcd &Y, double sigma2, double gamma)
{
    return decide_count(ordered_ratios(sample_gram(Y, sigma2)), gamma);
}

namespace
{

constexpr double kZ95 = 1.959963984540054;

double wilson_bound(std::uint64_t hits, std::uint64_t n, double sign)
{
    if (n == 0)
        return sign < 0 ? 0.0 : 1.0;
    if (hits == 0 && sign < 0)
        return 0.0;
    if (hits == n && sign > 0)
        return 1.0;
    const double p = static_cast<double>(hits) / n;
    const double z2 = kZ95 * kZ95;
    const double centre = p + z2 / (2.0 * n);
    const double half = kZ95 * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n));
    return std::clamp((centre + sign * half) / (1 + z2 / n), 0.0, 1.0);
}

} // namespace

double Proportion::lower() const { return wilson_bound(hits, trials, -1.0); }
double Proportion::upper() const { return wilson_bound(hits, trials, +1.0); }

Proportion PdPfResult::pf(int detector) const
{
    if (detector < 0 || detector > 2)
        throw std::out_of_range("PdPfResult::pf: detector index");
    Proportion worst;
    for (int h = 0; h <= detector; ++h) {
        const auto &p = pf_by_hypothesis[detector][h];
        if (worst.trials == 0 || p.rate() > worst.rate())
            worst = p;
    }
    return worst;
}

void PdPfResult::merge(const PdPfResult &o)
{
    for (int i = 0; i < 3; ++i) {
        pd[i].merge(o.pd[i]);
        for (int h = 0; h < 3; ++h)
            pf_by_hypothesis[i][h].merge(o.pf_by_hypothesis[i][h]);
    }
    for (int i = 0; i < 4; ++i)
        correct_count[i].merge(o.correct_count[i]);
}

Eigen::MatrixXcd simulate_block(const DetectionScenario &s, const std::array<bool, 3> &active, Stream &rng)
{
    const double amp = std::sqrt(s.sigma2 * std::pow(10.0, s.snr_db / 10.0));
    Eigen::MatrixXcd Y(4, s.nnt);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < s.nnt; ++c)
            Y(r, c) = rng.cnormal(s.sigma2);
    for (int u = 0; u < 3; ++u) {
        if (!active[u])
            continue;
        const double phase0 = 2.0 * std::numbers::pi * rng.uniform();
        Eigen::Vector4cd x;
        for (int k = 0; k < 4; ++k)
            x(k) = amp * std::polar(1.0, phase0 + k * s.increments[u]);
        Eigen::RowVectorXcd h(s.nnt);
        for (int c = 0; c < s.nnt; ++c)
            h(c) = rng.cnormal(1.0);
        Y.noalias() += x * h;
    }
    return Y;
}

PdPfResult pd_pf_montecarlo(const DetectionScenario &s, std::uint64_t trials, std::uint64_t seed, int threads)
{
    if (s.nnt < 4)
        throw std::invalid_argument("pd_pf_montecarlo: nnt must be at least 4");
    if (!(s.gamma >= 1.0))
        throw std::invalid_argument("pd_pf_montecarlo: gamma must be at least 1");
    check_trial_range(0, trials);

    return reduce_trials<PdPfResult>(trials, threads, [&](std::uint64_t t, PdPfResult &acc) {
        Stream rng(seed, t, StreamTag::Detection);
        for (int h = 0; h <= 3; ++h) {
            const std::array<bool, 3> active{h >= 1, h >= 2, h >= 3};
            const EigenRatios r = ordered_ratios(sample_gram(simulate_block(s, active, rng), s.sigma2));
            const std::array<double, 3> stat{r.t_mm, r.t_smm, r.t_tmm};
            for (int d = 0; d < 3; ++d) {
                const bool fire = stat[d] > s.gamma;
                if (h == d + 1) {
                    acc.pd[d].trials++;
                    acc.pd[d].hits += fire;
                } else if (h <= d) {
                    acc.pf_by_hypothesis[d][h].trials++;
                    acc.pf_by_hypothesis[d][h].hits += fire;
                }
            }
            acc.correct_count[h].trials++;
            acc.correct_count[h].hits += decide_count(r, s.gamma) == h;
        }
    });
}

} // namespace cfbg
