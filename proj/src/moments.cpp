// SPDX-License-Identifier: Apache-2.0
#include "cfbg/moments.hpp"

#include "cfbg/parallel.hpp"
#include "cfbg/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <quadmath.h>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cfbg
{

std::string to_string(MomentMethod m)
{
    return m == MomentMethod::Analytic ? "analytic" : "montecarlo";
}

std::map<Monomial, long long> squared_vandermonde()
{
    std::map<Monomial, long long> poly{{Monomial{0, 0, 0, 0}, 1}};
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            // (x_i - x_j)^2 = x_i^2 - 2 x_i x_j + x_j^2
            std::map<Monomial, long long> next;
            for (const auto &[mono, coef] : poly) {
                Monomial a = mono, b = mono, c = mono;
                a[i] += 2;
                b[i] += 1;
                b[j] += 1;
                c[j] += 2;
                next[a] += coef;
                next[b] -= 2 * coef;
                next[c] += coef;
            }
            poly.clear();
            for (const auto &[mono, coef] : next)
                if (coef != 0)
                    poly.emplace(mono, coef);
        }
    }
    return poly;
}

namespace
{

using Quad = __float128;

// log of the integral of prod_i x_i^p_i e^{-x_i} over x_1 > x_2 > x_3 > x_4 > 0.
// Integrates from the largest variable down; the running integrand is kept as
// e^{-c y} sum_j a_j y^j / j! with the factorial prefactors moved into the log term.
Quad log_ordered_integral(const Monomial &p)
{
    Quad log_scale = lgammaq(static_cast<Quad>(p[0]) + 1);
    std::vector<Quad> a(static_cast<std::size_t>(p[0]) + 1, 0);
    a[p[0]] = 1;
    Quad rate = 1;

    for (int v = 1; v < 4; ++v) {
        // integral over (y, inf) of x^k/k! e^{-c x} = e^{-c y} sum_{j<=k} c^{j-k-1} y^j / j!
        const std::size_t top = a.size();
        std::vector<Quad> b(top + 1, 0);
        for (std::size_t j = top; j-- > 0;)
            b[j] = (a[j] + b[j + 1]) / rate;
        b.pop_back();

        // times y^p e^{-y}: y^j/j! * y^p = C(j+p, j) p! y^{j+p}/(j+p)!
        const int pv = p[v];
        log_scale += lgammaq(static_cast<Quad>(pv) + 1);
        std::vector<Quad> next(top + pv, 0);
        Quad binom = 1;
        for (std::size_t j = 0; j < top; ++j) {
            if (j > 0)
                binom = binom * static_cast<Quad>(j + pv) / static_cast<Quad>(j);
            next[j + pv] = b[j] * binom;
        }
        a.swap(next);
        rate += 1;
    }

    // integral over (0, inf) of x^k/k! e^{-c x} = c^{-(k+1)}; all terms are positive
    Quad sum = 0;
    Quad inv_pow = 1 / rate;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += a[k] * inv_pow;
        inv_pow /= rate;
    }
    return log_scale + logq(sum);
}

// The squared Vandermonde expansion cancels heavily (its coefficients sum to zero), so the
// signed sum is accumulated in quad precision.
Quad ordered_moment_quad(int nnt, const Monomial &powers)
{
    static const std::map<Monomial, long long> vdm = squared_vandermonde();

    // ordered density K prod lambda^{nnt-4} e^{-lambda} Vandermonde^2,
    // K = 1 / (prod_{i=1..4} (nnt-i)! * 3! 2! 1! 0!)
    Quad log_k = -logq(12);
    for (int i = 1; i <= 4; ++i)
        log_k -= lgammaq(static_cast<Quad>(nnt - i) + 1);

    Quad sum = 0;
    for (const auto &[mono, coef] : vdm) {
        Monomial e;
        for (int i = 0; i < 4; ++i)
            e[i] = nnt - 4 + mono[i] + powers[i];
        sum += static_cast<Quad>(coef) * expq(log_k + log_ordered_integral(e));
    }
    return sum;
}

} // namespace

double ordered_wishart_moment(int nnt, const Monomial &powers)
{
    if (nnt < 4)
        throw std::invalid_argument("ordered_wishart_moment: nnt must be at least 4");
    for (int pw : powers)
        if (pw < 0)
            throw std::invalid_argument("ordered_wishart_moment: negative power");
    if (nnt > kMaxAnalyticNnt)
        throw std::domain_error("ordered_wishart_moment: nnt above " + std::to_string(kMaxAnalyticNnt) +
                                " loses precision; use the Monte-Carlo moments");
    return static_cast<double>(ordered_moment_quad(nnt, powers));
}

MomentSet joint_eigen_moments(int nnt)
{
    if (nnt < 4)
        throw std::invalid_argument("joint_eigen_moments: nnt must be at least 4");
    MomentSet m;
    m.nnt = nnt;
    m.method = MomentMethod::Analytic;
    for (int i = 0; i < 4; ++i) {
        Monomial one{0, 0, 0, 0}, two{0, 0, 0, 0};
        one[i] = 1;
        two[i] = 2;
        m.mean[i] = ordered_wishart_moment(nnt, one);
        const double var = ordered_wishart_moment(nnt, two) - m.mean[i] * m.mean[i];
        if (!(var > 0.0))
            throw std::runtime_error("joint_eigen_moments: non-positive variance");
        m.sd[i] = std::sqrt(var);
    }
    for (int i = 0; i < 3; ++i) {
        Monomial cross{0, 0, 0, 1};
        cross[i] = 1;
        const double cov = ordered_wishart_moment(nnt, cross) - m.mean[i] * m.mean[3];
        m.rho[i] = cov / (m.sd[i] * m.sd[3]);
    }
    return m;
}

namespace
{

// Running statistics of the four ordered eigenvalues, merged with the pairwise update.
struct EigenStats
{
    double n = 0;
    std::array<double, 4> mean{};
    std::array<double, 4> m2{};
    std::array<double, 3> c4{}; // co-moment with lambda_4

    void add(const std::array<double, 4> &x)
    {
        n += 1;
        std::array<double, 4> d{};
        for (int i = 0; i < 4; ++i) {
            d[i] = x[i] - mean[i];
            mean[i] += d[i] / n;
        }
        for (int i = 0; i < 4; ++i)
            m2[i] += d[i] * (x[i] - mean[i]);
        for (int i = 0; i < 3; ++i)
            c4[i] += d[i] * (x[3] - mean[3]);
    }

    void merge(const EigenStats &o)
    {
        if (o.n == 0)
            return;
        const double tot = n + o.n;
        std::array<double, 4> d{};
        for (int i = 0; i < 4; ++i)
            d[i] = o.mean[i] - mean[i];
        for (int i = 0; i < 3; ++i)
            c4[i] += o.c4[i] + d[i] * d[3] * n * o.n / tot;
        for (int i = 0; i < 4; ++i) {
            m2[i] += o.m2[i] + d[i] * d[i] * n * o.n / tot;
            mean[i] += d[i] * o.n / tot;
        }
        n = tot;
    }

    double sd(int i) const { return std::sqrt(m2[i] / (n - 1)); }
    double rho(int i) const { return c4[i] / std::sqrt(m2[i] * m2[3]); }
};

double spread_over_batches(const std::vector<double> &v)
{
    const double nb = static_cast<double>(v.size());
    if (nb < 2)
        return std::numeric_limits<double>::quiet_NaN();
    double mu = 0;
    for (double x : v)
        mu += x;
    mu /= nb;
    double ss = 0;
    for (double x : v)
        ss += (x - mu) * (x - mu);
    return std::sqrt(ss / (nb - 1) / nb);
}

} // namespace

MomentSet joint_eigen_moments_mc(int nnt, std::uint64_t draws, std::uint64_t seed, int threads)
{
    if (nnt < 4)
        throw std::invalid_argument("joint_eigen_moments_mc: nnt must be at least 4");
    if (draws < 2 * kTrialChunk)
        throw std::invalid_argument("joint_eigen_moments_mc: need at least two full batches of draws");
    check_trial_range(0, draws);

    const std::size_t chunks = static_cast<std::size_t>((draws + kTrialChunk - 1) / kTrialChunk);
    std::vector<EigenStats> partial(chunks);
    run_chunks(draws, threads, [&](std::size_t c, std::uint64_t first, std::uint64_t end) {
        Eigen::MatrixXcd X(4, nnt);
        Eigen::Matrix4cd W;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es;
        for (std::uint64_t t = first; t < end; ++t) {
            Stream rng(seed, t, StreamTag::Moments);
            for (int j = 0; j < nnt; ++j)
                for (int i = 0; i < 4; ++i)
                    X(i, j) = rng.cnormal(1.0);
            W.noalias() = X * X.adjoint();
            es.compute(W, Eigen::EigenvaluesOnly);
            const auto &ev = es.eigenvalues();
            partial[c].add({ev[3], ev[2], ev[1], ev[0]});
        }
    });

    EigenStats total;
    for (const auto &p : partial)
        total.merge(p);

    MomentSet m;
    m.nnt = nnt;
    m.method = MomentMethod::MonteCarlo;
    m.draws = draws;
    for (int i = 0; i < 4; ++i) {
        m.mean[i] = total.mean[i];
        m.sd[i] = total.sd(i);
    }
    for (int i = 0; i < 3; ++i)
        m.rho[i] = total.rho(i);

    // batch means over full chunks
    std::vector<double> v;
    for (int i = 0; i < 4; ++i) {
        v.clear();
        for (const auto &p : partial)
            if (p.n == kTrialChunk)
                v.push_back(p.mean[i]);
        m.mean_se[i] = spread_over_batches(v);
        v.clear();
        for (const auto &p : partial)
            if (p.n == kTrialChunk)
                v.push_back(p.sd(i));
        m.sd_se[i] = spread_over_batches(v);
    }
    for (int i = 0; i < 3; ++i) {
        v.clear();
        for (const auto &p : partial)
            if (p.n == kTrialChunk)
                v.push_back(p.rho(i));
        m.rho_se[i] = spread_over_batches(v);
    }
    return m;
}

namespace
{

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

double ratio_cdf(int i, double gamma, const MomentSet &m)
{
    if (i < 1 || i > 3)
        throw std::out_of_range("ratio_cdf: detector index must be 1..3");
    const double zi = m.mean[i - 1], z4 = m.mean[3];
    const double xi = m.sd[i - 1], x4 = m.sd[3];
    const double r = m.rho[i - 1];
    if (!(xi > 0) || !(x4 > 0) || !(std::fabs(r) < 1))
        throw std::domain_error("ratio_cdf: invalid moment set");
    const double q = gamma * gamma / (xi * xi) - 2.0 * r * gamma / (xi * x4) + 1.0 / (x4 * x4);
    if (!(q > 0))
        throw std::domain_error("ratio_cdf: non-positive scale");
    return normal_cdf((z4 * gamma - zi) / (xi * x4 * std::sqrt(q)));
}

Threshold solve_threshold(double P, const MomentSet &m)
{
    if (!(P > 0.0 && P < 1.0))
        throw std::invalid_argument("solve_threshold: P must lie in (0, 1)");
    const double target = 1.0 - P;
    Threshold th;
    for (int i = 1; i <= 3; ++i) {
        double lo = 1.0, hi = 2.0;
        if (ratio_cdf(i, lo, m) >= target) {
            th.per_detector[i - 1] = lo;
            continue;
        }
        while (ratio_cdf(i, hi, m) < target) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e6) {
                const double limit = normal_cdf(m.mean[3] / m.sd[3]);
                throw std::domain_error("solve_threshold: detector " + std::to_string(i) +
                                        " cannot reach CDF " + std::to_string(target) + " at nnt=" +
                                        std::to_string(m.nnt) + " (limit " + std::to_string(limit) + ")");
            }
        }
        // keep F(hi) >= target so the returned threshold always meets P
        while (hi - lo > 1e-4 && ratio_cdf(i, hi, m) - target > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            if (ratio_cdf(i, mid, m) >= target)
                hi = mid;
            else
                lo = mid;
        }
        th.per_detector[i - 1] = hi;
    }
    th.i_opt = 1;
    for (int i = 2; i <= 3; ++i)
        if (th.per_detector[i - 1] > th.per_detector[th.i_opt - 1])
            th.i_opt = i;
    th.gamma = th.per_detector[th.i_opt - 1];
    return th;
}

Threshold solve_threshold(double P, int nnt) { return solve_threshold(P, joint_eigen_moments(nnt)); }

int required_block_resource(double P, double gamma, int max_nnt)
{
    if (!(gamma > 1.0))
        throw std::invalid_argument("required_block_resource: gamma must exceed 1");
    if (max_nnt < 4)
        throw std::invalid_argument("required_block_resource: max_nnt must be at least 4");
    auto meets = [&](int nnt) {
        try {
            return solve_threshold(P, nnt).gamma <= gamma;
        } catch (const std::domain_error &) {
            return false;
        }
    };
    if (!meets(max_nnt))
        throw std::domain_error("required_block_resource: no nnt up to " + std::to_string(max_nnt) +
                                " reaches the requested threshold");
    int lo = 3, hi = max_nnt; // meets(lo) treated false, meets(hi) true
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (meets(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace cfbg
