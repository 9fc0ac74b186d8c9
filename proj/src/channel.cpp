// SPDX-License-Identifier: Apache-2.0
#include "cfbg/channel.hpp"

#include "cfbg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cfbg
{

void OfdmConfig::validate() const
{
    std::string err;
    auto fail = [&](const std::string &m) { err += (err.empty() ? "" : "; ") + m; };
    if (n_total < 1)
        fail("n_total must be positive");
    if (blocks < 1)
        fail("blocks must be positive");
    else if (n_total % blocks != 0)
        fail("n_total must be a multiple of blocks");
    if (n_t < 1)
        fail("n_t must be positive");
    if (taps < 1)
        fail("taps must be positive");
    if (taps > n_total)
        fail("taps exceed subcarriers");
    if (cyclic_prefix < taps - 1)
        fail("cyclic prefix shorter than taps - 1");
    if (!err.empty())
        throw std::invalid_argument("OfdmConfig: " + err);
}

namespace
{

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-15)
                break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

} // namespace

Eigen::MatrixXcd ula_correlation(double theta0, double spread, double spacing, int n_t, int nodes)
{
    if (n_t < 1)
        throw std::invalid_argument("ula_correlation: n_t must be positive");
    if (spread < 0.0 || spacing <= 0.0)
        throw std::invalid_argument("ula_correlation: spread must be non-negative and spacing positive");
    if (nodes < 2)
        throw std::invalid_argument("ula_correlation: need at least two quadrature nodes");

    // R is Toeplitz; evaluate each lag once.
    std::vector<std::complex<double>> lag(static_cast<std::size_t>(n_t));
    const double two_pi = 2.0 * std::numbers::pi;
    if (spread == 0.0) {
        for (int d = 0; d < n_t; ++d)
            lag[d] = std::polar(1.0, -two_pi * d * spacing * std::sin(theta0));
    } else {
        // Beyond 10 spreads the profile is below e^-50 of its peak; integrate over that window.
        const double half = std::min(std::numbers::pi, 10.0 * spread);
        std::vector<double> x, w;
        gauss_legendre(nodes, x, w);
        double norm = 0.0;
        std::vector<double> pw(static_cast<std::size_t>(nodes)), s(static_cast<std::size_t>(nodes));
        for (int i = 0; i < nodes; ++i) {
            const double u = half * x[i];
            pw[i] = half * w[i] * std::exp(-0.5 * u * u / (spread * spread));
            s[i] = std::sin(theta0 + u);
            norm += pw[i];
        }
        for (int d = 0; d < n_t; ++d) {
            std::complex<double> acc = 0.0;
            for (int i = 0; i < nodes; ++i)
                acc += pw[i] * std::polar(1.0, -two_pi * d * spacing * s[i]);
            lag[d] = acc / norm;
        }
    }

    Eigen::MatrixXcd R(n_t, n_t);
    for (int a = 0; a < n_t; ++a)
        for (int b = 0; b < n_t; ++b)
            R(a, b) = a >= b ? lag[a - b] : std::conj(lag[b - a]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::runtime_error("ula_correlation: quadrature produced an indefinite matrix; increase nodes");
    return R;
}

HermitianFactors hermitian_factors(const Eigen::MatrixXcd &R, double floor)
{
    if (R.rows() != R.cols())
        throw std::invalid_argument("hermitian_factors: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_factors: eigen-solver failed");
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
    const Eigen::MatrixXcd &V = es.eigenvectors();
    HermitianFactors f;
    f.eigenvalues = ev;
    f.sqrt = V * ev.cwiseSqrt().asDiagonal() * V.adjoint();
    f.inv_sqrt = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.adjoint();
    f.inv = V * ev.cwiseInverse().asDiagonal() * V.adjoint();
    return f;
}

PowerDelayProfile PowerDelayProfile::unit(int taps)
{
    if (taps < 1)
        throw std::invalid_argument("PowerDelayProfile: taps must be positive");
    return {std::vector<double>(static_cast<std::size_t>(taps), 1.0)};
}

PowerDelayProfile PowerDelayProfile::exponential(int taps, double decay, double total)
{
    if (taps < 1 || decay <= 0.0 || total <= 0.0)
        throw std::invalid_argument("PowerDelayProfile: invalid exponential profile");
    PowerDelayProfile p;
    double sum = 0.0;
    for (int l = 0; l < taps; ++l) {
        p.gains.push_back(std::exp(-l / decay));
        sum += p.gains.back();
    }
    for (auto &g : p.gains)
        g *= total / sum;
    return p;
}

double PowerDelayProfile::total() const
{
    double s = 0.0;
    for (double g : gains)
        s += g;
    return s;
}

Eigen::MatrixXcd draw_cir(const Eigen::MatrixXcd &r_sqrt, const PowerDelayProfile &pdp, Stream &rng)
{
    const int n_t = static_cast<int>(r_sqrt.rows());
    const int taps = static_cast<int>(pdp.gains.size());
    if (taps < 1 || r_sqrt.cols() != n_t)
        throw std::invalid_argument("draw_cir: inconsistent dimensions");
    Eigen::MatrixXcd white(n_t, taps);
    for (int a = 0; a < n_t; ++a)
        for (int l = 0; l < taps; ++l)
            white(a, l) = rng.cnormal(pdp.gains[l]);
    // row-vector model g = g_white (R^{1/2} (x) I): G = (R^{1/2})^T G_white
    return r_sqrt.transpose() * white;
}

Eigen::MatrixXcd dft_taps(int n, int taps)
{
    if (n < 1 || taps < 1 || taps > n)
        throw std::invalid_argument("dft_taps: need 1 <= taps <= n");
    Eigen::MatrixXcd F(n, taps);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < taps; ++l)
            F(k, l) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(k) * l) % n) / n);
    return F;
}

Eigen::MatrixXcd cir_to_fs(const Eigen::MatrixXcd &cir, const Eigen::MatrixXcd &f_l)
{
    if (cir.cols() != f_l.cols())
        throw std::invalid_argument("cir_to_fs: tap count mismatch");
    return cir * f_l.transpose();
}

Eigen::RowVectorXcd flatten_antenna_major(const Eigen::MatrixXcd &per_antenna)
{
    Eigen::RowVectorXcd row(per_antenna.size());
    const Eigen::Index n = per_antenna.cols();
    for (Eigen::Index a = 0; a < per_antenna.rows(); ++a)
        row.segment(a * n, n) = per_antenna.row(a);
    return row;
}

Eigen::MatrixXcd unflatten_antenna_major(const Eigen::RowVectorXcd &row, int n_t)
{
    if (n_t < 1 || row.size() % n_t != 0)
        throw std::invalid_argument("unflatten_antenna_major: length is not a multiple of n_t");
    const Eigen::Index n = row.size() / n_t;
    Eigen::MatrixXcd m(n_t, n);
    for (int a = 0; a < n_t; ++a)
        m.row(a) = row.segment(a * n, n);
    return m;
}

std::complex<double> PilotTone::symbol(int k) const
{
    return std::polar(std::sqrt(power), initial_phase + k * increment);
}

Eigen::VectorXcd PilotTone::column(int symbols) const
{
    Eigen::VectorXcd x(symbols);
    for (int k = 0; k < symbols; ++k)
        x(k) = symbol(k);
    return x;
}

Eigen::MatrixXcd simulate_rx(const std::vector<Eigen::RowVectorXcd> &channels, const std::vector<PilotTone> &pilots,
                             int symbols, double sigma2, Stream &rng, double jam_power)
{
    if (channels.size() != pilots.size())
        throw std::invalid_argument("simulate_rx: one pilot per channel required");
    if (symbols < 1 || sigma2 < 0.0 || jam_power < 0.0)
        throw std::invalid_argument("simulate_rx: invalid symbols or powers");
    if (channels.empty())
        throw std::invalid_argument("simulate_rx: no transmitters");
    const Eigen::Index m = channels.front().size();
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(symbols, m);
    for (std::size_t j = 0; j < channels.size(); ++j) {
        if (channels[j].size() != m)
            throw std::invalid_argument("simulate_rx: channel length mismatch");
        Y.noalias() += pilots[j].column(symbols) * channels[j];
    }
    const double w = sigma2 + jam_power;
    if (w > 0.0)
        for (Eigen::Index c = 0; c < m; ++c)
            for (int k = 0; k < symbols; ++k)
                Y(k, c) += rng.cnormal(w);
    return Y;
}

} // namespace cfbg
