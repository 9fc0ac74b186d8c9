#include "cfbg/channel.hpp"
#include "cfbg/estimation.hpp"
#include "cfbg/rng.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace cfbg;
using Catch::Approx;

namespace
{

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

Eigen::MatrixXcd gaussian(int rows, int cols, std::uint64_t trial)
{
    Stream rng(123, trial, StreamTag::Channel);
    Eigen::MatrixXcd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = rng.cnormal();
    return m;
}

Eigen::Matrix3cd pilots(double pb, double pc, double pe)
{
    Eigen::Matrix3cd x;
    const std::array<double, 3> phase{pb, pc, pe}, inc{2 * kPi / 3, 4 * kPi / 3, 0.0};
    for (int u = 0; u < 3; ++u)
        for (int k = 0; k < 3; ++k)
            x(k, u) = std::polar(1.0, phase[u] + k * inc[u]);
    return x;
}

} // namespace

TEST_CASE("sample_covariance - normalized Gram matrix")
{
    const Eigen::MatrixXcd y = gaussian(3, 50, 1);
    const Eigen::MatrixXcd c = sample_covariance(y);
    CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    // C(a, b) = sum y_a conj(y_b); Eigen dot conjugates its first operand
    CHECK(std::abs(c(1, 2) - y.row(2).dot(y.row(1)) / 50.0) < 1e-14);
    CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXcd(3, 0)), std::invalid_argument);
}

TEST_CASE("fs_to_cir_estimate - recovers the whitened taps exactly")
{
    const int n_t = 8, taps = 6, n = 64;
    const Eigen::MatrixXcd R = ula_correlation(deg(-30), deg(10), 0.5, n_t);
    const HermitianFactors f = hermitian_factors(R);
    const Eigen::MatrixXcd white = gaussian(n_t, taps, 2);
    const Eigen::MatrixXcd G = f.sqrt.transpose() * white;
    const Eigen::MatrixXcd F = dft_taps(n, taps);
    const Eigen::RowVectorXcd h = flatten_antenna_major(cir_to_fs(G, F));

    CHECK((fs_to_taps(h, F, n_t) - G).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((fs_to_cir_estimate(h, f.inv_sqrt, F) - white).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fs_to_taps - matches a pseudo-inverse least-squares fit")
{
    const int n_t = 3, taps = 4, n = 32;
    const Eigen::MatrixXcd F = dft_taps(n, taps);
    // not in the range of the DFT columns, so the fit is a genuine projection
    const Eigen::MatrixXcd noisy = gaussian(n_t, n, 3);
    const Eigen::MatrixXcd got = fs_to_taps(flatten_antenna_major(noisy), F, n_t);
    const Eigen::MatrixXcd Ft = F.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Ft.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (int a = 0; a < n_t; ++a) {
        // h_a = g_a F^T  <=>  F g_a^T = h_a^T
        const Eigen::VectorXcd g = svd.solve(noisy.row(a).transpose());
        CHECK((got.row(a).transpose() - g).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(fs_to_taps(flatten_antenna_major(noisy), dft_taps(16, taps), n_t), std::invalid_argument);
}

TEST_CASE("ls_estimate - contamination identity")
{
    // Eve copies Bob's increment, so her pilot is not orthogonal to his
    Eigen::Matrix3cd x = pilots(0.4, 1.1, 2.0);
    for (int k = 0; k < 3; ++k)
        x(k, 2) = std::polar(2.0, 2.0 + k * 2 * kPi / 3);
    const Eigen::RowVectorXcd hb = gaussian(1, 20, 4), he = gaussian(1, 20, 5);
    const Eigen::MatrixXcd y = x.col(0) * hb + x.col(2) * he;
    const std::complex<double> leak = x.col(0).dot(x.col(2)) / x.col(0).squaredNorm();
    CHECK(std::abs(leak) == Approx(2.0));
    CHECK((ls_estimate(y, x.col(0)) - (hb + leak * he)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(ls_estimate(y, Eigen::VectorXcd::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(ls_estimate(y, Eigen::VectorXcd::Ones(2)), std::invalid_argument);
}

TEST_CASE("mmse_fs_estimate - zero pilot gives a zero estimate")
{
    const Eigen::MatrixXcd y = gaussian(3, 40, 6);
    const MmseEstimate e = mmse_fs_estimate(y, Eigen::VectorXcd::Zero(3), 1.0);
    CHECK(e.h.cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(e.regularized);
}

TEST_CASE("mmse_fs_estimate - weight scaling and regularization")
{
    const Eigen::Matrix3cd x = pilots(0.1, 0.7, 1.9);
    const Eigen::MatrixXcd y = x.col(0) * gaussian(1, 64, 7) + gaussian(3, 64, 8);
    const MmseEstimate plain = mmse_fs_estimate(y, x.col(0), 4.0);
    MmseOptions o;
    o.sqrt_weight = true;
    const MmseEstimate rooted = mmse_fs_estimate(y, x.col(0), 4.0, o);
    CHECK((plain.h - 2.0 * rooted.h).cwiseAbs().maxCoeff() < 1e-12);

    // matches the direct formula s x^H C^{-1} Y
    const Eigen::MatrixXcd C = y * y.adjoint() / 64.0;
    const Eigen::RowVectorXcd direct = 4.0 * x.col(0).adjoint() * C.inverse() * y;
    CHECK((plain.h - direct).cwiseAbs().maxCoeff() < 1e-10);

    // a rank-one observation needs the ridge
    const Eigen::MatrixXcd rank1 = x.col(0) * gaussian(1, 64, 9);
    const MmseEstimate r = mmse_fs_estimate(rank1, x.col(0), 1.0);
    CHECK(r.regularized);
    CHECK(std::isfinite(r.h.cwiseAbs().maxCoeff()));

    CHECK_THROWS_AS(mmse_fs_estimate(y, x.col(0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mmse_fs_estimate(y, Eigen::VectorXcd::Ones(2), 1.0), std::invalid_argument);
}

TEST_CASE("identification_metric - matches the double sum")
{
    const Eigen::MatrixXcd G = gaussian(4, 3, 10);
    const Eigen::MatrixXcd A = gaussian(4, 4, 11);
    const Eigen::MatrixXcd Rinv = A * A.adjoint();
    std::complex<double> s = 0.0;
    for (int l = 0; l < 3; ++l)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                s += G(a, l) * Rinv(a, b) * std::conj(G(b, l));
    CHECK(identification_metric(G, Rinv) == Approx(s.real()).epsilon(1e-12));
    CHECK(std::fabs(s.imag()) < 1e-10);
    CHECK(identification_metric(G, Eigen::MatrixXcd::Identity(4, 4)) == Approx(G.squaredNorm()));
    CHECK_THROWS_AS(identification_metric(G, Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("ml_identify - invariant under a common change of basis")
{
    const Eigen::MatrixXcd Ga = gaussian(4, 3, 12), Gb = 1.3 * gaussian(4, 3, 13);
    const Eigen::MatrixXcd A = gaussian(4, 4, 14) + 3.0 * Eigen::MatrixXcd::Identity(4, 4);
    const Eigen::MatrixXcd Rinv = A * A.adjoint();
    const IdentifyResult base = ml_identify(Ga, Gb, Rinv);

    // G -> T G with Rinv -> T^{-T} Rinv conj(T)^{-1} leaves every metric unchanged
    const Eigen::MatrixXcd T = gaussian(4, 4, 15) + 2.0 * Eigen::MatrixXcd::Identity(4, 4);
    const Eigen::MatrixXcd Ti = T.inverse();
    const Eigen::MatrixXcd Rinv2 = Ti.transpose() * Rinv * Ti.conjugate();
    const IdentifyResult moved = ml_identify(T * Ga, T * Gb, Rinv2);
    CHECK(moved.pick == base.pick);
    CHECK(moved.metric_a == Approx(base.metric_a).epsilon(1e-9));
    CHECK(moved.metric_b == Approx(base.metric_b).epsilon(1e-9));

    // swapping the candidates swaps the pick; equal candidates go to the first
    CHECK(ml_identify(Gb, Ga, Rinv).pick == 1 - base.pick);
    CHECK(ml_identify(Ga, Ga, Rinv).pick == 0);
    CHECK_THROWS_AS(ml_identify(Ga, gaussian(4, 2, 1), Rinv), std::invalid_argument);
}

TEST_CASE("umse - matches an elementwise loop")
{
    const Eigen::RowVectorXcd eb = gaussian(1, 24, 16), tb = gaussian(1, 24, 17);
    const Eigen::RowVectorXcd ec = gaussian(1, 24, 18), tc = gaussian(1, 24, 19);
    double s = 0.0;
    for (int i = 0; i < 24; ++i)
        s += std::norm(eb(i) - tb(i)) + std::norm(ec(i) - tc(i));
    CHECK(umse(eb, tb, ec, tc, 8, 3) == Approx(s / (2.0 * 8 * 3)).epsilon(1e-14));
    CHECK(umse(tb, tb, tc, tc, 8, 3) == 0.0);
    CHECK_THROWS_AS(umse(eb, tb, ec, gaussian(1, 5, 1), 8, 3), std::invalid_argument);
}

TEST_CASE("iep_asymptotic - invariant to a common pilot and noise scaling")
{
    IepInputs in;
    in.x = pilots(0.3, 1.4, 2.2);
    in.r_b = ula_correlation(deg(-30), deg(10), 0.5, 16);
    in.r_c = ula_correlation(deg(15), deg(10), 0.5, 16);
    in.r_e = ula_correlation(deg(50), deg(10), 0.5, 16);
    IepInputs scaled = in;
    scaled.x *= 3.0;
    scaled.sigma2 *= 9.0;
    for (IepVariant v : {IepVariant::Printed, IepVariant::PrintedEveTrace, IepVariant::Pipeline}) {
        const IepAsymptotic a = iep_asymptotic(in, v), b = iep_asymptotic(scaled, v);
        CHECK(a.a == Approx(b.a).epsilon(1e-10));
        CHECK(a.b == Approx(b.b).epsilon(1e-10));
        CHECK(a.iep_event == b.iep_event);
    }
}

TEST_CASE("iep_asymptotic - estimation error limits")
{
    IepInputs in;
    in.x = pilots(0.3, 1.4, 2.2);
    in.r_b = ula_correlation(deg(-30), deg(10), 0.5, 8);
    in.r_c = ula_correlation(deg(15), deg(10), 0.5, 8);
    in.r_e = ula_correlation(deg(50), deg(10), 0.5, 8);

    // no noise and independent pilots: the estimate is exact
    in.sigma2 = 1e-12;
    IepAsymptotic r = iep_asymptotic(in, IepVariant::PrintedEveTrace);
    CHECK(std::fabs(r.a) < 1e-6);
    CHECK(std::fabs(r.b) < 1e-6);

    // overwhelming noise: the estimate carries no information
    in.sigma2 = 1e12;
    r = iep_asymptotic(in, IepVariant::PrintedEveTrace);
    CHECK(r.a == Approx(1.0).margin(1e-9));
    CHECK(r.b == Approx(1.0).margin(1e-9));

    in.sigma2 = 1.0;
    in.taps = 0;
    CHECK_THROWS_AS(iep_asymptotic(in, IepVariant::Pipeline), std::invalid_argument);
}

TEST_CASE("iep_asymptotic - impostor with the authentic statistics is never preferred")
{
    IepInputs in;
    in.x = pilots(0.3, 1.4, 0.3);
    in.x.col(2) = in.x.col(0);
    in.r_b = ula_correlation(deg(-30), deg(10), 0.5, 8);
    in.r_c = ula_correlation(deg(15), deg(10), 0.5, 8);
    in.r_e = in.r_b;
    const IepAsymptotic r = iep_asymptotic(in, IepVariant::Pipeline);
    CHECK(r.lhs == Approx(r.rhs).epsilon(1e-12));
    CHECK_FALSE(r.iep_event);
}

TEST_CASE("iep_asymptotic - separated users favour the authentic metric")
{
    IepInputs in;
    in.x = pilots(0.3, 1.4, 2.2);
    in.r_b = ula_correlation(deg(-30), deg(10), 0.5, 64);
    in.r_c = ula_correlation(deg(15), deg(10), 0.5, 64);
    in.r_e = ula_correlation(deg(50), deg(10), 0.5, 64);
    const IepAsymptotic r = iep_asymptotic(in, IepVariant::Pipeline);
    CHECK(r.lhs < r.rhs);
    CHECK_FALSE(r.iep_event);
}
