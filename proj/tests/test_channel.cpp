#include "cfbg/channel.hpp"
#include "cfbg/rng.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>

using namespace cfbg;
using Catch::Approx;

namespace
{

constexpr double kPi = std::numbers::pi;

double simpson(const std::function<double(double)> &f, double a, double b, double fa, double fm, double fb,
               double whole, double eps, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

// Pre-split so the first Simpson estimate cannot miss a narrow angular profile.
double integrate(const std::function<double(double)> &f, double a, double b)
{
    const int pieces = 256;
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + (b - a) * i / pieces, hi = a + (b - a) * (i + 1) / pieces;
        const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        total += simpson(f, lo, hi, fa, fm, fb, (hi - lo) / 6.0 * (fa + 4.0 * fm + fb), 1e-15, 30);
    }
    return total;
}

// Correlation at lag d by direct adaptive quadrature over the full circle.
std::complex<double> ula_lag_oracle(double theta0, double spread, double spacing, int d)
{
    auto w = [&](double u) { return std::exp(-0.5 * u * u / (spread * spread)); };
    const double norm = integrate(w, -kPi, kPi);
    const double re = integrate([&](double u) { return w(u) * std::cos(2 * kPi * d * spacing * std::sin(theta0 + u)); },
                                -kPi, kPi);
    const double im = integrate([&](double u) { return -w(u) * std::sin(2 * kPi * d * spacing * std::sin(theta0 + u)); },
                                -kPi, kPi);
    return {re / norm, im / norm};
}

double deg(double d) { return d * kPi / 180.0; }

} // namespace

TEST_CASE("ula_correlation - agrees with adaptive quadrature")
{
    for (double theta : {-30.0, 0.0, 15.0, 50.0}) {
        for (double spread : {2.0, 10.0, 25.0}) {
            const int n_t = 8;
            const Eigen::MatrixXcd R = ula_correlation(deg(theta), deg(spread), 0.5, n_t);
            for (int d = 0; d < n_t; ++d) {
                const std::complex<double> ref = ula_lag_oracle(deg(theta), deg(spread), 0.5, d);
                CHECK(std::abs(R(d, 0) - ref) < 1e-9);
            }
        }
    }
}

TEST_CASE("ula_correlation - Hermitian, unit diagonal, positive semidefinite")
{
    const Eigen::MatrixXcd R = ula_correlation(deg(20), deg(10), 0.5, 32);
    CHECK((R - R.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < 32; ++i)
        CHECK(std::abs(R(i, i) - 1.0) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK(es.eigenvalues().sum() == Approx(32.0));
}

TEST_CASE("ula_correlation - zero spread is a rank-one steering matrix")
{
    const double theta = deg(30);
    const Eigen::MatrixXcd R = ula_correlation(theta, 0.0, 0.5, 6);
    Eigen::VectorXcd a(6);
    for (int i = 0; i < 6; ++i)
        a(i) = std::polar(1.0, -2 * kPi * i * 0.5 * std::sin(theta));
    CHECK((R - a * a.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    // broadside arrival gives all ones
    CHECK((ula_correlation(0.0, 0.0, 0.5, 4) - Eigen::MatrixXcd::Ones(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ula_correlation - input checks")
{
    CHECK_THROWS_AS(ula_correlation(0.0, 0.1, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(ula_correlation(0.0, -0.1, 0.5, 4), std::invalid_argument);
    CHECK_THROWS_AS(ula_correlation(0.0, 0.1, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(ula_correlation(0.0, 0.1, 0.5, 4, 1), std::invalid_argument);
}

TEST_CASE("hermitian_factors - products reproduce R")
{
    const Eigen::MatrixXcd R = ula_correlation(deg(-20), deg(15), 0.5, 8);
    const HermitianFactors f = hermitian_factors(R, 0.0);
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(8, 8);
    CHECK((f.sqrt * f.sqrt - R).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((f.inv_sqrt * f.sqrt - I).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((f.inv * R - I).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(f.eigenvalues.minCoeff() > 0.0);

    // the floor keeps a singular matrix invertible
    const HermitianFactors g = hermitian_factors(Eigen::MatrixXcd::Ones(3, 3));
    CHECK(g.eigenvalues.minCoeff() == Approx(kEigenFloor));
    CHECK(std::isfinite(g.inv.cwiseAbs().maxCoeff()));
    CHECK_THROWS_AS(hermitian_factors(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("draw_cir - empirical covariance matches R and the tap gains")
{
    const int n_t = 4;
    const Eigen::MatrixXcd R = ula_correlation(deg(10), deg(20), 0.5, n_t);
    const HermitianFactors f = hermitian_factors(R);
    const PowerDelayProfile pdp = PowerDelayProfile::exponential(3, 1.5, 3.0);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n_t, n_t);
    std::vector<double> tap_power(3, 0.0);
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
        Stream rng(17, t, StreamTag::Channel);
        const Eigen::MatrixXcd G = draw_cir(f.sqrt, pdp, rng);
        // E[conj(G(a,l)) G(b,l)] = R(a,b) gain_l
        for (int l = 0; l < 3; ++l) {
            acc += G.col(l).conjugate() * G.col(l).transpose() / pdp.total();
            tap_power[l] += G.col(l).squaredNorm() / n_t;
        }
    }
    acc /= draws;
    CHECK((acc - R).cwiseAbs().maxCoeff() < 0.03);
    for (int l = 0; l < 3; ++l)
        CHECK(tap_power[l] / draws == Approx(pdp.gains[l]).epsilon(0.03));
}

TEST_CASE("PowerDelayProfile - unit and exponential")
{
    CHECK(PowerDelayProfile::unit(6).total() == 6.0);
    const auto e = PowerDelayProfile::exponential(4, 2.0, 10.0);
    CHECK(e.total() == Approx(10.0));
    CHECK(e.gains[1] / e.gains[0] == Approx(std::exp(-0.5)));
    CHECK_THROWS_AS(PowerDelayProfile::unit(0), std::invalid_argument);
    CHECK_THROWS_AS(PowerDelayProfile::exponential(3, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("dft_taps - entries and orthogonality")
{
    const Eigen::MatrixXcd F = dft_taps(16, 4);
    CHECK(F.rows() == 16);
    CHECK(F.cols() == 4);
    CHECK(std::abs(F(3, 2) - std::polar(1.0, -2 * kPi * 6 / 16)) < 1e-14);
    CHECK((F.adjoint() * F - 16.0 * Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(dft_taps(4, 5), std::invalid_argument);
}

TEST_CASE("cir_to_fs - matches a direct DFT sum")
{
    Stream rng(2, 0, StreamTag::Channel);
    Eigen::MatrixXcd G(3, 5);
    for (int a = 0; a < 3; ++a)
        for (int l = 0; l < 5; ++l)
            G(a, l) = rng.cnormal();
    const Eigen::MatrixXcd H = cir_to_fs(G, dft_taps(32, 5));
    for (int a = 0; a < 3; ++a)
        for (int n = 0; n < 32; n += 7) {
            std::complex<double> s = 0.0;
            for (int l = 0; l < 5; ++l)
                s += G(a, l) * std::polar(1.0, -2 * kPi * n * l / 32);
            CHECK(std::abs(H(a, n) - s) < 1e-12);
        }
}

TEST_CASE("flatten_antenna_major - round trip and layout")
{
    Eigen::MatrixXcd M(3, 4);
    for (int a = 0; a < 3; ++a)
        for (int n = 0; n < 4; ++n)
            M(a, n) = {double(a), double(n)};
    const Eigen::RowVectorXcd row = flatten_antenna_major(M);
    CHECK(row(5) == M(1, 1));
    CHECK(unflatten_antenna_major(row, 3) == M);
    CHECK_THROWS_AS(unflatten_antenna_major(row, 5), std::invalid_argument);
}

TEST_CASE("simulate_rx - superposition of pilots plus noise")
{
    const PilotTone x{0.3, 2 * kPi / 3, 4.0};
    CHECK(std::abs(x.symbol(2) - std::polar(2.0, 0.3 + 4 * kPi / 3)) < 1e-14);
    Eigen::RowVectorXcd h = Eigen::RowVectorXcd::Constant(8, {1.0, -1.0});
    Stream rng(1, 0, StreamTag::Noise);
    const Eigen::MatrixXcd noiseless = simulate_rx({h}, {x}, 3, 0.0, rng);
    CHECK((noiseless - x.column(3) * h).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(rng.draws() == 0);

    Stream rng2(1, 0, StreamTag::Noise);
    const Eigen::MatrixXcd noisy = simulate_rx({h}, {x}, 3, 1.0, rng2, 2.0);
    CHECK(rng2.draws() > 0);
    CHECK_THROWS_AS(simulate_rx({h}, {}, 3, 1.0, rng2), std::invalid_argument);
    CHECK_THROWS_AS(simulate_rx({h, Eigen::RowVectorXcd(4)}, {x, x}, 3, 1.0, rng2), std::invalid_argument);
}

TEST_CASE("OfdmConfig - reports every violated constraint")
{
    OfdmConfig ok;
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.block_size() == 128);

    OfdmConfig bad;
    bad.n_total = 128;
    bad.blocks = 5;
    bad.taps = 20;
    bad.cyclic_prefix = 4;
    try {
        bad.validate();
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument &e) {
        const std::string msg = e.what();
        CHECK(msg.find("multiple of blocks") != std::string::npos);
        CHECK(msg.find("cyclic prefix") != std::string::npos);
    }
}
