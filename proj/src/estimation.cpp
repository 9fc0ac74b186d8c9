// SPDX-License-Identifier: Apache-2.0
#include "cfbg/estimation.hpp"

#include "cfbg/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cfbg
{

Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd &ybar)
{
    if (ybar.cols() < 1)
        throw std::invalid_argument("sample_covariance: no samples");
    return (ybar * ybar.adjoint()) / static_cast<double>(ybar.cols());
}

MmseEstimate mmse_fs_estimate(const Eigen::MatrixXcd &ybar, const Eigen::VectorXcd &xbar, double channel_power,
                              const MmseOptions &opt)
{
    if (xbar.size() != ybar.rows())
        throw std::invalid_argument("mmse_fs_estimate: pilot length differs from symbol count");
    if (!(channel_power > 0.0))
        throw std::invalid_argument("mmse_fs_estimate: channel power must be positive");
    Eigen::MatrixXcd C = sample_covariance(ybar);

    MmseEstimate out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top) {
        const double load = opt.ridge * std::max(C.trace().real(), 1e-300) / static_cast<double>(C.rows());
        C += load * Eigen::MatrixXcd::Identity(C.rows(), C.cols());
        out.regularized = true;
    }
    const double scale = opt.sqrt_weight ? std::sqrt(channel_power) : channel_power;
    // w = s x^H C^{-1}, computed as (C^{-1} x)^H since C is Hermitian
    const Eigen::VectorXcd cx = C.ldlt().solve(xbar);
    out.h = scale * (cx.adjoint() * ybar);
    return out;
}

Eigen::MatrixXcd fs_to_taps(const Eigen::RowVectorXcd &h, const Eigen::MatrixXcd &f_l, int n_t)
{
    const Eigen::MatrixXcd hm = unflatten_antenna_major(h, n_t);
    if (hm.cols() != f_l.rows())
        throw std::invalid_argument("fs_to_taps: subcarrier count mismatch");
    // h_a = g_a F_L^T, so g_a = h_a conj(F_L) (F_L^T conj(F_L))^{-1}
    const Eigen::MatrixXcd fc = f_l.conjugate();
    const Eigen::MatrixXcd gram = f_l.transpose() * fc;
    return (hm * fc) * gram.inverse();
}

Eigen::MatrixXcd fs_to_cir_estimate(const Eigen::RowVectorXcd &h, const Eigen::MatrixXcd &r_inv_sqrt,
                                    const Eigen::MatrixXcd &f_l)
{
    const int n_t = static_cast<int>(r_inv_sqrt.rows());
    return r_inv_sqrt.conjugate() * fs_to_taps(h, f_l, n_t);
}

Eigen::RowVectorXcd ls_estimate(const Eigen::MatrixXcd &y, const Eigen::VectorXcd &x)
{
    if (x.size() != y.rows())
        throw std::invalid_argument("ls_estimate: pilot length differs from symbol count");
    const double e = x.squaredNorm();
    if (!(e > 0.0))
        throw std::invalid_argument("ls_estimate: zero pilot");
    return (x.adjoint() * y) / e;
}

double identification_metric(const Eigen::MatrixXcd &cir, const Eigen::MatrixXcd &r_inv)
{
    if (r_inv.rows() != cir.rows() || r_inv.cols() != cir.rows())
        throw std::invalid_argument("identification_metric: dimension mismatch");
    // sum_l sum_{a,b} G(a,l) Rinv(a,b) conj(G(b,l))
    const Eigen::MatrixXcd m = r_inv * cir.conjugate();
    return cir.cwiseProduct(m).sum().real();
}

IdentifyResult ml_identify(const Eigen::MatrixXcd &cir_a, const Eigen::MatrixXcd &cir_b,
                           const Eigen::MatrixXcd &r_target_inv)
{
    if (cir_a.rows() != cir_b.rows() || cir_a.cols() != cir_b.cols())
        throw std::invalid_argument("ml_identify: candidate shapes differ");
    IdentifyResult r;
    r.metric_a = identification_metric(cir_a, r_target_inv);
    r.metric_b = identification_metric(cir_b, r_target_inv);
    r.pick = r.metric_b < r.metric_a ? 1 : 0;
    return r;
}

double umse(const Eigen::RowVectorXcd &est_b, const Eigen::RowVectorXcd &true_b, const Eigen::RowVectorXcd &est_c,
            const Eigen::RowVectorXcd &true_c, int n, int n_t)
{
    if (est_b.size() != true_b.size() || est_c.size() != true_c.size())
        throw std::invalid_argument("umse: length mismatch");
    if (n < 1 || n_t < 1)
        throw std::invalid_argument("umse: n and n_t must be positive");
    return ((est_b - true_b).squaredNorm() + (est_c - true_c).squaredNorm()) / (2.0 * n * n_t);
}

IepAsymptotic iep_asymptotic(const IepInputs &in, IepVariant variant)
{
    const int n_t = static_cast<int>(in.r_b.rows());
    if (in.r_c.rows() != n_t || in.r_e.rows() != n_t)
        throw std::invalid_argument("iep_asymptotic: correlation sizes differ");
    if (in.taps < 1 || in.n < 1 || !(in.tap_power > 0) || !(in.sigma2 >= 0))
        throw std::invalid_argument("iep_asymptotic: invalid scalar inputs");

    const double tr_b = in.r_b.trace().real();
    const double tr_c = in.r_c.trace().real();
    const double tr_e = in.r_e.trace().real();
    const double p = in.tap_power / n_t;

    Eigen::Vector3d tr(tr_b, tr_c, tr_e);
    const Eigen::Matrix3cd cov = p * in.x * tr.cast<std::complex<double>>().asDiagonal() * in.x.adjoint() +
                                 in.sigma2 * Eigen::Matrix3cd::Identity();
    const Eigen::Matrix3cd c = cov.inverse();
    auto quad = [&](int col) { return (in.x.col(col).adjoint() * c * in.x.col(col))(0, 0).real(); };

    IepAsymptotic out;
    out.a = 1.0 - p * tr_b * quad(0);
    const double tr_for_b = variant == IepVariant::Printed ? tr_c : tr_e;
    out.b = 1.0 - p * tr_for_b * quad(2);

    const HermitianFactors fb = hermitian_factors(in.r_b);
    const Eigen::MatrixXcd rb_inv2 = fb.inv * fb.inv;
    const double t_b2 = rb_inv2.trace().real();

    if (variant == IepVariant::Pipeline) {
        // metric means: signal part tap_power * Tr(R_B^-1) vs tap_power * Tr(R_E R_B^-2),
        // plus the whitened estimation error L (e / N) Tr(R_B^-2) with e = channel power * NMSE
        const double e_b = p * tr_b * out.a;
        const double e_e = p * tr_e * out.b;
        out.lhs = in.tap_power * fb.inv.trace().real() + in.taps * e_b / in.n * t_b2;
        out.rhs = in.tap_power * (in.r_e * rb_inv2).trace().real() + in.taps * e_e / in.n * t_b2;
    } else {
        const HermitianFactors fe = hermitian_factors(in.r_e);
        out.lhs = out.a * t_b2;
        out.rhs = out.b * (fe.inv * fb.inv).trace().real();
    }
    out.iep_event = out.lhs > out.rhs;
    return out;
}

} // namespace cfbg
