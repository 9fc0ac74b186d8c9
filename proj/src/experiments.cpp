// SPDX-License-Identifier: Apache-2.0
#include "cfbg/experiments.hpp"

#include "cfbg/channel.hpp"
#include "cfbg/codebook.hpp"
#include "cfbg/estimation.hpp"
#include "cfbg/parallel.hpp"
#include "cfbg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cfbg
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::array<double, 3> kIncrements{2.0 * std::numbers::pi / 3.0, 4.0 * std::numbers::pi / 3.0, 0.0};

double deg(double d) { return d * std::numbers::pi / 180.0; }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

double operating_gamma(const ExperimentConfig &cfg)
{
    return cfg.calibrate_gamma ? solve_threshold(cfg.false_alarm, cfg.nnt).gamma : cfg.gamma;
}

DetectionScenario scenario_of(const ExperimentConfig &cfg, double gamma)
{
    DetectionScenario s;
    s.nnt = cfg.nnt;
    s.sigma2 = cfg.sigma2;
    s.snr_db = cfg.snr_db.front();
    s.gamma = gamma;
    return s;
}

nlohmann::json maybe(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

// ---------------------------------------------------------------- protocol rounds

struct Round
{
    EvaMode mode = EvaMode::Silent;
    std::uint32_t bob = 0, charlie = 0, eva = 0;
};

// Per-block counts: exact superposition, or one detector decision per block.
Digits round_counts(const CfbgCodebook &book, const Round &r, const ExperimentConfig &cfg,
                    const DetectionScenario *phy, std::uint64_t trial)
{
    if (!phy)
        return ideal_counts(book, r.bob, r.charlie, r.mode, r.eva);
    Stream det(cfg.seed, trial, StreamTag::Detection);
    const BinaryWord &b = book.codeword(r.bob);
    const BinaryWord &c = book.codeword(r.charlie);
    const BinaryWord *e = r.mode == EvaMode::RandomImitation ? &book.codeword(r.eva) : nullptr;
    Digits counts(static_cast<std::size_t>(book.B()));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const bool eva_on = r.mode == EvaMode::WidebandJamming || (e && e->test(i));
        const std::array<bool, 3> active{b.test(i), c.test(i), eva_on};
        const Eigen::MatrixXcd Y = simulate_block(*phy, active, det);
        counts[i] = static_cast<std::uint8_t>(detect_signal_count(Y, phy->sigma2, phy->gamma));
    }
    return counts;
}

std::vector<std::uint32_t> expected_codewords(const Round &r, bool duplicate)
{
    std::vector<std::uint32_t> v;
    if (duplicate && r.mode == EvaMode::RandomImitation)
        return v;
    v = {r.bob, r.charlie};
    if (r.mode == EvaMode::RandomImitation)
        v.push_back(r.eva);
    std::sort(v.begin(), v.end());
    return v;
}

std::uint32_t draw_eva(const CfbgCodebook &book, const std::string &target, Stream &rng)
{
    const auto h = book.half_size();
    if (target == "bob")
        return book.half_index(UserHalf::Bob, rng.below(h));
    if (target == "charlie")
        return book.half_index(UserHalf::Charlie, rng.below(h));
    return static_cast<std::uint32_t>(rng.below(book.full_size()));
}

EvaMode draw_hybrid(const std::array<double, 3> &w, Stream &rng)
{
    const double u = rng.uniform() * (w[0] + w[1] + w[2]);
    if (u < w[0])
        return EvaMode::Silent;
    if (u < w[0] + w[1])
        return EvaMode::RandomImitation;
    return EvaMode::WidebandJamming;
}

std::vector<std::string> modes_of(const std::string &attack)
{
    if (attack == "all")
        return {"silent", "jamming", "imitation"};
    return {attack};
}

struct ClassifyAcc
{
    std::vector<ClassifyTally> tallies;
    std::string log;

    void merge(const ClassifyAcc &o)
    {
        if (tallies.empty())
            tallies.resize(o.tallies.size());
        for (std::size_t i = 0; i < o.tallies.size(); ++i)
            tallies[i].merge(o.tallies[i]);
        log += o.log;
    }
};

// ---------------------------------------------------------------- channel helpers

struct UserGeometry
{
    Eigen::MatrixXcd r;
    HermitianFactors f;
};

UserGeometry make_user(double theta, const ExperimentConfig &cfg, int n_t)
{
    UserGeometry u;
    u.r = ula_correlation(theta, deg(cfg.spread_deg), cfg.spacing, n_t);
    u.f = hermitian_factors(u.r);
    return u;
}

std::array<double, 3> draw_geometry(Stream &rng, double sector, double min_sep)
{
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::array<double, 3> a{};
        for (auto &x : a)
            x = (2.0 * rng.uniform() - 1.0) * sector;
        if (std::fabs(a[0] - a[1]) >= min_sep && std::fabs(a[0] - a[2]) >= min_sep && std::fabs(a[1] - a[2]) >= min_sep)
            return a;
    }
    throw std::runtime_error("draw_geometry: separation constraint rejected 100000 draws");
}

Eigen::VectorXcd pilot_column(double phase, double increment, double power)
{
    return PilotTone{phase, increment, power}.column(3);
}

// One IEP trial at a fixed geometry: estimates Bob's and Eva's channels, whitens both with Bob's
// correlation and compares the identification metric. True when the impostor wins.
bool iep_trial(const std::array<const UserGeometry *, 3> &users, const std::array<double, 3> &phases,
               const ExperimentConfig &cfg, int n_t, const Eigen::MatrixXcd &f_l, std::uint64_t trial)
{
    const PowerDelayProfile pdp = PowerDelayProfile::unit(cfg.taps);
    Stream chan(cfg.seed, trial, StreamTag::Channel);
    Stream noise(cfg.seed, trial, StreamTag::Noise);
    const double rho = from_db(cfg.snr_db.front());
    const double rho_e = rho * from_db(cfg.eva_power_db.front());

    std::vector<Eigen::RowVectorXcd> h;
    std::vector<PilotTone> pilots;
    for (int j = 0; j < 3; ++j) {
        h.push_back(flatten_antenna_major(cir_to_fs(draw_cir(users[j]->f.sqrt, pdp, chan), f_l)));
        pilots.push_back({phases[j], kIncrements[j], j == 2 ? rho_e : rho});
    }
    const Eigen::MatrixXcd Y = simulate_rx(h, pilots, 3, cfg.sigma2, noise);

    // Alice knows only Bob's correlation; both candidates are scored against it.
    const UserGeometry &bob = *users[0];
    const double power = pdp.total() * bob.r.trace().real() / n_t;
    const auto est_b = mmse_fs_estimate(Y, pilots[0].column(3), power);
    const auto est_e = mmse_fs_estimate(Y, pilots[2].column(3), power);
    const Eigen::MatrixXcd g_b = fs_to_cir_estimate(est_b.h, bob.f.inv_sqrt, f_l);
    const Eigen::MatrixXcd g_e = fs_to_cir_estimate(est_e.h, bob.f.inv_sqrt, f_l);
    return ml_identify(g_b, g_e, bob.f.inv).pick == 1;
}

struct UmseAcc
{
    std::vector<double> mmse, perfect, ls, cir;
    std::vector<std::uint64_t> regularized;
    std::uint64_t trials = 0;

    void resize(std::size_t n)
    {
        mmse.assign(n, 0.0);
        perfect.assign(n, 0.0);
        ls.assign(n, 0.0);
        cir.assign(n, 0.0);
        regularized.assign(n, 0);
    }

    void merge(const UmseAcc &o)
    {
        if (o.mmse.empty())
            return;
        if (mmse.empty())
            resize(o.mmse.size());
        for (std::size_t i = 0; i < mmse.size(); ++i) {
            mmse[i] += o.mmse[i];
            perfect[i] += o.perfect[i];
            ls[i] += o.ls[i];
            cir[i] += o.cir[i];
            regularized[i] += o.regularized[i];
        }
        trials += o.trials;
    }
};

} // namespace

void ClassifyTally::merge(const ClassifyTally &o)
{
    if (mode.empty())
        mode = o.mode;
    correct.merge(o.correct);
    correct_distinct.merge(o.correct_distinct);
    separation.merge(o.separation);
    separation_on_bob.merge(o.separation_on_bob);
    duplicate_flagged.merge(o.duplicate_flagged);
    duplicates += o.duplicates;
    misclassified += o.misclassified;
    lookup_miss += o.lookup_miss;
}

void IepAgreement::merge(const IepAgreement &o)
{
    if (n_t == 0)
        n_t = o.n_t;
    geometries += o.geometries;
    empirical_majority_iep += o.empirical_majority_iep;
    for (int i = 0; i < 3; ++i) {
        agree[i] += o.agree[i];
        predicted_iep[i] += o.predicted_iep[i];
    }
}

// ---------------------------------------------------------------- runners

std::vector<PdpfPoint> run_pdpf(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    const double gamma = operating_gamma(cfg);
    std::vector<PdpfPoint> out;
    for (double snr : cfg.snr_db) {
        DetectionScenario s = scenario_of(cfg, gamma);
        s.snr_db = snr;
        out.push_back({snr, gamma, pd_pf_montecarlo(s, cfg.trials, cfg.seed, threads)});
    }
    return out;
}

std::vector<MomentSet> run_moments(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    std::vector<MomentSet> out;
    for (int nnt : cfg.nnt_grid) {
        if (cfg.moment_method != "mc")
            out.push_back(joint_eigen_moments(nnt));
        if (cfg.moment_method != "analytic")
            out.push_back(joint_eigen_moments_mc(nnt, cfg.draws, cfg.seed, threads));
    }
    return out;
}

CalibrationOutcome run_calibrate(const ExperimentConfig &cfg)
{
    validate_config(cfg);
    CalibrationOutcome c;
    for (int nnt : cfg.nnt_grid)
        c.thresholds.emplace_back(nnt, solve_threshold(cfg.false_alarm, nnt));
    c.required_nnt = required_block_resource(cfg.false_alarm, cfg.gamma);
    return c;
}

std::vector<ClassifyTally> run_classify(const ExperimentConfig &cfg, int threads, std::string *records)
{
    validate_config(cfg);
    const CfbgCodebook book = CfbgCodebook::build(cfg.q, cfg.k);
    const std::vector<std::string> modes = modes_of(cfg.attack);
    const double gamma = cfg.ideal_counts ? 0.0 : operating_gamma(cfg);
    const DetectionScenario scenario = scenario_of(cfg, cfg.ideal_counts ? cfg.gamma : gamma);
    const DetectionScenario *phy = cfg.ideal_counts ? nullptr : &scenario;
    const std::uint64_t total = cfg.trials * modes.size();
    check_trial_range(0, total);

    // Trials of mode m occupy indices [m * trials, (m + 1) * trials).
    const ClassifyAcc acc = reduce_trials<ClassifyAcc>(total, threads, [&](std::uint64_t t, ClassifyAcc &a) {
        if (a.tallies.empty()) {
            a.tallies.resize(modes.size());
            for (std::size_t m = 0; m < modes.size(); ++m)
                a.tallies[m].mode = modes[m];
        }
        const std::size_t m = static_cast<std::size_t>(t / cfg.trials);
        Stream rng(cfg.seed, t, StreamTag::Attack);
        Round r;
        r.mode = modes[m] == "hybrid" ? draw_hybrid(cfg.hybrid_weights, rng) : eva_mode_from_string(modes[m]);
        r.bob = book.half_index(UserHalf::Bob, rng.below(book.half_size()));
        r.charlie = book.half_index(UserHalf::Charlie, rng.below(book.half_size()));
        r.eva = draw_eva(book, cfg.imitation_target, rng);

        const bool imitation = r.mode == EvaMode::RandomImitation;
        const bool duplicate = imitation && (r.eva == r.bob || r.eva == r.charlie);
        const BdcdResult res = bdcd_decode(observe_pattern(round_counts(book, r, cfg, phy, t)), book);
        const Verdict want = expected_verdict(r.mode, duplicate);
        const bool ok = res.verdict == want && res.codewords == expected_codewords(r, duplicate);
        const bool sep = res.verdict == Verdict::SeparationError;

        ClassifyTally &ty = a.tallies[m];
        ty.correct.trials++;
        ty.correct.hits += ok;
        if (imitation && !duplicate) {
            ty.correct_distinct.trials++;
            ty.correct_distinct.hits += ok;
        }
        ty.separation.trials++;
        ty.separation.hits += sep;
        ty.separation_on_bob.trials++;
        ty.separation_on_bob.hits += sep && imitation && r.eva == r.bob;
        if (duplicate) {
            ty.duplicates++;
            ty.duplicate_flagged.trials++;
            ty.duplicate_flagged.hits += sep;
        }
        ty.misclassified += res.verdict != want;
        ty.lookup_miss += res.lookup_miss;
        if (records) {
            std::ostringstream os;
            write_verdict_record(os, t, r.mode, res, res.verdict != want);
            a.log += os.str();
        }
    });
    if (records)
        *records += acc.log;
    return acc.tallies;
}

SepOutcome run_sep(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    SepOutcome s;
    for (const auto &row : cfg.sep_grid)
        s.formula.emplace_back(row, sep_formula(row[0], row[1], row[2]));
    std::size_t c = 1;
    for (int i = 0; i < cfg.k; ++i)
        c *= static_cast<std::size_t>(cfg.q);
    s.codebook_size = c;
    ExperimentConfig imit = cfg;
    imit.attack = "imitation";
    s.empirical = run_classify(imit, threads).front();
    return s;
}

RoundtripOutcome run_roundtrip(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    const CfbgCodebook book = CfbgCodebook::build(cfg.q, cfg.k);
    const int grid = static_cast<int>(book.half_size());
    RoundtripOutcome out;
    out.ideal = cfg.ideal_counts;
    out.gamma = cfg.ideal_counts ? 0.0 : operating_gamma(cfg);
    const DetectionScenario scenario = scenario_of(cfg, out.gamma);
    const DetectionScenario *phy = cfg.ideal_counts ? nullptr : &scenario;

    auto recovers = [&](int ib, int ic, const BdcdResult &res) {
        const std::uint32_t cb = encode_pilot(ib, UserHalf::Bob, book);
        const std::uint32_t cc = encode_pilot(ic, UserHalf::Charlie, book);
        std::vector<std::uint32_t> want{cb, cc};
        std::sort(want.begin(), want.end());
        if (res.verdict != Verdict::SilentOrAbsent || res.codewords != want)
            return false;
        return decode_pilot(cb, UserHalf::Bob, book, grid) == grid_phase(ib, grid) &&
               decode_pilot(cc, UserHalf::Charlie, book, grid) == grid_phase(ic, grid);
    };

    if (cfg.ideal_counts) {
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                Round r{EvaMode::Silent, encode_pilot(i, UserHalf::Bob, book), encode_pilot(j, UserHalf::Charlie, book), 0};
                const BdcdResult res = bdcd_decode(observe_pattern(round_counts(book, r, cfg, nullptr, 0)), book);
                out.pairs++;
                out.exhaustive_errors += !recovers(i, j, res);
            }
    }

    struct Acc
    {
        Proportion rec;
        std::uint64_t mis = 0, miss = 0;
        void merge(const Acc &o)
        {
            rec.merge(o.rec);
            mis += o.mis;
            miss += o.miss;
        }
    };
    const Acc acc = reduce_trials<Acc>(cfg.trials, threads, [&](std::uint64_t t, Acc &a) {
        Stream rng(cfg.seed, t, StreamTag::Pilot);
        const int ib = quantize_phase(kTwoPi * rng.uniform(), grid);
        const int ic = quantize_phase(kTwoPi * rng.uniform(), grid);
        Round r{EvaMode::Silent, encode_pilot(ib, UserHalf::Bob, book), encode_pilot(ic, UserHalf::Charlie, book), 0};
        const BdcdResult res = bdcd_decode(observe_pattern(round_counts(book, r, cfg, phy, t)), book);
        a.rec.trials++;
        a.rec.hits += recovers(ib, ic, res);
        a.mis += res.verdict != Verdict::SilentOrAbsent;
        a.miss += res.lookup_miss;
    });
    out.recovered = acc.rec;
    out.misclassified = acc.mis;
    out.lookup_miss = acc.miss;
    return out;
}

std::vector<UmsePoint> run_umse(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    const int grid = phase_grid_size(cfg);
    const std::size_t ns = cfg.snr_db.size(), ne = cfg.eva_power_db.size();
    const PowerDelayProfile pdp = PowerDelayProfile::unit(cfg.taps);
    const Eigen::MatrixXcd f_l = dft_taps(cfg.n_total, cfg.taps);
    std::vector<UmsePoint> out;

    for (int n_t : cfg.n_t_grid) {
        std::array<UserGeometry, 3> users;
        for (int j = 0; j < 3; ++j)
            users[j] = make_user(deg(cfg.aoa_deg[j]), cfg, n_t);
        const Eigen::Index m = static_cast<Eigen::Index>(cfg.n_total) * n_t;
        const double denom = 2.0 * cfg.n_total * n_t;

        const UmseAcc acc = reduce_trials<UmseAcc>(cfg.trials, threads, [&](std::uint64_t t, UmseAcc &a) {
            if (a.mmse.empty())
                a.resize(ns * ne);
            Stream chan(cfg.seed, t, StreamTag::Channel);
            Stream pil(cfg.seed, t, StreamTag::Pilot);
            Stream noise(cfg.seed, t, StreamTag::Noise);

            std::array<Eigen::RowVectorXcd, 3> h;
            std::array<Eigen::MatrixXcd, 3> white; // whitened true taps
            std::array<double, 3> phase{};
            for (int j = 0; j < 3; ++j) {
                const Eigen::MatrixXcd g = draw_cir(users[j].f.sqrt, pdp, chan);
                white[j] = users[j].f.inv_sqrt.conjugate() * g;
                h[j] = flatten_antenna_major(cir_to_fs(g, f_l));
            }
            for (auto &p : phase)
                p = kTwoPi * pil.uniform();
            Eigen::MatrixXcd w(3, m);
            for (Eigen::Index c = 0; c < m; ++c)
                for (int k = 0; k < 3; ++k)
                    w(k, c) = noise.cnormal(cfg.sigma2);

            for (std::size_t e = 0; e < ne; ++e)
                for (std::size_t s = 0; s < ns; ++s) {
                    const std::size_t idx = e * ns + s;
                    const double rho = from_db(cfg.snr_db[s]);
                    const std::array<double, 3> pw{rho, rho, rho * from_db(cfg.eva_power_db[e])};
                    Eigen::MatrixXcd Y = w;
                    for (int j = 0; j < 3; ++j)
                        Y.noalias() += pilot_column(phase[j], kIncrements[j], pw[j]) * h[j];

                    double err = 0.0, err_p = 0.0, err_c = 0.0;
                    for (int j = 0; j < 2; ++j) {
                        const double power = pdp.total() * users[j].r.trace().real() / n_t;
                        const double q_phase = grid_phase(quantize_phase(phase[j], grid), grid);
                        const auto est = mmse_fs_estimate(Y, pilot_column(q_phase, kIncrements[j], pw[j]), power);
                        const auto est_p = mmse_fs_estimate(Y, pilot_column(phase[j], kIncrements[j], pw[j]), power);
                        a.regularized[idx] += est.regularized + est_p.regularized;
                        err += (est.h - h[j]).squaredNorm();
                        err_p += (est_p.h - h[j]).squaredNorm();
                        err_c += (fs_to_cir_estimate(est.h, users[j].f.inv_sqrt, f_l) - white[j]).squaredNorm();
                    }
                    a.mmse[idx] += err / denom;
                    a.perfect[idx] += err_p / denom;
                    a.cir[idx] += err_c / denom;

                    // Two orthogonal symbols; Eva copies Bob's pilot.
                    Eigen::Vector2cd xb(1.0, 1.0), xc(1.0, -1.0);
                    xb *= std::sqrt(rho);
                    xc *= std::sqrt(rho);
                    const Eigen::Vector2cd xe = xb * std::sqrt(pw[2] / rho);
                    const Eigen::MatrixXcd Y2 = xb * h[0] + xc * h[1] + xe * h[2] + w.topRows(2);
                    a.ls[idx] += umse(ls_estimate(Y2, xb), h[0], ls_estimate(Y2, xc), h[1], cfg.n_total, n_t);
                }
            a.trials++;
        });

        for (std::size_t e = 0; e < ne; ++e)
            for (std::size_t s = 0; s < ns; ++s) {
                const std::size_t idx = e * ns + s;
                const double n = static_cast<double>(acc.trials);
                UmsePoint p;
                p.n_t = n_t;
                p.eva_db = cfg.eva_power_db[e];
                p.snr_db = cfg.snr_db[s];
                p.mmse = acc.mmse[idx] / n;
                p.mmse_perfect = acc.perfect[idx] / n;
                p.ls = acc.ls[idx] / n;
                p.cir_mmse = acc.cir[idx] / n;
                p.trials = acc.trials;
                p.regularized = acc.regularized[idx];
                out.push_back(p);
            }
    }
    return out;
}

std::vector<IepEmpirical> run_iep(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    const Eigen::MatrixXcd f_l = dft_taps(cfg.n_total, cfg.taps);
    std::vector<IepEmpirical> out;
    for (int n_t : cfg.n_t_grid) {
        const Proportion p = reduce_trials<Proportion>(cfg.trials, threads, [&](std::uint64_t t, Proportion &acc) {
            Stream geo(cfg.seed, t, StreamTag::Geometry);
            const auto a = draw_geometry(geo, deg(cfg.sector_deg), deg(cfg.min_separation_deg));
            const UserGeometry bob = make_user(a[0], cfg, n_t);
            const UserGeometry charlie = make_user(a[1], cfg, n_t);
            const UserGeometry eva = cfg.same_correlation ? bob : make_user(a[2], cfg, n_t);
            Stream pil(cfg.seed, t, StreamTag::Pilot);
            std::array<double, 3> phases{};
            for (auto &x : phases)
                x = kTwoPi * pil.uniform();
            acc.trials++;
            acc.hits += iep_trial({&bob, &charlie, &eva}, phases, cfg, n_t, f_l, t);
        });
        out.push_back({n_t, p});
    }
    return out;
}

std::vector<IepAgreement> run_iep_asymptotic(const ExperimentConfig &cfg, int threads)
{
    validate_config(cfg);
    const Eigen::MatrixXcd f_l = dft_taps(cfg.n_total, cfg.taps);
    const std::uint64_t per = cfg.trials_per_geometry;
    check_trial_range(0, cfg.geometries * per);
    const double rho = from_db(cfg.snr_db.front());
    const double rho_e = rho * from_db(cfg.eva_power_db.front());
    std::vector<IepAgreement> out;
    for (int n_t : cfg.n_t_grid) {
        IepAgreement ag = reduce_trials<IepAgreement>(cfg.geometries, threads, [&](std::uint64_t g, IepAgreement &acc) {
            Stream geo(cfg.seed, g, StreamTag::Geometry);
            const auto a = draw_geometry(geo, deg(cfg.sector_deg), deg(cfg.min_separation_deg));
            const UserGeometry bob = make_user(a[0], cfg, n_t);
            const UserGeometry charlie = make_user(a[1], cfg, n_t);
            const UserGeometry eva = cfg.same_correlation ? bob : make_user(a[2], cfg, n_t);
            Stream pil(cfg.seed, g, StreamTag::Pilot);
            std::array<double, 3> phases{};
            for (auto &x : phases)
                x = kTwoPi * pil.uniform();

            std::uint64_t wrong = 0;
            for (std::uint64_t i = 0; i < per; ++i)
                wrong += iep_trial({&bob, &charlie, &eva}, phases, cfg, n_t, f_l, g * per + i);
            const bool majority = 2 * wrong > per;

            IepInputs in;
            for (int j = 0; j < 3; ++j)
                in.x.col(j) = pilot_column(phases[j], kIncrements[j], j == 2 ? rho_e : rho);
            in.r_b = bob.r;
            in.r_c = charlie.r;
            in.r_e = eva.r;
            in.taps = cfg.taps;
            in.tap_power = PowerDelayProfile::unit(cfg.taps).total();
            in.n = cfg.n_total;
            in.sigma2 = cfg.sigma2;

            acc.geometries++;
            acc.empirical_majority_iep += majority;
            const std::array<IepVariant, 3> variants{IepVariant::Printed, IepVariant::PrintedEveTrace,
                                                     IepVariant::Pipeline};
            for (int v = 0; v < 3; ++v) {
                const bool pred = iep_asymptotic(in, variants[v]).iep_event;
                acc.predicted_iep[v] += pred;
                acc.agree[v] += pred == majority;
            }
        });
        ag.n_t = n_t;
        out.push_back(ag);
    }
    return out;
}

// ---------------------------------------------------------------- tables

Manifest make_manifest(const ExperimentConfig &cfg)
{
    Manifest m;
    m.add("kind", cfg.kind);
    m.add("config_hash", hex64(config_hash(cfg)));
    m.add("seed", std::to_string(cfg.seed));
    m.add("version", version_string());
    return m;
}

namespace
{

const char *detector_name(int d)
{
    static const char *names[] = {"MM", "SMM", "TMM"};
    return names[d];
}

} // namespace

Table tabulate(const std::vector<PdpfPoint> &v)
{
    Table t;
    t.columns = {"snr_db", "gamma", "detector", "pd", "pd_lower", "pd_upper", "pf", "pf_lower", "pf_upper", "trials"};
    for (const auto &p : v)
        for (int d = 0; d < 3; ++d) {
            const Proportion pf = p.result.pf(d);
            const Proportion &pd = p.result.pd[d];
            t.add_row({p.snr_db, p.gamma, detector_name(d), pd.rate(), pd.lower(), pd.upper(), pf.rate(), pf.lower(),
                       pf.upper(), pd.trials});
        }
    return t;
}

Table tabulate(const std::vector<MomentSet> &v)
{
    Table t;
    t.columns = {"nnt", "method", "draws", "index", "mean", "sd", "rho_with_min", "mean_se", "sd_se", "rho_se"};
    for (const auto &m : v)
        for (int i = 0; i < 4; ++i) {
            const bool mc = m.method == MomentMethod::MonteCarlo;
            const nlohmann::json rho = i < 3 ? nlohmann::json(m.rho[i]) : nlohmann::json();
            const nlohmann::json rho_se = i < 3 && mc ? nlohmann::json(m.rho_se[i]) : nlohmann::json();
            t.add_row({m.nnt, to_string(m.method), m.draws, i + 1, m.mean[i], m.sd[i], rho,
                       mc ? nlohmann::json(m.mean_se[i]) : nlohmann::json(), mc ? nlohmann::json(m.sd_se[i]) : nlohmann::json(),
                       rho_se});
        }
    return t;
}

Table tabulate(const CalibrationOutcome &c, double gamma)
{
    Table t;
    t.columns = {"nnt", "gamma", "cdf_mm", "cdf_smm", "cdf_tmm", "binding_detector", "target_gamma", "required_nnt"};
    for (const auto &[nnt, th] : c.thresholds)
        t.add_row({nnt, th.gamma, th.per_detector[0], th.per_detector[1], th.per_detector[2], detector_name(th.i_opt - 1),
                   gamma, c.required_nnt});
    return t;
}

Table tabulate(const std::vector<ClassifyTally> &v)
{
    Table t;
    t.columns = {"mode",          "trials",           "correct_rate",     "correct_lower", "correct_upper",
                 "distinct_trials", "distinct_correct_rate", "separation_rate", "separation_on_bob_rate",
                 "separation_on_bob_lower", "separation_on_bob_upper", "duplicates", "duplicate_flagged_rate",
                 "misclassified", "lookup_miss"};
    for (const auto &c : v)
        t.add_row({c.mode, c.correct.trials, c.correct.rate(), c.correct.lower(), c.correct.upper(),
                   c.correct_distinct.trials, c.correct_distinct.trials ? nlohmann::json(c.correct_distinct.rate()) : nlohmann::json(),
                   c.separation.rate(), c.separation_on_bob.rate(), c.separation_on_bob.lower(), c.separation_on_bob.upper(),
                   c.duplicates, c.duplicate_flagged.trials ? nlohmann::json(c.duplicate_flagged.rate()) : nlohmann::json(),
                   c.misclassified, c.lookup_miss});
    return t;
}

Table tabulate(const SepOutcome &s)
{
    Table t;
    t.columns = {"source", "n_b", "n_total", "n_t", "sep", "sep_db", "lower", "upper", "trials"};
    for (const auto &[row, v] : s.formula)
        t.add_row({"formula", row[0], row[1], row[2], v.sep, v.sep_db, nlohmann::json(), nlohmann::json(), nlohmann::json()});
    const double inv_c = 1.0 / static_cast<double>(s.codebook_size);
    t.add_row({"one-over-codebook", nlohmann::json(), nlohmann::json(), nlohmann::json(), inv_c, 10.0 * std::log10(inv_c),
               nlohmann::json(), nlohmann::json(), nlohmann::json()});
    auto emp = [&](const char *name, const Proportion &p) {
        t.add_row({name, nlohmann::json(), nlohmann::json(), nlohmann::json(), p.rate(),
                   p.hits ? nlohmann::json(10.0 * std::log10(p.rate())) : nlohmann::json(), p.lower(), p.upper(), p.trials});
    };
    emp("empirical-per-user", s.empirical.separation_on_bob);
    emp("empirical-any-duplicate", s.empirical.separation);
    return t;
}

Table tabulate(const RoundtripOutcome &r)
{
    Table t;
    t.columns = {"mode", "counts", "gamma", "trials", "recovered", "rate", "lower", "upper", "misclassified", "lookup_miss"};
    const char *counts = r.ideal ? "ideal" : "detected";
    if (r.ideal) {
        Proportion p{r.pairs - r.exhaustive_errors, r.pairs};
        t.add_row({"exhaustive", counts, nlohmann::json(), p.trials, p.hits, p.rate(), p.lower(), p.upper(), nlohmann::json(),
                   nlohmann::json()});
    }
    t.add_row({"monte-carlo", counts, r.ideal ? nlohmann::json() : nlohmann::json(r.gamma), r.recovered.trials,
               r.recovered.hits, r.recovered.rate(), r.recovered.lower(), r.recovered.upper(), r.misclassified,
               r.lookup_miss});
    return t;
}

Table tabulate(const std::vector<UmsePoint> &v)
{
    Table t;
    t.columns = {"n_t", "eva_db", "snr_db", "umse_mmse", "umse_mmse_perfect", "umse_ls", "umse_cir", "trials", "regularized"};
    for (const auto &p : v)
        t.add_row({p.n_t, p.eva_db, p.snr_db, maybe(p.mmse), maybe(p.mmse_perfect), maybe(p.ls), maybe(p.cir_mmse), p.trials,
                   p.regularized});
    return t;
}

Table tabulate_power_robustness(const std::vector<UmsePoint> &v)
{
    Table t;
    t.columns = {"n_t", "snr_db", "eva_db", "umse_mmse", "baseline_umse_mmse", "ratio", "umse_cir", "baseline_umse_cir",
                 "ratio_cir"};
    for (const auto &p : v) {
        // baseline: first Eva power in the grid at the same n_t and SNR
        const auto base = std::find_if(v.begin(), v.end(), [&](const UmsePoint &b) { return b.n_t == p.n_t && b.snr_db == p.snr_db; });
        t.add_row({p.n_t, p.snr_db, p.eva_db, maybe(p.mmse), maybe(base->mmse), maybe(p.mmse / base->mmse), maybe(p.cir_mmse),
                   maybe(base->cir_mmse), maybe(p.cir_mmse / base->cir_mmse)});
    }
    return t;
}

Table tabulate(const std::vector<IepEmpirical> &v)
{
    Table t;
    t.columns = {"n_t", "trials", "iep", "lower", "upper"};
    for (const auto &e : v)
        t.add_row({e.n_t, e.iep.trials, e.iep.rate(), e.iep.lower(), e.iep.upper()});
    return t;
}

Table tabulate(const std::vector<IepAgreement> &v)
{
    Table t;
    t.columns = {"n_t", "variant", "geometries", "agree", "agreement", "predicted_iep", "empirical_majority_iep"};
    static const char *names[] = {"printed", "printed-eve-trace", "pipeline"};
    for (const auto &a : v)
        for (int i = 0; i < 3; ++i)
            t.add_row({a.n_t, names[i], a.geometries, a.agree[i],
                       a.geometries ? static_cast<double>(a.agree[i]) / a.geometries : 0.0, a.predicted_iep[i],
                       a.empirical_majority_iep});
    return t;
}

// ---------------------------------------------------------------- dispatch

namespace
{

std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

bool within_binomial(const Proportion &p, double target, double sigmas)
{
    const double sd = std::sqrt(target * (1.0 - target) / static_cast<double>(p.trials));
    return std::fabs(p.rate() - target) <= sigmas * sd;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig &cfg, int threads, std::string *records)
{
    validate_config(cfg);
    ExperimentResult r;
    r.manifest = make_manifest(cfg);
    auto check = [&](std::string name, bool pass, std::string detail) {
        r.checks.push_back({std::move(name), pass, std::move(detail)});
    };

    if (cfg.kind == "pdpf") {
        const auto v = run_pdpf(cfg, threads);
        r.table = tabulate(v);
        for (const auto &p : v) {
            double pf = 0, pd = 1;
            for (int d = 0; d < 3; ++d) {
                pf = std::max(pf, p.result.pf(d).rate());
                pd = std::min(pd, p.result.pd[d].rate());
            }
            check("pdpf snr=" + num(p.snr_db), pf <= 1e-3 && pd >= 0.999, "max PF " + num(pf) + ", min PD " + num(pd));
        }
    } else if (cfg.kind == "moments") {
        const auto v = run_moments(cfg, threads);
        r.table = tabulate(v);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            if (v[i].method != MomentMethod::Analytic || v[i + 1].method != MomentMethod::MonteCarlo)
                continue;
            bool ok = true;
            for (int j = 0; j < 3; ++j)
                ok = ok && std::fabs(v[i].rho[j] - v[i + 1].rho[j]) <= 3.0 * v[i + 1].rho_se[j];
            check("moments nnt=" + std::to_string(v[i].nnt), ok, "analytic correlations within 3 SE of Monte Carlo");
        }
    } else if (cfg.kind == "calibrate") {
        r.table = tabulate(run_calibrate(cfg), cfg.gamma);
    } else if (cfg.kind == "sep") {
        const auto s = run_sep(cfg, threads);
        r.table = tabulate(s);
        const double target = 1.0 / static_cast<double>(s.codebook_size);
        check("sep per-user", within_binomial(s.empirical.separation_on_bob, target, 3.0),
              "rate " + num(s.empirical.separation_on_bob.rate()) + " vs 1/C " + num(target));
    } else if (cfg.kind == "roundtrip") {
        const auto rt = run_roundtrip(cfg, threads);
        r.table = tabulate(rt);
        if (rt.ideal)
            check("roundtrip ideal", rt.exhaustive_errors == 0 && rt.recovered.hits == rt.recovered.trials,
                  std::to_string(rt.exhaustive_errors) + " exhaustive errors, MC rate " + num(rt.recovered.rate()));
        else
            check("roundtrip detected", rt.recovered.rate() >= 0.99, "rate " + num(rt.recovered.rate()));
    } else if (cfg.kind == "classify") {
        const auto v = run_classify(cfg, threads, records);
        r.table = tabulate(v);
        std::size_t c = 1;
        for (int i = 0; i < cfg.k; ++i)
            c *= static_cast<std::size_t>(cfg.q);
        for (const auto &ty : v) {
            if (ty.mode == "imitation") {
                check("classify imitation distinct", ty.correct_distinct.hits == ty.correct_distinct.trials,
                      "rate " + num(ty.correct_distinct.rate()));
                check("classify imitation duplicate", within_binomial(ty.separation_on_bob, 1.0 / c, 3.0),
                      "per-user rate " + num(ty.separation_on_bob.rate()));
            } else if (ty.mode != "hybrid") {
                check("classify " + ty.mode, ty.correct.hits == ty.correct.trials, "rate " + num(ty.correct.rate()));
            }
        }
    } else if (cfg.kind == "umse") {
        const auto v = run_umse(cfg, threads);
        r.table = tabulate(v);
        for (std::size_t i = 0; i < v.size(); i += cfg.snr_db.size()) {
            bool dec = true;
            for (std::size_t s = 1; s < cfg.snr_db.size(); ++s)
                dec = dec && v[i + s].mmse < v[i + s - 1].mmse;
            const UmsePoint &last = v[i + cfg.snr_db.size() - 1];
            const std::string tag = " n_t=" + std::to_string(last.n_t) + " eva_db=" + num(last.eva_db);
            check("umse floor" + tag, last.ls >= 10.0 * last.mmse, "LS/MMSE " + num(last.ls / last.mmse));
            check("umse decreasing" + tag, dec, "MMSE strictly decreasing over the SNR grid");
        }
    } else if (cfg.kind == "power-robustness") {
        const auto v = run_umse(cfg, threads);
        r.table = tabulate_power_robustness(v);
        for (const auto &row : r.table.rows) {
            const double ratio = row[5].is_number() ? row[5].get<double>() : 0.0;
            check("power n_t=" + row[0].dump() + " snr=" + row[1].dump() + " eva=" + row[2].dump(),
                  ratio >= 0.95 && ratio <= 1.05, "ratio " + num(ratio));
        }
    } else if (cfg.kind == "iep") {
        const auto v = run_iep(cfg, threads);
        r.table = tabulate(v);
        for (const auto &e : v) {
            const bool ok = cfg.same_correlation ? std::fabs(e.iep.rate() - 0.5) <= 0.05 : e.iep.hits == 0;
            check("iep n_t=" + std::to_string(e.n_t), ok, "rate " + num(e.iep.rate()));
        }
    } else if (cfg.kind == "iep-asymptotic") {
        const auto v = run_iep_asymptotic(cfg, threads);
        r.table = tabulate(v);
        for (const auto &a : v) {
            const double agree = static_cast<double>(a.agree[2]) / a.geometries;
            check("iep-asymptotic n_t=" + std::to_string(a.n_t), agree >= 0.95, "pipeline agreement " + num(agree));
        }
    }
    return r;
}

} // namespace cfbg
