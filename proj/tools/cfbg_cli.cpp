// SPDX-License-Identifier: Apache-2.0
// Command-line front end: codebook construction and verification, threshold calibration and
// experiment runs. Exit codes: 0 success, 2 invalid input, 3 failed check.
#include "cfbg/codebook.hpp"
#include "cfbg/combinatorics.hpp"
#include "cfbg/config.hpp"
#include "cfbg/experiments.hpp"
#include "cfbg/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitCheck = 3;

struct RunOptions
{
    std::string kind;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string records;
    std::string format = "csv";
    int threads = 1;
    bool check = false;
};

int emit(const cfbg::ExperimentResult &r, const RunOptions &o)
{
    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) {
            std::cerr << "error: cannot write '" << o.out << "'\n";
            return kExitInvalid;
        }
    }
    std::ostream &os = o.out.empty() ? std::cout : file;
    if (o.format == "json")
        cfbg::write_json(os, r.manifest, r.table);
    else
        cfbg::write_csv(os, r.manifest, r.table);

    if (!o.check)
        return kExitOk;
    bool ok = true;
    for (const auto &c : r.checks) {
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.pass;
    }
    return ok ? kExitOk : kExitCheck;
}

int run(RunOptions o)
{
    cfbg::ExperimentConfig cfg;
    if (!o.config.empty())
        cfg = cfbg::load_config(o.config);
    cfg.kind = o.kind;
    if (o.seed)
        cfg.seed = *o.seed;
    cfbg::validate_config(cfg);

    std::string records;
    const auto r = cfbg::run_experiment(cfg, o.threads, o.records.empty() ? nullptr : &records);
    if (!o.records.empty()) {
        std::ofstream rec(o.records);
        if (!rec) {
            std::cerr << "error: cannot write '" << o.records << "'\n";
            return kExitInvalid;
        }
        rec << records;
    }
    return emit(r, o);
}

int verify_codebook(int q, int k, std::uint64_t budget)
{
    const auto start = std::chrono::steady_clock::now();
    const cfbg::MdsCode code = cfbg::build_mds_code(q, k);
    const cfbg::ZfdCode zfd = cfbg::mds_to_zfd(code);
    std::cout << "q=" << q << " k=" << k << " n=" << code.n << " B=" << zfd.B << " C=" << zfd.codewords.size()
              << " d=" << code.d << '\n';
    const cfbg::VerifyReport z = cfbg::verify_zfd(zfd.codewords, 3, budget);
    std::cout << "zfd(m=3): " << (z.ok ? "ok" : "FAILED: " + z.reason) << " (" << z.checks << " checks)\n";
    const cfbg::VerifyReport b = cfbg::verify_bd_property(zfd.codewords, budget);
    std::cout << "bd: " << (b.ok ? "ok" : "FAILED: " + b.reason) << " (" << b.checks << " checks)\n";
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "elapsed " << secs << " s\n";
    return z.ok && b.ok ? kExitOk : kExitCheck;
}

int build_codebook(int q, int k, const std::string &out)
{
    const cfbg::CfbgCodebook book = cfbg::CfbgCodebook::build(q, k);
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) {
            std::cerr << "error: cannot write '" << out << "'\n";
            return kExitInvalid;
        }
    }
    book.save(out.empty() ? std::cout : file);
    std::cerr << "codebook q=" << q << " k=" << k << ": " << book.usable_size() << " usable codewords, "
              << book.half_size() << " per user, sum sets " << (book.materialized() ? "materialized" : "scanned") << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"CFBG pilot authentication simulator"};
    app.require_subcommand(1);

    int q = 7, k = 2;
    std::uint64_t budget = cfbg::kDefaultCheckBudget;
    std::string codebook_out;
    auto *codebook = app.add_subcommand("codebook", "Build or verify a CFBG codebook");
    codebook->require_subcommand(1);
    auto *cb_build = codebook->add_subcommand("build", "Write the codebook of an MDS-based ZFD code");
    cb_build->add_option("--q", q, "Prime alphabet size")->capture_default_str();
    cb_build->add_option("--k", k, "Code dimension")->capture_default_str();
    cb_build->add_option("--out", codebook_out, "Output file (stdout when omitted)");
    auto *cb_verify = codebook->add_subcommand("verify", "Exhaustively check the ZFD and BD properties");
    cb_verify->add_option("--q", q, "Prime alphabet size")->capture_default_str();
    cb_verify->add_option("--k", k, "Code dimension")->capture_default_str();
    cb_verify->add_option("--budget", budget, "Maximum number of subset checks")->capture_default_str();

    RunOptions calib;
    calib.kind = "calibrate";
    auto *calibrate = app.add_subcommand("calibrate", "Solve detection thresholds for a false-alarm target");
    calibrate->add_option("--config", calib.config, "JSON experiment config");
    calibrate->add_option("--out", calib.out, "Output file (stdout when omitted)");
    calibrate->add_option("--format", calib.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    RunOptions opts;
    auto *runner = app.add_subcommand("run", "Run an experiment");
    runner->add_option("kind", opts.kind, "Experiment kind")->required()->check(CLI::IsMember(cfbg::kExperimentKinds));
    runner->add_option("--config", opts.config, "JSON experiment config");
    runner->add_option("--seed", opts.seed, "Master seed (overrides the config)");
    runner->add_option("--out", opts.out, "Output file (stdout when omitted)");
    runner->add_option("--records", opts.records, "Per-trial verdict records (classify)");
    runner->add_option("--threads", opts.threads, "Worker threads; 0 uses all cores")->capture_default_str();
    runner->add_option("--format", opts.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    runner->add_flag("--check", opts.check, "Evaluate pass criteria; exit 3 when one fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (cb_build->parsed())
            return build_codebook(q, k, codebook_out);
        if (cb_verify->parsed())
            return verify_codebook(q, k, budget);
        if (calibrate->parsed())
            return run(calib);
        opts.threads = cfbg::resolve_threads(opts.threads);
        return run(opts);
    } catch (const cfbg::ConfigError &e) {
        std::cerr << e.what() << '\n';
        return kExitInvalid;
    } catch (const cfbg::ResourceError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::domain_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
