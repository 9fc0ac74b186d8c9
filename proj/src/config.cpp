// SPDX-License-Identifier: Apache-2.0
#include "cfbg/config.hpp"

#include "cfbg/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cfbg
{

namespace
{

std::string join_lines(const std::vector<std::string> &errors)
{
    std::string s = "invalid configuration:";
    for (const auto &e : errors)
        s += "\n  - " + e;
    return s;
}

// Nearest block counts that divide n_total, one below and one above `blocks` when they exist.
std::string divisor_suggestion(int n_total, int blocks)
{
    int below = 0, above = 0;
    for (int b = blocks - 1; b >= 1; --b)
        if (n_total % b == 0) {
            below = b;
            break;
        }
    for (int b = blocks + 1; b <= n_total; ++b)
        if (n_total % b == 0) {
            above = b;
            break;
        }
    std::string s;
    if (below)
        s += std::to_string(below);
    if (above)
        s += (s.empty() ? "" : " or ") + std::to_string(above);
    return s.empty() ? "" : "; nearest valid block counts: " + s;
}

bool one_of(const std::string &v, std::initializer_list<const char *> options)
{
    return std::any_of(options.begin(), options.end(), [&](const char *o) { return v == o; });
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join_lines(errors)), errors_(std::move(errors))
{
}

std::vector<std::string> validation_errors(const ExperimentConfig &c)
{
    std::vector<std::string> e;
    auto need = [&](bool ok, const std::string &msg) {
        if (!ok)
            e.push_back(msg);
    };

    need(c.schema == kConfigSchema, "schema must be " + std::to_string(kConfigSchema));
    need(std::find(kExperimentKinds.begin(), kExperimentKinds.end(), c.kind) != kExperimentKinds.end(),
         "unknown kind '" + c.kind + "'");
    need(c.trials >= 1, "trials must be at least 1");

    need(is_prime(c.q), "q=" + std::to_string(c.q) + " is not prime");
    need(c.k >= 2, "k must be at least 2");
    need(3 * c.k <= c.q + 3, "k=" + std::to_string(c.k) + " requires q >= 3k-3 (n = 3k-2 <= q+1)");

    need(c.n_total >= 1, "n_total must be positive");
    need(c.blocks >= 1, "blocks must be positive");
    if (c.n_total >= 1 && c.blocks >= 1 && c.n_total % c.blocks != 0)
        e.push_back("n_total=" + std::to_string(c.n_total) + " is not divisible by blocks=" + std::to_string(c.blocks) +
                    divisor_suggestion(c.n_total, c.blocks));
    need(c.n_t >= 1, "n_t must be positive");
    need(c.taps >= 1 && c.taps <= c.n_total, "taps must lie in [1, n_total]");
    need(c.cyclic_prefix >= c.taps - 1, "cyclic_prefix must be at least taps - 1");
    need(std::isfinite(c.sigma2) && c.sigma2 > 0, "sigma2 must be positive");
    need(!c.snr_db.empty(), "snr_db must not be empty");
    for (double s : c.snr_db)
        need(std::isfinite(s), "snr_db entries must be finite");

    need(c.nnt >= 4, "nnt must be at least 4");
    need(std::isfinite(c.gamma) && c.gamma > 1.0, "gamma must exceed 1");
    need(c.false_alarm > 0 && c.false_alarm < 1, "false_alarm must lie in (0, 1)");
    need(!c.nnt_grid.empty(), "nnt_grid must not be empty");
    for (int v : c.nnt_grid)
        need(v >= 4, "nnt_grid entries must be at least 4");
    need(one_of(c.moment_method, {"analytic", "mc", "both"}), "moment_method must be analytic, mc or both");
    if (c.moment_method != "analytic")
        need(c.draws >= 2048, "draws must be at least 2048 for Monte-Carlo moments");

    for (const auto &row : c.sep_grid) {
        if (!(row[0] > 0 && row[1] > 0 && row[2] > 0)) {
            e.push_back("sep_grid entries must be positive");
            continue;
        }
        need(row[1] * row[2] / (7.0 * row[0]) >= 3.0, "sep_grid row requires N_Total*N_T/(7*N_B) >= 3");
    }

    need(one_of(c.attack, {"silent", "jamming", "imitation", "hybrid", "all"}),
         "attack must be silent, jamming, imitation, hybrid or all");
    need(one_of(c.imitation_target, {"full", "bob", "charlie"}), "imitation_target must be full, bob or charlie");
    need(std::all_of(c.hybrid_weights.begin(), c.hybrid_weights.end(), [](double w) { return w >= 0; }) &&
             c.hybrid_weights[0] + c.hybrid_weights[1] + c.hybrid_weights[2] > 0,
         "hybrid_weights must be non-negative with a positive sum");

    need(!c.eva_power_db.empty(), "eva_power_db must not be empty");
    need(c.quantization_blocks >= 0 && c.quantization_blocks <= 20, "quantization_blocks must lie in [0, 20]");
    need(c.spread_deg >= 0 && c.spread_deg <= 180, "spread_deg must lie in [0, 180]");
    need(c.spacing > 0, "spacing must be positive");
    need(c.sector_deg > 0 && c.sector_deg <= 90, "sector_deg must lie in (0, 90]");
    need(c.min_separation_deg >= 0 && c.min_separation_deg <= c.sector_deg,
         "min_separation_deg must lie in [0, sector_deg] so that three angles fit in the sector");
    need(!c.n_t_grid.empty(), "n_t_grid must not be empty");
    for (int v : c.n_t_grid)
        need(v >= 1, "n_t_grid entries must be positive");
    need(c.geometries >= 1, "geometries must be at least 1");
    need(c.trials_per_geometry >= 1, "trials_per_geometry must be at least 1");
    return e;
}

void validate_config(const ExperimentConfig &cfg)
{
    auto errors = validation_errors(cfg);
    if (!errors.empty())
        throw ConfigError(std::move(errors));
}

namespace
{

using Reader = std::function<void(const nlohmann::json &, ExperimentConfig &)>;

template <class T>
Reader field(T ExperimentConfig::*member)
{
    return [member](const nlohmann::json &v, ExperimentConfig &c) { c.*member = v.get<T>(); };
}

const std::map<std::string, Reader> &readers()
{
    static const std::map<std::string, Reader> r{
        {"schema", field(&ExperimentConfig::schema)},
        {"kind", field(&ExperimentConfig::kind)},
        {"seed", field(&ExperimentConfig::seed)},
        {"trials", field(&ExperimentConfig::trials)},
        {"q", field(&ExperimentConfig::q)},
        {"k", field(&ExperimentConfig::k)},
        {"n_total", field(&ExperimentConfig::n_total)},
        {"blocks", field(&ExperimentConfig::blocks)},
        {"n_t", field(&ExperimentConfig::n_t)},
        {"taps", field(&ExperimentConfig::taps)},
        {"cyclic_prefix", field(&ExperimentConfig::cyclic_prefix)},
        {"sigma2", field(&ExperimentConfig::sigma2)},
        {"snr_db", field(&ExperimentConfig::snr_db)},
        {"nnt", field(&ExperimentConfig::nnt)},
        {"gamma", field(&ExperimentConfig::gamma)},
        {"false_alarm", field(&ExperimentConfig::false_alarm)},
        {"calibrate_gamma", field(&ExperimentConfig::calibrate_gamma)},
        {"nnt_grid", field(&ExperimentConfig::nnt_grid)},
        {"moment_method", field(&ExperimentConfig::moment_method)},
        {"draws", field(&ExperimentConfig::draws)},
        {"sep_grid", field(&ExperimentConfig::sep_grid)},
        {"attack", field(&ExperimentConfig::attack)},
        {"imitation_target", field(&ExperimentConfig::imitation_target)},
        {"hybrid_weights", field(&ExperimentConfig::hybrid_weights)},
        {"ideal_counts", field(&ExperimentConfig::ideal_counts)},
        {"eva_power_db", field(&ExperimentConfig::eva_power_db)},
        {"quantization_blocks", field(&ExperimentConfig::quantization_blocks)},
        {"sqrt_weight", field(&ExperimentConfig::sqrt_weight)},
        {"aoa_deg", field(&ExperimentConfig::aoa_deg)},
        {"spread_deg", field(&ExperimentConfig::spread_deg)},
        {"spacing", field(&ExperimentConfig::spacing)},
        {"sector_deg", field(&ExperimentConfig::sector_deg)},
        {"min_separation_deg", field(&ExperimentConfig::min_separation_deg)},
        {"n_t_grid", field(&ExperimentConfig::n_t_grid)},
        {"same_correlation", field(&ExperimentConfig::same_correlation)},
        {"geometries", field(&ExperimentConfig::geometries)},
        {"trials_per_geometry", field(&ExperimentConfig::trials_per_geometry)},
    };
    return r;
}

} // namespace

ExperimentConfig config_from_json(const nlohmann::json &j)
{
    if (!j.is_object())
        throw ConfigError({"configuration must be a JSON object"});
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    if (!j.contains("schema"))
        errors.push_back("missing schema version");
    for (const auto &[key, value] : j.items()) {
        const auto it = readers().find(key);
        if (it == readers().end()) {
            errors.push_back("unknown key '" + key + "'");
            continue;
        }
        try {
            it->second(value, cfg);
        } catch (const nlohmann::json::exception &) {
            errors.push_back("key '" + key + "' has the wrong type: " + value.dump());
        }
    }
    for (auto &e : validation_errors(cfg))
        errors.push_back(std::move(e));
    if (!errors.empty())
        throw ConfigError(std::move(errors));
    return cfg;
}

ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"cannot open config file '" + path + "'"});
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError({"config file '" + path + "' is not valid JSON: " + e.what()});
    }
    return config_from_json(j);
}

nlohmann::json config_to_json(const ExperimentConfig &c)
{
    return nlohmann::json{
        {"schema", c.schema},
        {"kind", c.kind},
        {"seed", c.seed},
        {"trials", c.trials},
        {"q", c.q},
        {"k", c.k},
        {"n_total", c.n_total},
        {"blocks", c.blocks},
        {"n_t", c.n_t},
        {"taps", c.taps},
        {"cyclic_prefix", c.cyclic_prefix},
        {"sigma2", c.sigma2},
        {"snr_db", c.snr_db},
        {"nnt", c.nnt},
        {"gamma", c.gamma},
        {"false_alarm", c.false_alarm},
        {"calibrate_gamma", c.calibrate_gamma},
        {"nnt_grid", c.nnt_grid},
        {"moment_method", c.moment_method},
        {"draws", c.draws},
        {"sep_grid", c.sep_grid},
        {"attack", c.attack},
        {"imitation_target", c.imitation_target},
        {"hybrid_weights", c.hybrid_weights},
        {"ideal_counts", c.ideal_counts},
        {"eva_power_db", c.eva_power_db},
        {"quantization_blocks", c.quantization_blocks},
        {"sqrt_weight", c.sqrt_weight},
        {"aoa_deg", c.aoa_deg},
        {"spread_deg", c.spread_deg},
        {"spacing", c.spacing},
        {"sector_deg", c.sector_deg},
        {"min_separation_deg", c.min_separation_deg},
        {"n_t_grid", c.n_t_grid},
        {"same_correlation", c.same_correlation},
        {"geometries", c.geometries},
        {"trials_per_geometry", c.trials_per_geometry},
    };
}

std::uint64_t config_hash(const ExperimentConfig &cfg)
{
    nlohmann::json j = config_to_json(cfg);
    j.erase("seed");
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

int phase_grid_size(const ExperimentConfig &cfg)
{
    if (cfg.quantization_blocks > 0)
        return 1 << cfg.quantization_blocks;
    long long c = 1;
    for (int i = 0; i < cfg.k; ++i)
        c *= cfg.q;
    return static_cast<int>(c / 2);
}

} // namespace cfbg
