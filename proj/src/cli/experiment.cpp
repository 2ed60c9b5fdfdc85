#include "doppler/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/version.hpp>
#include <fftw3.h>

#include "doppler/ccrt/ccrt.hpp"
#include "doppler/detection/detection.hpp"
#include "doppler/error.hpp"
#include "doppler/montecarlo/montecarlo.hpp"
#include "doppler/numerics/rng.hpp"
#include "doppler/radar/radar_sim.hpp"

namespace doppler::cli {

using nlohmann::json;

namespace {

constexpr const char* kToolkitVersion = "0.1.0";
constexpr double kOracleTolerance = 1e-6;
constexpr double kConcordanceRatio = 0.9;

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt_bool(bool b) { return b ? "1" : "0"; }
const std::string kNA = "NA";

std::uint64_t point_seed(std::uint64_t seed, std::size_t channel, std::size_t point) {
    return numerics::mix_stream_key(seed, (static_cast<std::uint64_t>(channel) << 32) | point);
}

montecarlo::McEstimate run_mc(const ExperimentConfig& c, const detection::ChannelStats& stats, std::size_t channel,
                              std::size_t point) {
    montecarlo::McConfig mc;
    mc.trials = c.mc.trials;
    mc.seed = point_seed(*c.mc.seed, channel, point);
    mc.stats = stats;
    mc.threads = c.mc.threads;
    return montecarlo::estimate(mc);
}

RunResult run_sweep(const ExperimentConfig& c) {
    const bool pd = c.mode == Mode::pd_sweep;
    RunResult out;
    out.table.columns = columns_for(c.mode);
    const auto grid = c.snr_db.values();
    double max_diff = 0.0;
    std::size_t mc_points = 0, mc_agree = 0;

    for (std::size_t ch = 0; ch < c.channels.size(); ++ch) {
        const auto& spec = c.channels[ch];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double snr = grid[i];
            const auto stats = detection::ChannelStats::from_snr(snr, c.lambda1, c.lambda2, spec.M, spec.N, c.mapping);
            const double closed = pd ? detection::pd_closed_form(stats) : detection::pfa_closed_form(stats);
            double oracle = std::numeric_limits<double>::quiet_NaN();
            double diff = oracle;
            if (c.oracle) {
                oracle = pd ? detection::pd_oracle(stats) : detection::pfa_oracle(stats);
                diff = std::abs(closed - oracle);
                max_diff = std::max(max_diff, diff);
            }
            double mc_val = std::numeric_limits<double>::quiet_NaN(), se = mc_val;
            std::string agree = kNA;
            if (c.mc.enabled) {
                const auto est = run_mc(c, stats, ch, i);
                mc_val = pd ? est.pd_hat : est.pfa_hat;
                se = pd ? est.stderr_pd : est.stderr_pfa;
                const bool ok = montecarlo::concordant(mc_val, closed, est.trials);
                agree = fmt_bool(ok);
                ++mc_points;
                mc_agree += ok ? 1 : 0;
            }
            const double variant = !c.variants ? std::numeric_limits<double>::quiet_NaN()
                                   : pd        ? detection::variants::pd_printed_xi(stats)
                                               : detection::variants::pfa_diagonal(stats);
            out.table.add({fmt(ch), fmt(spec.M), fmt(spec.N), format_number(snr),
                           format_number(detection::snr2_db(snr, c.lambda1, c.lambda2, spec.M, spec.N)),
                           format_number(stats.m()), format_number(closed), format_number(oracle), format_number(diff),
                           format_number(mc_val), format_number(se), agree, format_number(variant)});
        }
    }
    if (c.oracle) {
        out.checks.push_back({"oracle_agreement", max_diff <= kOracleTolerance,
                              "max |closed - oracle| = " + format_number(max_diff) + " (tolerance 1e-6)"});
        out.summary["max_abs_diff"] = max_diff;
    }
    if (c.mc.enabled) {
        const double ratio = static_cast<double>(mc_agree) / static_cast<double>(mc_points);
        out.checks.push_back({"mc_concordance", ratio >= kConcordanceRatio,
                              fmt(mc_agree) + "/" + fmt(mc_points) + " points within 3 standard errors"});
        out.summary["mc_concordant_points"] = mc_agree;
        out.summary["mc_points"] = mc_points;
    }
    return out;
}

RunResult run_fused(const ExperimentConfig& c) {
    RunResult out;
    out.table.columns = columns_for(c.mode);
    const auto grid = c.snr_db.values();
    bool in_range = true;
    for (std::size_t ch = 0; ch <= c.channels.size(); ++ch) {
        for (const double snr : grid) {
            if (ch < c.channels.size()) {
                const auto& spec = c.channels[ch];
                const auto stats =
                    detection::ChannelStats::from_snr(snr, c.lambda1, c.lambda2, spec.M, spec.N, c.mapping);
                out.table.add({fmt(ch), fmt(spec.M), fmt(spec.N), format_number(snr),
                               format_number(detection::pd_closed_form(stats)),
                               format_number(detection::pfa_closed_form(stats))});
                continue;
            }
            std::vector<double> pds, pfas;
            for (const auto& spec : c.channels) {
                const auto stats =
                    detection::ChannelStats::from_snr(snr, c.lambda1, c.lambda2, spec.M, spec.N, c.mapping);
                pds.push_back(detection::pd_closed_form(stats));
                pfas.push_back(detection::pfa_closed_form(stats));
            }
            const double pd = detection::combine_m_of_l(pds, c.fusion);
            const double pfa = detection::combine_m_of_l(pfas, c.fusion);
            in_range = in_range && pd >= 0.0 && pd <= 1.0 && pfa >= 0.0 && pfa <= 1.0;
            out.table.add({"fused", kNA, kNA, format_number(snr), format_number(pd), format_number(pfa)});
        }
    }
    out.checks.push_back({"fused_probabilities_in_unit_interval", in_range, ""});
    out.summary["fusion"] = {{"required", c.fusion.required}, {"total", c.fusion.total}};
    return out;
}

RunResult run_mc_validate(const ExperimentConfig& c) {
    RunResult out;
    out.table.columns = columns_for(c.mode);
    const auto grid = c.snr_db.values();
    std::size_t points = 0, pd_ok = 0, pfa_ok = 0;
    for (std::size_t ch = 0; ch < c.channels.size(); ++ch) {
        const auto& spec = c.channels[ch];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto stats =
                detection::ChannelStats::from_snr(grid[i], c.lambda1, c.lambda2, spec.M, spec.N, c.mapping);
            const double pd = detection::pd_closed_form(stats);
            const double pfa = detection::pfa_closed_form(stats);
            const auto est = run_mc(c, stats, ch, i);
            const bool a = montecarlo::concordant(est.pd_hat, pd, est.trials);
            const bool b = montecarlo::concordant(est.pfa_hat, pfa, est.trials);
            ++points;
            pd_ok += a ? 1 : 0;
            pfa_ok += b ? 1 : 0;
            out.table.add({fmt(ch), fmt(spec.M), fmt(spec.N), format_number(grid[i]), format_number(pd),
                           format_number(est.pd_hat), format_number(est.stderr_pd), fmt_bool(a), format_number(pfa),
                           format_number(est.pfa_hat), format_number(est.stderr_pfa), fmt_bool(b)});
        }
    }
    const auto ratio = [&](std::size_t k) { return static_cast<double>(k) / static_cast<double>(points); };
    out.checks.push_back({"pd_concordance", ratio(pd_ok) >= kConcordanceRatio,
                          fmt(pd_ok) + "/" + fmt(points) + " points within 3 standard errors"});
    out.checks.push_back({"pfa_concordance", ratio(pfa_ok) >= kConcordanceRatio,
                          fmt(pfa_ok) + "/" + fmt(points) + " points within 3 standard errors"});
    out.summary["points"] = points;
    out.summary["pd_concordant"] = pd_ok;
    out.summary["pfa_concordant"] = pfa_ok;
    return out;
}

// Smallest x >= 0 with x = r_i (mod m_i) for all i, by stepping through the
// largest modulus.
std::uint64_t brute_force_crt(const ccrt::CongruenceSystem& sys) {
    const auto it = std::max_element(sys.moduli.begin(), sys.moduli.end());
    const auto k = static_cast<std::size_t>(it - sys.moduli.begin());
    const std::uint64_t theta = sys.theta();
    for (std::uint64_t x = sys.residues[k]; x < theta; x += sys.moduli[k]) {
        bool ok = true;
        for (std::size_t i = 0; i < sys.moduli.size() && ok; ++i) ok = x % sys.moduli[i] == sys.residues[i];
        if (ok) return x;
    }
    throw Error("brute-force CRT found no solution");
}

RunResult run_ccrt_check(const ExperimentConfig& c) {
    RunResult out;
    out.table.columns = columns_for(c.mode);

    ccrt::CongruenceSystem sys;
    for (const auto& ch : c.channels) sys.moduli.push_back(ch.M);
    sys.residues.assign(sys.moduli.size(), 0);
    const std::uint64_t theta = sys.theta();
    std::uint64_t exhaustive_ok = 0;
    for (std::uint64_t b = 0; b < theta; ++b) {
        for (std::size_t i = 0; i < sys.moduli.size(); ++i) sys.residues[i] = b % sys.moduli[i];
        exhaustive_ok += ccrt::ccrt_solve(sys) == b ? 1 : 0;
    }
    const auto join = [](const std::vector<std::uint64_t>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
        return s;
    };
    out.table.add({"configured", join(sys.moduli), fmt(theta), fmt(theta), fmt(exhaustive_ok)});
    out.checks.push_back({"exhaustive_round_trip", exhaustive_ok == theta,
                          fmt(exhaustive_ok) + "/" + fmt(theta) + " bins recovered"});

    constexpr std::uint64_t kMaxRandomTheta = 1'000'000;
    constexpr int kResiduesPerSystem = 8;
    numerics::RngStream rng(*c.mc.seed, 0);
    const auto draw = [&](std::uint64_t lo, std::uint64_t hi) {
        return lo + static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
    };
    std::uint64_t systems_ok = 0;
    for (std::uint64_t s = 0; s < c.random_systems; ++s) {
        ccrt::CongruenceSystem r;
        const auto count = draw(2, 4);
        std::uint64_t product = 1;
        while (r.moduli.size() < count) {
            const auto m = draw(2, 64);
            const bool coprime = std::all_of(r.moduli.begin(), r.moduli.end(),
                                             [&](std::uint64_t x) { return ccrt::gcd(x, m) == 1; });
            if (!coprime || product * m > kMaxRandomTheta) {
                if (r.moduli.size() >= 2 && product * m > kMaxRandomTheta) break;
                continue;
            }
            r.moduli.push_back(m);
            product *= m;
        }
        std::uint64_t agree = 0;
        for (int k = 0; k < kResiduesPerSystem; ++k) {
            r.residues.clear();
            for (const auto m : r.moduli) r.residues.push_back(draw(0, m - 1));
            agree += ccrt::ccrt_solve(r) == brute_force_crt(r) ? 1 : 0;
        }
        systems_ok += agree == kResiduesPerSystem ? 1 : 0;
        out.table.add({"random_" + fmt(s), join(r.moduli), fmt(r.theta()), fmt(kResiduesPerSystem), fmt(agree)});
    }
    out.checks.push_back({"random_systems_vs_brute_force", systems_ok == c.random_systems,
                          fmt(systems_ok) + "/" + fmt(c.random_systems) + " systems agree"});
    out.summary["theta"] = theta;
    out.summary["exhaustive_recovered"] = exhaustive_ok;
    out.summary["random_systems_agreeing"] = systems_ok;
    return out;
}

RunResult run_simulate(const ExperimentConfig& c) {
    RunResult out;
    out.table.columns = columns_for(c.mode);
    const auto setup = c.radar_setup();
    radar::TargetTruth truth;
    truth.range_m = c.target.range_m;
    truth.radial_velocity_mps = c.target.velocity_mps;
    truth.amplitude = c.target.amplitude;
    const double sigma = c.target.snr_db ? radar::noise_sigma_for_snr(setup, truth.amplitude, *c.target.snr_db) : 0.0;
    const std::uint64_t seed = c.mc.seed.value_or(0);
    const auto sim = radar::simulate(setup, truth, seed, sigma);
    const auto& rep = sim.report;

    for (std::size_t i = 0; i < setup.channels.size(); ++i) {
        const auto& ch = setup.channels[i];
        const auto& det = rep.channels[i];
        out.table.add({fmt(i), format_number(ch.prf_hz), fmt(ch.num_pulses), fmt(ch.num_subpulses),
                       fmt_bool(det.has_value()), det ? fmt(det->apparent_bin) : kNA,
                       det ? format_number(det->coarse_hz) : kNA, det ? fmt(det->peak_range_bin) : kNA,
                       det ? format_number(det->pp_peak_to_median) : kNA,
                       det ? format_number(det->sp_peak_to_median) : kNA, kNA, kNA, kNA,
                       format_number(truth.radial_velocity_mps), kNA});
        if (c.export_maps) {
            auto stem = c.output_path;
            stem.replace_filename(c.output_path.stem().string() + ".ch" + std::to_string(i));
            radar::export_map(stem, sim.maps[i], setup, ch);
            radar::export_datacube(stem, sim.cubes[i], setup, ch);
        }
    }
    const double error = rep.detected ? rep.velocity_mps - truth.radial_velocity_mps
                                      : std::numeric_limits<double>::quiet_NaN();
    out.table.add({"fused", kNA, kNA, kNA, fmt_bool(rep.detected), kNA, format_number(rep.fused.coarse_hz),
                   kNA, kNA, kNA, rep.detected ? fmt(rep.fused.bin) : kNA,
                   rep.detected ? format_number(rep.fused.doppler_hz) : kNA,
                   rep.detected ? format_number(rep.velocity_mps) : kNA, format_number(truth.radial_velocity_mps),
                   format_number(error)});

    const double quantum = setup.wavelength_m * setup.channels.front().bin_spacing_hz() / 2.0;
    const bool ok = rep.detected && std::abs(error) <= quantum;
    out.checks.push_back({"velocity_recovered", ok,
                          rep.detected ? "error " + format_number(error) + " m/s, limit " + format_number(quantum)
                                       : "target not detected"});
    out.summary["detected"] = rep.detected;
    out.summary["velocity_mps"] = rep.detected ? json(rep.velocity_mps) : json(nullptr);
    out.summary["noise_sigma"] = sigma;
    out.summary["velocity_quantum_mps"] = quantum;
    return out;
}

json manifest_base(const std::filesystem::path& output) {
    json m;
    m["output"] = output.string();
    m["versions"] = versions();
    return m;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

void ResultTable::add(std::vector<std::string> row) {
    if (row.size() != columns.size()) {
        throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, table has " +
                              std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

std::string ResultTable::to_csv() const {
    std::string s;
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return s;
}

std::string format_number(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool RunResult::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> columns_for(Mode mode) {
    switch (mode) {
        case Mode::pd_sweep:
        case Mode::pfa_sweep:
            return {"channel", "M",  "N",      "snr1_db",       "snr2_db", "m",      "closed",
                    "oracle",  "abs_diff", "mc", "mc_stderr", "mc_concordant",
                    mode == Mode::pd_sweep ? "pd_printed_xi" : "pfa_diagonal"};
        case Mode::fused_sweep:
            return {"channel", "M", "N", "snr1_db", "pd", "pfa"};
        case Mode::mc_validate:
            return {"channel", "M",      "N",          "snr1_db",   "pd_closed",     "pd_mc",
                    "pd_stderr", "pd_concordant", "pfa_closed", "pfa_mc", "pfa_stderr", "pfa_concordant"};
        case Mode::ccrt_check:
            return {"system", "moduli", "theta", "checked", "recovered"};
        case Mode::simulate:
            return {"channel",    "prf_hz",        "M",     "N",          "detected",
                    "apparent_bin", "coarse_hz",   "range_bin", "pp_peak_to_median", "sp_peak_to_median",
                    "bin",        "doppler_hz",    "velocity_mps", "truth_velocity_mps", "velocity_error_mps"};
    }
    return {};
}

RunResult run(const ExperimentConfig& config) {
    config.validate();
    switch (config.mode) {
        case Mode::pd_sweep:
        case Mode::pfa_sweep:
            return run_sweep(config);
        case Mode::fused_sweep:
            return run_fused(config);
        case Mode::mc_validate:
            return run_mc_validate(config);
        case Mode::ccrt_check:
            return run_ccrt_check(config);
        case Mode::simulate:
            return run_simulate(config);
    }
    throw InvalidArgument("unknown mode");
}

json versions() {
    return {{"dopplerkit", kToolkitVersion},
            {"fftw", std::string(fftw_version)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

void write_error_manifest(const std::filesystem::path& path, const std::string& kind, const std::string& message) {
    auto m = manifest_base(path);
    m["status"] = "error";
    m["error"] = {{"kind", kind}, {"message", message}};
    write_json(std::filesystem::path(path.string() + ".manifest.json"), m);
}

int run_and_write(const ExperimentConfig& config) {
    const auto& path = config.output_path;
    auto m = manifest_base(path);
    m["config"] = to_json(config);
    m["seed"] = config.mc.seed ? json(*config.mc.seed) : json(nullptr);
    try {
        const auto result = run(config);
        {
            std::ofstream csv(path, std::ios::binary);
            if (!csv) throw Error("cannot write " + path.string());
            csv << result.table.to_csv();
        }
        m["checks"] = json::array();
        for (const auto& c : result.checks) {
            m["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        }
        m["summary"] = result.summary;
        m["rows"] = result.table.rows.size();
        m["status"] = result.ok() ? "ok" : "checks_failed";
        write_json(path.string() + ".manifest.json", m);
        return result.ok() ? 0 : 1;
    } catch (const Error& e) {
        m["status"] = "error";
        m["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        write_json(path.string() + ".manifest.json", m);
        return 2;
    }
}

}  // namespace doppler::cli
