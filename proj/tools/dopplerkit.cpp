// dopplerkit: command-line front end for the detection, CCRT and radar
// experiments. Every subcommand writes a CSV plus <output>.manifest.json.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "doppler/cli/config.hpp"
#include "doppler/cli/experiment.hpp"
#include "doppler/error.hpp"

namespace {

using doppler::cli::Mode;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> output;
    std::optional<double> snr_start, snr_stop, snr_step;
    std::optional<double> lambda1, lambda2;
    std::optional<std::string> mapping;
    std::optional<double> mapping_scale;
    std::optional<unsigned> threads;
    bool mc = false;
    bool no_oracle = false;
    bool variants = false;
    bool export_maps = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Base seed for every random draw");
    cmd->add_option("-o,--output", o.output, "CSV output path");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void add_grid(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--snr-start", o.snr_start, "First SNR_1 value in dB");
    cmd->add_option("--snr-stop", o.snr_stop, "Last SNR_1 value in dB");
    cmd->add_option("--snr-step", o.snr_step, "SNR_1 step in dB");
    cmd->add_option("--lambda1", o.lambda1, "Pulse-domain correlation coefficient");
    cmd->add_option("--lambda2", o.lambda2, "Subpulse-domain correlation coefficient");
    cmd->add_option("--mapping", o.mapping, "SNR mapping")->check(CLI::IsMember({"unit_noise", "axis_scale"}));
    cmd->add_option("--mapping-scale", o.mapping_scale, "Scale factor for axis_scale");
}

void apply_overrides(nlohmann::json& j, const Overrides& o) {
    if (o.seed) j["mc"]["seed"] = *o.seed;
    if (o.trials) j["mc"]["trials"] = *o.trials;
    if (o.threads) j["mc"]["threads"] = *o.threads;
    if (o.mc) j["mc"]["enabled"] = true;
    if (o.output) j["output_path"] = *o.output;
    if (o.snr_start) j["snr_db"]["start"] = *o.snr_start;
    if (o.snr_stop) j["snr_db"]["stop"] = *o.snr_stop;
    if (o.snr_step) j["snr_db"]["step"] = *o.snr_step;
    if (o.lambda1) j["lambda1"] = *o.lambda1;
    if (o.lambda2) j["lambda2"] = *o.lambda2;
    if (o.mapping) j["snr_mapping"]["kind"] = *o.mapping;
    if (o.mapping_scale) j["snr_mapping"]["scale"] = *o.mapping_scale;
    if (o.no_oracle) j["oracle"] = false;
    if (o.variants) j["variants"] = true;
    if (o.export_maps) j["export_maps"] = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse/subpulse Doppler detection and CCRT toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dopplerkit 0.1.0");

    Overrides o;
    std::vector<std::pair<CLI::App*, Mode>> commands;

    auto* pd = app.add_subcommand("pd", "Closed-form PD sweep with quadrature oracle");
    auto* pfa = app.add_subcommand("pfa", "Closed-form PFA sweep with quadrature oracle");
    for (auto* cmd : {pd, pfa}) {
        add_common(cmd, o);
        add_grid(cmd, o);
        cmd->add_flag("--mc", o.mc, "Add Monte Carlo estimates");
        cmd->add_option("--trials", o.trials, "Monte Carlo trials per point");
        cmd->add_flag("--no-oracle", o.no_oracle, "Skip the quadrature oracle");
        cmd->add_flag("--variants", o.variants, "Add the alternative formula readings");
    }
    commands.emplace_back(pd, Mode::pd_sweep);
    commands.emplace_back(pfa, Mode::pfa_sweep);

    auto* fused = app.add_subcommand("fused", "Per-channel and M-of-L fused PD/PFA");
    add_common(fused, o);
    add_grid(fused, o);
    commands.emplace_back(fused, Mode::fused_sweep);

    auto* mc = app.add_subcommand("mc", "Monte Carlo validation of the closed forms");
    add_common(mc, o);
    add_grid(mc, o);
    mc->add_option("--trials", o.trials, "Monte Carlo trials per point");
    commands.emplace_back(mc, Mode::mc_validate);

    auto* check = app.add_subcommand("ccrt-check", "Exhaustive and randomized CCRT round trips");
    add_common(check, o);
    commands.emplace_back(check, Mode::ccrt_check);

    auto* sim = app.add_subcommand("simulate", "End-to-end radar simulation and unfolding");
    add_common(sim, o);
    sim->add_flag("--export-maps", o.export_maps, "Write Doppler maps and datacubes next to the output");
    commands.emplace_back(sim, Mode::simulate);

    CLI11_PARSE(app, argc, argv);

    Mode mode = Mode::pd_sweep;
    for (const auto& [cmd, m] : commands) {
        if (cmd->parsed()) mode = m;
    }
    std::filesystem::path fallback_output = o.output ? *o.output : "results.csv";

    try {
        auto j = doppler::cli::read_config_json(o.config);
        if (!j.is_object()) throw doppler::ValidationError("<root>", "expected an object");
        // The subcommand decides the mode; a "mode" key in the file is overridden.
        const std::string name(doppler::cli::to_string(mode));
        j["mode"] = name;
        apply_overrides(j, o);
        if (j.contains("output_path") && j["output_path"].is_string()) {
            fallback_output = j["output_path"].get<std::string>();
        }
        const auto config = doppler::cli::config_from_json(j);
        const int status = doppler::cli::run_and_write(config);
        std::cout << config.output_path.string() << (status == 0 ? ": ok" : ": FAILED") << " (see "
                  << config.output_path.string() << ".manifest.json)\n";
        return status;
    } catch (const doppler::Error& e) {
        std::cerr << "dopplerkit: " << e.what() << '\n';
        doppler::cli::write_error_manifest(fallback_output, e.kind(), e.what());
        return 2;
    }
}
