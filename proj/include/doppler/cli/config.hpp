#pragma once

// Experiment configuration: JSON schema, defaults and cross-field checks.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "doppler/detection/detection.hpp"
#include "doppler/radar/radar_sim.hpp"

namespace doppler::cli {

enum class Mode { pd_sweep, pfa_sweep, fused_sweep, mc_validate, ccrt_check, simulate };

std::string_view to_string(Mode m) noexcept;
/// Throws ValidationError("mode", ...) on an unknown name.
Mode parse_mode(std::string_view name);

struct SnrGrid {
    double start = 0.0;
    double stop = 15.0;
    double step = 1.0;

    /// start + i * step for every value <= stop (1e-9 step slack).
    std::vector<double> values() const;
};

struct ChannelSpec {
    std::uint32_t M = 1;
    std::uint32_t N = 8;
    std::optional<double> prf_hz;
};

struct McSettings {
    bool enabled = false;
    std::uint64_t trials = 1'000'000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

struct RadarSettings {
    double carrier_hz = 6e9;
    double pulse_width_s = 25e-6;
    double bandwidth_hz = 2e6;
    std::optional<double> sample_rate_hz;  // default 4 B
    std::optional<double> wavelength_m;    // default c / carrier
    bool allow_mixed_spacing = false;
};

struct TargetSettings {
    double range_m = 10e3;
    double velocity_mps = -900.0;
    double amplitude = 1.0;
    std::optional<double> snr_db;  // post-compression PP SNR per pulse; none = noiseless
};

struct ExperimentConfig {
    Mode mode = Mode::pd_sweep;
    std::vector<ChannelSpec> channels;
    SnrGrid snr_db;
    double lambda1 = 0.5;
    double lambda2 = 0.99;
    detection::SnrMapping mapping;
    bool oracle = true;
    bool variants = false;
    detection::FusionRule fusion;
    McSettings mc;
    RadarSettings radar;
    TargetSettings target;
    std::uint64_t random_systems = 1000;
    bool export_maps = false;
    std::filesystem::path output_path = "results.csv";

    /// Cross-field checks; throws ValidationError naming the field.
    void validate() const;

    /// RadarSetup assembled from `radar` and the channels' PRFs.
    radar::RadarSetup radar_setup() const;

    /// True for runs that draw random numbers and therefore need a seed.
    bool stochastic() const noexcept;
};

/// Parses and validates. Unknown keys are rejected. Throws ParseError with
/// line and column on malformed JSON, ValidationError otherwise.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Raw JSON of a config file, for callers that patch it before validation.
/// Throws ParseError with line and column on malformed JSON.
nlohmann::json parse_config_json(std::string_view text);
nlohmann::json read_config_json(const std::filesystem::path& path);

/// Full config with defaults filled in; parse_config(to_json(c).dump())
/// reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace doppler::cli
