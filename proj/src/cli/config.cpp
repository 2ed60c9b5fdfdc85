#include "doppler/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "doppler/ccrt/ccrt.hpp"
#include "doppler/error.hpp"

namespace doppler::cli {

using nlohmann::json;

namespace {

constexpr std::pair<Mode, std::string_view> kModeNames[] = {
    {Mode::pd_sweep, "pd_sweep"},       {Mode::pfa_sweep, "pfa_sweep"},   {Mode::fused_sweep, "fused_sweep"},
    {Mode::mc_validate, "mc_validate"}, {Mode::ccrt_check, "ccrt_check"}, {Mode::simulate, "simulate"},
};

// Object reader that remembers which keys were consumed, so leftovers can be
// reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ValidationError(field(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ValidationError(field(key), "must be finite");
        return d;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) {
            seen_.insert(key);
            return std::nullopt;
        }
        return number(key, 0.0);
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) throw ValidationError(field(key), "must be non-negative");
        throw ValidationError(field(key), "expected an integer");
    }

    std::optional<std::uint64_t> optional_count(const std::string& key) {
        if (!has(key)) {
            seen_.insert(key);
            return std::nullopt;
        }
        return count(key, 0);
    }

    bool boolean(const std::string& key, bool fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ValidationError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ValidationError(field(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ValidationError(field(key), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::uint32_t narrow_count(std::uint64_t v, const std::string& field) {
    if (v > 0xFFFFFFFFull) throw ValidationError(field, "too large");
    return static_cast<std::uint32_t>(v);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

std::string_view to_string(Mode m) noexcept {
    for (const auto& [mode, name] : kModeNames) {
        if (mode == m) return name;
    }
    return "unknown";
}

Mode parse_mode(std::string_view name) {
    for (const auto& [mode, n] : kModeNames) {
        if (n == name) return mode;
    }
    throw ValidationError("mode", "unknown mode '" + std::string(name) +
                                      "' (expected pd_sweep, pfa_sweep, fused_sweep, mc_validate, ccrt_check "
                                      "or simulate)");
}

std::vector<double> SnrGrid::values() const {
    std::vector<double> v;
    if (!(step > 0.0) || stop < start) return v;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) v.push_back(start + static_cast<double>(i) * step);
    return v;
}

bool ExperimentConfig::stochastic() const noexcept {
    return mode == Mode::mc_validate || mode == Mode::ccrt_check || (mode == Mode::simulate && target.snr_db) ||
           ((mode == Mode::pd_sweep || mode == Mode::pfa_sweep) && mc.enabled);
}

radar::RadarSetup ExperimentConfig::radar_setup() const {
    std::vector<ccrt::PrfChannel> chans;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (!channels[i].prf_hz) {
            throw ValidationError("channels[" + std::to_string(i) + "].prf_hz", "required for the radar setup");
        }
        chans.push_back({*channels[i].prf_hz, channels[i].M, channels[i].N});
    }
    auto s = radar::RadarSetup::make(radar.carrier_hz, radar.pulse_width_s, radar.bandwidth_hz, std::move(chans));
    if (radar.sample_rate_hz) s.sample_rate_hz = *radar.sample_rate_hz;
    if (radar.wavelength_m) s.wavelength_m = *radar.wavelength_m;
    return s;
}

void ExperimentConfig::validate() const {
    if (channels.empty()) throw ValidationError("channels", "at least one channel is required");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const std::string f = "channels[" + std::to_string(i) + "]";
        if (channels[i].M < 1 || channels[i].M > 64) throw ValidationError(f + ".M", "must be in 1..64");
        if (channels[i].N < 1 || channels[i].N > 64) throw ValidationError(f + ".N", "must be in 1..64");
        if (channels[i].prf_hz && !(*channels[i].prf_hz > 0.0)) throw ValidationError(f + ".prf_hz", "must be positive");
    }
    for (std::size_t i = 0; i < channels.size(); ++i) {
        for (std::size_t j = i + 1; j < channels.size(); ++j) {
            if (ccrt::gcd(channels[i].M, channels[j].M) != 1) {
                throw ValidationError("channels", "pulse counts M=" + std::to_string(channels[i].M) + " (channels[" +
                                                      std::to_string(i) + "]) and M=" + std::to_string(channels[j].M) +
                                                      " (channels[" + std::to_string(j) +
                                                      "]) are not coprime; the CCRT needs pairwise coprime M");
            }
        }
    }

    const bool sweep = mode == Mode::pd_sweep || mode == Mode::pfa_sweep || mode == Mode::fused_sweep ||
                       mode == Mode::mc_validate;
    if (sweep) {
        if (!(snr_db.step > 0.0)) throw ValidationError("snr_db.step", "must be positive");
        if (snr_db.values().empty()) throw ValidationError("snr_db", "grid is empty (stop < start)");
        if (!(lambda1 > 0.0 && lambda1 < 1.0)) throw ValidationError("lambda1", "must lie in (0, 1)");
        if (!(lambda2 > 0.0 && lambda2 < 1.0)) throw ValidationError("lambda2", "must lie in (0, 1)");
        if (mapping.kind == detection::SnrMappingKind::axis_scale && !(mapping.scale > 0.0)) {
            throw ValidationError("snr_mapping.scale", "must be positive");
        }
    }
    if (mode == Mode::fused_sweep) {
        if (fusion.total != channels.size()) {
            throw ValidationError("fusion.total", "must equal the number of channels (" +
                                                      std::to_string(channels.size()) + ")");
        }
        if (fusion.required < 1 || fusion.required > fusion.total) {
            throw ValidationError("fusion.required", "must lie in 1..total");
        }
    }
    if (mc.trials < 1) throw ValidationError("mc.trials", "must be at least 1");
    if (stochastic() && !mc.seed) {
        throw ValidationError("mc.seed", "a seed is required for " + std::string(to_string(mode)) +
                                             (mode == Mode::pd_sweep || mode == Mode::pfa_sweep ? " with mc.enabled" : "") +
                                             " (pass --seed or set mc.seed)");
    }

    const bool any_prf = std::any_of(channels.begin(), channels.end(), [](const auto& c) { return c.prf_hz.has_value(); });
    if (mode == Mode::simulate || any_prf) {
        const auto setup = radar_setup();
        setup.validate();
        if (!radar.allow_mixed_spacing) {
            try {
                ccrt::require_common_spacing(setup.channels);
            } catch (const InvalidArgument& e) {
                throw ValidationError("channels", std::string(e.what()) +
                                                      "; set radar.allow_mixed_spacing to use the coincidence unfold");
            }
        }
    }
    if (mode == Mode::simulate) {
        if (!(target.range_m > 0.0)) throw ValidationError("target.range_m", "must be positive");
        double max_prf = 0.0;
        for (const auto& c : channels) max_prf = std::max(max_prf, *c.prf_hz);
        if (target.range_m >= radar::kSpeedOfLight / (2.0 * max_prf)) {
            throw ValidationError("target.range_m", "beyond the unambiguous range c / (2 max PRF)");
        }
    }
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    Reader root(j, "");
    if (root.has("mode")) c.mode = parse_mode(root.string("mode", ""));
    else root.string("mode", "");

    if (root.has("channels")) {
        const auto& arr = root.raw("channels");
        if (!arr.is_array()) throw ValidationError("channels", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Reader r(arr[i], "channels[" + std::to_string(i) + "]");
            ChannelSpec ch;
            ch.M = narrow_count(r.count("M", 1), r.field("M"));
            ch.N = narrow_count(r.count("N", 8), r.field("N"));
            ch.prf_hz = r.optional_number("prf_hz");
            r.finish();
            c.channels.push_back(ch);
        }
    }
    if (root.has("snr_db")) {
        Reader r(root.raw("snr_db"), "snr_db");
        c.snr_db.start = r.number("start", c.snr_db.start);
        c.snr_db.stop = r.number("stop", c.snr_db.stop);
        c.snr_db.step = r.number("step", c.snr_db.step);
        r.finish();
    }
    c.lambda1 = root.number("lambda1", c.lambda1);
    c.lambda2 = root.number("lambda2", c.lambda2);
    if (root.has("snr_mapping")) {
        Reader r(root.raw("snr_mapping"), "snr_mapping");
        const auto kind = r.string("kind", "unit_noise");
        if (kind == "unit_noise") {
            c.mapping.kind = detection::SnrMappingKind::unit_noise;
        } else if (kind == "axis_scale") {
            c.mapping.kind = detection::SnrMappingKind::axis_scale;
        } else {
            throw ValidationError("snr_mapping.kind", "expected unit_noise or axis_scale");
        }
        c.mapping.scale = r.number("scale", c.mapping.scale);
        r.finish();
    }
    c.oracle = root.boolean("oracle", c.oracle);
    c.variants = root.boolean("variants", c.variants);

    c.fusion.total = static_cast<std::uint32_t>(c.channels.size());
    c.fusion.required = c.fusion.total;
    if (root.has("fusion")) {
        Reader r(root.raw("fusion"), "fusion");
        c.fusion.required = narrow_count(r.count("required", c.fusion.required), r.field("required"));
        c.fusion.total = narrow_count(r.count("total", c.fusion.total), r.field("total"));
        r.finish();
    }
    if (root.has("mc")) {
        Reader r(root.raw("mc"), "mc");
        c.mc.enabled = r.boolean("enabled", c.mc.enabled);
        c.mc.trials = r.count("trials", c.mc.trials);
        c.mc.seed = r.optional_count("seed");
        c.mc.threads = narrow_count(r.count("threads", c.mc.threads), r.field("threads"));
        r.finish();
    }
    if (root.has("radar")) {
        Reader r(root.raw("radar"), "radar");
        c.radar.carrier_hz = r.number("carrier_hz", c.radar.carrier_hz);
        c.radar.pulse_width_s = r.number("pulse_width_s", c.radar.pulse_width_s);
        c.radar.bandwidth_hz = r.number("bandwidth_hz", c.radar.bandwidth_hz);
        c.radar.sample_rate_hz = r.optional_number("sample_rate_hz");
        c.radar.wavelength_m = r.optional_number("wavelength_m");
        c.radar.allow_mixed_spacing = r.boolean("allow_mixed_spacing", c.radar.allow_mixed_spacing);
        r.finish();
    }
    if (root.has("target")) {
        Reader r(root.raw("target"), "target");
        c.target.range_m = r.number("range_m", c.target.range_m);
        c.target.velocity_mps = r.number("velocity_mps", c.target.velocity_mps);
        c.target.amplitude = r.number("amplitude", c.target.amplitude);
        c.target.snr_db = r.optional_number("snr_db");
        r.finish();
    }
    c.random_systems = root.count("random_systems", c.random_systems);
    c.export_maps = root.boolean("export_maps", c.export_maps);
    c.output_path = root.string("output_path", c.output_path.string());
    root.finish();
    c.validate();
    return c;
}

json parse_config_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("config: JSON syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
}

json read_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

ExperimentConfig parse_config(std::string_view text) { return config_from_json(parse_config_json(text)); }

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_config_json(path)); }

json to_json(const ExperimentConfig& c) {
    json j;
    j["mode"] = std::string(to_string(c.mode));
    j["channels"] = json::array();
    for (const auto& ch : c.channels) {
        json e = {{"M", ch.M}, {"N", ch.N}};
        e["prf_hz"] = ch.prf_hz ? json(*ch.prf_hz) : json(nullptr);
        j["channels"].push_back(e);
    }
    j["snr_db"] = {{"start", c.snr_db.start}, {"stop", c.snr_db.stop}, {"step", c.snr_db.step}};
    j["lambda1"] = c.lambda1;
    j["lambda2"] = c.lambda2;
    j["snr_mapping"] = {{"kind", c.mapping.kind == detection::SnrMappingKind::unit_noise ? "unit_noise" : "axis_scale"},
                        {"scale", c.mapping.scale}};
    j["oracle"] = c.oracle;
    j["variants"] = c.variants;
    j["fusion"] = {{"required", c.fusion.required}, {"total", c.fusion.total}};
    j["mc"] = {{"enabled", c.mc.enabled},
               {"trials", c.mc.trials},
               {"seed", c.mc.seed ? json(*c.mc.seed) : json(nullptr)},
               {"threads", c.mc.threads}};
    j["radar"] = {{"carrier_hz", c.radar.carrier_hz},
                  {"pulse_width_s", c.radar.pulse_width_s},
                  {"bandwidth_hz", c.radar.bandwidth_hz},
                  {"sample_rate_hz", c.radar.sample_rate_hz ? json(*c.radar.sample_rate_hz) : json(nullptr)},
                  {"wavelength_m", c.radar.wavelength_m ? json(*c.radar.wavelength_m) : json(nullptr)},
                  {"allow_mixed_spacing", c.radar.allow_mixed_spacing}};
    j["target"] = {{"range_m", c.target.range_m},
                   {"velocity_mps", c.target.velocity_mps},
                   {"amplitude", c.target.amplitude},
                   {"snr_db", c.target.snr_db ? json(*c.target.snr_db) : json(nullptr)}};
    j["random_systems"] = c.random_systems;
    j["export_maps"] = c.export_maps;
    j["output_path"] = c.output_path.string();
    return j;
}

}  // namespace doppler::cli
