#include "doppler/radar/radar_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "json.hpp"

#include "doppler/error.hpp"
#include "doppler/numerics/matched_filter.hpp"

namespace doppler::radar {

using ccrt::PrfChannel;

RadarSetup RadarSetup::make(double carrier_hz, double pulse_width_s, double bandwidth_hz,
                            std::vector<PrfChannel> channels) {
    RadarSetup s;
    s.carrier_hz = carrier_hz;
    s.wavelength_m = kSpeedOfLight / carrier_hz;
    s.pulse_width_s = pulse_width_s;
    s.bandwidth_hz = bandwidth_hz;
    s.sample_rate_hz = 4.0 * bandwidth_hz;
    s.channels = std::move(channels);
    return s;
}

std::size_t RadarSetup::pulse_samples() const {
    return static_cast<std::size_t>(std::llround(pulse_width_s * sample_rate_hz));
}

std::size_t RadarSetup::pri_samples(const PrfChannel& channel) const {
    return static_cast<std::size_t>(std::floor(sample_rate_hz / channel.prf_hz));
}

void RadarSetup::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(carrier_hz)) throw ValidationError("carrier_hz", "must be positive");
    if (!positive(wavelength_m)) throw ValidationError("wavelength_m", "must be positive");
    const double expect = kSpeedOfLight / carrier_hz;
    if (std::abs(wavelength_m - expect) > 1e-6 * expect) {
        throw ValidationError("wavelength_m", "must equal c / carrier_hz = " + std::to_string(expect) +
                                                  " within 1e-6 relative");
    }
    if (!positive(pulse_width_s)) throw ValidationError("pulse_width_s", "must be positive");
    if (!(std::isfinite(bandwidth_hz) && bandwidth_hz >= 0.0)) {
        throw ValidationError("bandwidth_hz", "must be non-negative");
    }
    if (!positive(sample_rate_hz)) throw ValidationError("sample_rate_hz", "must be positive");
    if (sample_rate_hz < 2.0 * bandwidth_hz) throw ValidationError("sample_rate_hz", "must be at least 2 B");
    if (pulse_width_s * sample_rate_hz < 8.0) {
        throw ValidationError("pulse_width_s", "tau * Fs must be at least 8 samples");
    }
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const std::string field = "channels[" + std::to_string(i) + "]";
        try {
            channels[i].validate();
        } catch (const InvalidArgument& e) {
            throw ValidationError(field, e.what());
        }
        if (1.0 / channels[i].prf_hz < pulse_width_s) throw ValidationError(field, "PRI shorter than the pulse");
    }
}

Signal make_lfm(const RadarSetup& setup) {
    setup.validate();
    const std::size_t n = setup.pulse_samples();
    const double rate = setup.bandwidth_hz / setup.pulse_width_s;
    Signal s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = -0.5 * setup.pulse_width_s + static_cast<double>(i) / setup.sample_rate_hz;
        s[i] = std::polar(1.0, std::numbers::pi * rate * t * t);
    }
    return s;
}

std::vector<std::size_t> subpulse_offsets(std::size_t length, std::size_t n) {
    if (n == 0 || n > length) {
        throw InvalidArgument("split_subpulses: need 1 <= N <= length (N=" + std::to_string(n) +
                              ", length=" + std::to_string(length) + ")");
    }
    std::vector<std::size_t> off(n);
    const std::size_t seg = length / n;
    for (std::size_t i = 0; i < n; ++i) off[i] = i * seg;
    return off;
}

std::vector<Signal> split_subpulses(std::span<const ComplexSample> replica, std::size_t n) {
    const auto off = subpulse_offsets(replica.size(), n);
    std::vector<Signal> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t end = i + 1 < n ? off[i + 1] : replica.size();
        out[i].assign(replica.begin() + static_cast<std::ptrdiff_t>(off[i]),
                      replica.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

std::vector<Signal> synth_echo(const RadarSetup& setup, const PrfChannel& channel, const TargetTruth& truth,
                               numerics::RngStream& rng, double noise_sigma) {
    setup.validate();
    channel.validate();
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw InvalidArgument("synth_echo: noise sigma must be finite and non-negative");
    }
    if (!(truth.range_m > 0.0)) throw OutOfWindow("synth_echo: target range must be positive");
    const Signal replica = make_lfm(setup);
    const std::size_t K = replica.size();
    const std::size_t P = setup.pri_samples(channel);
    const auto delay = static_cast<std::size_t>(std::llround(2.0 * truth.range_m / kSpeedOfLight * setup.sample_rate_hz));
    if (delay + K > P) {
        throw OutOfWindow("synth_echo: echo at delay " + std::to_string(delay) + " samples does not fit the " +
                          std::to_string(P) + "-sample PRI window");
    }
    const double fd = ccrt::velocity_to_doppler(truth.radial_velocity_mps, setup.wavelength_m);
    const double h = noise_sigma * std::sqrt(0.5);

    std::vector<Signal> rx(channel.num_pulses, Signal(P));
    for (std::uint32_t m = 0; m < channel.num_pulses; ++m) {
        auto& x = rx[m];
        if (h > 0.0) {
            for (auto& v : x) {
                const double re = h * rng.standard_normal();
                v = {re, h * rng.standard_normal()};
            }
        }
        if (truth.amplitude != 0.0) {
            const double slow = m / channel.prf_hz;
            for (std::size_t i = 0; i < K; ++i) {
                const double t = slow + static_cast<double>(delay + i) / setup.sample_rate_hz;
                x[delay + i] += truth.amplitude * replica[i] * std::polar(1.0, 2.0 * std::numbers::pi * fd * t);
            }
        }
    }
    return rx;
}

std::vector<Signal> compress_pp(std::span<const Signal> rx, std::span<const ComplexSample> replica) {
    std::vector<Signal> out;
    out.reserve(rx.size());
    for (const auto& pulse : rx) out.push_back(numerics::matched_filter(pulse, replica));
    return out;
}

std::vector<std::vector<Signal>> compress_sp(std::span<const Signal> rx, std::span<const Signal> subpulses) {
    if (subpulses.empty()) throw InvalidArgument("compress_sp: no subpulses");
    std::size_t K = 0;
    std::vector<std::size_t> off;
    for (const auto& s : subpulses) {
        if (s.empty()) throw InvalidArgument("compress_sp: empty subpulse");
        off.push_back(K);
        K += s.size();
    }
    std::vector<std::vector<Signal>> out(rx.size());
    for (std::size_t m = 0; m < rx.size(); ++m) {
        if (rx[m].size() < K) throw InvalidArgument("compress_sp: pulse shorter than the replica");
        const std::size_t bins = rx[m].size() - K + 1;
        out[m].resize(subpulses.size());
        for (std::size_t n = 0; n < subpulses.size(); ++n) {
            auto y = numerics::matched_filter(rx[m], subpulses[n]);
            if (off[n] == 0 && y.size() == bins) {
                out[m][n] = std::move(y);
            } else {
                out[m][n].assign(y.begin() + static_cast<std::ptrdiff_t>(off[n]),
                                 y.begin() + static_cast<std::ptrdiff_t>(off[n] + bins));
            }
        }
    }
    return out;
}

Datacube build_datacube(std::span<const Signal> pp, std::span<const std::vector<Signal>> sp) {
    if (pp.empty() || pp.size() != sp.size()) throw InvalidArgument("build_datacube: pulse counts differ");
    Datacube c;
    c.pulses = pp.size();
    c.range_bins = pp[0].size();
    c.subpulses = sp[0].size();
    if (c.range_bins == 0 || c.subpulses == 0) throw InvalidArgument("build_datacube: empty profiles");
    for (std::size_t m = 0; m < c.pulses; ++m) {
        if (pp[m].size() != c.range_bins || sp[m].size() != c.subpulses) {
            throw InvalidArgument("build_datacube: inconsistent dimensions at pulse " + std::to_string(m));
        }
        for (const auto& prof : sp[m]) {
            if (prof.size() != c.range_bins) {
                throw InvalidArgument("build_datacube: inconsistent range axis at pulse " + std::to_string(m));
            }
        }
    }
    c.pp.resize(c.range_bins * c.pulses);
    c.sp.resize(c.range_bins * c.pulses * c.subpulses);
    for (std::size_t r = 0; r < c.range_bins; ++r) {
        for (std::size_t m = 0; m < c.pulses; ++m) {
            c.pp_at(r, m) = pp[m][r];
            for (std::size_t n = 0; n < c.subpulses; ++n) c.sp_at(r, m, n) = sp[m][n][r];
        }
    }
    return c;
}

namespace {

// Direct K-point DFT from a precomputed K x K table; one table serves every
// range bin without allocating.
double magnitude(ComplexSample z) { return std::sqrt(z.real() * z.real() + z.imag() * z.imag()); }

class SmallDft {
public:
    explicit SmallDft(std::size_t k) : k_(k), re_(k * k), im_(k * k) {
        for (std::size_t f = 0; f < k; ++f) {
            for (std::size_t t = 0; t < k; ++t) {
                const double ph = -2.0 * std::numbers::pi * static_cast<double>((f * t) % k) / static_cast<double>(k);
                re_[f * k + t] = std::cos(ph);
                im_[f * k + t] = std::sin(ph);
            }
        }
    }

    /// in holds k contiguous samples; complex operator* is written out to
    /// skip its NaN recovery path.
    void apply(const ComplexSample* in, ComplexSample* out) const {
        for (std::size_t f = 0; f < k_; ++f) {
            const double* wr = re_.data() + f * k_;
            const double* wi = im_.data() + f * k_;
            double re = 0.0, im = 0.0;
            for (std::size_t t = 0; t < k_; ++t) {
                re += in[t].real() * wr[t] - in[t].imag() * wi[t];
                im += in[t].real() * wi[t] + in[t].imag() * wr[t];
            }
            out[f] = {re, im};
        }
    }

private:
    std::size_t k_;
    std::vector<double> re_, im_;
};

}  // namespace

DopplerMap doppler_maps(const Datacube& cube) {
    const std::size_t R = cube.range_bins, M = cube.pulses, N = cube.subpulses;
    if (R == 0 || M == 0 || N == 0 || cube.pp.size() != R * M || cube.sp.size() != R * M * N) {
        throw InvalidArgument("doppler_maps: datacube dimensions do not match its storage");
    }
    DopplerMap map;
    map.range_bins = R;
    map.pulses = M;
    map.subpulses = N;
    map.pp.resize(R * M);
    map.sp.resize(R * M * N);
    const SmallDft over_m(M), over_n(N);
    std::vector<ComplexSample> col(M), spec(M), rows(M * N);
    for (std::size_t r = 0; r < R; ++r) {
        over_m.apply(cube.pp.data() + r * M, spec.data());
        for (std::size_t k = 0; k < M; ++k) map.pp[r * M + k] = magnitude(spec[k]);

        const ComplexSample* block = cube.sp.data() + r * M * N;
        for (std::size_t m = 0; m < M; ++m) over_n.apply(block + m * N, rows.data() + m * N);
        for (std::size_t l = 0; l < N; ++l) {
            for (std::size_t m = 0; m < M; ++m) col[m] = rows[m * N + l];
            over_m.apply(col.data(), spec.data());
            for (std::size_t k = 0; k < M; ++k) map.sp[(r * M + k) * N + l] = magnitude(spec[k]);
        }
    }
    return map;
}

double peak_to_median(std::span<const double> magnitudes) {
    if (magnitudes.empty()) throw InvalidArgument("peak_to_median: empty map");
    std::vector<double> v(magnitudes.begin(), magnitudes.end());
    const double peak = *std::max_element(v.begin(), v.end());
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double median = *mid;
    if (v.size() % 2 == 0) median = 0.5 * (median + *std::max_element(v.begin(), mid));
    if (median > 0.0) return peak / median;
    return peak > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

namespace {

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double median_of(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace

std::optional<ChannelDetection> detect_channel(const DopplerMap& map, const RadarSetup& setup,
                                               const PrfChannel& channel, const DetectionPolicy& policy) {
    if (map.pulses != channel.num_pulses || map.subpulses != channel.num_subpulses) {
        throw InvalidArgument("detect_channel: map shape does not match the channel");
    }
    ChannelDetection d;
    d.pp_peak_to_median = peak_to_median(map.pp);
    d.sp_peak_to_median = peak_to_median(map.sp);
    if (d.pp_peak_to_median < policy.threshold_factor || d.sp_peak_to_median < policy.threshold_factor) {
        return std::nullopt;
    }
    const std::size_t ip = argmax(map.pp);
    const std::size_t is = argmax(map.sp);
    const std::size_t M = map.pulses, N = map.subpulses;
    d.peak_range_bin = ip / M;
    d.apparent_bin = static_cast<std::uint32_t>(ip % M);
    d.sp_peak_range_bin = is / (M * N);
    d.coarse_bin = static_cast<std::uint32_t>(is % N);

    // LFM range-Doppler coupling spreads the SP response along a ridge from
    // the PP peak (l' = 0) to the true delay (l' = f_d tau), up to
    // (N/2) Fs / B bins for |f_d| inside the subpulse window.
    std::size_t tol = policy.range_tolerance_bins;
    if (tol == 0) {
        tol = setup.bandwidth_hz > 0.0 ? static_cast<std::size_t>(std::ceil((0.5 * static_cast<double>(N) + 1.0) *
                                                                            setup.sample_rate_hz / setup.bandwidth_hz)) + 1
                                       : setup.pulse_samples();
    }
    const std::size_t gap = d.peak_range_bin > d.sp_peak_range_bin ? d.peak_range_bin - d.sp_peak_range_bin
                                                                   : d.sp_peak_range_bin - d.peak_range_bin;
    if (gap > tol) return std::nullopt;

    // bins above N/2 are negative frequencies; spacing Phi / N = 1 / tau
    const long signed_bin = 2 * d.coarse_bin > N ? static_cast<long>(d.coarse_bin) - static_cast<long>(N)
                                                 : static_cast<long>(d.coarse_bin);
    d.coarse_hz = static_cast<double>(signed_bin) / setup.pulse_width_s;
    return d;
}

DetectionReport detect_and_unfold(std::span<const DopplerMap> maps, const RadarSetup& setup,
                                  const DetectionPolicy& policy) {
    setup.validate();
    if (maps.empty() || maps.size() != setup.channels.size()) {
        throw InvalidArgument("detect_and_unfold: need one map per channel");
    }
    DetectionReport rep;
    std::vector<std::uint32_t> residues;
    std::vector<double> coarse;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        rep.channels.push_back(detect_channel(maps[i], setup, setup.channels[i], policy));
        if (rep.channels.back()) {
            residues.push_back(rep.channels.back()->apparent_bin);
            coarse.push_back(rep.channels.back()->coarse_hz);
        }
    }
    if (residues.size() != maps.size()) return rep;

    const ccrt::UnfoldGeometry geom{setup.pulse_width_s, setup.wavelength_m};
    const double coarse_hz = median_of(coarse);
    bool common = true;
    try {
        ccrt::require_common_spacing(setup.channels);
    } catch (const InvalidArgument&) {
        common = false;
    }
    try {
        rep.fused = common ? ccrt::unfold(residues, setup.channels, coarse_hz, geom)
                           : ccrt::unfold_coincidence(residues, setup.channels, coarse_hz, geom, 1,
                                                       ccrt::BinRule::nearest);
    } catch (const WindowExceeded&) {
        return rep;
    }
    rep.detected = true;
    rep.velocity_mps = rep.fused.velocity_mps;
    return rep;
}

SimulationResult simulate(const RadarSetup& setup, const TargetTruth& truth, std::uint64_t seed, double noise_sigma,
                          const DetectionPolicy& policy) {
    setup.validate();
    if (setup.channels.empty()) throw InvalidArgument("simulate: no channels");
    const Signal replica = make_lfm(setup);
    const std::size_t L = setup.channels.size();
    SimulationResult res;
    res.cubes.resize(L);
    res.maps.resize(L);

    auto run_channel = [&](std::size_t i) {
        const auto& ch = setup.channels[i];
        numerics::RngStream rng(seed, i);
        const auto rx = synth_echo(setup, ch, truth, rng, noise_sigma);
        const auto subs = split_subpulses(replica, ch.num_subpulses);
        const auto pp = compress_pp(rx, replica);
        const auto sp = compress_sp(rx, subs);
        res.cubes[i] = build_datacube(pp, sp);
        res.maps[i] = doppler_maps(res.cubes[i]);
    };
    if (std::thread::hardware_concurrency() > 1 && L > 1) {
        std::vector<std::exception_ptr> errors(L);
        {
            std::vector<std::jthread> pool;
            for (std::size_t i = 0; i < L; ++i) {
                pool.emplace_back([&, i] {
                    try {
                        run_channel(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    } else {
        for (std::size_t i = 0; i < L; ++i) run_channel(i);
    }
    res.report = detect_and_unfold(res.maps, setup, policy);
    return res;
}

double noise_sigma_for_snr(const RadarSetup& setup, double amplitude, double snr_db) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    return std::abs(amplitude) * std::sqrt(static_cast<double>(setup.pulse_samples()) / snr);
}

namespace {

void write_f32(const std::filesystem::path& path, std::span<const float> values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    static_assert(sizeof(float) == 4);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
    } else {
        for (float f : values) {
            auto u = std::bit_cast<std::uint32_t>(f);
            const char b[4] = {static_cast<char>(u), static_cast<char>(u >> 8), static_cast<char>(u >> 16),
                               static_cast<char>(u >> 24)};
            out.write(b, 4);
        }
    }
    if (!out) throw Error("write failed: " + path.string());
}

nlohmann::json axes_json(const RadarSetup& setup, const PrfChannel& ch) {
    return {{"range_bin_m", setup.range_bin_m()},
            {"pulse_doppler_bin_hz", ch.bin_spacing_hz()},
            {"subpulse_doppler_bin_hz", 1.0 / setup.pulse_width_s},
            {"prf_hz", ch.prf_hz},
            {"pulse_width_s", setup.pulse_width_s},
            {"sample_rate_hz", setup.sample_rate_hz}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const std::string& suffix) {
    return stem.string() + suffix;
}

}  // namespace

void export_map(const std::filesystem::path& stem, const DopplerMap& map, const RadarSetup& setup,
                const PrfChannel& channel) {
    std::vector<float> pp(map.pp.begin(), map.pp.end()), sp(map.sp.begin(), map.sp.end());
    write_f32(with_suffix(stem, ".pp.f32"), pp);
    write_f32(with_suffix(stem, ".sp.f32"), sp);
    nlohmann::json j;
    j["dtype"] = "float32";
    j["byte_order"] = "little";
    j["layout"] = "range-major";
    j["pp"] = {{"file", with_suffix(stem, ".pp.f32").filename().string()},
               {"shape", {map.range_bins, map.pulses}},
               {"axes", {"range_bin", "pulse_doppler_bin"}}};
    j["sp"] = {{"file", with_suffix(stem, ".sp.f32").filename().string()},
               {"shape", {map.range_bins, map.pulses, map.subpulses}},
               {"axes", {"range_bin", "pulse_doppler_bin", "subpulse_doppler_bin"}}};
    j["axes"] = axes_json(setup, channel);
    write_json(with_suffix(stem, ".json"), j);
}

void export_datacube(const std::filesystem::path& stem, const Datacube& cube, const RadarSetup& setup,
                     const PrfChannel& channel) {
    std::vector<float> v;
    v.reserve(cube.sp.size() * 2);
    for (const auto& z : cube.sp) {
        v.push_back(static_cast<float>(z.real()));
        v.push_back(static_cast<float>(z.imag()));
    }
    write_f32(with_suffix(stem, ".cube.f32"), v);
    nlohmann::json j;
    j["dtype"] = "float32";
    j["byte_order"] = "little";
    j["layout"] = "range-major";
    j["file"] = with_suffix(stem, ".cube.f32").filename().string();
    j["shape"] = {cube.range_bins, cube.pulses, cube.subpulses, 2};
    j["axes"] = {"range_bin", "pulse", "subpulse", "re_im"};
    j["geometry"] = axes_json(setup, channel);
    write_json(with_suffix(stem, ".cube.json"), j);
}

}  // namespace doppler::radar
