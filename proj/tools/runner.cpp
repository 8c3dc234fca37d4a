#include "runner.hpp"

#include <flashadc/characterize.hpp>
#include <flashadc/errors.hpp>
#include <flashadc/montecarlo.hpp>
#include <flashadc/parallel.hpp>
#include <flashadc/random.hpp>

#include <cmath>

namespace flashadc::cli {

DeviceInstance make_instance(const RunConfig& cfg) {
    return draw_instance(cfg.mismatch, cfg.topology, derive_seed(cfg.seed, kInstanceStream));
}

Converter make_converter(const RunConfig& cfg, double fs, std::uint64_t noise_seed) {
    return Converter(AnalogChain(cfg.topology, cfg.mismatch, make_instance(cfg)), cfg.latch, fs, noise_seed);
}

namespace {

Stimulus sine_at(const RunConfig& cfg, double fs, double f_target) {
    const auto& s = cfg.stimulus;
    const double f = s.coherent ? coherent_frequency(fs, s.n_fft, f_target) : f_target;
    return Stimulus(SineInput{s.amplitude, s.offset, f, s.phase});
}

nlohmann::json stimulus_json(const RunConfig& cfg, const Stimulus& stim) {
    nlohmann::json j = {{"waveform", stim.kind()}, {"n_fft", cfg.stimulus.n_fft}, {"coherent", cfg.stimulus.coherent}};
    if (const auto* s = std::get_if<SineInput>(&stim.waveform())) {
        j["frequency"] = s->frequency;
        j["amplitude"] = s->amplitude;
        j["offset"] = s->offset;
        j["phase"] = s->phase;
    } else if (const auto* d = std::get_if<DcInput>(&stim.waveform())) {
        j["level"] = d->level;
    } else if (const auto* r = std::get_if<RampInput>(&stim.waveform())) {
        j["start"] = r->start;
        j["slope"] = r->slope;
    }
    return j;
}

}  // namespace

Stimulus make_stimulus(const RunConfig& cfg, double fs) {
    const auto& s = cfg.stimulus;
    if (s.waveform == "dc") return Stimulus(DcInput{s.level});
    if (s.waveform == "ramp") return Stimulus(RampInput{s.start, s.slope});
    return sine_at(cfg, fs, s.frequency);
}

nlohmann::json provenance(const RunConfig& cfg) {
    nlohmann::json j = {
        {"tool_version", kToolVersion},
        {"config_hash", cfg.hash},
        {"seed", cfg.seed},
        {"config", cfg.source},
    };
    if (!cfg.operating_point.empty()) j["operating_point"] = cfg.operating_point;
    return j;
}

CodeStream simulate(const RunConfig& cfg, std::size_t n_samples, unsigned workers) {
    if (n_samples == 0) n_samples = cfg.stimulus.n_samples;
    const double fs = cfg.stimulus.fs;
    const auto conv = make_converter(cfg, fs, derive_seed(cfg.seed, kSampleStream));
    const auto stim = make_stimulus(cfg, fs);

    CodeStream stream;
    stream.meta = provenance(cfg);
    stream.meta["schema"] = kCodeStreamSchema;
    stream.meta["fs"] = fs;
    stream.meta["decimation"] = 1;
    stream.meta["resolution_bits"] = cfg.topology.resolution_bits;
    stream.meta["n_samples"] = n_samples;
    stream.meta["stimulus"] = stimulus_json(cfg, stim);

    stream.samples.resize(n_samples);
    // Each sample owns its noise stream, so chunked fan-out is order-independent.
    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (n_samples + chunk - 1) / chunk;
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t end = std::min(n_samples, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) stream.samples[i] = conv.convert(stim, i);
    });
    return stream;
}

std::vector<double> axis_points(const SweepAxis& axis, int points) {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double u = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        out[static_cast<std::size_t>(i)] = axis.log_spacing ? axis.start * std::pow(axis.stop / axis.start, u)
                                                            : axis.start + u * (axis.stop - axis.start);
    }
    return out;
}

namespace {

SweepRow measure_point(const RunConfig& cfg, double fs, double f_target, std::size_t index) {
    SweepRow row;
    row.fs = fs;
    try {
        const auto conv = make_converter(cfg, fs, derive_seed(cfg.seed, kPointStream, index));
        const auto stim = sine_at(cfg, fs, f_target);
        row.f_in = std::get<SineInput>(stim.waveform()).frequency;
        const std::size_t n = cfg.stimulus.n_fft;
        std::vector<int> codes(n);
        for (std::size_t i = 0; i < n; ++i) codes[i] = conv.convert(stim, i).binary;
        row.metrics = spectral_metrics(std::span<const int>(codes), fs, row.f_in, n, cfg.n_harmonics);
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

void check_points(int points) {
    if (points < 3) throw ConfigError("a sweep needs at least 3 points (got " + std::to_string(points) + ")");
}

}  // namespace

SweepResult run_fsignal_sweep(const RunConfig& cfg, int points, unsigned workers) {
    check_points(points);
    if (cfg.fsignal.points == 0) throw ConfigError("missing required key 'sweep.fsignal'");
    const auto freqs = axis_points(cfg.fsignal, points);
    SweepResult res;
    res.axis = "fsignal";
    res.rows.resize(freqs.size());
    parallel_for(freqs.size(), workers,
                 [&](std::size_t i) { res.rows[i] = measure_point(cfg, cfg.stimulus.fs, freqs[i], i); });

    std::vector<SweepPoint> curve;
    for (const auto& r : res.rows)
        if (r.error.empty()) curve.push_back({r.f_in, r.metrics.sndr_db});
    res.summary = {{"axis", "fsignal"}, {"fs", cfg.stimulus.fs}, {"points", points}};
    if (!curve.empty()) {
        res.low_freq_sndr = curve.front().sndr_db;
        res.summary["low_freq_sndr_db"] = res.low_freq_sndr;
        res.summary["enob_dc"] = enob_from_sndr(res.low_freq_sndr);
    }
    try {
        res.erbw = erbw(curve);
        res.summary["erbw_hz"] = *res.erbw;
    } catch (const Error& e) {
        res.erbw_error = e.what();
        res.summary["erbw_hz"] = nullptr;
        res.summary["erbw_error"] = res.erbw_error;
    }
    return res;
}

SweepResult run_fsample_sweep(const RunConfig& cfg, int points, unsigned workers) {
    check_points(points);
    if (cfg.fsample.points == 0) throw ConfigError("missing required key 'sweep.fsample'");
    const auto rates = axis_points(cfg.fsample, points);
    SweepResult res;
    res.axis = "fsample";
    res.rows.resize(rates.size());
    parallel_for(rates.size(), workers,
                 [&](std::size_t i) { res.rows[i] = measure_point(cfg, rates[i], cfg.fsample.f_signal, i); });

    res.summary = {{"axis", "fsample"}, {"f_signal_target", cfg.fsample.f_signal}, {"points", points}};
    // Highest rate reached before ENOB first drops below 5 bits.
    for (const auto& r : res.rows) {
        if (!r.error.empty() || r.metrics.enob < 5.0) break;
        res.max_fs_enob5 = r.fs;
    }
    res.summary["max_fs_enob_ge_5"] = res.max_fs_enob5 ? nlohmann::json(*res.max_fs_enob5) : nlohmann::json(nullptr);
    return res;
}

}  // namespace flashadc::cli
