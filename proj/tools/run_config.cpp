#include "run_config.hpp"

#include <flashadc/errors.hpp>
#include <flashadc/report.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace flashadc::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing required key '" + (where.empty() ? key : where + "." + key) + "'");
    return obj.at(key);
}

template <typename T>
T get(const json& obj, const std::string& where, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + where + "." + key + "' has the wrong type");
    }
}

template <typename T>
T get_required(const json& obj, const std::string& where, const std::string& key) {
    const auto& v = require(obj, where, key);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + where + "." + key + "' has the wrong type");
    }
}

// null or absent means "no pole".
double bandwidth(const json& obj, const std::string& key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::numeric_limits<double>::infinity();
    return get<double>(obj, "mismatch", key, 0.0);
}

TopologyConfig parse_topology(const json& t) {
    reject_unknown(t, "topology",
                   {"resolution_bits", "interp_factors", "stage_gains", "intrinsic_gain", "sampling_cap_per_amp",
                    "amp_input_cap", "wiring_parasitic", "v_refn", "v_refp", "amp_clip"});
    TopologyConfig c;
    c.resolution_bits = get(t, "topology", "resolution_bits", c.resolution_bits);
    c.interp_factors = get(t, "topology", "interp_factors", c.interp_factors);
    c.stage_gains = get(t, "topology", "stage_gains", c.stage_gains);
    c.intrinsic_gain = get(t, "topology", "intrinsic_gain", c.intrinsic_gain);
    c.sampling_cap_per_amp = get(t, "topology", "sampling_cap_per_amp", c.sampling_cap_per_amp);
    c.amp_input_cap = get(t, "topology", "amp_input_cap", c.amp_input_cap);
    c.wiring_parasitic = get(t, "topology", "wiring_parasitic", c.wiring_parasitic);
    c.v_refn = get(t, "topology", "v_refn", c.v_refn);
    c.v_refp = get(t, "topology", "v_refp", c.v_refp);
    c.amp_clip = get(t, "topology", "amp_clip", c.amp_clip);
    return c;
}

MismatchModel parse_mismatch(const json& m) {
    reject_unknown(m, "mismatch",
                   {"sigma_cap_ratio", "sigma_amp_offset", "ios_residual_factor", "sigma_comp_offset", "sigma_jitter",
                    "tracking_bandwidth"});
    MismatchModel model;
    model.sigma_cap_ratio = get(m, "mismatch", "sigma_cap_ratio", 0.0);
    model.sigma_amp_offset = get(m, "mismatch", "sigma_amp_offset", 0.0);
    model.ios_residual_factor = get(m, "mismatch", "ios_residual_factor", 0.0);
    model.sigma_comp_offset = get(m, "mismatch", "sigma_comp_offset", 0.0);
    model.sigma_jitter = get(m, "mismatch", "sigma_jitter", 0.0);
    model.tracking_bandwidth = bandwidth(m, "tracking_bandwidth");
    return model;
}

LatchModel parse_latch(const json& l) {
    reject_unknown(l, "latch", {"regen_tau", "decide_time", "relatch_stages", "v_swing", "clock_overhead"});
    LatchModel latch;
    latch.regen_tau = get(l, "latch", "regen_tau", latch.regen_tau);
    latch.decide_time = get(l, "latch", "decide_time", latch.decide_time);
    latch.relatch_stages = get(l, "latch", "relatch_stages", latch.relatch_stages);
    latch.v_swing = get(l, "latch", "v_swing", latch.v_swing);
    if (l.contains("clock_overhead") && !l.at("clock_overhead").is_null())
        latch.clock_overhead = get<double>(l, "latch", "clock_overhead", 0.0);
    return latch;
}

StimulusConfig parse_stimulus(const json& s, const AdcTopology& topo) {
    reject_unknown(s, "stimulus", {"waveform", "frequency", "amplitude", "offset", "phase", "level", "start", "slope",
                                   "fs", "n_samples", "n_fft", "coherent"});
    StimulusConfig c;
    c.waveform = get_required<std::string>(s, "stimulus", "waveform");
    if (c.waveform != "sine" && c.waveform != "dc" && c.waveform != "ramp")
        throw ConfigError("stimulus.waveform must be sine, dc or ramp");
    c.fs = get_required<double>(s, "stimulus", "fs");
    c.n_samples = get_required<std::size_t>(s, "stimulus", "n_samples");
    c.n_fft = get(s, "stimulus", "n_fft", c.n_fft);
    c.coherent = get(s, "stimulus", "coherent", c.coherent);
    c.frequency = get(s, "stimulus", "frequency", 0.0);
    c.amplitude = get(s, "stimulus", "amplitude", topo.full_scale() / 2.0);
    c.offset = get(s, "stimulus", "offset", 0.5 * (topo.v_refn + topo.v_refp));
    c.phase = get(s, "stimulus", "phase", 0.0);
    c.level = get(s, "stimulus", "level", c.offset);
    c.start = get(s, "stimulus", "start", topo.v_refn);
    c.slope = get(s, "stimulus", "slope", 0.0);
    if (!(c.fs > 0.0)) throw ConfigError("stimulus.fs must be > 0");
    if (c.n_samples < 1) throw ConfigError("stimulus.n_samples must be >= 1");
    if (c.n_fft < 4 || (c.n_fft & (c.n_fft - 1)) != 0) throw ConfigError("stimulus.n_fft must be a power of two >= 4");
    if (c.waveform == "sine" && !(c.frequency > 0.0)) throw ConfigError("stimulus.frequency must be > 0 for a sine");
    if (c.waveform == "ramp" && !s.contains("slope"))
        c.slope = topo.full_scale() * c.fs / static_cast<double>(c.n_samples);
    return c;
}

SweepAxis parse_axis(const json& a, const std::string& where, bool fsample) {
    std::set<std::string> keys{"start", "stop", "points", "spacing"};
    if (fsample) keys.insert("f_signal");
    reject_unknown(a, where, keys);
    SweepAxis axis;
    axis.start = get_required<double>(a, where, "start");
    axis.stop = get_required<double>(a, where, "stop");
    axis.points = get(a, where, "points", 10);
    const auto spacing = get<std::string>(a, where, "spacing", "linear");
    if (spacing != "linear" && spacing != "log") throw ConfigError(where + ".spacing must be linear or log");
    axis.log_spacing = spacing == "log";
    if (fsample) axis.f_signal = get_required<double>(a, where, "f_signal");
    if (!(axis.start > 0.0) || !(axis.stop > axis.start)) throw ConfigError(where + ": need 0 < start < stop");
    return axis;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& input, const std::string& op) {
    if (!input.is_object()) throw ConfigError("config must be a JSON object");
    json doc = input;
    std::string op_name = op;
    if (doc.contains("operating_points")) {
        const auto& ops = doc.at("operating_points");
        if (!ops.is_object()) throw ConfigError("'operating_points' must be an object");
        if (!op_name.empty()) {
            if (!ops.contains(op_name)) throw ConfigError("unknown operating point '" + op_name + "'");
            doc.merge_patch(ops.at(op_name));
        }
        doc.erase("operating_points");
    } else if (!op_name.empty()) {
        throw ConfigError("config has no operating_points; cannot select '" + op_name + "'");
    }

    reject_unknown(doc, "", {"schema", "description", "provenance", "seed", "topology", "mismatch", "latch",
                             "stimulus", "characterize", "sweep", "montecarlo", "output"});
    if (doc.contains("schema") && doc.at("schema") != kConfigSchema)
        throw ConfigError("unsupported config schema (expected " + std::string(kConfigSchema) + ")");

    RunConfig cfg;
    cfg.operating_point = op_name;
    cfg.seed = get_required<std::uint64_t>(doc, "", "seed");
    cfg.topology = build_topology(parse_topology(require(doc, "", "topology")));
    cfg.mismatch = parse_mismatch(require(doc, "", "mismatch"));
    cfg.latch = parse_latch(require(doc, "", "latch"));
    cfg.stimulus = parse_stimulus(require(doc, "", "stimulus"), cfg.topology);
    try {
        cfg.mismatch.validate();
        cfg.latch.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    if (doc.contains("characterize")) {
        const auto& c = doc.at("characterize");
        reject_unknown(c, "characterize", {"n_harmonics"});
        cfg.n_harmonics = get(c, "characterize", "n_harmonics", cfg.n_harmonics);
        if (cfg.n_harmonics < 2) throw ConfigError("characterize.n_harmonics must be >= 2");
    }
    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        reject_unknown(s, "sweep", {"fsignal", "fsample"});
        if (s.contains("fsignal")) cfg.fsignal = parse_axis(s.at("fsignal"), "sweep.fsignal", false);
        if (s.contains("fsample")) cfg.fsample = parse_axis(s.at("fsample"), "sweep.fsample", true);
    }
    if (doc.contains("montecarlo")) {
        const auto& m = doc.at("montecarlo");
        reject_unknown(m, "montecarlo", {"n_trials", "dnl_limit", "inl_limit", "histogram", "averaging_trials"});
        auto& mc = cfg.montecarlo;
        mc.n_trials = get(m, "montecarlo", "n_trials", mc.n_trials);
        mc.dnl_limit = get(m, "montecarlo", "dnl_limit", mc.dnl_limit);
        mc.inl_limit = get(m, "montecarlo", "inl_limit", mc.inl_limit);
        mc.histogram = get(m, "montecarlo", "histogram", mc.histogram);
        mc.averaging_trials = get(m, "montecarlo", "averaging_trials", mc.averaging_trials);
        if (mc.n_trials < 1) throw ConfigError("montecarlo.n_trials must be >= 1");
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        reject_unknown(o, "output", {"dir", "format"});
        cfg.output_dir = get<std::string>(o, "output", "dir", "");
        cfg.output_format = get<std::string>(o, "output", "format", cfg.output_format);
    }

    cfg.source = std::move(doc);
    cfg.hash = config_hash(cfg.source);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& op) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, op);
}

}  // namespace flashadc::cli
