#include "flashadc/montecarlo.hpp"

#include "flashadc/errors.hpp"
#include "flashadc/parallel.hpp"
#include "flashadc/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

namespace flashadc {

DeviceInstance draw_instance(const MismatchModel& model, const AdcTopology& topology, std::uint64_t seed) {
    model.validate();
    SampleRng rng(seed);
    DeviceInstance d = DeviceInstance::nominal(topology);
    d.seed = seed;
    for (auto& stage : d.amp_offsets)
        for (double& o : stage) o = model.sigma_amp_offset * rng.normal();
    for (double& o : d.comp_offsets) o = model.sigma_comp_offset * rng.normal();
    for (double& e : d.cap_ratio_errors) e = model.sigma_cap_ratio * rng.normal();
    return d;
}

namespace {

// Parents of child `j` in a stage interpolating by `factor`, with weights.
std::vector<std::pair<int, double>> parents_of(int j, int factor) {
    const int p = j / factor;
    const int q = j % factor;
    if (q == 0) return {{p, 1.0}};
    const double w = static_cast<double>(q) / factor;
    return {{p, 1.0 - w}, {p + 1, w}};
}

std::vector<std::pair<int, double>> back_step(const std::vector<std::pair<int, double>>& child_weights, int factor) {
    std::map<int, double> acc;
    for (auto [j, w] : child_weights)
        for (auto [p, pw] : parents_of(j, factor)) acc[p] += w * pw;
    return {acc.begin(), acc.end()};
}

}  // namespace

ThresholdModel::ThresholdModel(const AdcTopology& topology) : topology_(topology) {
    const std::size_t stages = topology.gain_stages();
    const int comps = topology.comparators();
    weights_.resize(static_cast<std::size_t>(comps));
    for (int k = 0; k < comps; ++k) {
        auto& per_stage = weights_[static_cast<std::size_t>(k)];
        per_stage.resize(stages);
        // Zero-crossing index k+1 in the comparator-row grid.
        per_stage[stages - 1] = back_step({{k + 1, 1.0}}, topology.comparator_factor);
        for (std::size_t s = stages - 1; s > 0; --s)
            per_stage[s - 1] = back_step(per_stage[s], topology.interp_factors[s]);
    }
    referral_.resize(stages);
    double g = 1.0;
    for (std::size_t s = 0; s < stages; ++s) {
        referral_[s] = 1.0 / g;
        g *= topology.stage_gains[s];
    }
}

const std::vector<std::pair<int, double>>& ThresholdModel::weights(int comparator, std::size_t stage) const {
    return weights_.at(static_cast<std::size_t>(comparator)).at(stage);
}

std::vector<double> ThresholdModel::thresholds(const DeviceInstance& instance, const MismatchModel& model) const {
    instance.check(topology_);
    const auto refs = perturbed_reference_taps(topology_, instance);
    const double gain = topology_.chain_gain();
    const double r = model.ios_residual_factor;
    std::vector<double> t(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        double v = 0.0;
        for (auto [i, w] : weights_[k][0]) v += w * refs[static_cast<std::size_t>(i)];
        for (std::size_t s = 0; s < weights_[k].size(); ++s) {
            const auto& off = instance.amp_offsets[s];
            double acc = 0.0;
            for (auto [j, w] : weights_[k][s]) acc += w * off[static_cast<std::size_t>(j)];
            v -= r * referral_[s] * acc;
        }
        v -= instance.comp_offsets[k] / gain;
        t[k] = v;
    }
    return t;
}

std::vector<double> sweep_transitions(const Converter& converter, double step_lsb) {
    const auto& topo = converter.topology();
    const int levels = topo.levels();
    const double step = step_lsb * topo.lsb();
    std::vector<double> transitions(static_cast<std::size_t>(levels - 1), std::nan(""));
    SampleRng rng(0);
    const double lo = topo.v_refn - 2.0 * topo.lsb();
    const double hi = topo.v_refp + 2.0 * topo.lsb();
    const auto n_steps = static_cast<std::size_t>(std::ceil((hi - lo) / step));
    int reached = 0;
    for (std::size_t i = 0; i <= n_steps && reached < levels - 1; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        const int code = converter.convert_voltage(v, rng).binary;
        while (reached < code && reached < levels - 1) {
            // First input whose code is at least reached+1; report the step midpoint.
            transitions[static_cast<std::size_t>(reached)] = v - 0.5 * step;
            ++reached;
        }
    }
    return transitions;
}

namespace {

double stddev(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

struct TrialResult {
    TrialSummary summary;
    std::vector<double> errors;
};

TrialResult run_trial(const EnsembleConfig& cfg, const ThresholdModel& fast, const std::vector<double>& ideal,
                      std::size_t index) {
    TrialResult res;
    auto& s = res.summary;
    s.index = index;
    s.seed = derive_seed(cfg.master_seed, kTrialStream, index);
    auto instance = draw_instance(cfg.model, cfg.topology, s.seed);

    const auto t = fast.thresholds(instance, cfg.model);
    res.errors.resize(t.size());
    double ss = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        res.errors[k] = t[k] - ideal[k + 1];
        ss += res.errors[k] * res.errors[k];
    }
    s.threshold_rms_lsb = std::sqrt(ss / static_cast<double>(t.size())) / cfg.topology.lsb();

    LinearityReport lin;
    if (cfg.histogram) {
        const auto& h = *cfg.histogram;
        const Converter conv(AnalogChain(cfg.topology, cfg.model, std::move(instance)), h.latch, h.fs,
                             derive_seed(s.seed, kSampleStream));
        const double f = coherent_frequency(h.fs, std::bit_ceil(h.n_samples), h.f_target);
        const double mid = 0.5 * (cfg.topology.v_refn + cfg.topology.v_refp);
        const Stimulus sine(SineInput{h.overrange * cfg.topology.full_scale() / 2.0, mid, f, 0.0});
        std::vector<int> codes(h.n_samples);
        for (std::size_t i = 0; i < h.n_samples; ++i) codes[i] = conv.convert(sine, i).binary;
        lin = histogram_linearity(codes, cfg.topology.levels());
    } else {
        // The top crossing is clamped away by the encoder.
        lin = transition_linearity(std::span<const double>(t).first(t.size() - 1));
    }
    s.peak_dnl = lin.peak_dnl;
    s.peak_inl = lin.peak_inl;
    s.pass = s.peak_dnl <= cfg.dnl_limit && s.peak_inl <= cfg.inl_limit;
    return res;
}

}  // namespace

TrialEnsemble run_ensemble(const EnsembleConfig& cfg) {
    if (cfg.n_trials < 1) throw InvalidModel("n_trials must be >= 1");
    cfg.model.validate();
    const ThresholdModel fast(cfg.topology);
    const auto ideal = threshold_levels(cfg.topology);

    std::vector<TrialResult> results(cfg.n_trials);
    parallel_for(cfg.n_trials, cfg.workers, [&](std::size_t i) { results[i] = run_trial(cfg, fast, ideal, i); });

    TrialEnsemble e;
    e.n_trials = cfg.n_trials;
    e.master_seed = cfg.master_seed;
    e.dnl_limit = cfg.dnl_limit;
    e.inl_limit = cfg.inl_limit;
    e.full_histogram = cfg.histogram.has_value();
    std::vector<double> pooled;
    pooled.reserve(cfg.n_trials * ideal.size());
    std::size_t passed = 0;
    for (auto& r : results) {
        const auto& s = r.summary;
        passed += s.pass ? 1 : 0;
        e.mean_peak_dnl += s.peak_dnl;
        e.mean_peak_inl += s.peak_inl;
        e.max_peak_dnl = std::max(e.max_peak_dnl, s.peak_dnl);
        e.max_peak_inl = std::max(e.max_peak_inl, s.peak_inl);
        pooled.insert(pooled.end(), r.errors.begin(), r.errors.end());
        e.trials.push_back(s);
    }
    const auto n = static_cast<double>(cfg.n_trials);
    e.mean_peak_dnl /= n;
    e.mean_peak_inl /= n;
    e.yield = static_cast<double>(passed) / n;
    e.threshold_sigma = stddev(pooled);
    e.threshold_sigma_lsb = e.threshold_sigma / cfg.topology.lsb();
    return e;
}

AveragingReport averaging_experiment(const MismatchModel& model, const AdcTopology& topology, std::size_t n_trials,
                                     std::uint64_t master_seed, unsigned workers) {
    model.validate();
    AveragingReport report;
    report.n_trials = n_trials;
    const double effective_sigma = model.sigma_amp_offset * model.ios_residual_factor;
    if (!(effective_sigma > 0.0) || n_trials < 2) return report;

    const ThresholdModel fast(topology);
    const int comps = topology.comparators();
    const int levels = topology.levels();
    MismatchModel only_amps;
    only_amps.sigma_amp_offset = model.sigma_amp_offset;
    only_amps.ios_residual_factor = model.ios_residual_factor;

    for (std::size_t s = 1; s < topology.gain_stages(); ++s) {
        if (topology.interp_factors[s] != 2) continue;
        const int parent_span = topology.stage_amp_counts[s - 1] - 1;
        const int child_span = topology.stage_amp_counts[s] - 1;
        std::vector<int> parents;
        std::vector<int> midpoints;
        for (int z = 1; z <= comps; ++z) {
            const bool on_child = (z * child_span) % levels == 0;
            const bool on_parent = (z * parent_span) % levels == 0;
            if (on_parent)
                parents.push_back(z - 1);
            else if (on_child)
                midpoints.push_back(z - 1);
        }

        std::vector<std::vector<double>> parent_err(n_trials);
        std::vector<std::vector<double>> mid_err(n_trials);
        const auto ideal = threshold_levels(topology);
        parallel_for(n_trials, workers, [&](std::size_t trial) {
            const auto seed = derive_seed(master_seed, kTrialStream ^ (s << 32), trial);
            SampleRng rng(seed);
            DeviceInstance d = DeviceInstance::nominal(topology);
            d.seed = seed;
            for (double& o : d.amp_offsets[s - 1]) o = only_amps.sigma_amp_offset * rng.normal();
            const auto t = fast.thresholds(d, only_amps);
            for (int k : parents) parent_err[trial].push_back(t[static_cast<std::size_t>(k)] - ideal[static_cast<std::size_t>(k + 1)]);
            for (int k : midpoints) mid_err[trial].push_back(t[static_cast<std::size_t>(k)] - ideal[static_cast<std::size_t>(k + 1)]);
        });
        std::vector<double> pe;
        std::vector<double> me;
        for (std::size_t i = 0; i < n_trials; ++i) {
            pe.insert(pe.end(), parent_err[i].begin(), parent_err[i].end());
            me.insert(me.end(), mid_err[i].begin(), mid_err[i].end());
        }
        StageAveraging st;
        st.stage = s;
        st.parent_sigma = stddev(pe);
        st.interpolated_sigma = stddev(me);
        st.ratio = st.interpolated_sigma / st.parent_sigma;
        report.stages.push_back(st);
    }
    report.applicable = !report.stages.empty();
    if (report.applicable) report.ratio = report.stages.front().ratio;
    return report;
}

}  // namespace flashadc
