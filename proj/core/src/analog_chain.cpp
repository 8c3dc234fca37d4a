#include "flashadc/analog_chain.hpp"

#include "flashadc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flashadc {

void MismatchModel::validate() const {
    if (sigma_cap_ratio < 0.0 || sigma_amp_offset < 0.0 || sigma_comp_offset < 0.0 || sigma_jitter < 0.0)
        throw InvalidModel("sigmas must be >= 0");
    if (ios_residual_factor < 0.0 || ios_residual_factor > 1.0)
        throw InvalidModel("ios_residual_factor must be in [0, 1]");
    if (!(tracking_bandwidth > 0.0)) throw InvalidModel("tracking_bandwidth must be > 0");
}

DeviceInstance DeviceInstance::nominal(const AdcTopology& topology) {
    DeviceInstance d;
    for (int n : topology.stage_amp_counts) d.amp_offsets.emplace_back(static_cast<std::size_t>(n), 0.0);
    d.comp_offsets.assign(static_cast<std::size_t>(topology.comparators()), 0.0);
    d.cap_ratio_errors.assign(static_cast<std::size_t>(topology.front_end_amps), 0.0);
    return d;
}

void DeviceInstance::check(const AdcTopology& topology) const {
    if (amp_offsets.size() != topology.gain_stages())
        throw DimensionMismatch("instance has " + std::to_string(amp_offsets.size()) + " stages, topology has " +
                                std::to_string(topology.gain_stages()));
    for (std::size_t s = 0; s < amp_offsets.size(); ++s)
        if (amp_offsets[s].size() != static_cast<std::size_t>(topology.stage_amp_counts[s]))
            throw DimensionMismatch("stage " + std::to_string(s) + " amplifier count");
    if (comp_offsets.size() != static_cast<std::size_t>(topology.comparators()))
        throw DimensionMismatch("comparator count");
    if (cap_ratio_errors.size() != static_cast<std::size_t>(topology.front_end_amps))
        throw DimensionMismatch("front-end tap count");
}

double acquire(const Stimulus& signal, double t_nominal, const MismatchModel& model, SampleRng& rng) {
    double dt = 0.0;
    if (model.sigma_jitter > 0.0) {
        double z = rng.normal();
        while (std::abs(z) > 5.0) z = rng.normal();
        dt = z * model.sigma_jitter;
    }
    return signal.tracked(t_nominal + dt, model.tracking_bandwidth);
}

std::vector<double> perturbed_reference_taps(const AdcTopology& topology, const DeviceInstance& instance) {
    const auto taps = reference_taps(topology);
    std::vector<double> refs(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double c1 = taps[i].c1 * (1.0 + instance.cap_ratio_errors[i]);
        refs[i] = divided_reference(topology.v_refn, topology.v_refp, c1, taps[i].c2);
    }
    return refs;
}

std::vector<double> interpolate(std::span<const double> parents, int factor) {
    if (parents.empty()) return {};
    std::vector<double> out;
    out.reserve((parents.size() - 1) * static_cast<std::size_t>(factor) + 1);
    for (std::size_t p = 0; p + 1 < parents.size(); ++p) {
        out.push_back(parents[p]);
        for (int q = 1; q < factor; ++q) {
            const double w = static_cast<double>(q) / factor;
            if (factor == 2)
                out.push_back(0.5 * (parents[p] + parents[p + 1]));
            else
                out.push_back((1.0 - w) * parents[p] + w * parents[p + 1]);
        }
    }
    out.push_back(parents.back());
    return out;
}

AnalogChain::AnalogChain(AdcTopology topology, MismatchModel model, DeviceInstance instance)
    : topology_(std::move(topology)), model_(model), instance_(std::move(instance)) {
    model_.validate();
    instance_.check(topology_);
    refs_ = perturbed_reference_taps(topology_, instance_);
}

FrontEndState AnalogChain::front_end_sample(double v_in) const {
    FrontEndState state;
    state.v_in = v_in;
    state.stored.resize(refs_.size());
    const auto& offsets = instance_.amp_offsets.front();
    for (std::size_t i = 0; i < refs_.size(); ++i)
        state.stored[i] = v_in - refs_[i] + model_.ios_residual_factor * offsets[i];
    return state;
}

LatchInputs AnalogChain::propagate(const FrontEndState& state) const {
    if (!state.sampled()) throw PhaseOrderViolation("propagate called before front_end_sample");
    if (state.stored.size() != refs_.size()) throw DimensionMismatch("front-end state size");

    const double clip = topology_.amp_clip;
    const double r = model_.ios_residual_factor;
    auto amplify = [&](std::vector<double>& v, std::size_t stage, bool add_offset) {
        const double g = topology_.stage_gains[stage];
        const auto& off = instance_.amp_offsets[stage];
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double x = add_offset ? v[j] + r * off[j] : v[j];
            v[j] = std::clamp(g * x, -clip, clip);
        }
    };

    // Stage 0 offsets are already on the stored front-end voltages.
    std::vector<double> v = state.stored;
    amplify(v, 0, false);
    for (std::size_t s = 1; s < topology_.gain_stages(); ++s) {
        v = interpolate(v, topology_.interp_factors[s]);
        amplify(v, s, true);
    }
    v = interpolate(v, topology_.comparator_factor);

    LatchInputs out;
    out.true_input = state.v_in;
    // Zero-crossing 0 sits at v_refn and has no comparator.
    out.values.assign(v.begin() + 1, v.end());
    return out;
}

FrontEndState front_end_sample(double v_in, const AdcTopology& topology, const DeviceInstance& instance,
                               const MismatchModel& model) {
    return AnalogChain(topology, model, instance).front_end_sample(v_in);
}

LatchInputs propagate(const FrontEndState& state, const AdcTopology& topology, const DeviceInstance& instance,
                      const MismatchModel& model) {
    return AnalogChain(topology, model, instance).propagate(state);
}

}  // namespace flashadc
