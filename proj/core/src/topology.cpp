#include "flashadc/topology.hpp"

#include "flashadc/errors.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace flashadc {

double AdcTopology::chain_gain() const noexcept {
    return std::accumulate(stage_gains.begin(), stage_gains.end(), 1.0, std::multiplies<>());
}

AdcTopology build_topology(const TopologyConfig& config) {
    if (config.resolution_bits < 1 || config.resolution_bits > 6)
        throw InvalidTopology("resolution_bits must be in 1..6 (64-bit thermometer word)");
    if (config.interp_factors.empty()) throw InvalidTopology("interp_factors is empty");
    long long product = 1;
    for (int f : config.interp_factors) {
        if (f < 1) throw InvalidTopology("interpolation factors must be >= 1");
        product *= f;
    }
    if (product != (1LL << config.resolution_bits))
        throw InvalidTopology("product of interp_factors is " + std::to_string(product) + ", expected 2^" +
                              std::to_string(config.resolution_bits));
    if (!(config.sampling_cap_per_amp > 0.0)) throw InvalidTopology("sampling_cap_per_amp must be > 0");
    if (config.amp_input_cap < 0.0) throw InvalidTopology("amp_input_cap must be >= 0");
    if (config.wiring_parasitic < 0.0) throw InvalidTopology("wiring_parasitic must be >= 0");
    if (!(config.v_refp > config.v_refn)) throw InvalidTopology("v_refp must exceed v_refn");
    if (!(config.amp_clip > 0.0)) throw InvalidTopology("amp_clip must be > 0");

    AdcTopology t;
    t.resolution_bits = config.resolution_bits;
    t.interp_factors = config.interp_factors;
    t.sampling_cap_per_amp = config.sampling_cap_per_amp;
    t.wiring_parasitic = config.wiring_parasitic;
    t.v_refn = config.v_refn;
    t.v_refp = config.v_refp;
    t.amp_clip = config.amp_clip;

    // A trailing factor of 1 names the direct connection of the last gain
    // stage to the comparator row; otherwise that connection is implied.
    std::size_t n_stages = config.interp_factors.size();
    if (n_stages > 1 && config.interp_factors.back() == 1) {
        --n_stages;
        t.comparator_factor = 1;
    }

    t.front_end_amps = config.interp_factors.front() + 1;
    t.stage_amp_counts.push_back(t.front_end_amps);
    for (std::size_t k = 1; k < n_stages; ++k)
        t.stage_amp_counts.push_back(config.interp_factors[k] * (t.stage_amp_counts.back() - 1) + 1);

    if (config.stage_gains.empty()) {
        const double g =
            effective_stage_gain(config.intrinsic_gain, config.sampling_cap_per_amp, config.amp_input_cap);
        t.stage_gains.assign(n_stages, g);
    } else if (config.stage_gains.size() == 1) {
        t.stage_gains.assign(n_stages, config.stage_gains.front());
    } else if (config.stage_gains.size() == n_stages) {
        t.stage_gains = config.stage_gains;
    } else {
        throw InvalidTopology("stage_gains has " + std::to_string(config.stage_gains.size()) + " entries, expected " +
                              std::to_string(n_stages));
    }
    for (double g : t.stage_gains)
        if (!(g > 0.0) || !std::isfinite(g)) throw InvalidTopology("stage gains must be finite and > 0");

    return t;
}

double divided_reference(double v_refn, double v_refp, double c1, double c2) {
    return v_refn + c1 / (c1 + c2) * (v_refp - v_refn);
}

std::vector<ReferenceTap> reference_taps(const AdcTopology& topology) {
    const int factor = topology.interp_factors.front();
    const double c = topology.sampling_cap_per_amp;
    std::vector<ReferenceTap> taps;
    taps.reserve(static_cast<std::size_t>(topology.front_end_amps));
    for (int i = 0; i < topology.front_end_amps; ++i) {
        ReferenceTap tap;
        tap.index = i;
        tap.c1 = c * i / factor;
        tap.c2 = c * (factor - i) / factor;
        tap.v_ref = divided_reference(topology.v_refn, topology.v_refp, tap.c1, tap.c2);
        taps.push_back(tap);
    }
    return taps;
}

double input_capacitance(const AdcTopology& topology) {
    return topology.front_end_amps * topology.sampling_cap_per_amp + topology.wiring_parasitic;
}

double effective_stage_gain(double intrinsic_gain, double c_sample, double c_amp_in) {
    return intrinsic_gain * c_sample / (c_sample + c_amp_in);
}

std::vector<double> threshold_levels(const AdcTopology& topology) {
    const int n = topology.levels();
    std::vector<double> levels(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        levels[static_cast<std::size_t>(k)] =
            topology.v_refn + topology.full_scale() * static_cast<double>(k) / static_cast<double>(n);
    return levels;
}

}  // namespace flashadc
