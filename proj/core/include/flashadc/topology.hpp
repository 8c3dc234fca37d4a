#pragma once

#include <cstddef>
#include <vector>

namespace flashadc {

/// Raw architecture parameters, as read from a config file.
///
/// Per-stage gains are either given directly (`stage_gains`) or derived from
/// an intrinsic amplifier gain and the sampling-cap / amp-input-cap divider.
/// The defaults describe the 8-2-2-2-1 converter: nine front-end amplifiers,
/// three factor-2 interpolating stages and a comparator row driven directly
/// by the fourth gain stage. Electrical values (references, capacitances,
/// clip level) are nominal placeholders, not measured silicon data.
struct TopologyConfig {
    int resolution_bits = 6;
    std::vector<int> interp_factors{8, 2, 2, 2, 1};
    std::vector<double> stage_gains;       // empty: derive from intrinsic gain
    double intrinsic_gain = 3.125;
    double sampling_cap_per_amp = 400e-15 / 9.0;
    double amp_input_cap = 400e-15 / 9.0 / 4.0;  // divider 0.8 -> 3.125 * 0.8 = 2.5
    double wiring_parasitic = 0.0;
    double v_refn = 0.25;
    double v_refp = 1.25;
    double amp_clip = 0.75;                // differential output limit, volts
};

/// Static, validated converter architecture. Immutable after build_topology.
struct AdcTopology {
    int resolution_bits = 0;
    std::vector<int> interp_factors;
    int front_end_amps = 0;
    /// Amplifier count per gain stage, front end first (9, 17, 33, 65 nominal).
    std::vector<int> stage_amp_counts;
    /// Effective gain (after capacitive-divider loss) per gain stage.
    std::vector<double> stage_gains;
    /// Interpolation factor between the last gain stage and the comparator row.
    int comparator_factor = 1;
    double sampling_cap_per_amp = 0.0;
    double wiring_parasitic = 0.0;
    double v_refn = 0.0;
    double v_refp = 0.0;
    double amp_clip = 0.0;

    [[nodiscard]] std::size_t gain_stages() const noexcept { return stage_amp_counts.size(); }
    [[nodiscard]] int levels() const noexcept { return 1 << resolution_bits; }
    /// Physical comparators instantiated: zero-crossings 1..2^N (the v_refn crossing is dropped).
    [[nodiscard]] int comparators() const noexcept { return levels(); }
    [[nodiscard]] double full_scale() const noexcept { return v_refp - v_refn; }
    [[nodiscard]] double lsb() const noexcept { return full_scale() / levels(); }
    /// Product of the effective stage gains.
    [[nodiscard]] double chain_gain() const noexcept;
};

/// One front-end reference produced by capacitive division between the
/// two references: v_ref = v_refn + c1 / (c1 + c2) * (v_refp - v_refn).
struct ReferenceTap {
    int index = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    double v_ref = 0.0;
};

/// Validates the config and derives the per-stage amplifier counts.
/// Throws InvalidTopology.
[[nodiscard]] AdcTopology build_topology(const TopologyConfig& config);

/// Front-end reference taps; tap i divides the sampling capacitor i : (F - i)
/// where F is the input interpolation factor.
[[nodiscard]] std::vector<ReferenceTap> reference_taps(const AdcTopology& topology);

/// Capacitive divider between references; c1 = 0 gives v_refn, c2 = 0 gives v_refp.
[[nodiscard]] double divided_reference(double v_refn, double v_refp, double c1, double c2);

/// Total converter input capacitance in the sampling phase.
[[nodiscard]] double input_capacitance(const AdcTopology& topology);

/// Amplifier gain reduced by the sampling-cap / input-cap divider.
[[nodiscard]] double effective_stage_gain(double intrinsic_gain, double c_sample, double c_amp_in);

/// Ideal zero-crossing levels v_refn + k * FS / 2^N for k = 0..2^N.
[[nodiscard]] std::vector<double> threshold_levels(const AdcTopology& topology);

}  // namespace flashadc
