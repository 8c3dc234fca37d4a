#pragma once

#include "flashadc/random.hpp"
#include "flashadc/stimulus.hpp"
#include "flashadc/topology.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace flashadc {

/// Statistical description of the non-idealities of a converter population.
/// None of these values are silicon data; defaults are ideal.
struct MismatchModel {
    double sigma_cap_ratio = 0.0;       // relative, per front-end C1
    double sigma_amp_offset = 0.0;      // volts, before offset sampling
    double ios_residual_factor = 0.0;   // fraction of amp offset left after IOS
    double sigma_comp_offset = 0.0;     // volts, latch input offset
    double sigma_jitter = 0.0;          // seconds rms, aperture jitter
    double tracking_bandwidth = std::numeric_limits<double>::infinity();  // hertz

    /// Throws InvalidModel.
    void validate() const;
};

/// All mismatch values of one physical converter.
struct DeviceInstance {
    std::vector<std::vector<double>> amp_offsets;  // [stage][amp], volts
    std::vector<double> comp_offsets;              // [comparator], volts
    std::vector<double> cap_ratio_errors;          // [front-end tap], relative error on C1
    std::uint64_t seed = 0;

    /// Instance with every draw zero.
    static DeviceInstance nominal(const AdcTopology& topology);
    /// Throws DimensionMismatch when the shapes disagree with the topology.
    void check(const AdcTopology& topology) const;
};

/// Differential voltages at the comparator row for one conversion.
struct LatchInputs {
    std::vector<double> values;
    std::uint64_t sample_index = 0;
    double true_input = 0.0;
};

/// Voltages stored on the front-end sampling capacitors at the end of the
/// sampling phase: v_in - v_ref_i plus the residual amplifier offset.
struct FrontEndState {
    std::vector<double> stored;
    double v_in = 0.0;

    [[nodiscard]] bool sampled() const noexcept { return !stored.empty(); }
};

/// Samples `signal` at t_nominal plus a Gaussian aperture-jitter draw
/// (truncated at +-5 sigma), through the first-order tracking pole.
double acquire(const Stimulus& signal, double t_nominal, const MismatchModel& model, SampleRng& rng);

/// Front-end references after applying each tap's C1 ratio error.
std::vector<double> perturbed_reference_taps(const AdcTopology& topology, const DeviceInstance& instance);

/// Children of an interpolating stage: copies of each parent plus (factor-1)
/// linear blends between neighbours. Factor 2 yields arithmetic midpoints.
std::vector<double> interpolate(std::span<const double> parents, int factor);

/// One converter instance's analog path, precomputed for repeated conversions.
/// Single-threaded per object; share the topology, not the chain.
class AnalogChain {
public:
    AnalogChain(AdcTopology topology, MismatchModel model, DeviceInstance instance);

    [[nodiscard]] const AdcTopology& topology() const noexcept { return topology_; }
    [[nodiscard]] const MismatchModel& model() const noexcept { return model_; }
    [[nodiscard]] const DeviceInstance& instance() const noexcept { return instance_; }
    [[nodiscard]] std::span<const double> references() const noexcept { return refs_; }

    /// Sampling phase.
    [[nodiscard]] FrontEndState front_end_sample(double v_in) const;

    /// Amplification phase: gain, residual offsets, clipping and
    /// interpolation through every stage. Throws PhaseOrderViolation if the
    /// state was never sampled.
    [[nodiscard]] LatchInputs propagate(const FrontEndState& state) const;

private:
    AdcTopology topology_;
    MismatchModel model_;
    DeviceInstance instance_;
    std::vector<double> refs_;
};

FrontEndState front_end_sample(double v_in, const AdcTopology& topology, const DeviceInstance& instance,
                               const MismatchModel& model);
LatchInputs propagate(const FrontEndState& state, const AdcTopology& topology, const DeviceInstance& instance,
                      const MismatchModel& model);

}  // namespace flashadc
