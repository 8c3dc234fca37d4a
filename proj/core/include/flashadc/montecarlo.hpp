#pragma once

#include "flashadc/analog_chain.hpp"
#include "flashadc/characterize.hpp"
#include "flashadc/comparator_backend.hpp"
#include "flashadc/topology.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace flashadc {

/// Independent Gaussian draws for every offset and ratio error, in a fixed
/// order (amplifiers stage by stage, comparators, C1 ratios).
DeviceInstance draw_instance(const MismatchModel& model, const AdcTopology& topology, std::uint64_t seed);

/// Input-referred comparator thresholds computed analytically: every offset
/// is pushed through the linear gain/interpolation chain to a zero-crossing
/// shift. Clipping never acts near a crossing, so no waveform is simulated.
class ThresholdModel {
public:
    explicit ThresholdModel(const AdcTopology& topology);

    /// Zero-crossing voltage of each comparator (crossings 1..2^N).
    [[nodiscard]] std::vector<double> thresholds(const DeviceInstance& instance, const MismatchModel& model) const;

    /// Weight of stage `stage` unit outputs in comparator k.
    [[nodiscard]] const std::vector<std::pair<int, double>>& weights(int comparator, std::size_t stage) const;

private:
    AdcTopology topology_;
    std::vector<std::vector<std::vector<std::pair<int, double>>>> weights_;  // [comparator][stage]
    std::vector<double> referral_;  // input-referred scale of a stage-s input offset
};

/// Transition levels T_1..T_{2^N-1} measured by sweeping a DC input through
/// the full conversion path in steps of `step_lsb`.
std::vector<double> sweep_transitions(const Converter& converter, double step_lsb);

struct TrialSummary {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double peak_dnl = 0.0;
    double peak_inl = 0.0;
    double threshold_rms_lsb = 0.0;
    bool pass = false;
};

/// Full sine-histogram evaluation per trial instead of the analytic path.
struct HistogramOptions {
    LatchModel latch;
    double fs = 600e6;
    double f_target = 50e6;
    std::size_t n_samples = 1u << 18;
    double overrange = 1.02;
};

struct EnsembleConfig {
    AdcTopology topology;
    MismatchModel model;
    std::size_t n_trials = 1000;
    std::uint64_t master_seed = 1;
    double dnl_limit = 0.5;
    double inl_limit = 0.6;
    unsigned workers = 1;
    std::optional<HistogramOptions> histogram;
};

struct TrialEnsemble {
    std::size_t n_trials = 0;
    std::uint64_t master_seed = 0;
    double dnl_limit = 0.0;
    double inl_limit = 0.0;
    std::vector<TrialSummary> trials;
    double yield = 0.0;
    double mean_peak_dnl = 0.0;
    double max_peak_dnl = 0.0;
    double mean_peak_inl = 0.0;
    double max_peak_inl = 0.0;
    /// Standard deviation of threshold errors pooled over all trials and comparators.
    double threshold_sigma = 0.0;  // volts
    double threshold_sigma_lsb = 0.0;
    bool full_histogram = false;
};

/// Per-trial seed = derive_seed(master_seed, trial stream, index), so results
/// are identical for any worker count.
TrialEnsemble run_ensemble(const EnsembleConfig& config);

struct StageAveraging {
    std::size_t stage = 0;         // interpolating stage whose midpoints are measured
    double parent_sigma = 0.0;     // volts, input referred
    double interpolated_sigma = 0.0;
    double ratio = 0.0;
};

/// Threshold-error spread at interpolated versus parent taps. For each
/// factor-2 stage s, only stage s-1 amplifiers receive offsets (all other
/// sources are zeroed) so the two populations isolate a single averaging step.
struct AveragingReport {
    bool applicable = false;
    std::size_t n_trials = 0;
    std::vector<StageAveraging> stages;
    /// Ratio at the first interpolating stage.
    double ratio = 0.0;
};

AveragingReport averaging_experiment(const MismatchModel& model, const AdcTopology& topology, std::size_t n_trials,
                                     std::uint64_t master_seed = 1, unsigned workers = 1);

}  // namespace flashadc
