#pragma once

#include "run_config.hpp"

#include <flashadc/code_stream.hpp>
#include <flashadc/report.hpp>

#include <optional>
#include <vector>

namespace flashadc::cli {

/// The physical device of a run: drawn once from (mismatch, seed).
DeviceInstance make_instance(const RunConfig& cfg);
Converter make_converter(const RunConfig& cfg, double fs, std::uint64_t noise_seed);

/// Input waveform at sample rate fs; sines are snapped to a coherent bin when
/// `stimulus.coherent` is set.
Stimulus make_stimulus(const RunConfig& cfg, double fs);

/// Provenance common to every output file.
nlohmann::json provenance(const RunConfig& cfg);

/// Converts `n_samples` (0: stimulus.n_samples) samples.
CodeStream simulate(const RunConfig& cfg, std::size_t n_samples = 0, unsigned workers = 1);

struct SweepResult {
    std::string axis;  // fsignal | fsample
    std::vector<SweepRow> rows;
    std::optional<double> erbw;
    std::string erbw_error;
    double low_freq_sndr = 0.0;
    std::optional<double> max_fs_enob5;
    nlohmann::json summary;
};

std::vector<double> axis_points(const SweepAxis& axis, int points);

SweepResult run_fsignal_sweep(const RunConfig& cfg, int points, unsigned workers);
SweepResult run_fsample_sweep(const RunConfig& cfg, int points, unsigned workers);

}  // namespace flashadc::cli
