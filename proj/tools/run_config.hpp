#pragma once

#include <flashadc/analog_chain.hpp>
#include <flashadc/comparator_backend.hpp>
#include <flashadc/topology.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace flashadc::cli {

inline constexpr const char* kConfigSchema = "flashadc.config/1";

struct StimulusConfig {
    std::string waveform = "sine";  // sine | dc | ramp
    double frequency = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double phase = 0.0;
    double level = 0.0;
    double start = 0.0;
    double slope = 0.0;
    double fs = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_fft = 4096;
    bool coherent = true;  // snap sine frequency to an FFT bin
};

struct SweepAxis {
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    bool log_spacing = false;
    double f_signal = 0.0;  // fsample sweeps only
};

struct MonteCarloConfig {
    std::size_t n_trials = 1000;
    double dnl_limit = 0.5;
    double inl_limit = 0.6;
    bool histogram = false;
    std::size_t averaging_trials = 10000;
};

/// Parsed and validated run configuration. `source` is the effective JSON
/// (after operating-point overrides); `hash` identifies it.
struct RunConfig {
    nlohmann::json source;
    std::string hash;
    std::string operating_point;
    std::uint64_t seed = 0;
    AdcTopology topology;
    MismatchModel mismatch;
    LatchModel latch;
    StimulusConfig stimulus;
    int n_harmonics = 7;
    SweepAxis fsignal;
    SweepAxis fsample;
    MonteCarloConfig montecarlo;
    std::string output_dir;
    std::string output_format = "csv";
};

/// Parses `doc`, applying operating_points[op] as a JSON merge patch first.
/// Unknown keys, missing required keys and failed module preconditions all
/// raise ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc, const std::string& op = "");
RunConfig load_config(const std::filesystem::path& path, const std::string& op = "");

}  // namespace flashadc::cli
