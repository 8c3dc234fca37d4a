#pragma once

#include "flashadc/characterize.hpp"
#include "flashadc/montecarlo.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace flashadc {

inline constexpr const char* kToolVersion = FLASHADC_VERSION_STRING;
inline constexpr const char* kReportSchema = "flashadc.report/1";
inline constexpr const char* kSweepSchema = "flashadc.sweep/1";
inline constexpr const char* kEnsembleSchema = "flashadc.ensemble/1";

/// 64-bit FNV-1a, lower-case hex.
std::string fnv1a_hex(std::string_view bytes);

/// Hash of the canonical (sorted-key, compact) JSON dump.
std::string config_hash(const nlohmann::json& config);

/// Non-finite values become null so every report is valid JSON.
nlohmann::json finite_or_null(double v);

nlohmann::json to_json(const SpectralMetrics& m);
nlohmann::json to_json(const LinearityReport& r);
nlohmann::json to_json(const TrialEnsemble& e, bool include_trials = false);
nlohmann::json to_json(const AveragingReport& r);

/// One row of a frequency or sample-rate sweep.
struct SweepRow {
    double fs = 0.0;
    double f_in = 0.0;
    SpectralMetrics metrics;
    std::string error;  // non-empty when the point failed
};

/// CSV columns: fs,f_in,snr,sndr,sfdr,thd,enob,error. Provenance goes in a
/// leading `# flashadc <meta-json>` comment line.
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows, const nlohmann::json& meta);

}  // namespace flashadc
