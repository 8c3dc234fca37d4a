#include "flashadc/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace flashadc {

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const SpectralMetrics& m) {
    return {
        {"snr_db", finite_or_null(m.snr_db)},
        {"sndr_db", finite_or_null(m.sndr_db)},
        {"thd_db", finite_or_null(m.thd_db)},
        {"sfdr_db", finite_or_null(m.sfdr_db)},
        {"enob", finite_or_null(m.enob)},
        {"fundamental_bin", m.fundamental_bin},
        {"n_fft", m.n_fft},
        {"n_harmonics", m.n_harmonics},
        {"f_in", m.f_in},
        {"fs", m.fs},
    };
}

nlohmann::json to_json(const LinearityReport& r) {
    return {
        {"dnl", r.dnl},
        {"inl", r.inl},
        {"peak_dnl", r.peak_dnl},
        {"peak_inl", r.peak_inl},
        {"histogram", r.histogram},
        {"fitted_amplitude_lsb", r.fitted_amplitude},
        {"fitted_offset_lsb", r.fitted_offset},
        {"confidence_lsb", finite_or_null(r.confidence)},
        {"n_samples", r.n_samples},
    };
}

nlohmann::json to_json(const TrialEnsemble& e, bool include_trials) {
    nlohmann::json j = {
        {"n_trials", e.n_trials},
        {"master_seed", e.master_seed},
        {"limits", {{"dnl", e.dnl_limit}, {"inl", e.inl_limit}}},
        {"yield", e.yield},
        {"mean_peak_dnl", e.mean_peak_dnl},
        {"max_peak_dnl", e.max_peak_dnl},
        {"mean_peak_inl", e.mean_peak_inl},
        {"max_peak_inl", e.max_peak_inl},
        {"threshold_sigma_v", e.threshold_sigma},
        {"threshold_sigma_lsb", e.threshold_sigma_lsb},
        {"method", e.full_histogram ? "histogram" : "analytic"},
    };
    if (include_trials) {
        auto& arr = j["trials"] = nlohmann::json::array();
        for (const auto& t : e.trials)
            arr.push_back({{"index", t.index},
                           {"seed", t.seed},
                           {"peak_dnl", t.peak_dnl},
                           {"peak_inl", t.peak_inl},
                           {"threshold_rms_lsb", t.threshold_rms_lsb},
                           {"pass", t.pass}});
    }
    return j;
}

nlohmann::json to_json(const AveragingReport& r) {
    nlohmann::json j = {{"applicable", r.applicable}, {"n_trials", r.n_trials}};
    if (!r.applicable) {
        j["status"] = "NotApplicable";
        return j;
    }
    j["ratio"] = r.ratio;
    j["expected_ratio"] = 1.0 / std::sqrt(2.0);
    auto& st = j["stages"] = nlohmann::json::array();
    for (const auto& s : r.stages)
        st.push_back({{"stage", s.stage},
                      {"parent_sigma_v", s.parent_sigma},
                      {"interpolated_sigma_v", s.interpolated_sigma},
                      {"ratio", s.ratio}});
    return j;
}

namespace {
void put(std::ostream& os, double v) {
    if (!std::isfinite(v)) {
        os << "";
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    os << buf;
}
}  // namespace

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows, const nlohmann::json& meta) {
    os << "# flashadc " << meta.dump() << '\n';
    os << "fs,f_in,snr,sndr,sfdr,thd,enob,error\n";
    for (const auto& r : rows) {
        char head[64];
        std::snprintf(head, sizeof head, "%.6f,%.6f,", r.fs, r.f_in);
        os << head;
        if (r.error.empty()) {
            put(os, r.metrics.snr_db);
            os << ',';
            put(os, r.metrics.sndr_db);
            os << ',';
            put(os, r.metrics.sfdr_db);
            os << ',';
            put(os, r.metrics.thd_db);
            os << ',';
            put(os, r.metrics.enob);
            os << ",\n";
        } else {
            os << ",,,,,\"" << r.error << "\"\n";
        }
    }
}

}  // namespace flashadc
