#include "flashadc/characterize.hpp"

#include "flashadc/errors.hpp"
#include "flashadc/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace flashadc {

long long coherent_cycles(double fs, std::size_t n_fft, double f_target) {
    if (!(fs > 0.0) || !(f_target > 0.0)) throw InvalidModel("coherent_frequency needs fs > 0 and f_target > 0");
    if (n_fft < 4 || !std::has_single_bit(n_fft)) throw InvalidModel("n_fft must be a power of two >= 4");
    const double exact = f_target * static_cast<double>(n_fft) / fs;
    const long long m = 2 * std::llround((exact - 1.0) / 2.0) + 1;
    return std::max(1LL, m);
}

double coherent_frequency(double fs, std::size_t n_fft, double f_target) {
    return static_cast<double>(coherent_cycles(fs, n_fft, f_target)) * fs / static_cast<double>(n_fft);
}

namespace {

double db(double ratio) {
    return 10.0 * std::log10(ratio);
}

std::size_t fold(long long m, std::size_t n) {
    const auto nn = static_cast<long long>(n);
    long long r = ((m % nn) + nn) % nn;
    if (r > nn / 2) r = nn - r;
    return static_cast<std::size_t>(r);
}

}  // namespace

SpectralMetrics spectral_metrics(std::span<const double> samples, double fs, double f_in, std::size_t n_fft,
                                 int n_harmonics) {
    if (n_fft < 4 || !std::has_single_bit(n_fft)) throw InvalidModel("n_fft must be a power of two >= 4");
    if (samples.size() < n_fft)
        throw TooShort(std::to_string(samples.size()) + " samples, need " + std::to_string(n_fft));
    if (!(fs > 0.0) || !(f_in > 0.0)) throw NonCoherent("fs and f_in must be positive");

    const double cycles = f_in * static_cast<double>(n_fft) / fs;
    const long long m = std::llround(cycles);
    if (std::abs(cycles - static_cast<double>(m)) > 1e-6 * std::max(1.0, cycles))
        throw NonCoherent("f_in spans " + std::to_string(cycles) + " cycles in the record; use a coherent frequency");
    const std::size_t bin = fold(m, n_fft);
    if (bin == 0 || bin == n_fft / 2) throw NonCoherent("carrier folds onto DC or Nyquist");

    const auto p = power_spectrum(samples.first(n_fft));

    std::set<std::size_t> harmonic_bins;
    for (int h = 2; h <= n_harmonics; ++h) {
        const std::size_t b = fold(static_cast<long long>(h) * m, n_fft);
        if (b != 0 && b != bin) harmonic_bins.insert(b);
    }

    const double p_sig = p[bin];
    double p_harm = 0.0;
    for (auto b : harmonic_bins) p_harm += p[b];
    double p_rest = 0.0;
    double p_spur = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (k == bin) continue;
        p_spur = std::max(p_spur, p[k]);
        if (!harmonic_bins.contains(k)) p_rest += p[k];
    }

    SpectralMetrics out;
    out.fundamental_bin = bin;
    out.n_fft = n_fft;
    out.n_harmonics = n_harmonics;
    out.f_in = f_in;
    out.fs = fs;
    out.snr_db = db(p_sig / p_rest);
    out.sndr_db = db(p_sig / (p_rest + p_harm));
    out.thd_db = p_harm > 0.0 ? db(p_sig / p_harm) : std::numeric_limits<double>::infinity();
    out.sfdr_db = p_spur > 0.0 ? db(p_sig / p_spur) : std::numeric_limits<double>::infinity();
    out.enob = enob_from_sndr(out.sndr_db);
    return out;
}

SpectralMetrics spectral_metrics(std::span<const int> codes, double fs, double f_in, std::size_t n_fft,
                                 int n_harmonics) {
    std::vector<double> x(codes.begin(), codes.end());
    return spectral_metrics(std::span<const double>(x), fs, f_in, n_fft, n_harmonics);
}

namespace {

void finish_report(LinearityReport& r) {
    const std::size_t levels = r.dnl.size();
    r.inl.assign(levels, 0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k + 1 < levels; ++k) {
        acc += r.dnl[k];
        r.inl[k] = acc;
    }
    r.peak_dnl = 0.0;
    r.peak_inl = 0.0;
    for (std::size_t k = 1; k + 1 < levels; ++k) {
        r.peak_dnl = std::max(r.peak_dnl, std::abs(r.dnl[k]));
        r.peak_inl = std::max(r.peak_inl, std::abs(r.inl[k]));
    }
}

}  // namespace

LinearityReport histogram_linearity(std::span<const int> codes, int levels) {
    if (levels < 4) throw InvalidModel("histogram needs at least 4 codes");
    LinearityReport r;
    r.n_samples = codes.size();
    r.histogram.assign(static_cast<std::size_t>(levels), 0);
    for (int c : codes) {
        if (c < 0 || c >= levels) throw InvalidModel("code " + std::to_string(c) + " outside 0.." + std::to_string(levels - 1));
        ++r.histogram[static_cast<std::size_t>(c)];
    }
    const auto n = static_cast<double>(codes.size());
    const auto top = static_cast<std::size_t>(levels - 1);
    if (codes.empty() || r.histogram[0] == 0 || r.histogram[top] == 0)
        throw NotFullScale("end codes not reached; the stimulus must cover the full input range");

    // x = C + A sin(theta), theta uniform: P(x < T) = 1/2 + asin((T - C)/A)/pi,
    // i.e. T = C - A cos(pi p). Pin T_1 = 1 and T_{top} = top (code units).
    const double p_lo = static_cast<double>(r.histogram[0]) / n;
    const double p_hi = 1.0 - static_cast<double>(r.histogram[top]) / n;
    const double t_lo = 1.0;
    const double t_hi = static_cast<double>(top);
    const double c_lo = std::cos(std::numbers::pi * p_lo);
    const double c_hi = std::cos(std::numbers::pi * p_hi);
    const double amplitude = (t_hi - t_lo) / (c_lo - c_hi);
    const double offset = t_lo + amplitude * c_lo;
    r.fitted_amplitude = amplitude;
    r.fitted_offset = offset;
    if (!(amplitude >= 0.98 * levels / 2.0))
        throw NotFullScale("fitted amplitude " + std::to_string(amplitude) + " LSB is below full scale (" +
                           std::to_string(levels / 2) + " LSB)");

    auto cdf = [&](double t) {
        const double s = std::clamp((t - offset) / amplitude, -1.0, 1.0);
        return 0.5 + std::asin(s) / std::numbers::pi;
    };

    std::vector<double> ideal(static_cast<std::size_t>(levels), 0.0);
    double sum_ideal = 0.0;
    double sum_meas = 0.0;
    double min_ideal = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < top; ++k) {
        ideal[k] = n * (cdf(static_cast<double>(k + 1)) - cdf(static_cast<double>(k)));
        sum_ideal += ideal[k];
        sum_meas += static_cast<double>(r.histogram[k]);
        min_ideal = std::min(min_ideal, ideal[k]);
    }
    r.confidence = min_ideal > 0.0 ? 3.0 / std::sqrt(min_ideal) : std::numeric_limits<double>::infinity();
    if (r.confidence > 0.1)
        throw InsufficientSamples("DNL confidence bound " + std::to_string(r.confidence) +
                                  " LSB exceeds 0.1 LSB; record at least " +
                                  std::to_string(static_cast<long long>(std::ceil(n * 900.0 / min_ideal))) +
                                  " samples");

    // Normalizing to the interior count removes the residual gain error, so
    // the DNL sums to zero and the INL is endpoint-corrected.
    const double scale = sum_meas / sum_ideal;
    r.dnl.assign(static_cast<std::size_t>(levels), 0.0);
    for (std::size_t k = 1; k < top; ++k) r.dnl[k] = static_cast<double>(r.histogram[k]) / (scale * ideal[k]) - 1.0;
    finish_report(r);
    return r;
}

LinearityReport transition_linearity(std::span<const double> transitions) {
    if (transitions.size() < 3) throw InvalidModel("need at least 3 transition levels");
    const std::size_t levels = transitions.size() + 1;
    LinearityReport r;
    const double width = (transitions.back() - transitions.front()) / static_cast<double>(levels - 2);
    r.dnl.assign(levels, 0.0);
    // Code k spans transitions[k-1] .. transitions[k].
    for (std::size_t k = 1; k + 1 < levels; ++k) r.dnl[k] = (transitions[k] - transitions[k - 1]) / width - 1.0;
    r.fitted_amplitude = 0.0;
    finish_report(r);
    return r;
}

double erbw(std::span<const SweepPoint> sweep) {
    if (sweep.size() < 3) throw InvalidModel("ERBW needs at least 3 sweep points");
    for (std::size_t i = 1; i < sweep.size(); ++i)
        if (!(sweep[i].f_in > sweep[i - 1].f_in)) throw InvalidModel("sweep must be sorted by increasing f_in");
    const double target = sweep.front().sndr_db - 3.0;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        if (sweep[i].sndr_db <= target) {
            const auto& a = sweep[i - 1];
            const auto& b = sweep[i];
            if (a.sndr_db == b.sndr_db) return b.f_in;
            return a.f_in + (a.sndr_db - target) / (a.sndr_db - b.sndr_db) * (b.f_in - a.f_in);
        }
    }
    throw NoCrossing("SNDR never drops 3 dB below " + std::to_string(sweep.front().sndr_db) + " dB within the sweep");
}

double fom(const FomInput& input) {
    if (input.power < 0.0) throw InvalidModel("power must be >= 0");
    if (!(input.erbw > 0.0)) throw InvalidModel("erbw must be > 0");
    return input.power / (std::exp2(input.enob_dc) * 2.0 * input.erbw);
}

}  // namespace flashadc
