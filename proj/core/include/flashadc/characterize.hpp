#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace flashadc {

// ---------------------------------------------------------------------------
// Coherent test-tone selection
// ---------------------------------------------------------------------------

/// Odd cycle count M nearest f_target * n_fft / fs (odd implies coprime with
/// a power-of-two record). Targets above fs/2 are allowed for undersampling.
long long coherent_cycles(double fs, std::size_t n_fft, double f_target);

/// M / n_fft * fs for the cycle count above.
double coherent_frequency(double fs, std::size_t n_fft, double f_target);

// ---------------------------------------------------------------------------
// FFT spectral metrics
// ---------------------------------------------------------------------------

/// Dynamic metrics of a coherently sampled sine. THD and SFDR are positive dB
/// below the carrier.
struct SpectralMetrics {
    double snr_db = 0.0;
    double sndr_db = 0.0;
    double thd_db = 0.0;
    double sfdr_db = 0.0;
    double enob = 0.0;
    std::size_t fundamental_bin = 0;
    std::size_t n_fft = 0;
    int n_harmonics = 0;
    double f_in = 0.0;
    double fs = 0.0;
};

inline double enob_from_sndr(double sndr_db) { return (sndr_db - 1.76) / 6.02; }

/// Rectangular-window FFT of the first n_fft samples. Harmonics 2..n_harmonics
/// are folded into the first Nyquist zone; bins landing on DC or the carrier
/// are skipped. Throws NonCoherent when f_in is not on an FFT bin and
/// TooShort when fewer than n_fft samples are given.
SpectralMetrics spectral_metrics(std::span<const double> samples, double fs, double f_in, std::size_t n_fft,
                                 int n_harmonics = 7);
SpectralMetrics spectral_metrics(std::span<const int> codes, double fs, double f_in, std::size_t n_fft,
                                 int n_harmonics = 7);

// ---------------------------------------------------------------------------
// Sine-histogram linearity
// ---------------------------------------------------------------------------

/// DNL/INL in LSB, indexed by output code. End codes 0 and 2^N-1 carry zero
/// and are excluded from the peaks. inl[k] is the running sum of dnl[1..k].
struct LinearityReport {
    std::vector<double> dnl;
    std::vector<double> inl;
    double peak_dnl = 0.0;
    double peak_inl = 0.0;
    std::vector<std::uint64_t> histogram;
    /// Fitted sine, in LSB relative to the bottom of the range.
    double fitted_amplitude = 0.0;
    double fitted_offset = 0.0;
    /// Three-sigma counting uncertainty of the worst-case DNL estimate.
    double confidence = 0.0;
    std::size_t n_samples = 0;
};

/// Histogram test against the arcsine density of a sine whose amplitude and
/// offset are fitted from the two end-bin counts. Throws NotFullScale when
/// the end codes are empty or the fitted amplitude is below 98% of FS/2, and
/// InsufficientSamples when `confidence` exceeds 0.1 LSB.
LinearityReport histogram_linearity(std::span<const int> codes, int levels = 64);

/// Same report computed from transition levels T_1..T_{levels-1} (volts,
/// any offset), endpoint-fit so T_1 and T_{levels-1} are exact.
LinearityReport transition_linearity(std::span<const double> transitions);

// ---------------------------------------------------------------------------
// ERBW and figure of merit
// ---------------------------------------------------------------------------

struct SweepPoint {
    double f_in = 0.0;
    double sndr_db = 0.0;
};

/// Frequency where SNDR first falls 3 dB below the first (lowest-frequency)
/// point, linearly interpolated. Throws NoCrossing.
double erbw(std::span<const SweepPoint> sweep);

struct FomInput {
    double power = 0.0;    // watts
    double enob_dc = 0.0;  // bits
    double erbw = 0.0;     // hertz
};

/// Power / (2^ENOB_DC * 2 * ERBW), joules per conversion step.
double fom(const FomInput& input);

}  // namespace flashadc
