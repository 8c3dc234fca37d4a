#pragma once

#include "flashadc/analog_chain.hpp"
#include "flashadc/random.hpp"
#include "flashadc/stimulus.hpp"
#include "flashadc/topology.hpp"

#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace flashadc {

/// Behavioural regenerative latch. A decision is clean when the input
/// exceeds v_meta = v_swing * exp(-total_decide_time / regen_tau); each
/// re-latch stage adds another decide_time of regeneration.
struct LatchModel {
    double regen_tau = 10e-12;
    double decide_time = 400e-12;
    int relatch_stages = 2;
    double v_swing = 0.75;
    /// When set, decide_time is derived from the sample clock as half the
    /// period minus this overhead (floored at zero).
    std::optional<double> clock_overhead;

    void validate() const;
    [[nodiscard]] double total_decide_time() const noexcept { return decide_time * (1 + relatch_stages); }
    [[nodiscard]] double v_meta() const noexcept;
    /// Copy with decide_time fixed for sample rate fs.
    [[nodiscard]] LatchModel at_sample_rate(double fs) const;
};

/// One output word at every point of the digital backend.
struct CodeSample {
    std::uint64_t sample_index = 0;
    std::uint64_t thermometer = 0;
    std::bitset<65> one_hot;
    std::uint8_t gray = 0;
    int binary = 0;
    int metastable_count = 0;
    bool decodable = true;

    friend bool operator==(const CodeSample&, const CodeSample&) = default;
};

/// Resolves one comparator. Inputs inside the metastable window give a fair
/// coin flip and bump `metastable_count`.
bool latch_decide(double v, double comp_offset, const LatchModel& latch, SampleRng& rng, int& metastable_count);
bool latch_decide(double v, double comp_offset, double v_meta, SampleRng& rng, int& metastable_count);

struct BubbleCorrected {
    std::bitset<65> one_hot;
    bool decodable = true;
    /// Index of the single set bit, or the popcount fallback when not decodable.
    int code = 0;
};

/// First-order bubble correction and thermometer to 1-of-N conversion over
/// `comparators` bits. Each bit is replaced by the majority of itself and its
/// neighbours (virtual bits: 1 below bit 0, 0 above the top), then
/// one_hot[i] = m[i-1] & ~m[i]. Any single isolated bubble is removed.
BubbleCorrected bubble_correct(std::uint64_t thermometer, int comparators = 64);

/// Binary-reflected Gray ROM.
std::uint8_t gray_encode(int code);
int gray_decode(std::uint8_t gray);

/// Looks up the ROM row for a 1-of-N word. Throws DimensionMismatch if the
/// word does not have exactly one bit set.
std::uint8_t gray_encode(const std::bitset<65>& one_hot);

/// Composes acquire, sampling, amplification, latching, bubble correction and
/// Gray encoding for one converter instance.
class Converter {
public:
    Converter(AnalogChain chain, LatchModel latch, double fs, std::uint64_t noise_seed);

    [[nodiscard]] const AnalogChain& chain() const noexcept { return chain_; }
    [[nodiscard]] const AdcTopology& topology() const noexcept { return chain_.topology(); }
    [[nodiscard]] const LatchModel& latch() const noexcept { return latch_; }
    [[nodiscard]] double sample_rate() const noexcept { return fs_; }

    /// Converts `signal` at t = index / fs. The noise stream is derived from
    /// (noise_seed, index), so the result depends on nothing else.
    [[nodiscard]] CodeSample convert(const Stimulus& signal, std::uint64_t index) const;

    /// Converts an already-acquired voltage.
    [[nodiscard]] CodeSample convert_voltage(double v_in, SampleRng& rng, std::uint64_t index = 0) const;

    /// Latch decisions and backend on given comparator inputs.
    [[nodiscard]] CodeSample decide(const LatchInputs& inputs, SampleRng& rng) const;

    [[nodiscard]] std::vector<CodeSample> run(const Stimulus& signal, std::size_t n_samples) const;

private:
    AnalogChain chain_;
    LatchModel latch_;
    double fs_;
    std::uint64_t noise_seed_;
    double v_meta_;
};

/// Keeps samples 0, factor, 2*factor, ...
std::vector<CodeSample> downsample(std::span<const CodeSample> stream, int factor);

}  // namespace flashadc
