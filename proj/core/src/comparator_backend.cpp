#include "flashadc/comparator_backend.hpp"

#include "flashadc/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace flashadc {

void LatchModel::validate() const {
    if (!(regen_tau > 0.0)) throw InvalidModel("regen_tau must be > 0");
    if (relatch_stages < 0) throw InvalidModel("relatch_stages must be >= 0");
    if (decide_time < 0.0) throw InvalidModel("decide_time must be >= 0");
    if (!(v_swing > 0.0)) throw InvalidModel("v_swing must be > 0");
    if (clock_overhead && *clock_overhead < 0.0) throw InvalidModel("clock_overhead must be >= 0");
}

double LatchModel::v_meta() const noexcept { return v_swing * std::exp(-total_decide_time() / regen_tau); }

LatchModel LatchModel::at_sample_rate(double fs) const {
    LatchModel m = *this;
    if (clock_overhead) m.decide_time = std::max(0.0, 0.5 / fs - *clock_overhead);
    return m;
}

bool latch_decide(double v, double comp_offset, double v_meta, SampleRng& rng, int& metastable_count) {
    const double x = v + comp_offset;
    if (std::abs(x) > v_meta) return x > 0.0;
    ++metastable_count;
    return rng.coin();
}

bool latch_decide(double v, double comp_offset, const LatchModel& latch, SampleRng& rng, int& metastable_count) {
    return latch_decide(v, comp_offset, latch.v_meta(), rng, metastable_count);
}

BubbleCorrected bubble_correct(std::uint64_t thermometer, int comparators) {
    const int n = comparators;
    auto bit = [&](int j) -> bool {
        if (j < 0) return true;
        if (j >= n) return false;
        return (thermometer >> j) & 1U;
    };
    auto smoothed = [&](int j) -> bool {
        if (j < 0) return true;
        if (j >= n) return false;
        return static_cast<int>(bit(j - 1)) + static_cast<int>(bit(j)) + static_cast<int>(bit(j + 1)) >= 2;
    };

    BubbleCorrected out;
    for (int i = 0; i <= n; ++i)
        if (smoothed(i - 1) && !smoothed(i)) out.one_hot.set(static_cast<std::size_t>(i));

    if (out.one_hot.count() == 1) {
        for (int i = 0; i <= n; ++i)
            if (out.one_hot.test(static_cast<std::size_t>(i))) out.code = i;
    } else {
        out.decodable = false;
        const std::uint64_t mask = n >= 64 ? ~0ULL : ((1ULL << n) - 1);
        out.code = std::popcount(thermometer & mask);
    }
    return out;
}

namespace {
constexpr std::array<std::uint8_t, 64> make_gray_rom() {
    std::array<std::uint8_t, 64> rom{};
    for (unsigned b = 0; b < 64; ++b) rom[b] = static_cast<std::uint8_t>(b ^ (b >> 1));
    return rom;
}
constexpr auto kGrayRom = make_gray_rom();
}  // namespace

std::uint8_t gray_encode(int code) { return kGrayRom.at(static_cast<std::size_t>(std::clamp(code, 0, 63))); }

int gray_decode(std::uint8_t gray) {
    unsigned b = gray;
    for (unsigned shift = 1; shift < 8; shift <<= 1) b ^= b >> shift;
    return static_cast<int>(b);
}

std::uint8_t gray_encode(const std::bitset<65>& one_hot) {
    if (one_hot.count() != 1) throw DimensionMismatch("1-of-N word must have exactly one bit set");
    for (std::size_t i = 0; i < one_hot.size(); ++i)
        if (one_hot.test(i)) return gray_encode(static_cast<int>(i));
    return 0;  // unreachable
}

Converter::Converter(AnalogChain chain, LatchModel latch, double fs, std::uint64_t noise_seed)
    : chain_(std::move(chain)), latch_(latch.at_sample_rate(fs)), fs_(fs), noise_seed_(noise_seed) {
    latch_.validate();
    if (!(fs > 0.0)) throw InvalidModel("sample rate must be > 0");
    v_meta_ = latch_.v_meta();
}

CodeSample Converter::decide(const LatchInputs& inputs, SampleRng& rng) const {
    const auto& offsets = chain_.instance().comp_offsets;
    const int n = topology().comparators();
    CodeSample s;
    s.sample_index = inputs.sample_index;
    for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        if (latch_decide(inputs.values[idx], offsets[idx], v_meta_, rng, s.metastable_count))
            s.thermometer |= 1ULL << k;
    }
    const auto corrected = bubble_correct(s.thermometer, n);
    s.one_hot = corrected.one_hot;
    s.decodable = corrected.decodable;
    s.binary = std::min(corrected.code, topology().levels() - 1);
    s.gray = gray_encode(s.binary);
    return s;
}

CodeSample Converter::convert_voltage(double v_in, SampleRng& rng, std::uint64_t index) const {
    auto inputs = chain_.propagate(chain_.front_end_sample(v_in));
    inputs.sample_index = index;
    return decide(inputs, rng);
}

CodeSample Converter::convert(const Stimulus& signal, std::uint64_t index) const {
    SampleRng rng(derive_seed(noise_seed_, kSampleStream, index));
    const double v = acquire(signal, static_cast<double>(index) / fs_, chain_.model(), rng);
    return convert_voltage(v, rng, index);
}

std::vector<CodeSample> Converter::run(const Stimulus& signal, std::size_t n_samples) const {
    std::vector<CodeSample> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) out.push_back(convert(signal, i));
    return out;
}

std::vector<CodeSample> downsample(std::span<const CodeSample> stream, int factor) {
    if (factor < 1) throw InvalidModel("downsample factor must be >= 1");
    std::vector<CodeSample> out;
    out.reserve(stream.size() / static_cast<std::size_t>(factor) + 1);
    for (std::size_t i = 0; i < stream.size(); i += static_cast<std::size_t>(factor)) out.push_back(stream[i]);
    return out;
}

}  // namespace flashadc
