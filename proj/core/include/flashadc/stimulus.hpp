#pragma once

#include <string>
#include <variant>

namespace flashadc {

struct DcInput {
    double level = 0.0;
};

/// offset + amplitude * sin(2*pi*frequency*t + phase)
struct SineInput {
    double amplitude = 0.0;
    double offset = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

/// start + slope * t
struct RampInput {
    double start = 0.0;
    double slope = 0.0;
};

/// Continuous-time converter input. Kept as a closed set of waveforms so the
/// front-end tracking pole can be applied analytically instead of by
/// time-stepping.
class Stimulus {
public:
    using Waveform = std::variant<DcInput, SineInput, RampInput>;

    Stimulus() = default;
    Stimulus(DcInput w) : waveform_(w) {}
    Stimulus(SineInput w) : waveform_(w) {}
    Stimulus(RampInput w) : waveform_(w) {}

    [[nodiscard]] const Waveform& waveform() const noexcept { return waveform_; }
    [[nodiscard]] bool is_sine() const noexcept { return std::holds_alternative<SineInput>(waveform_); }
    [[nodiscard]] std::string kind() const;

    /// Ideal input value at time t.
    [[nodiscard]] double operator()(double t) const;

    /// Steady-state output of a first-order low-pass with corner `bandwidth`
    /// driven by this input, evaluated at t. A non-finite bandwidth means an
    /// ideal tracker. Sines get gain 1/sqrt(1+(f/B)^2) and phase -atan(f/B);
    /// ramps lag by the pole time constant; DC passes unchanged.
    [[nodiscard]] double tracked(double t, double bandwidth) const;

private:
    Waveform waveform_{DcInput{}};
};

}  // namespace flashadc
