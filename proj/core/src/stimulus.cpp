#include "flashadc/stimulus.hpp"

#include <cmath>
#include <numbers>

namespace flashadc {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string Stimulus::kind() const {
    return std::visit(overloaded{[](const DcInput&) { return std::string("dc"); },
                                 [](const SineInput&) { return std::string("sine"); },
                                 [](const RampInput&) { return std::string("ramp"); }},
                      waveform_);
}

double Stimulus::operator()(double t) const {
    return std::visit(
        overloaded{[](const DcInput& w) { return w.level; },
                   [t](const SineInput& w) {
                       return w.offset + w.amplitude * std::sin(2.0 * std::numbers::pi * w.frequency * t + w.phase);
                   },
                   [t](const RampInput& w) { return w.start + w.slope * t; }},
        waveform_);
}

double Stimulus::tracked(double t, double bandwidth) const {
    if (!std::isfinite(bandwidth)) return (*this)(t);
    return std::visit(
        overloaded{[](const DcInput& w) { return w.level; },
                   [t, bandwidth](const SineInput& w) {
                       const double r = w.frequency / bandwidth;
                       const double gain = 1.0 / std::sqrt(1.0 + r * r);
                       const double phase = w.phase - std::atan(r);
                       return w.offset +
                              gain * w.amplitude * std::sin(2.0 * std::numbers::pi * w.frequency * t + phase);
                   },
                   [t, bandwidth](const RampInput& w) {
                       const double tau = 1.0 / (2.0 * std::numbers::pi * bandwidth);
                       return w.start + w.slope * (t - tau);
                   }},
        waveform_);
}

}  // namespace flashadc
