#pragma once

#include <span>
#include <vector>

namespace flashadc {

/// One-sided power spectrum of a real record, normalized so that the sum of
/// all bins equals the time-domain mean square (bins 1..N/2-1 doubled).
/// Length must be a power of two >= 2.
std::vector<double> power_spectrum(std::span<const double> x);

}  // namespace flashadc
