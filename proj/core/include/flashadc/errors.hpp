#pragma once

#include <stdexcept>
#include <string>

namespace flashadc {

/// Base of every error raised by the library. `category()` lets front ends
/// map failures onto stable exit codes without string matching.
class Error : public std::runtime_error {
public:
    enum class Category { Config, Runtime, Measurement };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] Category category() const noexcept { return category_; }

private:
    Category category_;
};

struct InvalidTopology : Error {
    explicit InvalidTopology(const std::string& what) : Error(Category::Config, "invalid topology: " + what) {}
};

struct InvalidModel : Error {
    explicit InvalidModel(const std::string& what) : Error(Category::Config, "invalid model: " + what) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(Category::Runtime, "dimension mismatch: " + what) {}
};

struct PhaseOrderViolation : Error {
    explicit PhaseOrderViolation(const std::string& what)
        : Error(Category::Runtime, "phase order violation: " + what) {}
};

struct InsufficientSamples : Error {
    explicit InsufficientSamples(const std::string& what)
        : Error(Category::Measurement, "insufficient samples: " + what) {}
};

struct NotFullScale : Error {
    explicit NotFullScale(const std::string& what) : Error(Category::Measurement, "not full scale: " + what) {}
};

struct NonCoherent : Error {
    explicit NonCoherent(const std::string& what) : Error(Category::Measurement, "non-coherent input: " + what) {}
};

struct TooShort : Error {
    explicit TooShort(const std::string& what) : Error(Category::Measurement, "record too short: " + what) {}
};

struct NoCrossing : Error {
    explicit NoCrossing(const std::string& what) : Error(Category::Measurement, "no -3 dB crossing: " + what) {}
};

/// Stimulus unsuitable for the requested measurement (e.g. histogram test on a ramp).
struct InvalidStimulus : Error {
    explicit InvalidStimulus(const std::string& what) : Error(Category::Measurement, "invalid stimulus: " + what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(Category::Config, what) {}
};

}  // namespace flashadc
