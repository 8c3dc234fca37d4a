#include "flashadc/fft.hpp"

#include "flashadc/errors.hpp"

#include <fftw3.h>

#include <bit>
#include <memory>
#include <mutex>

namespace flashadc {

namespace {
// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
}  // namespace

std::vector<double> power_spectrum(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2 || !std::has_single_bit(n)) throw InvalidModel("FFT length must be a power of two >= 2");

    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    std::unique_ptr<fftw_plan_s, PlanDeleter> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute(plan.get());

    const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    std::vector<double> p(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double re = out.get()[k][0];
        const double im = out.get()[k][1];
        const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        p[k] = scale * (re * re + im * im) * norm;
    }
    return p;
}

}  // namespace flashadc
