#include <doctest.h>

#include <flashadc/analog_chain.hpp>
#include <flashadc/errors.hpp>
#include <flashadc/montecarlo.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace flashadc;

namespace {

constexpr double kChainGain = 2.5 * 2.5 * 2.5 * 2.5;

// Comparator k input for a DC input, computed through the simulator.
double latch_input(const AnalogChain& chain, double v, std::size_t k) {
    return chain.propagate(chain.front_end_sample(v)).values[k];
}

// Zero-crossing of comparator k. The chain is linear near a crossing, so
// bracketing bisection converges to the exact crossing.
double crossing(const AnalogChain& chain, std::size_t k) {
    const auto& t = chain.topology();
    const double centre = t.v_refn + t.lsb() * static_cast<double>(k + 1);
    double lo = centre - 4 * t.lsb();
    double hi = centre + 4 * t.lsb();
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (latch_input(chain, mid, k) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double stddev(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

TEST_CASE("acquire: DC is unaffected by jitter and bandwidth") {
    MismatchModel m;
    m.sigma_jitter = 5e-12;
    m.tracking_bandwidth = 100e6;
    SampleRng rng(3);
    for (double t : {0.0, 1e-9, 7.3e-6}) CHECK(acquire(DcInput{0.7}, t, m, rng) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("acquire: sine at the pole frequency is attenuated by 1/sqrt(2)") {
    MismatchModel m;
    m.tracking_bandwidth = 500e6;
    const SineInput s{0.4, 0.0, 500e6, 0.0};
    SampleRng rng(1);
    double peak = 0.0;
    for (int i = 0; i < 4000; ++i) peak = std::max(peak, std::abs(acquire(s, i * 1.013e-12, m, rng)));
    CHECK(peak == doctest::Approx(0.4 / std::sqrt(2.0)).epsilon(1e-4));

    // Phase lag of -atan(f/B) = -pi/4: the tracked zero crossing is delayed by T/8.
    const double t_cross = 1.0 / (8.0 * 500e6);
    CHECK(std::abs(acquire(s, t_cross, m, rng)) < 1e-12);
}

TEST_CASE("acquire: jitter-limited SNR matches -20 log10(2 pi f sigma)") {
    MismatchModel m;
    m.sigma_jitter = 1e-12;
    const double f = 700e6;
    const double a = 0.5;
    const SineInput s{a, 0.0, f, 0.3};
    SampleRng rng(42);
    double err2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double t = i * 1.0 / 600e6;
        const double e = acquire(s, t, m, rng) - s.offset - a * std::sin(2 * std::numbers::pi * f * t + s.phase);
        err2 += e * e;
    }
    const double snr = 10 * std::log10((a * a / 2) / (err2 / n));
    const double theory = -20 * std::log10(2 * std::numbers::pi * f * 1e-12);
    CHECK(theory == doctest::Approx(47.1).epsilon(0.001));
    CHECK(snr == doctest::Approx(theory).epsilon(0.2 / 47.1));
}

TEST_CASE("front end: ideal taps store zero at their own reference") {
    const auto t = build_topology({});
    const AnalogChain chain(t, {}, DeviceInstance::nominal(t));
    const auto taps = reference_taps(t);
    for (const auto& tap : taps) {
        const auto st = chain.front_end_sample(tap.v_ref);
        CHECK(st.stored[static_cast<std::size_t>(tap.index)] == 0.0);
    }
}

TEST_CASE("front end: amplifier offsets vanish with ideal offset sampling") {
    const auto t = build_topology({});
    MismatchModel m;
    m.sigma_amp_offset = 0.02;
    auto inst = draw_instance(m, t, 7);
    const AnalogChain ideal(t, {}, DeviceInstance::nominal(t));
    const AnalogChain with_offsets(t, m, inst);  // ios_residual_factor = 0
    const auto a = ideal.front_end_sample(0.61);
    const auto b = with_offsets.front_end_sample(0.61);
    CHECK(a.stored == b.stored);
    CHECK(ideal.propagate(a).values == with_offsets.propagate(b).values);
}

TEST_CASE("front end: capacitor ratio error moves the tap as the divider predicts") {
    const auto t = build_topology({});
    MismatchModel m;
    m.sigma_cap_ratio = 0.01;
    const auto inst = draw_instance(m, t, 11);
    const AnalogChain chain(t, m, inst);
    const auto refs = chain.references();
    const double cs = t.sampling_cap_per_amp;
    for (int i = 0; i < 9; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double c1 = cs * i / 8.0 * (1.0 + inst.cap_ratio_errors[idx]);
        const double c2 = cs * (8 - i) / 8.0;
        const double expect = 0.25 + c1 / (c1 + c2) * 1.0;
        CHECK(refs[idx] == doctest::Approx(expect).epsilon(1e-13));
        CHECK(std::abs(chain.front_end_sample(expect).stored[idx]) < 1e-15);
    }
    CHECK(refs[0] == 0.25);
    CHECK(refs[8] == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("instance shape is checked") {
    const auto t = build_topology({});
    auto inst = DeviceInstance::nominal(t);
    inst.comp_offsets.pop_back();
    CHECK_THROWS_AS(AnalogChain(t, {}, inst), DimensionMismatch);
    inst = DeviceInstance::nominal(t);
    inst.amp_offsets[2].push_back(0.0);
    CHECK_THROWS_AS(front_end_sample(0.5, t, inst, {}), DimensionMismatch);
}

TEST_CASE("propagate before sampling is a phase-order violation") {
    const auto t = build_topology({});
    const AnalogChain chain(t, {}, DeviceInstance::nominal(t));
    CHECK_THROWS_AS((void)chain.propagate(FrontEndState{}), PhaseOrderViolation);
}

TEST_CASE("invalid mismatch models are rejected") {
    const auto t = build_topology({});
    MismatchModel m;
    m.ios_residual_factor = 1.5;
    CHECK_THROWS_AS(AnalogChain(t, m, DeviceInstance::nominal(t)), InvalidModel);
    m = {};
    m.tracking_bandwidth = 0.0;
    CHECK_THROWS_AS(AnalogChain(t, m, DeviceInstance::nominal(t)), InvalidModel);
    m = {};
    m.sigma_comp_offset = -1e-3;
    CHECK_THROWS_AS(AnalogChain(t, m, DeviceInstance::nominal(t)), InvalidModel);
}

TEST_CASE("interpolation: midpoints are parent means") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> p(17);
        for (auto& x : p) x = u(gen);
        const auto c = interpolate(p, 2);
        REQUIRE(c.size() == 33);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(c[2 * i] == p[i]);
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const double mean = (p[i] + p[i + 1]) / 2;
            CHECK(std::abs(c[2 * i + 1] - mean) <= 1e-12 * std::max(1.0, std::abs(mean)));
        }
    }
    const std::vector<double> eq{0.3, 0.3};
    CHECK(interpolate(eq, 2)[1] == 0.3);
    CHECK(interpolate(eq, 1) == eq);
}

TEST_CASE("interpolation: factor 8 blends linearly") {
    const std::vector<double> p{0.0, 8.0};
    const auto c = interpolate(p, 8);
    REQUIRE(c.size() == 9);
    for (int i = 0; i <= 8; ++i) CHECK(c[static_cast<std::size_t>(i)] == doctest::Approx(i));
}

TEST_CASE("zero mismatch: input halfway between taps 3 and 4 nulls the midpoint") {
    const auto t = build_topology({});
    const AnalogChain chain(t, {}, DeviceInstance::nominal(t));
    const auto taps = reference_taps(t);
    const double v = 0.5 * (taps[3].v_ref + taps[4].v_ref);
    const auto in = chain.propagate(chain.front_end_sample(v));
    // Crossing 28 (comparator index 27) sits between front-end taps 3 and 4.
    CHECK(std::abs(in.values[27]) < 1e-12);
    CHECK(in.values[26] > 0.0);
    CHECK(in.values[28] < 0.0);
}

TEST_CASE("small-signal chain gain is the product of stage gains") {
    const auto t = build_topology({});
    const AnalogChain chain(t, {}, DeviceInstance::nominal(t));
    const auto levels = threshold_levels(t);
    for (std::size_t k : {0u, 10u, 31u, 50u, 63u}) {
        const double v0 = levels[k + 1];
        const double dv = 1e-6;
        const double slope = (latch_input(chain, v0 + dv, k) - latch_input(chain, v0 - dv, k)) / (2 * dv);
        CHECK(slope == doctest::Approx(t.chain_gain()).epsilon(1e-3));
        CHECK(slope == doctest::Approx(kChainGain).epsilon(1e-3));
    }
}

TEST_CASE("latch-input offset is divided by the chain gain at the input") {
    const auto t = build_topology({});
    const double delta = 2e-3;
    for (std::size_t k : {5u, 32u, 62u}) {
        const AnalogChain chain(t, {}, DeviceInstance::nominal(t));
        const double base = crossing(chain, k);
        double lo = base - 0.01;
        double hi = base + 0.01;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (latch_input(chain, mid, k) + delta > 0.0 ? hi : lo) = mid;
        }
        const double shift = 0.5 * (lo + hi) - base;
        CHECK(shift == doctest::Approx(-delta / kChainGain).epsilon(0.01));
    }
}

TEST_CASE("zero mismatch: latch input signs are thermometer shaped") {
    const auto t = build_topology({});
    const AnalogChain chain(t, {}, DeviceInstance::nominal(t));
    for (int i = 0; i <= 2000; ++i) {
        const double v = 0.2 + 1.1 * i / 2000.0;
        const auto in = chain.propagate(chain.front_end_sample(v));
        REQUIRE(in.values.size() == 64);
        bool seen_negative = false;
        for (double x : in.values) {
            if (x < 0.0) seen_negative = true;
            if (seen_negative) CHECK_FALSE(x > 0.0);
        }
    }
}

TEST_CASE("offset averaging: midpoints carry 1/sqrt(2) of the parent spread") {
    // Offsets only on the front-end amplifiers, fully transferred (no IOS).
    const auto t = build_topology({});
    MismatchModel m;
    m.sigma_amp_offset = 4e-3;
    m.ios_residual_factor = 1.0;
    std::mt19937_64 gen(99);
    std::normal_distribution<double> nd(0.0, m.sigma_amp_offset);
    const auto levels = threshold_levels(t);
    std::vector<double> parent_err;
    std::vector<double> mid_err;
    for (int trial = 0; trial < 3000; ++trial) {
        auto inst = DeviceInstance::nominal(t);
        for (auto& o : inst.amp_offsets[0]) o = nd(gen);
        const AnalogChain chain(t, m, inst);
        // Crossing j*8 is front-end tap j; crossing j*8+4 is the midpoint of taps j, j+1.
        for (std::size_t j = 1; j < 8; ++j) parent_err.push_back(crossing(chain, 8 * j - 1) - levels[8 * j]);
        for (std::size_t j = 0; j < 8; ++j) mid_err.push_back(crossing(chain, 8 * j + 3) - levels[8 * j + 4]);
    }
    const double ratio = stddev(mid_err) / stddev(parent_err);
    CHECK(stddev(parent_err) == doctest::Approx(m.sigma_amp_offset).epsilon(0.03));
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
}
