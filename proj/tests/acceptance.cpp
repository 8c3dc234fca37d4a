// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "run_config.hpp"
#include "runner.hpp"

#include <flashadc/characterize.hpp>
#include <flashadc/code_stream.hpp>
#include <flashadc/comparator_backend.hpp>
#include <flashadc/montecarlo.hpp>
#include <flashadc/parallel.hpp>
#include <flashadc/topology.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

using namespace flashadc;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = FLASHADC_CONFIG_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string f(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

std::vector<int> convert_all(const Converter& conv, const Stimulus& s, std::size_t n) {
    std::vector<int> codes(n);
    parallel_for(n, workers(), [&](std::size_t i) { codes[i] = conv.convert(s, i).binary; });
    return codes;
}

Outcome ideal_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = cli::load_config(kConfigs / "ideal.json");
    const auto stream = cli::simulate(cfg, 0, workers());
    const auto stim = stream.meta.at("stimulus");
    const auto m = spectral_metrics(stream.codes(), stream.sample_rate(), stim.at("frequency").get<double>(), 4096,
                                    cfg.n_harmonics);
    const double dt = seconds_since(t0);
    return {within(m.sndr_db, 37.88, 0.3) && within(m.enob, 6.0, 0.05) && dt < 5.0,
            "SNDR " + f(m.sndr_db, 2) + " dB (37.88 +- 0.3), ENOB " + f(m.enob) + " (6.00 +- 0.05), " + f(dt, 2) +
                " s"};
}

Outcome reference_taps_exact() {
    const auto t = build_topology({});
    const auto taps = reference_taps(t);
    const auto levels = threshold_levels(t);
    const int f0 = t.interp_factors.front();
    double worst = 0.0;
    for (const auto& tap : taps) {
        const double l = levels[static_cast<std::size_t>(tap.index * f0)];
        worst = std::max(worst, std::abs(tap.v_ref - l) / std::abs(l));
    }
    return {taps.size() == 9 && worst <= 1e-12, std::to_string(taps.size()) + " taps, worst relative error " +
                                                    [&] {
                                                        char b[32];
                                                        std::snprintf(b, sizeof b, "%.2e", worst);
                                                        return std::string(b);
                                                    }()};
}

Outcome fom_claims() {
    const double a = fom({0.160, 5.66, 700e6}) * 1e12;
    const double b = fom({0.090, 5.64, 600e6}) * 1e12;
    const bool pa = std::abs(a / 2.2 - 1.0) <= 0.02;
    const bool pb = std::abs(b / 1.5 - 1.0) <= 0.02;
    return {pa && pb, "160 mW/5.66 b/700 MHz -> " + f(a) + " pJ (2.2 +- 2%: " + (pa ? "ok" : "off by " + f(100 * (a / 2.2 - 1), 1) + "%") +
                          "), 90 mW/5.64 b/600 MHz -> " + f(b) + " pJ (1.5 +- 2%: " + (pb ? "ok" : "off") + ")"};
}

Outcome averaging() {
    MismatchModel m;
    m.sigma_amp_offset = 0.01;
    m.ios_residual_factor = 1.0;
    const auto r = averaging_experiment(m, build_topology({}), 10000, 1, workers());
    const double target = 1.0 / std::sqrt(2.0);
    return {r.applicable && std::abs(r.ratio / target - 1.0) <= 0.05,
            "interpolated/parent sigma " + f(r.ratio, 4) + " (0.707 +- 5%, 10^4 trials)"};
}

Outcome gain_referral() {
    const auto t = build_topology({});
    const double delta = 5e-3;
    const std::size_t k = 30;
    auto transition = [&](const DeviceInstance& inst) {
        const Converter conv(AnalogChain(t, {}, inst), LatchModel{}, 1e9, 0);
        SampleRng rng(0);
        double lo = t.v_refn + 29.0 * t.lsb();
        double hi = t.v_refn + 33.0 * t.lsb();
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (conv.convert_voltage(mid, rng).binary > static_cast<int>(k) ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto inst = DeviceInstance::nominal(t);
    const double base = transition(inst);
    inst.comp_offsets[k] = delta;
    const double shift = base - transition(inst);
    const double expect = delta / std::pow(2.5, 4);
    return {std::abs(shift / expect - 1.0) <= 0.01,
            "5 mV comparator offset moves threshold " + f(shift * 1e6, 3) + " uV (expected " + f(expect * 1e6, 3) +
                " uV +- 1%)"};
}

Outcome backend_exhaustive() {
    const auto t0 = std::chrono::steady_clock::now();
    auto clean = [](int c) { return c >= 64 ? ~0ULL : ((1ULL << c) - 1); };
    int failures = 0;
    int clean_ok = 0;
    int bubble_ok = 0;
    for (int c = 0; c <= 64; ++c) {
        const auto r = bubble_correct(clean(c));
        if (r.decodable && r.one_hot.count() == 1 && r.code == c) ++clean_ok;
        else ++failures;
    }
    for (int c = 0; c <= 64; ++c)
        for (int j = 0; j < 64; ++j) {
            const std::uint64_t w = clean(c) ^ (1ULL << j);
            // Nearest clean words in Hamming distance; ties accept their midpoint.
            int best = 65;
            double sum = 0.0;
            int count = 0;
            for (int q = 0; q <= 64; ++q) {
                const int d = std::popcount(w ^ clean(q));
                if (d < best) {
                    best = d;
                    sum = q;
                    count = 1;
                } else if (d == best) {
                    sum += q;
                    ++count;
                }
            }
            const auto r = bubble_correct(w);
            if (r.decodable && static_cast<double>(r.code) == sum / count) ++bubble_ok;
            else ++failures;
        }
    int gray_ok = 0;
    for (int c = 0; c < 64; ++c) gray_ok += gray_decode(gray_encode(c)) == c ? 1 : 0;
    int adjacent_ok = 0;
    for (int c = 0; c < 63; ++c)
        adjacent_ok += std::popcount(static_cast<unsigned>(gray_encode(c) ^ gray_encode(c + 1))) == 1 ? 1 : 0;
    const double dt = seconds_since(t0);
    return {failures == 0 && gray_ok == 64 && adjacent_ok == 63 && dt < 1.0,
            std::to_string(clean_ok) + "/65 clean, " + std::to_string(bubble_ok) + "/4160 single flips, gray " +
                std::to_string(gray_ok) + "/64 roundtrip, " + std::to_string(adjacent_ok) + "/63 adjacent, " +
                f(dt * 1e3, 1) + " ms"};
}

Outcome linearity_estimator() {
    const auto t = build_topology({});
    const std::size_t n = 1u << 20;
    const SineInput s{0.505, 0.75, coherent_frequency(600e6, n, 50e6), 0.1};
    const auto ideal = histogram_linearity(
        convert_all(Converter(AnalogChain(t, {}, DeviceInstance::nominal(t)), LatchModel{}, 600e6, 1), s, n));
    auto inst = DeviceInstance::nominal(t);
    inst.comp_offsets[30] = -0.5 * t.lsb() * t.chain_gain();  // T_31 up by half an LSB
    const auto shifted =
        histogram_linearity(convert_all(Converter(AnalogChain(t, {}, inst), LatchModel{}, 600e6, 1), s, n));
    const bool recovered = within(shifted.dnl[30], 0.5, 0.07) && within(shifted.dnl[31], -0.5, 0.07);
    return {ideal.peak_dnl < 0.05 && recovered, "ideal peak |DNL| " + f(ideal.peak_dnl, 4) +
                                                    " (< 0.05), injected +0.5 LSB -> DNL " + f(shifted.dnl[30], 3) +
                                                    " / " + f(shifted.dnl[31], 3) + " (+-0.07)"};
}

Outcome calibration() {
    const auto path = kConfigs / "paper.calibrated.json";
    const auto c600 = cli::load_config(path, "600MSps");
    const auto c1200 = cli::load_config(path, "1200MSps");
    const unsigned w = workers();

    const auto s600 = cli::simulate(c600, 0, w);
    const auto lin = histogram_linearity(s600.codes());
    const double f600 = s600.meta.at("stimulus").at("frequency").get<double>();
    const auto m600 = spectral_metrics(s600.codes(), s600.sample_rate(), f600, c600.stimulus.n_fft, c600.n_harmonics);
    const auto sw600 = cli::run_fsignal_sweep(c600, c600.fsignal.points, w);

    const auto s1200 = cli::simulate(c1200, c1200.stimulus.n_fft, w);
    const double f1200 = s1200.meta.at("stimulus").at("frequency").get<double>();
    const auto m1200 =
        spectral_metrics(s1200.codes(), s1200.sample_rate(), f1200, c1200.stimulus.n_fft, c1200.n_harmonics);
    const auto sw1200 = cli::run_fsignal_sweep(c1200, c1200.fsignal.points, w);

    const double e600 = sw600.erbw.value_or(0.0);
    const double e1200 = sw1200.erbw.value_or(0.0);
    const bool ok = lin.peak_dnl >= 0.3 && lin.peak_dnl <= 0.5 && lin.peak_inl < 0.6 && m600.sndr_db >= 35.0 &&
                    m600.sndr_db <= 36.0 && std::abs(e600 / 600e6 - 1.0) <= 0.1 && m1200.sndr_db >= 35.3 &&
                    m1200.sndr_db <= 36.3 && std::abs(e1200 / 700e6 - 1.0) <= 0.1;
    return {ok, "600 MSps: DNL " + f(lin.peak_dnl) + " INL " + f(lin.peak_inl) + " LSB, SNDR(" + f(f600 / 1e6, 1) +
                    " MHz) " + f(m600.sndr_db, 2) + " dB, ERBW " + f(e600 / 1e6, 1) + " MHz; 1.2 GSps: SNDR(" +
                    f(f1200 / 1e6, 1) + " MHz) " + f(m1200.sndr_db, 2) + " dB, ERBW " + f(e1200 / 1e6, 1) + " MHz"};
}

Outcome determinism() {
    const auto cfg = cli::load_config(kConfigs / "paper.calibrated.json", "1200MSps");
    auto dump = [&](unsigned w) {
        const auto s = cli::simulate(cfg, 16384, w);
        std::ostringstream csv;
        std::ostringstream bin;
        write_csv(csv, s);
        write_binary(bin, s);
        return csv.str() + bin.str();
    };
    const auto a = dump(1);
    const auto b = dump(1);
    const auto c = dump(workers() + 3);

    auto sweep_dump = [&](unsigned w) {
        const auto r = cli::run_fsignal_sweep(cfg, 5, w);
        std::ostringstream os;
        write_sweep_csv(os, r.rows, cli::provenance(cfg));
        return os.str();
    };
    EnsembleConfig ec;
    ec.topology = cfg.topology;
    ec.model = cfg.mismatch;
    ec.n_trials = 500;
    ec.master_seed = cfg.seed;
    auto ens_dump = [&](unsigned w) {
        ec.workers = w;
        return to_json(run_ensemble(ec), true).dump();
    };
    const bool streams = a == b && a == c;
    const bool sweeps = sweep_dump(1) == sweep_dump(workers() + 1);
    const bool ensembles = ens_dump(1) == ens_dump(workers() + 2);
    return {streams && sweeps && ensembles, std::string("stream ") + (streams ? "identical" : "DIFFERS") + ", sweep " +
                                                (sweeps ? "identical" : "DIFFERS") + ", ensemble " +
                                                (ensembles ? "identical" : "DIFFERS") + " across reruns and 1.." +
                                                std::to_string(workers() + 3) + " workers"};
}

Outcome metastability() {
    LatchModel l;
    l.regen_tau = 10e-12;
    l.decide_time = 100e-12;  // decide_time / tau = 10
    l.v_swing = 0.75;
    const int n = 1000000;
    std::vector<int> counts;
    std::vector<double> expected;
    for (int stages = 0; stages <= 2; ++stages) {
        l.relatch_stages = stages;
        SampleRng rng(derive_seed(2024, kSampleStream, static_cast<std::uint64_t>(stages)));
        int meta = 0;
        for (int i = 0; i < n; ++i) (void)latch_decide((2.0 * rng.uniform() - 1.0) * l.v_swing, 0.0, l, rng, meta);
        counts.push_back(meta);
        // Uniform on [-v_swing, v_swing]: P(|v| <= v_meta) = v_meta / v_swing.
        expected.push_back(n * l.v_meta() / l.v_swing);
    }
    const double ratio = counts[0] / expected[0];
    const bool closed_form = ratio >= 0.5 && ratio <= 2.0;
    const bool monotone = counts[1] < counts[0] && counts[2] <= counts[1];
    return {closed_form && monotone, "relatch 0: " + std::to_string(counts[0]) + " events vs " + f(expected[0], 1) +
                                         " expected (ratio " + f(ratio, 2) + ", within 2x); relatch 1, 2: " +
                                         std::to_string(counts[1]) + ", " + std::to_string(counts[2]) + " events"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"ideal-quantizer oracle", ideal_oracle},
        {"reference-tap divider exactness", reference_taps_exact},
        {"figure-of-merit arithmetic", fom_claims},
        {"interpolation averaging", averaging},
        {"comparator gain referral", gain_referral},
        {"digital backend exhaustive", backend_exhaustive},
        {"histogram linearity estimator", linearity_estimator},
        {"calibration reproduction", calibration},
        {"determinism", determinism},
        {"metastability window", metastability},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
