#include "commands.hpp"

#include "runner.hpp"

#include <flashadc/characterize.hpp>
#include <flashadc/errors.hpp>
#include <flashadc/fft.hpp>
#include <flashadc/montecarlo.hpp>
#include <flashadc/report.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace flashadc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::string op;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    unsigned workers = 1;
};

RunConfig load(const Common& c) {
    if (c.config.empty()) throw ConfigError("missing required option --config");
    std::ifstream is(c.config);
    if (!is) throw ConfigError("cannot read config " + c.config);
    json doc;
    try {
        doc = json::parse(is, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config " + c.config + " is not valid JSON: " + e.what());
    }
    if (c.seed && doc.is_object()) doc["seed"] = *c.seed;
    return parse_config(doc, c.op);
}

fs::path output_dir(const RunConfig* cfg) {
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    if (cfg && !cfg->output_dir.empty()) return cfg->output_dir;
    return ".";
}

// --out names a file prefix; default is <out dir>/<stem>.
fs::path output_prefix(const Common& c, const RunConfig* cfg, const std::string& stem) {
    fs::path p = c.out.empty() ? output_dir(cfg) / stem : fs::path(c.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

fs::path with_ext(fs::path p, const std::string& ext) {
    p += ext;
    return p;
}

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Error::Category::Runtime, "cannot write " + path.string());
    os << doc.dump(2) << '\n';
}

std::string fmt(double v, int prec = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const Common& c, std::size_t samples, int decimate, std::ostream& out) {
    auto cfg = load(c);
    auto stream = simulate(cfg, samples, c.workers);
    if (decimate > 1) stream = downsample(stream, decimate);

    const std::string format_name = c.format.empty() ? cfg.output_format : c.format;
    const auto format = stream_format_from_string(format_name);
    const char* ext = format == StreamFormat::Csv ? ".csv" : format == StreamFormat::Json ? ".json" : ".bin";
    fs::path path = c.out.empty() ? output_dir(&cfg) / (std::string("codes") + ext) : fs::path(c.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_stream(path, stream, format);

    int metastable = 0;
    for (const auto& s : stream.samples) metastable += s.metastable_count;
    out << "wrote " << stream.samples.size() << " samples to " << path.string() << " (config " << cfg.hash
        << ", seed " << cfg.seed << ", metastable decisions " << metastable << ")\n";
    return kOk;
}

// -------------------------------------------------------------- characterize

struct Recording {
    CodeStream stream;
    json provenance;
    int n_harmonics = 7;
    std::optional<RunConfig> cfg;
};

Recording record(const Common& c, const std::string& stream_path) {
    Recording rec;
    if (!stream_path.empty()) {
        rec.stream = read_stream(stream_path);
        const auto& m = rec.stream.meta;
        rec.provenance = {{"tool_version", m.value("tool_version", "")},
                          {"config_hash", m.value("config_hash", "")},
                          {"seed", m.value("seed", json(nullptr))},
                          {"source_stream", stream_path}};
        if (m.contains("config")) {
            rec.provenance["config"] = m.at("config");
            rec.n_harmonics = m.at("config").value("characterize", json::object()).value("n_harmonics", 7);
        }
    } else {
        rec.cfg = load(c);
        rec.stream = simulate(*rec.cfg, 0, c.workers);
        rec.provenance = provenance(*rec.cfg);
        rec.n_harmonics = rec.cfg->n_harmonics;
    }
    return rec;
}

std::string sine_kind(const CodeStream& s) {
    return s.meta.value("stimulus", json::object()).value("waveform", std::string("unknown"));
}

int cmd_characterize(const Common& c, const std::string& mode, const std::string& stream_path, std::size_t n_fft_flag,
                     std::ostream& out) {
    if (mode != "linearity" && mode != "spectrum") throw ConfigError("--mode must be linearity or spectrum");
    if (stream_path.empty() && c.config.empty()) throw ConfigError("characterize needs --stream or --config");
    auto rec = record(c, stream_path);
    const auto& stream = rec.stream;
    if (sine_kind(stream) != "sine")
        throw InvalidStimulus("the " + mode + " measurement requires a sine stimulus, got '" + sine_kind(stream) + "'");

    const int levels = 1 << stream.meta.value("resolution_bits", 6);
    const auto codes = stream.codes();
    const auto prefix = output_prefix(c, rec.cfg ? &*rec.cfg : nullptr, "characterize_" + mode);

    json report = {{"schema", kReportSchema}, {"kind", mode}, {"provenance", rec.provenance}};

    if (mode == "linearity") {
        const auto lin = histogram_linearity(codes, levels);
        report["linearity"] = to_json(lin);
        std::ofstream csv(with_ext(prefix, ".csv"), std::ios::binary);
        csv << "# flashadc " << json{{"schema", kReportSchema}, {"kind", "linearity"}, {"provenance", rec.provenance}}.dump() << '\n';
        csv << "code,count,dnl,inl\n";
        for (int k = 0; k < levels; ++k)
            csv << k << ',' << lin.histogram[static_cast<std::size_t>(k)] << ',' << fmt(lin.dnl[static_cast<std::size_t>(k)], 6)
                << ',' << fmt(lin.inl[static_cast<std::size_t>(k)], 6) << '\n';
        out << "peak DNL " << fmt(lin.peak_dnl, 3) << " LSB, peak INL " << fmt(lin.peak_inl, 3) << " LSB ("
            << codes.size() << " samples)\n";
    } else {
        const double fsr = stream.sample_rate();
        const auto stim = stream.meta.at("stimulus");
        const double f_in = stim.at("frequency").get<double>() * 1.0;
        std::size_t n_fft = n_fft_flag ? n_fft_flag : stim.value("n_fft", std::size_t{4096});
        if (n_fft > codes.size()) n_fft = std::bit_floor(codes.size());
        SpectralMetrics m;
        try {
            m = spectral_metrics(std::span<const int>(codes), fsr, f_in, n_fft, rec.n_harmonics);
        } catch (const NonCoherent& e) {
            throw NonCoherent(std::string(e.what()) + "; hint: nearest coherent frequency is " +
                              fmt(coherent_frequency(fsr, n_fft, f_in), 3) + " Hz");
        }
        report["spectrum"] = to_json(m);
        std::vector<double> x(codes.begin(), codes.begin() + static_cast<std::ptrdiff_t>(n_fft));
        const auto p = power_spectrum(x);
        std::ofstream csv(with_ext(prefix, ".csv"), std::ios::binary);
        csv << "# flashadc " << json{{"schema", kReportSchema}, {"kind", "spectrum"}, {"provenance", rec.provenance}}.dump() << '\n';
        csv << "bin,frequency,power_dbc\n";
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double rel = p[k] > 0.0 ? 10.0 * std::log10(p[k] / p[m.fundamental_bin]) : -400.0;
            csv << k << ',' << fmt(static_cast<double>(k) * fsr / static_cast<double>(n_fft), 3) << ',' << fmt(rel, 4) << '\n';
        }
        out << "SNDR " << fmt(m.sndr_db) << " dB, SNR " << fmt(m.snr_db) << " dB, SFDR " << fmt(m.sfdr_db)
            << " dB, THD " << fmt(m.thd_db) << " dB, ENOB " << fmt(m.enob) << " bits (f_in " << fmt(f_in / 1e6, 3)
            << " MHz, fs " << fmt(fsr / 1e6, 3) << " MHz, n_fft " << n_fft << ")\n";
    }
    write_json_file(with_ext(prefix, ".json"), report);
    return kOk;
}

// --------------------------------------------------------------------- sweep

int cmd_sweep(const Common& c, const std::string& axis, int points_flag, std::ostream& out) {
    if (axis != "fsignal" && axis != "fsample") throw ConfigError("--axis must be fsignal or fsample");
    const auto cfg = load(c);
    const int points = points_flag > 0 ? points_flag : (axis == "fsignal" ? cfg.fsignal.points : cfg.fsample.points);
    const auto res = axis == "fsignal" ? run_fsignal_sweep(cfg, points, c.workers) : run_fsample_sweep(cfg, points, c.workers);

    const auto prefix = output_prefix(c, &cfg, "sweep_" + axis);
    json meta = provenance(cfg);
    meta["schema"] = kSweepSchema;
    meta["axis"] = axis;
    {
        std::ofstream csv(with_ext(prefix, ".csv"), std::ios::binary);
        write_sweep_csv(csv, res.rows, meta);
    }
    json doc = meta;
    doc["summary"] = res.summary;
    auto& rows = doc["rows"] = json::array();
    for (const auto& r : res.rows) {
        json row = {{"fs", r.fs}, {"f_in", r.f_in}};
        if (r.error.empty())
            row["metrics"] = to_json(r.metrics);
        else
            row["error"] = r.error;
        rows.push_back(row);
    }
    write_json_file(with_ext(prefix, ".json"), doc);

    for (const auto& r : res.rows) {
        out << "fs " << fmt(r.fs / 1e6, 1) << " MHz  f_in " << fmt(r.f_in / 1e6, 3) << " MHz  ";
        if (r.error.empty())
            out << "SNDR " << fmt(r.metrics.sndr_db) << " dB  ENOB " << fmt(r.metrics.enob) << '\n';
        else
            out << "failed: " << r.error << '\n';
    }
    if (axis == "fsignal") {
        if (res.erbw)
            out << "ERBW " << fmt(*res.erbw / 1e6, 1) << " MHz (low-frequency SNDR " << fmt(res.low_freq_sndr) << " dB)\n";
        else
            out << "ERBW not found: " << res.erbw_error << '\n';
    } else {
        if (res.max_fs_enob5)
            out << "ENOB >= 5 up to fs = " << fmt(*res.max_fs_enob5 / 1e6, 1) << " MHz\n";
        else
            out << "ENOB below 5 bits at the first sweep point\n";
    }
    return kOk;
}

// ------------------------------------------------------------------------ mc

int cmd_mc(const Common& c, std::size_t trials_flag, bool histogram, bool per_trial, std::ostream& out) {
    const auto cfg = load(c);
    EnsembleConfig ec;
    ec.topology = cfg.topology;
    ec.model = cfg.mismatch;
    ec.n_trials = trials_flag ? trials_flag : cfg.montecarlo.n_trials;
    ec.master_seed = cfg.seed;
    ec.dnl_limit = cfg.montecarlo.dnl_limit;
    ec.inl_limit = cfg.montecarlo.inl_limit;
    ec.workers = c.workers;
    if (histogram || cfg.montecarlo.histogram) {
        HistogramOptions h;
        h.latch = cfg.latch;
        h.fs = cfg.stimulus.fs;
        h.f_target = cfg.stimulus.frequency > 0.0 ? cfg.stimulus.frequency : cfg.stimulus.fs / 12.0;
        h.n_samples = std::max<std::size_t>(cfg.stimulus.n_samples, 1u << 17);
        ec.histogram = h;
    }
    const auto ensemble = run_ensemble(ec);
    const auto avg = averaging_experiment(cfg.mismatch, cfg.topology, cfg.montecarlo.averaging_trials, cfg.seed, c.workers);

    const auto prefix = output_prefix(c, &cfg, "mc");
    json doc = provenance(cfg);
    doc["schema"] = kEnsembleSchema;
    doc["ensemble"] = to_json(ensemble);
    doc["averaging"] = to_json(avg);
    write_json_file(with_ext(prefix, ".json"), doc);

    if (per_trial || c.format == "csv") {
        std::ofstream csv(with_ext(prefix, ".csv"), std::ios::binary);
        json meta = provenance(cfg);
        meta["schema"] = kEnsembleSchema;
        csv << "# flashadc " << meta.dump() << '\n';
        csv << "trial,seed,peak_dnl,peak_inl,threshold_rms_lsb,pass\n";
        for (const auto& t : ensemble.trials)
            csv << t.index << ',' << t.seed << ',' << fmt(t.peak_dnl, 6) << ',' << fmt(t.peak_inl, 6) << ','
                << fmt(t.threshold_rms_lsb, 6) << ',' << (t.pass ? 1 : 0) << '\n';
    }

    out << ensemble.n_trials << " trials: yield " << fmt(100.0 * ensemble.yield, 1) << "% (DNL <= "
        << fmt(ensemble.dnl_limit) << ", INL <= " << fmt(ensemble.inl_limit) << " LSB), mean peak DNL "
        << fmt(ensemble.mean_peak_dnl, 3) << ", mean peak INL " << fmt(ensemble.mean_peak_inl, 3)
        << ", threshold sigma " << fmt(ensemble.threshold_sigma_lsb, 4) << " LSB\n";
    if (avg.applicable)
        out << "averaging ratio (interpolated/parent) " << fmt(avg.ratio, 4) << " over " << avg.n_trials << " trials\n";
    else
        out << "averaging experiment: NotApplicable (no amplifier offset)\n";
    return kOk;
}

// ----------------------------------------------------------------------- fom

struct FomRow {
    std::string name;
    FomInput input;
    double fom = 0.0;
};

std::vector<FomRow> read_comparison(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read comparison table " + path);
    std::vector<FomRow> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("name", 0) == 0) continue;
        std::istringstream ss(line);
        FomRow r;
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4) throw ConfigError("comparison row needs name,power_w,enob_dc,erbw_hz: " + line);
        try {
            r.name = fields[0];
            r.input = {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
        } catch (const std::exception&) {
            throw ConfigError("bad number in comparison row: " + line);
        }
        if (!(r.input.power > 0.0) || !(r.input.enob_dc > 0.0) || !(r.input.erbw > 0.0))
            throw ConfigError("comparison values must be positive: " + line);
        r.fom = fom(r.input);
        rows.push_back(r);
    }
    return rows;
}

int cmd_fom(const Common& c, double power, double enob_dc, double erbw_hz, const std::string& compare,
            std::ostream& out) {
    if (!(power > 0.0) || !(enob_dc > 0.0) || !(erbw_hz > 0.0))
        throw ConfigError("--power, --enob-dc and --erbw must all be positive");
    const FomInput in{power, enob_dc, erbw_hz};
    const double value = fom(in);
    out << "FoM " << fmt(value * 1e12, 3) << " pJ/convstep (power " << fmt(power * 1e3, 1) << " mW, ENOB_DC "
        << fmt(enob_dc, 2) << " b, ERBW " << fmt(erbw_hz / 1e6, 1) << " MHz)\n";
    if (compare.empty()) return kOk;

    auto rows = read_comparison(compare);
    rows.push_back({"this work", in, value});
    std::stable_sort(rows.begin(), rows.end(), [](const FomRow& a, const FomRow& b) { return a.fom < b.fom; });
    out << "rank,name,power_w,enob_dc,erbw_hz,fom_pj\n";
    std::ostringstream table;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        table << i + 1 << ',' << r.name << ',' << r.input.power << ',' << r.input.enob_dc << ',' << r.input.erbw << ','
              << fmt(r.fom * 1e12, 4) << '\n';
    }
    out << table.str();
    if (!c.out.empty()) {
        fs::path p(c.out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream os(p, std::ios::binary);
        const json meta = {{"schema", "flashadc.fom/1"},
                           {"tool_version", kToolVersion},
                           {"config_hash", fnv1a_hex(json{{"power", power}, {"enob_dc", enob_dc}, {"erbw", erbw_hz}}.dump())},
                           {"seed", nullptr}};
        os << "# flashadc " << meta.dump() << '\n' << "rank,name,power_w,enob_dc,erbw_hz,fom_pj\n" << table.str();
    }
    return kOk;
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
        case Error::Category::Config: return kConfigError;
        case Error::Category::Measurement: return kMeasurementError;
        case Error::Category::Runtime: return kRuntimeError;
    }
    return kRuntimeError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Behavioural simulator and characterization harness for a 6-bit capacitive-interpolation flash ADC",
                 "flashadc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Common common;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", common.config, "Run configuration (JSON)");
        if (needs_config) opt->required();
        sub->add_option("--op", common.op, "Operating point defined in the config");
        sub->add_option("--seed", common.seed, "Override the master seed");
        sub->add_option("--out", common.out, "Output file (simulate) or file prefix");
        sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json", "bin"}));
        sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
    };

    std::size_t samples = 0;
    int decimate = 1;
    auto* sim = app.add_subcommand("simulate", "Convert the configured stimulus and write a code stream");
    add_common(sim, true);
    sim->add_option("--samples", samples, "Number of samples (default: stimulus.n_samples)");
    sim->add_option("--decimate", decimate, "Keep every n-th sample")->check(CLI::PositiveNumber);

    std::string mode;
    std::string stream_path;
    std::size_t n_fft = 0;
    auto* chr = app.add_subcommand("characterize", "Histogram linearity or FFT spectral metrics");
    add_common(chr, false);
    chr->add_option("--mode", mode, "linearity | spectrum")->required();
    chr->add_option("--stream", stream_path, "Recorded code stream instead of --config");
    chr->add_option("--n-fft", n_fft, "FFT length for spectrum mode");

    std::string axis;
    int points = 0;
    auto* swp = app.add_subcommand("sweep", "SNDR/ENOB versus signal frequency or sample rate");
    add_common(swp, true);
    swp->add_option("--axis", axis, "fsignal | fsample")->required();
    swp->add_option("--points", points, "Number of sweep points (>= 3)");

    std::size_t trials = 0;
    bool histogram = false;
    bool per_trial = false;
    auto* mc = app.add_subcommand("mc", "Monte Carlo mismatch ensemble and averaging experiment");
    add_common(mc, true);
    mc->add_option("--trials", trials, "Number of device instances");
    mc->add_flag("--histogram", histogram, "Evaluate every trial with a full sine-histogram test");
    mc->add_flag("--per-trial", per_trial, "Also write per-trial CSV");

    double power = 0.0;
    double enob_dc = 0.0;
    double erbw_hz = 0.0;
    std::string compare;
    auto* fm = app.add_subcommand("fom", "Figure of merit Power / (2^ENOB * 2 * ERBW)");
    fm->add_option("--power", power, "Power in watts")->required();
    fm->add_option("--enob-dc", enob_dc, "Low-frequency ENOB in bits")->required();
    fm->add_option("--erbw", erbw_hz, "Effective resolution bandwidth in hertz")->required();
    fm->add_option("--compare", compare, "CSV of published converters: name,power_w,enob_dc,erbw_hz");
    fm->add_option("--out", common.out, "Write the ranked table here");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "flashadc: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(common, samples, decimate, out);
        if (chr->parsed()) return cmd_characterize(common, mode, stream_path, n_fft, out);
        if (swp->parsed()) return cmd_sweep(common, axis, points, out);
        if (mc->parsed()) return cmd_mc(common, trials, histogram, per_trial, out);
        if (fm->parsed()) return cmd_fom(common, power, enob_dc, erbw_hz, compare, out);
    } catch (const Error& e) {
        err << "flashadc: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "flashadc: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kConfigError;
}

}  // namespace flashadc::cli
