#include "ks/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ks/error.hpp"

namespace ks::cli {

namespace {

const std::vector<std::string> kCommands{"spectrum", "independence", "concentration", "interp", "coeffs",
                                         "span",     "shatter",      "gd",            "width"};

// Long option name -> help text, for the command-specific options.
const std::vector<std::pair<std::string, std::string>> kOptions{
    {"kernel", "kernel spec, e.g. gaussian:sigma=0.5 | imq:c=1,alpha=0.5 | laplace:sigma=0.3"},
    {"kernels", "';'-separated kernel specs (gd)"},
    {"points", "point set: grid:d=1,m=64 | uniform:d=1,n=200 | mixture:...,centers=a/b,width=w | circle:n=100 | csv:FILE"},
    {"measures", "';'-separated measures: uniform | grid | mixture:centers=..,widths=..,weights=.. | circle"},
    {"mu", "measure mu (span)"},
    {"nu", "measure nu (span)"},
    {"n", "sample size"},
    {"d", "dimension"},
    {"ns", "','-separated sizes (concentration, shatter)"},
    {"trials", "samples per size (concentration)"},
    {"target", "kernel expansion target, e.g. '1@0.31 + 1@0.67' (interp)"},
    {"grids", "','-separated points per axis (interp)"},
    {"probe", "probe points per axis (interp)"},
    {"targets", "number of random in-space targets (coeffs)"},
    {"max-terms", "terms per random target (coeffs)"},
    {"jmax", "nu-eigenfunctions checked (span)"},
    {"kcheck", "mu-eigenfunctions kept before the residual check (span)"},
    {"gamma", "shattering margin (shatter)"},
    {"mode", "brute | heuristic (shatter)"},
    {"labels", "random | rkhs (gd)"},
    {"eta", "step size, 0 for 1/(2 lambda_max) (gd)"},
    {"eps", "target training MSE (gd)"},
    {"max-steps", "step cap (gd)"},
    {"functions", "';'-separated Gaussian mixtures, e.g. 'gm: 1@0.3/1' (width)"},
    {"sigma1", "wide kernel width (width)"},
    {"sigma2", "','-separated narrow widths (width)"},
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        std::size_t b = cur.find_first_not_of(" \t");
        std::size_t e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

double to_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError("bad number '" + s + "' for " + what);
    return v;
}

std::size_t to_count(const std::string& s, const std::string& what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError("bad count '" + s + "' for " + what);
    return v;
}

std::uint64_t to_seed(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw UsageError("bad seed '" + s + "' from " + what);
    return v;
}

std::vector<std::size_t> to_counts(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& p : split(s, ',')) out.push_back(to_count(p, what));
    if (out.empty()) throw ParseError("empty list for " + what);
    return out;
}

std::vector<double> to_numbers(const std::string& s, char sep, const std::string& what) {
    std::vector<double> out;
    for (const auto& p : split(s, sep)) out.push_back(to_number(p, what));
    return out;
}

// "kind:key=value,key=value" -> kind and key/value map.
std::pair<std::string, std::map<std::string, std::string>> split_spec(const std::string& spec) {
    std::size_t colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::map<std::string, std::string> kv;
    if (colon != std::string::npos) {
        for (const auto& item : split(spec.substr(colon + 1), ',')) {
            std::size_t eq = item.find('=');
            if (eq == std::string::npos) throw ParseError("expected key=value in '" + spec + "', got '" + item + "'");
            std::string key = item.substr(0, eq);
            if (kv.contains(key)) throw ParseError("duplicate key '" + key + "' in '" + spec + "'");
            kv[key] = item.substr(eq + 1);
        }
    }
    return {kind, kv};
}

void reject_unknown(const std::map<std::string, std::string>& kv, std::initializer_list<const char*> known,
                    const std::string& spec) {
    for (const auto& [k, v] : kv) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ParseError("unknown key '" + k + "' in '" + spec + "'");
    }
}

MeasureSpec measure_from(const std::string& kind, const std::map<std::string, std::string>& kv, std::size_t d,
                         const std::string& spec) {
    MeasureSpec m;
    if (kind == "uniform") {
        m.kind = MeasureSpec::Kind::UniformIid;
    } else if (kind == "grid") {
        m.kind = MeasureSpec::Kind::Grid;
    } else if (kind == "circle") {
        m.kind = MeasureSpec::Kind::Circle;
    } else if (kind == "mixture") {
        m.kind = MeasureSpec::Kind::GaussianMixture;
        std::vector<std::vector<double>> centers;
        if (kv.contains("centers")) {
            for (const auto& c : split(kv.at("centers"), '/')) centers.push_back(to_numbers(c, ':', "mixture center"));
        } else {
            for (double c : {0.25, 0.75}) centers.push_back(std::vector<double>(d, c));
        }
        std::vector<double> widths, weights;
        if (kv.contains("width") && kv.contains("widths")) throw ParseError("give width or widths, not both: '" + spec + "'");
        if (kv.contains("widths")) widths = to_numbers(kv.at("widths"), '/', "mixture widths");
        else widths.assign(centers.size(), kv.contains("width") ? to_number(kv.at("width"), "mixture width") : 0.08);
        if (kv.contains("weights")) weights = to_numbers(kv.at("weights"), '/', "mixture weights");
        else weights.assign(centers.size(), 1.0 / static_cast<double>(centers.size()));
        if (widths.size() != centers.size() || weights.size() != centers.size())
            throw ParseError("mixture centers, widths and weights differ in length: '" + spec + "'");
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (centers[j].size() != d) throw ParseError("mixture center dimension differs from d in '" + spec + "'");
            m.components.push_back({centers[j], widths[j], weights[j]});
        }
    } else {
        throw ParseError("unknown measure kind '" + kind + "' in '" + spec + "'");
    }
    if (kv.contains("seed")) m.seed = to_seed(kv.at("seed"), spec);
    return m;
}

// "1@0.31 + -0.5@0.67" with ':'-separated coordinates in d > 1.
Interpolant parse_target(const std::string& text, const KernelSpec& k) {
    std::vector<double> coords;
    std::vector<double> coefs;
    std::size_t d = 0;
    std::string normalized;
    for (char c : text) normalized.push_back(c == '+' ? ';' : c);
    for (const auto& term : split(normalized, ';')) {
        std::size_t at = term.find('@');
        if (at == std::string::npos) throw ParseError("target term needs coef@center: '" + term + "'");
        const auto coef = split(term.substr(0, at), ' ');
        coefs.push_back(to_number(coef.size() == 1 ? coef.front() : std::string(), "target coefficient"));
        std::vector<double> c = to_numbers(term.substr(at + 1), ':', "target center");
        if (d == 0) d = c.size();
        if (c.size() != d || d == 0) throw ParseError("target centers differ in dimension: '" + text + "'");
        coords.insert(coords.end(), c.begin(), c.end());
    }
    if (coefs.empty()) throw ParseError("empty target '" + text + "'");
    DDVector a(coefs.size());
    for (std::size_t i = 0; i < coefs.size(); ++i) a.set(i, DD(coefs[i]));
    return expansion(PointSet(Domain::unit_cube(d), std::move(coords), "target"), a, k);
}

void echo_cli(Report& r, const RunConfig& cfg) {
    r.config.insert(r.config.begin(), {{"command", cfg.command},
                                       {"seed", std::to_string(cfg.seed)},
                                       {"precision", to_string(cfg.precision)}});
    for (const auto& [k, v] : cfg.options) r.echo("option." + k, v);
}

}  // namespace

std::string RunConfig::option(const std::string& key, const std::string& fallback) const {
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
}

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out) {
    CLI::App app{"kspec: constructive checks of spectral and approximation properties of radial kernels"};
    app.name("kspec");
    app.allow_config_extras(false);
    app.set_config("--config", "", "read key=value options from FILE (command-line flags win)");

    RunConfig cfg;
    std::string seed_text, precision = "dd";
    std::vector<std::string> thresholds;
    app.add_option("command", cfg.command, "experiment to run")->required()->check(CLI::IsMember(kCommands));
    app.add_option("--seed", seed_text, "master seed (default: $KS_SEED, else 0)");
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
    app.add_option("--precision", precision, "dd | f64")->check(CLI::IsMember({"dd", "f64"}))->capture_default_str();
    app.add_option("--threshold", thresholds, "override a pass/fail threshold, key=value (repeatable)");
    app.add_flag("--dump-eigs", cfg.dump_eigs, "spectrum: also write <id>.eigs.csv with every eigenvalue");

    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
    for (const auto& [name, help] : kOptions) opts[name] = app.add_option("--" + name, values[name], help);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    cfg.precision = precision == "f64" ? Precision::Float64 : Precision::DoubleDouble;
    if (!seed_text.empty()) {
        cfg.seed = to_seed(seed_text, "--seed");
    } else if (const char* env = std::getenv("KS_SEED"); env && *env) {
        cfg.seed = to_seed(env, "KS_SEED");
    }
    for (const auto& t : thresholds) {
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("--threshold expects key=value, got '" + t + "'");
        try {
            cfg.thresholds[t.substr(0, eq)] = to_number(t.substr(eq + 1), "--threshold " + t.substr(0, eq));
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    }
    for (const auto& [name, opt] : opts)
        if (opt->count() > 0) cfg.options[name] = values[name];
    return cfg;
}

PointSet parse_points(const std::string& spec, std::uint64_t seed) {
    if (spec.rfind("csv:", 0) == 0) {
        std::string path = spec.substr(4);
        std::ifstream in(path);
        if (!in) throw ParseError("cannot read point file '" + path + "'");
        std::string header;
        std::getline(in, header);
        const std::size_t d = split(header, ',').size();
        in.clear();
        in.seekg(0);
        return read_points_csv(in, Domain::unit_cube(d), spec);
    }
    auto [kind, kv] = split_spec(spec);
    const std::size_t d = kv.contains("d") ? to_count(kv.at("d"), "d") : (kind == "circle" ? 2 : 1);
    const Domain domain = Domain::unit_cube(d);
    if (kind == "grid") {
        reject_unknown(kv, {"d", "m"}, spec);
        if (!kv.contains("m")) throw ParseError("grid needs m=points-per-axis: '" + spec + "'");
        PointSet g = gen_grid(domain, to_count(kv.at("m"), "m"));
        return PointSet(domain, g.coords(), spec);
    }
    reject_unknown(kv, {"d", "n", "seed", "centers", "width", "widths", "weights"}, spec);
    if (!kv.contains("n")) throw ParseError("sampled point sets need n=count: '" + spec + "'");
    std::map<std::string, std::string> measure_kv = kv;
    measure_kv.erase("d");
    measure_kv.erase("n");
    MeasureSpec m = measure_from(kind, measure_kv, d, spec);
    if (!kv.contains("seed")) m.seed = seed;
    PointSet x = gen_sample(m, domain, to_count(kv.at("n"), "n"));
    return PointSet(domain, x.coords(), spec);
}

MeasureSpec parse_measure(const std::string& spec, std::size_t d) {
    auto [kind, kv] = split_spec(spec);
    // Runners derive each sample's seed from the master seed.
    reject_unknown(kv, {"centers", "width", "widths", "weights"}, spec);
    return measure_from(kind, kv, d, spec);
}

Report execute(const RunConfig& cfg) {
    const std::string& c = cfg.command;
    auto opt = [&](const std::string& key, const std::string& fallback) { return cfg.option(key, fallback); };
    auto count = [&](const std::string& key, std::size_t fallback) {
        auto it = cfg.options.find(key);
        return it == cfg.options.end() ? fallback : to_count(it->second, "--" + key);
    };
    auto number = [&](const std::string& key, double fallback) {
        auto it = cfg.options.find(key);
        return it == cfg.options.end() ? fallback : to_number(it->second, "--" + key);
    };
    auto measures = [&](const std::string& key, const std::string& fallback, std::size_t d) {
        std::vector<MeasureSpec> out;
        for (const auto& m : split(opt(key, fallback), ';')) out.push_back(parse_measure(m, d));
        return out;
    };

    Report r;
    if (c == "spectrum") {
        SpectrumConfig s{parse_points(opt("points", "grid:d=1,m=64"), cfg.seed),
                         KernelSpec::parse(opt("kernel", "gaussian:sigma=0.5")), cfg.precision, cfg.thresholds};
        r = run_spectrum(s);
        if (!cfg.dump_eigs) r.extra.clear();
    } else if (c == "independence") {
        const std::size_t d = count("d", 1);
        r = run_measure_independence({KernelSpec::parse(opt("kernel", "gaussian:sigma=0.5")), Domain::unit_cube(d),
                                      measures("measures", "uniform;grid;mixture", d), count("n", 200), cfg.seed,
                                      cfg.thresholds});
    } else if (c == "concentration") {
        const std::size_t d = count("d", 1);
        auto ms = measures("measures", "uniform", d);
        if (ms.size() != 1) throw ParseError("concentration takes a single measure");
        r = run_concentration_compare({KernelSpec::parse(opt("kernel", "gaussian:sigma=0.5")), Domain::unit_cube(d),
                                       ms.front(), to_counts(opt("ns", "50,100,200,400"), "--ns"), count("trials", 2),
                                       cfg.seed, cfg.thresholds});
    } else if (c == "interp") {
        const KernelSpec k = KernelSpec::parse(opt("kernel", "gaussian:sigma=0.5"));
        Interpolant target = parse_target(opt("target", "1@0.31 + 1@0.67"), k);
        const std::size_t d = target.centers.dim();
        r = run_interp_decay({k, Domain::unit_cube(d), std::move(target), to_counts(opt("grids", "5,9,17,33"), "--grids"),
                              count("probe", d == 1 ? 1001 : 101), cfg.thresholds});
    } else if (c == "coeffs") {
        const std::size_t d = count("d", 1);
        r = run_coeff_decay({KernelSpec::parse(opt("kernel", "gaussian:sigma=0.5")), Domain::unit_cube(d),
                             measures("measures", "uniform;grid;mixture", d), count("n", 100), count("targets", 10),
                             count("max-terms", 3), cfg.seed, cfg.thresholds});
    } else if (c == "span") {
        const std::size_t d = count("d", 1);
        r = run_span_invariance({KernelSpec::parse(opt("kernel", "gaussian:sigma=0.5")), Domain::unit_cube(d),
                                 parse_measure(opt("mu", "uniform"), d),
                                 parse_measure(opt("nu", "mixture:centers=0.35/0.8,widths=0.15/0.1,weights=0.6/0.4"), d),
                                 count("n", 100), count("jmax", 5), count("kcheck", 20), cfg.seed, cfg.thresholds});
    } else if (c == "shatter") {
        ShatterOptions so;
        const std::string mode = opt("mode", "brute");
        if (mode != "brute" && mode != "heuristic") throw ParseError("--mode must be brute or heuristic");
        so.mode = mode == "brute" ? ShatterMode::Brute : ShatterMode::Heuristic;
        so.seed = cfg.seed;
        r = run_shatter_growth({KernelSpec::parse(opt("kernel", "gaussian:sigma=1")), count("d", 1), number("gamma", 0.5),
                                to_counts(opt("ns", "1,2,4,8,12,16"), "--ns"), so, cfg.thresholds});
    } else if (c == "gd") {
        GdConfig g{.kernels = {}, .domain = Domain::unit_cube(count("d", 2)), .thresholds = cfg.thresholds};
        for (const auto& k : split(opt("kernels", "gaussian:sigma=0.3;laplace:sigma=0.3"), ';'))
            g.kernels.push_back(KernelSpec::parse(k));
        g.n = count("n", 100);
        const std::string labels = opt("labels", "random");
        if (labels != "random" && labels != "rkhs") throw ParseError("--labels must be random or rkhs");
        g.labels = labels == "random" ? GdConfig::Labels::Random : GdConfig::Labels::Rkhs;
        g.eta = number("eta", 0.0);
        g.stop_loss = number("eps", 0.1);
        g.max_steps = count("max-steps", 100000);
        g.seed = cfg.seed;
        r = run_gd_capacity(g);
    } else if (c == "width") {
        WidthConfig w;
        if (cfg.options.contains("functions")) {
            for (const auto& f : split(cfg.options.at("functions"), ';')) w.functions.push_back(GaussMixtureFn::parse(f));
        } else {
            w.functions = default_width_functions();
        }
        w.sigma1 = number("sigma1", 1.0);
        w.sigma2s = to_numbers(opt("sigma2", "0.5,0.7"), ',', "--sigma2");
        w.thresholds = cfg.thresholds;
        r = run_width_report(w);
    } else {
        throw UsageError("unknown command '" + c + "'");
    }
    echo_cli(r, cfg);
    return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        auto parsed = parse_args(args, out);
        if (!parsed) return kExitPass;
        cfg = std::move(*parsed);
    } catch (const UsageError& e) {
        err << "kspec: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }

    Report report;
    try {
        report = execute(cfg);
    } catch (const UsageError& e) {
        err << "kspec: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "kspec: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "kspec: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "kspec: " << cfg.command << " failed: " << e.what() << "\n";
        return kExitFail;
    }

    std::vector<std::filesystem::path> paths;
    try {
        paths = write_report(report, cfg.out);
    } catch (const std::exception& e) {
        err << "kspec: cannot write report to '" << cfg.out << "': " << e.what() << "\n";
        return kExitIo;
    }

    for (const auto& f : report.flags)
        out << (f.pass ? "PASS " : "FAIL ") << f.name << ": " << format_double(f.value) << " " << f.op << " "
            << format_double(f.threshold) << "\n";
    for (const auto& note : report.notes) out << "note: " << note << "\n";
    for (const auto& p : paths) out << "wrote " << p.string() << "\n";
    return report.all_pass() ? kExitPass : kExitFail;
}

}  // namespace ks::cli
