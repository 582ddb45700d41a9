#include "ks/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ks/error.hpp"
#include "ks/gd.hpp"
#include "ks/rng.hpp"

namespace ks {

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

double ipow(double i, std::size_t d) { return d == 1 ? i : std::pow(i, 1.0 / static_cast<double>(d)); }

Thresholds merged(const Thresholds& defaults, const Thresholds& overrides, const std::string& command,
                  Report& report) {
    Thresholds t = merge_thresholds(defaults, overrides, command);
    for (const auto& [k, v] : t) report.echo("threshold." + k, v);
    return t;
}

PointSet sample(const MeasureSpec& spec, const Domain& domain, std::size_t n, std::uint64_t seed) {
    MeasureSpec s = spec;
    s.seed = seed;
    return gen_sample(s, domain, n);
}

std::string pattern_string(const std::vector<std::int8_t>& p) {
    std::string s;
    for (auto v : p) s.push_back(v > 0 ? '+' : '-');
    return s;
}

Fit as_fit(const std::string& name, const DecayFit& f) {
    Fit out;
    out.name = name;
    out.model = "log lambda_i = a - c * i^(1/d)";
    out.params = {{"a", f.a}, {"c", f.c}, {"d", static_cast<double>(f.d)}};
    out.r2 = f.r2;
    out.count = f.count;
    out.x_first = static_cast<double>(f.first);
    out.x_last = static_cast<double>(f.last);
    return out;
}

Fit as_fit(const std::string& name, const std::string& model, const LineFit& f, double x_first, double x_last) {
    Fit out;
    out.name = name;
    out.model = model;
    out.params = {{"slope", f.slope}, {"intercept", f.intercept}};
    out.r2 = f.r2;
    out.count = f.count;
    out.x_first = x_first;
    out.x_last = x_last;
    return out;
}

std::vector<std::string> unique_labels(const std::vector<MeasureSpec>& measures) {
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < measures.size(); ++s) {
        std::string base = measures[s].name();
        std::size_t same = 0;
        for (std::size_t t = 0; t < measures.size(); ++t)
            if (measures[t].name() == base) ++same;
        labels.push_back(same > 1 ? base + "#" + std::to_string(s) : base);
    }
    return labels;
}

void echo_domain(Report& r, const Domain& d) {
    std::string lo, hi;
    for (std::size_t i = 0; i < d.dim(); ++i) {
        lo += (i ? "," : "") + fmt(d.lower()[i]);
        hi += (i ? "," : "") + fmt(d.upper()[i]);
    }
    r.echo("domain.lower", lo);
    r.echo("domain.upper", hi);
}

}  // namespace

double DecayFit::envelope(double i) const { return std::exp(a - c * ipow(i, d)); }

DecayFit fit_decay(std::span<const double> lambdas, std::size_t d, double floor) {
    if (d == 0) throw DimensionError("fit_decay: dimension must be positive");
    std::vector<double> x, y;
    DecayFit f;
    f.d = d;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > 0.0) || !(lambdas[k] > floor)) continue;
        x.push_back(ipow(static_cast<double>(k + 1), d));
        y.push_back(std::log(lambdas[k]));
        if (f.first == 0) f.first = k + 1;
        f.last = k + 1;
    }
    if (x.size() < 5)
        throw PrecisionError("fit_decay: need at least 5 eigenvalues above the floor, have " + std::to_string(x.size()));
    LineFit line = fit_line(x, y);
    f.a = line.intercept;
    f.c = -line.slope;
    f.r2 = line.r2;
    f.count = x.size();
    return f;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("fit_line: x and y lengths differ");
    const std::size_t n = x.size();
    if (n < 2) throw SizeError("fit_line: need at least 2 points");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw SizeError("fit_line: all x values coincide");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.count = n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = syy == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    return f;
}

DecayFit lift_envelope(const DecayFit& fit, std::span<const double> lambdas, double floor) {
    DecayFit out = fit;
    double a = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > 0.0) || !(lambdas[k] > floor)) continue;
        a = std::max(a, std::log(lambdas[k]) + fit.c * ipow(static_cast<double>(k + 1), fit.d));
    }
    if (!std::isfinite(a)) return out;
    // The tight index can round to exp(a - c i) just below lambda; step a up by ulps.
    out.a = a;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > 0.0) || !(lambdas[k] > floor)) continue;
        while (out.envelope(static_cast<double>(k + 1)) < lambdas[k])
            out.a = std::nextafter(out.a, std::numeric_limits<double>::infinity());
    }
    return out;
}

Thresholds merge_thresholds(const Thresholds& defaults, const Thresholds& overrides, const std::string& command) {
    Thresholds t = defaults;
    for (const auto& [k, v] : overrides) {
        if (!t.contains(k)) {
            std::string known;
            for (const auto& [dk, dv] : defaults) known += (known.empty() ? "" : ", ") + dk;
            throw ParseError("unknown threshold '" + k + "' for " + command + " (known: " + known + ")");
        }
        t[k] = v;
    }
    return t;
}

std::vector<double> to_doubles(const std::vector<DD>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](DD x) { return dd::to_double(x); });
    return out;
}

// --- spectrum ----------------------------------------------------------------

Thresholds SpectrumConfig::defaults(Precision p) {
    return {{"fit_r2_min", 0.99}, {"trace_tol", p == Precision::DoubleDouble ? 1e-25 : 1e-12}};
}

Report run_spectrum(const SpectrumConfig& cfg) {
    Report r;
    r.id = "spectrum";
    r.echo("kernel", cfg.kernel.to_string());
    r.echo("points", cfg.points.label());
    r.echo("n", static_cast<double>(cfg.points.size()));
    r.echo("d", static_cast<double>(cfg.points.dim()));
    r.echo("precision", to_string(cfg.precision));
    Thresholds th = merged(SpectrumConfig::defaults(cfg.precision), cfg.thresholds, "spectrum", r);

    EigenSystem es = eig_sym(assemble(cfg.points, cfg.kernel, Scaling::Operator), cfg.precision,
                             JacobiOptions{.vectors = false});
    const std::size_t n = es.size();
    const std::size_t d = cfg.points.dim();

    r.rows.columns = {"index", "i_pow"};
    Table::dd_columns(r.rows.columns, "lambda");
    r.rows.columns.insert(r.rows.columns.end(), {"log10_lambda", "clamped"});
    Table dump{"eigs", {"index", "lambda_hi", "lambda_lo", "log10_lambda", "clamped"}, {}};
    PlotSeries plot{"lambda", "index", "log10_lambda", {}};

    DD trace;
    for (std::size_t k = 0; k < n; ++k) {
        const DD lam = es.lambdas[k];
        trace = dd::add(trace, lam);
        const double lg = dd::log10(lam);
        dump.rows.push_back({fmt(k + 1), fmt(lam.hi), fmt(lam.lo), fmt(lg), es.clamped[k] ? "1" : "0"});
        if (es.clamped[k]) continue;
        std::vector<std::string> row{fmt(k + 1), fmt(ipow(static_cast<double>(k + 1), d))};
        Table::dd_cells(row, lam);
        row.push_back(fmt(lg));
        row.push_back("0");
        r.rows.rows.push_back(std::move(row));
        plot.points.emplace_back(static_cast<double>(k + 1), lg);
    }
    r.extra.push_back(std::move(dump));
    r.plots.push_back(std::move(plot));

    const double trace_error = std::fabs(dd::to_double(dd::sub(trace, DD(kappa(cfg.kernel)))));
    r.metric("n", static_cast<double>(n));
    r.metric("resolvable", static_cast<double>(es.resolvable()));
    r.metric("clamped_count", static_cast<double>(n - es.resolvable()));
    r.metric("floor", es.floor);
    r.metric("sweeps", es.sweeps);
    r.metric("off_norm", es.off_norm);
    r.metric("trace_error", trace_error);
    if (n > 0) {
        r.metric("lambda_1_hi", es.lambdas[0].hi);
        r.metric("lambda_1_lo", es.lambdas[0].lo);
    }
    if (n > 1) {
        r.metric("lambda_2_hi", es.lambdas[1].hi);
        r.metric("lambda_2_lo", es.lambdas[1].lo);
    }

    double r2 = 0.0;
    try {
        DecayFit fit = fit_decay(to_doubles(es.lambdas), d, es.floor);
        r.fits.push_back(as_fit("decay", fit));
        r2 = fit.r2;
    } catch (const PrecisionError& e) {
        r.notes.push_back(std::string("no decay fit: ") + e.what());
    }
    r.flags.push_back(make_flag("fit_r2", r2, ">=", th.at("fit_r2_min")));
    r.flags.push_back(make_flag("trace_error", trace_error, "<=", th.at("trace_tol")));
    return r;
}

// --- measure independence ----------------------------------------------------

Thresholds IndependenceConfig::defaults() { return {{"rate_ratio_max", 2.0}}; }

Report run_measure_independence(const IndependenceConfig& cfg) {
    if (cfg.measures.empty()) throw std::invalid_argument("run_measure_independence: no measures");
    Report r;
    r.id = "independence";
    r.echo("kernel", cfg.kernel.to_string());
    echo_domain(r, cfg.domain);
    r.echo("n", static_cast<double>(cfg.n));
    r.echo("seed", std::to_string(cfg.seed));
    const auto labels = unique_labels(cfg.measures);
    for (std::size_t s = 0; s < cfg.measures.size(); ++s) r.echo("measure." + std::to_string(s), labels[s]);
    Thresholds th = merged(IndependenceConfig::defaults(), cfg.thresholds, "independence", r);
    const std::size_t d = cfg.domain.dim();

    std::vector<EigenSystem> spectra;
    std::vector<DecayFit> fits, lifted;
    for (std::size_t s = 0; s < cfg.measures.size(); ++s) {
        PointSet x = sample(cfg.measures[s], cfg.domain, cfg.n, derive_stream(cfg.seed, s));
        spectra.push_back(eig_sym(assemble(x, cfg.kernel, Scaling::Operator), Precision::DoubleDouble,
                                  JacobiOptions{.vectors = false}));
        const auto lam = to_doubles(spectra.back().lambdas);
        fits.push_back(fit_decay(lam, d, spectra.back().floor));
        lifted.push_back(lift_envelope(fits.back(), lam, spectra.back().floor));
        r.fits.push_back(as_fit("decay." + labels[s], fits.back()));
        r.metric("c." + labels[s], fits.back().c);
        r.metric("r2." + labels[s], fits.back().r2);
        r.metric("resolvable." + labels[s], static_cast<double>(spectra.back().resolvable()));
    }

    // Common envelope: smallest rate, largest (lifted) intercept.
    DecayFit env = lifted.front();
    DecayFit plain = fits.front();
    double c_max = 0.0;
    for (std::size_t s = 0; s < fits.size(); ++s) {
        env.c = std::min(env.c, fits[s].c);
        env.a = std::max(env.a, lifted[s].a);
        plain.c = std::min(plain.c, fits[s].c);
        plain.a = std::max(plain.a, fits[s].a);
        c_max = std::max(c_max, fits[s].c);
    }
    r.fits.push_back(as_fit("envelope", env));

    r.rows.columns = {"measure", "index", "i_pow"};
    Table::dd_columns(r.rows.columns, "lambda");
    r.rows.columns.insert(r.rows.columns.end(), {"log10_lambda", "envelope", "dominated"});
    std::size_t violations = 0, plain_violations = 0;
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        PlotSeries plot{labels[s], "index", "log10_lambda", {}};
        for (std::size_t k = 0; k < spectra[s].size(); ++k) {
            if (spectra[s].clamped[k]) continue;
            const DD lam = spectra[s].lambdas[k];
            const double i = static_cast<double>(k + 1);
            const double e = env.envelope(i);
            const bool ok = dd::to_double(lam) <= e;
            if (!ok) ++violations;
            if (dd::to_double(lam) > plain.envelope(i)) ++plain_violations;
            std::vector<std::string> row{labels[s], fmt(k + 1), fmt(ipow(i, d))};
            Table::dd_cells(row, lam);
            row.insert(row.end(), {fmt(dd::log10(lam)), fmt(e), ok ? "1" : "0"});
            r.rows.rows.push_back(std::move(row));
            plot.points.emplace_back(i, dd::log10(lam));
        }
        r.plots.push_back(std::move(plot));
    }
    const double ratio = env.c > 0.0 ? c_max / env.c : std::numeric_limits<double>::infinity();
    r.metric("rate_ratio", ratio);
    r.metric("plain_envelope_violations", static_cast<double>(plain_violations));
    r.flags.push_back(make_flag("rate_ratio", ratio, "<=", th.at("rate_ratio_max")));
    r.flags.push_back(make_flag("envelope_violations", static_cast<double>(violations), "==", 0.0));
    return r;
}

// --- concentration -----------------------------------------------------------

Thresholds ConcentrationConfig::defaults() { return {{"tail_factor", 10.0}}; }

Report run_concentration_compare(const ConcentrationConfig& cfg) {
    if (cfg.trials < 2) throw std::invalid_argument("run_concentration_compare: need at least 2 trials");
    Report r;
    r.id = "concentration";
    r.echo("kernel", cfg.kernel.to_string());
    echo_domain(r, cfg.domain);
    r.echo("measure", cfg.measure.name());
    std::string ns;
    for (auto n : cfg.ns) ns += (ns.empty() ? "" : ",") + std::to_string(n);
    r.echo("ns", ns);
    r.echo("trials", static_cast<double>(cfg.trials));
    r.echo("seed", std::to_string(cfg.seed));
    Thresholds th = merged(ConcentrationConfig::defaults(), cfg.thresholds, "concentration", r);
    const std::size_t d = cfg.domain.dim();

    r.rows.columns = {"n", "index", "max_abs_diff", "inv_sqrt_n", "envelope", "i_star"};
    PlotSeries istar_plot{"i_star", "n", "i_star", {}};
    std::vector<std::size_t> istars;
    std::size_t tail_checked = 0, tail_violations = 0;
    for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
        const std::size_t n = cfg.ns[ni];
        std::vector<std::vector<double>> lam;
        double floor = 0.0;
        std::vector<double> pooled_x, pooled_y;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            PointSet x = sample(cfg.measure, cfg.domain, n, derive_stream(cfg.seed, (n << 8) | t));
            EigenSystem es = eig_sym(assemble(x, cfg.kernel, Scaling::Operator), Precision::DoubleDouble,
                                     JacobiOptions{.vectors = false});
            floor = es.floor;
            lam.push_back(to_doubles(es.lambdas));
            for (std::size_t k = 0; k < n; ++k)
                if (!es.clamped[k] && es.lambdas[k].hi > 0.0) {
                    pooled_x.push_back(ipow(static_cast<double>(k + 1), d));
                    pooled_y.push_back(std::log(lam.back()[k]));
                }
        }
        // Pooled least-squares rate, intercept lifted over every trial.
        LineFit line = fit_line(pooled_x, pooled_y);
        DecayFit env;
        env.d = d;
        env.c = -line.slope;
        env.r2 = line.r2;
        env.count = line.count;
        env.a = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pooled_x.size(); ++j) env.a = std::max(env.a, pooled_y[j] + env.c * pooled_x[j]);
        env.first = 1;
        env.last = 0;
        for (const auto& l : lam)
            for (std::size_t k = 0; k < n; ++k)
                if (l[k] > floor) env.last = std::max(env.last, k + 1);
        r.fits.push_back(as_fit("envelope.n" + std::to_string(n), env));

        const double level = 1.0 / std::sqrt(static_cast<double>(n));
        // Smallest integer i >= 1 with a - c i^{1/d} < log(1/sqrt n).
        std::size_t istar = 1;
        const double arg = (env.a - std::log(level)) / env.c;
        if (arg > 0.0) istar = static_cast<std::size_t>(std::floor(std::pow(arg, static_cast<double>(d)))) + 1;
        while (istar > 1 && env.envelope(static_cast<double>(istar - 1)) < level) --istar;
        while (env.envelope(static_cast<double>(istar)) >= level) ++istar;
        istars.push_back(istar);
        r.metric("i_star.n" + std::to_string(n), static_cast<double>(istar));
        istar_plot.points.emplace_back(static_cast<double>(n), static_cast<double>(istar));

        for (std::size_t k = 0; k < n; ++k) {
            double diff = 0.0;
            for (std::size_t s = 0; s < lam.size(); ++s)
                for (std::size_t t = s + 1; t < lam.size(); ++t) diff = std::max(diff, std::fabs(lam[s][k] - lam[t][k]));
            const double i = static_cast<double>(k + 1);
            const double e = env.envelope(i);
            // Beyond the floor both eigenvalues are rounding noise; not checked.
            if (k + 1 >= 2 * istar && e >= floor) {
                ++tail_checked;
                if (diff > th.at("tail_factor") * e) ++tail_violations;
            }
            r.rows.rows.push_back({fmt(n), fmt(k + 1), fmt(diff), fmt(level), fmt(e), fmt(istar)});
        }
    }
    r.plots.push_back(std::move(istar_plot));

    std::size_t decreases = 0;
    for (std::size_t j = 1; j < istars.size(); ++j)
        if (istars[j] < istars[j - 1]) ++decreases;
    r.metric("tail_checked", static_cast<double>(tail_checked));
    r.flags.push_back(make_flag("i_star_decreases", static_cast<double>(decreases), "==", 0.0));
    r.flags.push_back(make_flag("tail_violations", static_cast<double>(tail_violations), "==", 0.0));
    return r;
}

// --- interpolation -----------------------------------------------------------

Thresholds InterpConfig::defaults() { return {{"fit_r2_min", 0.95}, {"final_err_max", 1e-10}}; }

Report run_interp_decay(const InterpConfig& cfg) {
    Report r;
    r.id = "interp";
    r.echo("kernel", cfg.kernel.to_string());
    echo_domain(r, cfg.domain);
    std::string target;
    for (std::size_t i = 0; i < cfg.target.centers.size(); ++i) {
        target += (i ? " + " : "") + fmt(dd::to_double(cfg.target.alphas[i])) + "*K(";
        for (std::size_t j = 0; j < cfg.target.centers.dim(); ++j)
            target += (j ? "," : "") + fmt(cfg.target.centers[i][j]);
        target += ",.)";
    }
    r.echo("target", target);
    r.echo("target_kernel", cfg.target.kernel.to_string());
    std::string grids;
    for (auto m : cfg.grid_sizes) grids += (grids.empty() ? "" : ",") + std::to_string(m);
    r.echo("grid_sizes", grids);
    r.echo("probe_per_axis", static_cast<double>(cfg.probe_per_axis));
    Thresholds th = merged(InterpConfig::defaults(), cfg.thresholds, "interp", r);

    const PointSet probe = gen_grid(cfg.domain, cfg.probe_per_axis);
    std::vector<DD> truth(probe.size());
    for (std::size_t p = 0; p < probe.size(); ++p) truth[p] = cfg.target(probe[p]);

    r.rows.columns = {"m", "n", "fill", "inv_fill", "err", "log10_err", "ridge"};
    PlotSeries plot{"err", "inv_fill", "log10_err", {}};
    std::vector<double> inv_h, log_err, errs;
    for (std::size_t m : cfg.grid_sizes) {
        PointSet x = gen_grid(cfg.domain, m);
        Interpolant s = interpolate_regularized(x, values_on(cfg.target, x), cfg.kernel);
        double err = 0.0;
        for (std::size_t p = 0; p < probe.size(); ++p)
            err = std::max(err, std::fabs(dd::to_double(dd::sub(truth[p], s(probe[p])))));
        const double h = fill_distance(x).value;
        const double lg = std::log10(std::max(err, std::numeric_limits<double>::min()));
        r.rows.rows.push_back({fmt(m), fmt(x.size()), fmt(h), fmt(1.0 / h), fmt(err), fmt(lg), fmt(s.ridge)});
        plot.points.emplace_back(1.0 / h, lg);
        inv_h.push_back(1.0 / h);
        log_err.push_back(std::log(std::max(err, std::numeric_limits<double>::min())));
        errs.push_back(err);
    }
    r.plots.push_back(std::move(plot));

    std::size_t non_decreasing = 0;
    for (std::size_t j = 1; j < errs.size(); ++j)
        if (!(errs[j] < errs[j - 1])) ++non_decreasing;
    r.flags.push_back(make_flag("non_decreasing_steps", static_cast<double>(non_decreasing), "==", 0.0));
    double r2 = 0.0;
    if (errs.size() >= 2) {
        LineFit f = fit_line(inv_h, log_err);
        r.fits.push_back(as_fit("log_err_vs_inv_fill", "log err = intercept + slope / h_X", f, inv_h.front(), inv_h.back()));
        r2 = f.r2;
    }
    r.flags.push_back(make_flag("fit_r2", r2, ">=", th.at("fit_r2_min")));
    r.flags.push_back(make_flag("final_err", errs.empty() ? 0.0 : errs.back(), "<=", th.at("final_err_max")));
    r.metric("target_norm", dd::to_double(rkhs_norm(cfg.target)));
    return r;
}

// --- coefficient decay -------------------------------------------------------

Thresholds CoeffConfig::defaults() { return {{"rel_slack", 1e-10}}; }

std::vector<Interpolant> random_expansions(const KernelSpec& k, const Domain& domain, std::size_t count,
                                           std::size_t max_terms, std::uint64_t seed) {
    if (max_terms == 0) throw std::invalid_argument("random_expansions: max_terms must be positive");
    Rng rng(seed);
    std::vector<Interpolant> out;
    const std::size_t d = domain.dim();
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t terms = 1 + static_cast<std::size_t>(rng.below(max_terms));
        std::vector<double> coords;
        DDVector coefs(terms);
        for (std::size_t j = 0; j < terms; ++j) {
            for (std::size_t i = 0; i < d; ++i)
                coords.push_back(domain.lower()[i] + (domain.upper()[i] - domain.lower()[i]) * rng.uniform());
            coefs.set(j, DD(rng.normal()));
        }
        out.push_back(expansion(PointSet(domain, std::move(coords), "target" + std::to_string(t)), coefs, k));
    }
    return out;
}

Report run_coeff_decay(const CoeffConfig& cfg) {
    if (cfg.measures.empty()) throw std::invalid_argument("run_coeff_decay: no measures");
    Report r;
    r.id = "coeffs";
    r.echo("kernel", cfg.kernel.to_string());
    echo_domain(r, cfg.domain);
    r.echo("n", static_cast<double>(cfg.n));
    r.echo("targets", static_cast<double>(cfg.targets));
    r.echo("max_terms", static_cast<double>(cfg.max_terms));
    r.echo("seed", std::to_string(cfg.seed));
    const auto labels = unique_labels(cfg.measures);
    for (std::size_t s = 0; s < cfg.measures.size(); ++s) r.echo("measure." + std::to_string(s), labels[s]);
    Thresholds th = merged(CoeffConfig::defaults(), cfg.thresholds, "coeffs", r);
    const double slack = 1.0 + th.at("rel_slack");

    const auto targets = random_expansions(cfg.kernel, cfg.domain, cfg.targets, cfg.max_terms, derive_stream(cfg.seed, 1));
    std::vector<double> norms;
    for (const auto& f : targets) norms.push_back(dd::to_double(rkhs_norm(f)));
    // The contrast target is held to the largest norm in the in-space suite.
    const double budget = norms.empty() ? 1.0 : *std::max_element(norms.begin(), norms.end());
    r.metric("contrast_budget", budget);

    r.rows.columns = {"measure", "target", "index", "abs_a", "bound", "lambda", "violation"};
    std::size_t violations = 0, checked = 0;
    std::size_t contrast_min = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < cfg.measures.size(); ++s) {
        PointSet x = sample(cfg.measures[s], cfg.domain, cfg.n, derive_stream(cfg.seed, 100 + s));
        EigenSystem es = eig_sym(assemble(x, cfg.kernel, Scaling::Operator));
        const std::size_t n = es.size();
        // Below the floor only lambda <= floor is known, so bound with the floor.
        std::vector<double> root_lambda(n);
        for (std::size_t i = 0; i < n; ++i) root_lambda[i] = std::sqrt(std::max(dd::to_double(es.lambdas[i]), es.floor));

        auto check = [&](const std::string& name, const DDVector& values, double norm, bool contrast) {
            const auto a = coefficients(values, es);
            std::size_t count = 0;
            PlotSeries plot{labels[s] + "/" + name, "index", "log10_abs_a", {}};
            for (std::size_t i = 0; i < n; ++i) {
                const double ai = std::fabs(dd::to_double(a[i]));
                const double bound = root_lambda[i] * norm;
                const bool bad = ai > bound * slack;
                if (bad) ++count;
                r.rows.rows.push_back({labels[s], name, fmt(i + 1), fmt(ai), fmt(bound),
                                       fmt(dd::to_double(es.lambdas[i])), bad ? "1" : "0"});
                if (contrast || name == "target0") plot.points.emplace_back(static_cast<double>(i + 1), std::log10(std::max(ai, 1e-300)));
            }
            if (!plot.points.empty()) r.plots.push_back(std::move(plot));
            return count;
        };

        for (std::size_t t = 0; t < targets.size(); ++t) {
            violations += check("target" + std::to_string(t), values_on(targets[t], x), norms[t], false);
            ++checked;
        }
        std::vector<double> first(n);
        for (std::size_t i = 0; i < n; ++i) first[i] = x[i][0];
        std::vector<double> sorted = first;
        std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
        const double median = sorted[n / 2];
        DDVector sign(n);
        for (std::size_t i = 0; i < n; ++i) sign.set(i, DD(first[i] > median ? 1.0 : -1.0));
        const std::size_t cv = check("contrast", sign, budget, true);
        r.metric("contrast_violations." + labels[s], static_cast<double>(cv));
        contrast_min = std::min(contrast_min, cv);
    }
    r.metric("targets_checked", static_cast<double>(checked));
    r.flags.push_back(make_flag("in_space_violations", static_cast<double>(violations), "==", 0.0));
    r.flags.push_back(make_flag("contrast_violations_min", static_cast<double>(contrast_min), ">=", 1.0));
    return r;
}

// --- span invariance ---------------------------------------------------------

Thresholds SpanConfig::defaults() { return {{"residual_ratio_max", 1e-3}}; }

Report run_span_invariance(const SpanConfig& cfg) {
    Report r;
    r.id = "span";
    r.echo("kernel", cfg.kernel.to_string());
    echo_domain(r, cfg.domain);
    r.echo("mu", cfg.mu.name());
    r.echo("nu", cfg.nu.name());
    r.echo("n", static_cast<double>(cfg.n));
    r.echo("j_max", static_cast<double>(cfg.j_max));
    r.echo("k_check", static_cast<double>(cfg.k_check));
    r.echo("seed", std::to_string(cfg.seed));
    Thresholds th = merged(SpanConfig::defaults(), cfg.thresholds, "span", r);
    if (cfg.k_check < 1 || cfg.k_check >= cfg.n) throw std::invalid_argument("run_span_invariance: k_check out of range");

    PointSet xm = sample(cfg.mu, cfg.domain, cfg.n, derive_stream(cfg.seed, 1));
    PointSet xn = sample(cfg.nu, cfg.domain, cfg.n, derive_stream(cfg.seed, 2));
    EigenSystem em = eig_sym(assemble(xm, cfg.kernel, Scaling::Operator));
    EigenSystem en = eig_sym(assemble(xn, cfg.kernel, Scaling::Operator));
    const std::size_t n = em.size();

    r.rows.columns = {"j", "k", "residual", "log10_residual"};
    double worst_ratio = 0.0;
    std::size_t increases = 0;
    const std::size_t jmax = std::min(cfg.j_max, en.size());
    for (std::size_t j = 1; j <= jmax; ++j) {
        NystromFunction e = nystrom(en, j - 1);
        DDVector v(n);
        for (std::size_t i = 0; i < n; ++i) v.set(i, e(xm[i]));
        const auto a = coefficients(v, em);
        // tail[k] = sum_{i > k} a_i^2, summed from the smallest terms up.
        std::vector<DD> tail(n + 1);
        for (std::size_t k = n; k-- > 0;) tail[k] = dd::add(tail[k + 1], dd::sqr(a[k]));
        const DD total = tail[0];
        PlotSeries plot{"j" + std::to_string(j), "k", "log10_residual", {}};
        std::vector<double> fk, fy;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= n; ++k) {
            const double res = dd::to_double(dd::div(tail[k], total));
            if (res > prev) ++increases;
            prev = res;
            const double lg = res > 0.0 ? std::log10(res) : -std::numeric_limits<double>::infinity();
            r.rows.rows.push_back({fmt(j), fmt(k), fmt(res), fmt(lg)});
            if (k >= 1 && res > 1e-28) {
                plot.points.emplace_back(static_cast<double>(k), lg);
                fk.push_back(static_cast<double>(k));
                fy.push_back(std::log(res));
            }
        }
        const double r1 = dd::to_double(dd::div(tail[1], total));
        const double rk = dd::to_double(dd::div(tail[cfg.k_check], total));
        const double ratio = r1 > 0.0 ? rk / r1 : 0.0;
        worst_ratio = std::max(worst_ratio, ratio);
        r.metric("residual_ratio.j" + std::to_string(j), ratio);
        if (fk.size() >= 2)
            r.fits.push_back(as_fit("residual_decay.j" + std::to_string(j), "log residual(k) = intercept + slope k",
                                    fit_line(fk, fy), fk.front(), fk.back()));
        r.plots.push_back(std::move(plot));
    }
    r.flags.push_back(make_flag("residual_ratio", worst_ratio, "<=", th.at("residual_ratio_max")));
    r.flags.push_back(make_flag("residual_increases", static_cast<double>(increases), "==", 0.0));
    return r;
}

// --- shattering --------------------------------------------------------------

Thresholds ShatterConfig::defaults() { return {{"fit_r2_min", 0.9}, {"closed_form_tol", 1e-20}}; }

PointSet shatter_points(std::size_t n, std::size_t d) {
    if (n == 0) throw SizeError("shatter_points: n must be positive");
    if (d == 1) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
        return PointSet(Domain::unit_cube(1), std::move(c), "equispaced:n=" + std::to_string(n));
    }
    const auto m = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d))));
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= m;
    if (total != n) throw SizeError("shatter_points: n must be a perfect d-th power for d > 1");
    return gen_grid(Domain::unit_cube(d), m);
}

Report run_shatter_growth(const ShatterConfig& cfg) {
    Report r;
    r.id = "shatter";
    r.echo("kernel", cfg.kernel.to_string());
    r.echo("d", static_cast<double>(cfg.d));
    r.echo("gamma", cfg.gamma);
    std::string ns;
    for (auto n : cfg.ns) ns += (ns.empty() ? "" : ",") + std::to_string(n);
    r.echo("ns", ns);
    r.echo("mode", cfg.options.mode == ShatterMode::Brute ? "brute" : "heuristic");
    Thresholds th = merged(ShatterConfig::defaults(), cfg.thresholds, "shatter", r);

    r.rows.columns = {"n", "n_pow"};
    Table::dd_columns(r.rows.columns, "radius");
    r.rows.columns.insert(r.rows.columns.end(), {"log_radius", "pattern", "patterns", "lower_bound"});
    PlotSeries plot{"log_radius", "n_pow", "log_radius", {}};
    std::vector<double> xs, ys;
    const DD kap(kappa(cfg.kernel));
    for (std::size_t n : cfg.ns) {
        PointSet x = shatter_points(n, cfg.d);
        ShatterResult s = min_shatter_norm(x, cfg.kernel, cfg.gamma, cfg.options);
        const double np = ipow(static_cast<double>(n), cfg.d);
        const double lr = std::log(dd::to_double(s.radius));
        std::vector<std::string> row{fmt(n), fmt(np)};
        Table::dd_cells(row, s.radius);
        row.insert(row.end(), {fmt(lr), pattern_string(s.worst_pattern), fmt(s.patterns), s.lower_bound ? "1" : "0"});
        r.rows.rows.push_back(std::move(row));
        plot.points.emplace_back(np, lr);
        if (n >= 2) {
            xs.push_back(np);
            ys.push_back(lr);
        }
        if (cfg.d == 1 && n == 1) {
            const DD closed = dd::div(DD(cfg.gamma), dd::sqrt(kap));
            const double err = std::fabs(dd::to_double(dd::sub(s.radius, closed)));
            r.flags.push_back(make_flag("closed_form_n1", err, "<=", th.at("closed_form_tol")));
        }
        if (cfg.d == 1 && n == 2) {
            const DD k12 = cfg.kernel(x[0], x[1]);
            const DD closed = dd::mul(dd::sqrt(dd::div(DD(2.0), dd::sub(kap, k12))), cfg.gamma);
            const double err = std::fabs(dd::to_double(dd::sub(s.radius, closed)));
            r.flags.push_back(make_flag("closed_form_n2", err, "<=", th.at("closed_form_tol")));
        }
    }
    r.plots.push_back(std::move(plot));
    if (xs.size() >= 2) {
        LineFit f = fit_line(xs, ys);
        r.fits.push_back(as_fit("log_radius_vs_n_pow", "log R = intercept + slope * n^(1/d)", f, xs.front(), xs.back()));
        r.flags.push_back(make_flag("slope", f.slope, ">", 0.0));
        r.flags.push_back(make_flag("fit_r2", f.r2, ">=", th.at("fit_r2_min")));
    } else {
        r.notes.push_back("fewer than two sizes with n >= 2; growth fit skipped");
    }
    return r;
}

// --- gradient descent --------------------------------------------------------

Thresholds GdConfig::defaults() { return {{"rkhs_step_ratio_max", 10.0}}; }

Report run_gd_capacity(const GdConfig& cfg) {
    if (cfg.kernels.empty()) throw std::invalid_argument("run_gd_capacity: no kernels");
    Report r;
    r.id = "gd";
    for (std::size_t i = 0; i < cfg.kernels.size(); ++i) r.echo("kernel." + std::to_string(i), cfg.kernels[i].to_string());
    echo_domain(r, cfg.domain);
    r.echo("n", static_cast<double>(cfg.n));
    r.echo("labels", cfg.labels == GdConfig::Labels::Random ? "random" : "rkhs");
    r.echo("eta", cfg.eta);
    r.echo("stop_loss", cfg.stop_loss);
    r.echo("max_steps", static_cast<double>(cfg.max_steps));
    r.echo("seed", std::to_string(cfg.seed));
    Thresholds th = merged(GdConfig::defaults(), cfg.thresholds, "gd", r);

    PointSet x = gen_sample(MeasureSpec{MeasureSpec::Kind::UniformIid, {}, derive_stream(cfg.seed, 1)}, cfg.domain, cfg.n);
    std::vector<double> y(cfg.n);
    if (cfg.labels == GdConfig::Labels::Random) {
        Rng rng(derive_stream(cfg.seed, 2));
        for (auto& v : y) v = rng.next() >> 63 ? 1.0 : -1.0;
    } else {
        const auto fstar = random_expansions(cfg.kernels.front(), cfg.domain, 1, 3, derive_stream(cfg.seed, 3)).front();
        for (std::size_t i = 0; i < cfg.n; ++i) y[i] = dd::to_double(fstar(x[i]));
        r.metric("target_norm", dd::to_double(rkhs_norm(fstar)));
    }

    r.rows.columns = {"kernel", "smooth", "eta", "lambda_max", "halvings", "converged", "steps_to_fit",
                      "final_loss", "final_norm", "max_increment_ratio", "bound_violations"};
    Table traj{"trajectory", {"kernel", "step", "loss", "norm", "increment", "bound", "within_bound"}, {}};
    std::size_t violations = 0;
    long long smooth_steps = -1, rough_steps = -1;
    bool all_converged = true;
    for (const auto& k : cfg.kernels) {
        GdOptions opt;
        opt.eta = cfg.eta;
        opt.max_steps = cfg.max_steps;
        opt.stop_loss = cfg.stop_loss;
        GdTrajectory t = gd_train(x, y, k, opt);
        violations += t.bound_violations;
        all_converged = all_converged && t.converged;
        double worst = 0.0;
        for (const auto& s : t.steps)
            if (s.bound > 0.0) worst = std::max(worst, s.increment / s.bound);
        const auto& last = t.steps.back();
        r.rows.rows.push_back({k.to_string(), k.smooth() ? "1" : "0", fmt(t.eta), fmt(t.lambda_max), fmt(std::size_t(t.halvings)),
                               t.converged ? "1" : "0", fmt(t.steps_to_fit), fmt(last.loss), fmt(dd::to_double(last.norm)),
                               fmt(worst), fmt(t.bound_violations)});
        PlotSeries plot{k.to_string(), "step", "loss", {}};
        for (const auto& s : t.steps) {
            const bool keep = s.step < 100 || s.step % 100 == 0 || &s == &last;
            if (!keep) continue;
            traj.rows.push_back({k.to_string(), fmt(s.step), fmt(s.loss), fmt(dd::to_double(s.norm)), fmt(s.increment),
                                 fmt(s.bound), s.within_bound ? "1" : "0"});
            plot.points.emplace_back(static_cast<double>(s.step), s.loss);
        }
        r.plots.push_back(std::move(plot));
        r.metric("steps_to_fit." + k.to_string(), static_cast<double>(t.steps_to_fit));
        if (k.smooth() && smooth_steps < 0) smooth_steps = static_cast<long long>(t.steps_to_fit);
        if (!k.smooth() && rough_steps < 0) rough_steps = static_cast<long long>(t.steps_to_fit);
    }
    r.extra.push_back(std::move(traj));

    r.flags.push_back(make_flag("bound_violations", static_cast<double>(violations), "==", 0.0));
    if (smooth_steps >= 0 && rough_steps >= 0) {
        if (cfg.labels == GdConfig::Labels::Random) {
            r.flags.push_back(make_flag("smooth_minus_laplace_steps", static_cast<double>(smooth_steps - rough_steps), ">", 0.0));
        } else {
            r.flags.push_back(make_flag("all_converged", all_converged ? 1.0 : 0.0, "==", 1.0));
            const double ratio = static_cast<double>(smooth_steps) / std::max<double>(1.0, static_cast<double>(rough_steps));
            r.flags.push_back(make_flag("smooth_over_laplace_steps", ratio, "<=", th.at("rkhs_step_ratio_max")));
        }
    } else {
        r.notes.push_back("smooth-vs-laplace comparison needs one kernel of each kind");
    }
    return r;
}

// --- width containment -------------------------------------------------------

Thresholds WidthConfig::defaults() { return {{"agree_tol", 1e-6}, {"min_compared", 5.0}}; }

std::vector<GaussMixtureFn> default_width_functions() {
    const char* specs[] = {
        "gm: 1@0.3/1",
        "gm: -0.7@0.5/0.8",
        "gm: 2@0.1/1.5",
        "gm: 1@0.5,0.5/1",
        "gm: 0.5@0.5,0.5,0.5/1.2",
        "gm: 1.5@0.2,0.8/0.9",
        "gm: 1@0.3/1 + -0.5@0.7/0.9",
        "gm: 1@0.5,0.5/1 + 0.5@0.5,0.5/1.3",
    };
    std::vector<GaussMixtureFn> out;
    for (const char* s : specs) out.push_back(GaussMixtureFn::parse(s));
    return out;
}

Report run_width_report(const WidthConfig& cfg) {
    if (cfg.sigma2s.empty()) throw std::invalid_argument("run_width_report: no sigma2 values");
    Report r;
    r.id = "width";
    r.echo("sigma1", cfg.sigma1);
    std::string s2;
    for (double s : cfg.sigma2s) s2 += (s2.empty() ? "" : ",") + fmt(s);
    r.echo("sigma2s", s2);
    for (std::size_t i = 0; i < cfg.functions.size(); ++i) r.echo("function." + std::to_string(i), cfg.functions[i].to_string());
    Thresholds th = merged(WidthConfig::defaults(), cfg.thresholds, "width", r);

    r.rows.columns = {"function", "d", "sigma2", "norm1_closed", "norm1_quad", "norm2_closed", "norm2_quad",
                      "max_rel_diff", "ratio", "bound", "kind"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double max_diff = 0.0;
    std::size_t violations = 0, witnesses = 0;
    std::set<std::size_t> compared;

    auto norms = [&](const GaussMixtureFn& f, double sigma) {
        const KernelSpec k = KernelSpec::gaussian(sigma);
        const double closed = f.terms.size() == 1 ? fourier_rkhs_norm(f, k, FourierMethod::Closed).norm : nan;
        const bool quad_ok = f.dim == 1 || (f.concentric() && f.dim <= 3);
        const double quad = quad_ok ? fourier_rkhs_norm(f, k, FourierMethod::Quadrature).norm : nan;
        return std::pair{closed, quad};
    };
    auto rel = [nan](double a, double b) {
        if (std::isnan(a) || std::isnan(b) || std::isinf(a) || std::isinf(b)) return nan;
        return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
    };

    std::vector<GaussMixtureFn> funcs = cfg.functions;
    // Divergence witness: a translate of the narrowest kernel, outside H_{sigma1}.
    const double narrow = *std::min_element(cfg.sigma2s.begin(), cfg.sigma2s.end());
    GaussMixtureFn witness;
    witness.terms.push_back({1.0, {0.5}, narrow});
    witness.dim = 1;
    const std::size_t witness_index = funcs.size();
    funcs.push_back(witness);

    PlotSeries plot{"ratio_over_bound", "row", "ratio_over_bound", {}};
    for (std::size_t fi = 0; fi < funcs.size(); ++fi) {
        const auto& f = funcs[fi];
        const auto [c1, q1] = norms(f, cfg.sigma1);
        for (double s2v : cfg.sigma2s) {
            if (fi == witness_index && s2v != narrow) continue;
            const auto [c2, q2] = norms(f, s2v);
            WidthRatio w = width_ratio(f, cfg.sigma1, s2v);
            double diff = nan;
            for (double dv : {rel(c1, q1), rel(c2, q2)})
                if (!std::isnan(dv)) diff = std::isnan(diff) ? dv : std::max(diff, dv);
            if (!std::isnan(diff)) {
                max_diff = std::max(max_diff, diff);
                compared.insert(fi);
            }
            const bool is_witness = w.kind == WidthRatio::Kind::Witness;
            if (is_witness) {
                if (std::isfinite(w.norm2)) ++witnesses;
            } else if (w.ratio > w.bound * (1.0 + 1e-9)) {
                ++violations;
            }
            r.rows.rows.push_back({f.to_string(), fmt(f.dim), fmt(s2v), fmt(c1), fmt(q1), fmt(c2), fmt(q2), fmt(diff),
                                   fmt(w.ratio), fmt(w.bound), is_witness ? "witness" : "contained"});
            if (!is_witness) plot.points.emplace_back(static_cast<double>(r.rows.rows.size()), w.ratio / w.bound);
        }
    }
    r.plots.push_back(std::move(plot));
    r.metric("compared_functions", static_cast<double>(compared.size()));
    r.flags.push_back(make_flag("max_rel_diff", max_diff, "<=", th.at("agree_tol")));
    r.flags.push_back(make_flag("compared_functions", static_cast<double>(compared.size()), ">=", th.at("min_compared")));
    r.flags.push_back(make_flag("ratio_violations", static_cast<double>(violations), "==", 0.0));
    r.flags.push_back(make_flag("witnesses", static_cast<double>(witnesses), ">=", 1.0));
    return r;
}

}  // namespace ks
