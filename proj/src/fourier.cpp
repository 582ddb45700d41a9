#include "ks/fourier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "ks/error.hpp"

namespace ks {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& whole) {
    std::string t = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParseError("gauss mixture: bad number '" + t + "' in '" + whole + "'");
    return v;
}

std::string format(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Surface area of the unit sphere in R^d (d = 1 counts the two endpoints).
double sphere_area(std::size_t d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
        default: throw UnsupportedError("fourier: radial reduction only for d <= 3");
    }
}

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWgk[7];
    double g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double s = f(c - x) + f(c + x);
        k += kWgk[j] * s;
        if (j % 2 == 1) g += kWg[j / 2] * s;
    }
    return {a, b, k * h, std::fabs((k - g) * h)};
}

}  // namespace

GaussMixtureFn GaussMixtureFn::parse(const std::string& text) {
    std::string body = trim(text);
    if (body.rfind("gm:", 0) != 0) throw ParseError("gauss mixture must start with 'gm:': '" + text + "'");
    body = body.substr(3);

    // Split on '+' separators that are not part of a number's sign or exponent.
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char ch = body[i];
        bool sep = false;
        if (ch == '+') {
            std::string before = trim(cur);
            char prev = before.empty() ? '\0' : before.back();
            sep = !before.empty() && prev != 'e' && prev != 'E' && prev != '@' && prev != '/' && prev != ',';
        }
        if (sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);

    GaussMixtureFn f;
    f.dim = 0;
    for (const auto& raw : parts) {
        std::string p = trim(raw);
        std::size_t at = p.find('@');
        std::size_t slash = p.rfind('/');
        if (at == std::string::npos || slash == std::string::npos || slash < at)
            throw ParseError("gauss mixture term needs coef@center/width: '" + p + "'");
        GaussTerm t;
        std::string coef = p.substr(0, at);
        if (trim(coef).rfind('+', 0) == 0) coef = trim(coef).substr(1);
        t.coef = parse_number(coef, text);
        std::stringstream cs(p.substr(at + 1, slash - at - 1));
        std::string c;
        while (std::getline(cs, c, ',')) t.center.push_back(parse_number(c, text));
        t.width = parse_number(p.substr(slash + 1), text);
        if (!(t.width > 0.0)) throw ParseError("gauss mixture: width must be positive in '" + text + "'");
        if (t.center.empty()) throw ParseError("gauss mixture: empty center in '" + text + "'");
        if (f.dim == 0) f.dim = t.center.size();
        if (t.center.size() != f.dim) throw ParseError("gauss mixture: mixed center dimensions in '" + text + "'");
        f.terms.push_back(std::move(t));
    }
    if (f.dim > kMaxDim) throw ParseError("gauss mixture: dimension above " + std::to_string(kMaxDim));
    return f;
}

std::string GaussMixtureFn::to_string() const {
    std::string s = "gm:";
    for (std::size_t j = 0; j < terms.size(); ++j) {
        s += j == 0 ? " " : " + ";
        s += format(terms[j].coef) + "@";
        for (std::size_t i = 0; i < terms[j].center.size(); ++i) s += (i ? "," : "") + format(terms[j].center[i]);
        s += "/" + format(terms[j].width);
    }
    return s;
}

double GaussMixtureFn::operator()(const std::vector<double>& x) const {
    if (x.size() != dim) throw DimensionError("gauss mixture: point dimension mismatch");
    double s = 0.0;
    for (const auto& t : terms) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) r2 += (x[i] - t.center[i]) * (x[i] - t.center[i]);
        s += t.coef * std::exp(-r2 / (t.width * t.width));
    }
    return s;
}

bool GaussMixtureFn::concentric() const {
    return std::all_of(terms.begin(), terms.end(), [&](const GaussTerm& t) { return t.center == terms.front().center; });
}

FourierNorm fourier_rkhs_norm(const GaussMixtureFn& f, const KernelSpec& k, FourierMethod method,
                              const QuadratureOptions& options) {
    if (k.family() != KernelSpec::Family::Gaussian)
        throw UnsupportedError("fourier_rkhs_norm: only gaussian kernels are supported");
    const double sigma2 = k.sigma() * k.sigma();
    const double d = static_cast<double>(f.dim);
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<GaussTerm> terms;
    for (const auto& t : f.terms)
        if (t.coef != 0.0) terms.push_back(t);
    for (const auto& t : terms)
        if (2.0 * t.width * t.width <= sigma2) return {inf, inf, 0.0, 0};
    if (terms.empty()) return {};

    if (method == FourierMethod::Closed) {
        if (terms.size() != 1) throw UnsupportedError("fourier_rkhs_norm: closed form needs a single term");
        const double tau2 = terms[0].width * terms[0].width;
        const double sq = terms[0].coef * terms[0].coef * std::pow(tau2 * tau2 / (sigma2 * (2.0 * tau2 - sigma2)), d / 2.0);
        return {std::sqrt(sq), sq, 0.0, 0};
    }

    const bool concentric = f.concentric();
    if (f.dim != 1 && !concentric)
        throw UnsupportedError("fourier_rkhs_norm: quadrature of multi-center mixtures needs d = 1");
    if (f.dim > 3) throw UnsupportedError("fourier_rkhs_norm: quadrature needs d <= 3");

    // |F f(w)|^2 / F psi(w) = (sigma^2/2)^{-d/2} |sum_j c_j (tau_j^2/2)^{d/2}
    //   exp(-(tau_j^2 - sigma^2/2) w^2 / 4) exp(-i w z_j)|^2
    std::vector<double> amp(terms.size()), rate(terms.size());
    double beta_min = inf;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const double tau2 = terms[j].width * terms[j].width;
        amp[j] = terms[j].coef * std::pow(tau2 / 2.0, d / 2.0);
        rate[j] = (tau2 - sigma2 / 2.0) / 4.0;
        beta_min = std::min(beta_min, 2.0 * rate[j]);
    }
    const double prefactor =
        std::pow(2.0 * std::numbers::pi, -d / 2.0) * sphere_area(f.dim) * std::pow(sigma2 / 2.0, -d / 2.0);
    auto integrand = [&](double r) {
        const double r2 = r * r;
        double re = 0.0, im = 0.0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            const double m = amp[j] * std::exp(-rate[j] * r2);
            if (concentric) {
                re += m;
            } else {
                const double ph = r * terms[j].center[0];
                re += m * std::cos(ph);
                im -= m * std::sin(ph);
            }
        }
        return prefactor * std::pow(r, d - 1.0) * (re * re + im * im);
    };

    const double width = 1.2 * std::sqrt(std::log(1.0 / options.tail_ratio) / beta_min) + 1.0;
    std::priority_queue<Segment> heap;
    constexpr int kInitial = 16;
    double total = 0.0, error = 0.0;
    for (int i = 0; i < kInitial; ++i) {
        Segment s = gauss_kronrod(integrand, width * i / kInitial, width * (i + 1) / kInitial);
        total += s.value;
        error += s.error;
        heap.push(s);
    }
    while (error > options.rel_tol * std::fabs(total) && heap.size() < options.max_intervals) {
        Segment s = heap.top();
        heap.pop();
        const double mid = 0.5 * (s.a + s.b);
        Segment l = gauss_kronrod(integrand, s.a, mid);
        Segment r = gauss_kronrod(integrand, mid, s.b);
        total += l.value + r.value - s.value;
        error += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
    }
    if (error > options.rel_tol * std::fabs(total))
        throw AccuracyError("fourier_rkhs_norm: quadrature did not reach relative tolerance; estimate " + format(total),
                            total);
    const double sq = std::max(total, 0.0);
    return {std::sqrt(sq), sq, error, heap.size()};
}

WidthRatio width_ratio(const GaussMixtureFn& f, double sigma1, double sigma2) {
    if (!(sigma2 > 0.0) || !(sigma2 < sigma1)) throw std::invalid_argument("width_ratio needs 0 < sigma2 < sigma1");
    const FourierMethod method = f.terms.size() == 1 ? FourierMethod::Closed : FourierMethod::Quadrature;
    WidthRatio w;
    w.norm1 = fourier_rkhs_norm(f, KernelSpec::gaussian(sigma1), method).norm;
    w.norm2 = fourier_rkhs_norm(f, KernelSpec::gaussian(sigma2), method).norm;
    w.bound = std::pow(sigma2 / sigma1, -static_cast<double>(f.dim) / 2.0);
    if (std::isinf(w.norm1)) {
        w.kind = WidthRatio::Kind::Witness;
        w.ratio = std::numeric_limits<double>::infinity();
    } else {
        w.ratio = w.norm1 == 0.0 ? 0.0 : w.norm2 / w.norm1;
    }
    return w;
}

}  // namespace ks
