#include "ks/kernel.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "ks/error.hpp"

namespace ks {

KernelSpec::KernelSpec(Family f, double sigma, double c, double alpha)
    : family_(f), sigma_(sigma), c_(c), alpha_(alpha) {
    switch (f) {
        case Family::Gaussian:
            if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParseError("gaussian kernel needs sigma > 0");
            inv_sigma2_ = dd::div(DD(1.0), dd::two_prod(sigma, sigma));
            break;
        case Family::Laplace:
            if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParseError("laplace kernel needs sigma > 0");
            inv_sigma_ = dd::div(DD(1.0), DD(sigma));
            break;
        case Family::InverseMultiquadric:
            if (!(c > 0.0) || !std::isfinite(c)) throw ParseError("imq kernel needs c > 0");
            if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParseError("imq kernel needs alpha > 0");
            c2_ = dd::two_prod(c, c);
            break;
    }
}

KernelSpec KernelSpec::gaussian(double sigma) { return {Family::Gaussian, sigma, 0.0, 0.0}; }
KernelSpec KernelSpec::imq(double c, double alpha) { return {Family::InverseMultiquadric, 0.0, c, alpha}; }
KernelSpec KernelSpec::laplace(double sigma) { return {Family::Laplace, sigma, 0.0, 0.0}; }

namespace {

std::map<std::string, double> parse_params(const std::string& body, const std::string& text) {
    std::map<std::string, double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("kernel parameter without '=' in '" + text + "'");
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        double v = 0.0;
        auto r = std::from_chars(val.data(), val.data() + val.size(), v);
        if (r.ec != std::errc() || r.ptr != val.data() + val.size())
            throw ParseError("bad value for kernel parameter '" + key + "' in '" + text + "'");
        if (!out.emplace(key, v).second) throw ParseError("duplicate kernel parameter '" + key + "'");
    }
    return out;
}

double take(std::map<std::string, double>& p, const std::string& key, const std::string& text) {
    auto it = p.find(key);
    if (it == p.end()) throw ParseError("kernel '" + text + "' is missing parameter '" + key + "'");
    double v = it->second;
    p.erase(it);
    return v;
}

std::string fmt(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

}  // namespace

KernelSpec KernelSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string family = text.substr(0, colon);
    auto params = parse_params(colon == std::string::npos ? "" : text.substr(colon + 1), text);
    KernelSpec result = [&] {
        if (family == "gaussian") return gaussian(take(params, "sigma", text));
        if (family == "laplace") return laplace(take(params, "sigma", text));
        if (family == "imq") {
            double c = take(params, "c", text);
            return imq(c, take(params, "alpha", text));
        }
        throw ParseError("unknown kernel family '" + family + "'");
    }();
    if (!params.empty()) throw ParseError("unknown kernel parameter '" + params.begin()->first + "' in '" + text + "'");
    return result;
}

std::string KernelSpec::to_string() const {
    switch (family_) {
        case Family::Gaussian: return "gaussian:sigma=" + fmt(sigma_);
        case Family::Laplace: return "laplace:sigma=" + fmt(sigma_);
        case Family::InverseMultiquadric: return "imq:c=" + fmt(c_) + ",alpha=" + fmt(alpha_);
    }
    return {};
}

DD KernelSpec::profile(DD r2) const {
    switch (family_) {
        case Family::Gaussian: return dd::exp(dd::neg(dd::mul(r2, inv_sigma2_)));
        case Family::Laplace: return dd::exp(dd::neg(dd::mul(dd::sqrt(r2), inv_sigma_)));
        case Family::InverseMultiquadric: return dd::pow(dd::add(c2_, r2), -alpha_);
    }
    return {};
}

DD squared_distance(std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) throw DimensionError("kernel arguments differ in dimension");
    DD s;
    for (std::size_t j = 0; j < x.size(); ++j) s = dd::add(s, dd::sqr(dd::two_sum(x[j], -z[j])));
    return s;
}

DD KernelSpec::operator()(std::span<const double> x, std::span<const double> z) const {
    return profile(squared_distance(x, z));
}

double KernelSpec::eval_f64(std::span<const double> x, std::span<const double> z) const {
    if (x.size() != z.size()) throw DimensionError("kernel arguments differ in dimension");
    double r2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - z[j]) * (x[j] - z[j]);
    switch (family_) {
        case Family::Gaussian: return std::exp(-r2 / (sigma_ * sigma_));
        case Family::Laplace: return std::exp(-std::sqrt(r2) / sigma_);
        case Family::InverseMultiquadric: return std::pow(c_ * c_ + r2, -alpha_);
    }
    return 0.0;
}

DD kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> z) { return k(x, z); }

double kappa(const KernelSpec& k) {
    if (k.family() == KernelSpec::Family::InverseMultiquadric) return std::pow(k.c(), -2.0 * k.alpha());
    return 1.0;
}

GramMatrix assemble(const PointSet& x, const KernelSpec& k, Scaling scaling) {
    if (x.empty()) throw SizeError("cannot assemble a Gram matrix on an empty point set");
    const std::size_t n = x.size();
    DDMatrix m(n, n);
    const double scale = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            DD v = k(x[i], x[j]);
            if (scaling == Scaling::Operator) v = dd::div(v, scale);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    return {std::move(m), scaling, x, k};
}

DDVector kernel_column(const PointSet& x, const KernelSpec& k, std::span<const double> z) {
    DDVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.set(i, k(x[i], z));
    return out;
}

}  // namespace ks
