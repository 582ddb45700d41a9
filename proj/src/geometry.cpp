#include "ks/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ks/error.hpp"
#include "ks/rng.hpp"

namespace ks {

Domain::Domain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw DimensionError("domain bounds differ in length");
    if (lower_.empty() || lower_.size() > kMaxDim)
        throw DimensionError("domain dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    for (std::size_t j = 0; j < lower_.size(); ++j)
        if (!(lower_[j] < upper_[j])) throw DimensionError("domain requires lower < upper on every axis");
}

Domain Domain::unit_cube(std::size_t d) { return Domain(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)); }

bool Domain::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t j = 0; j < dim(); ++j)
        if (x[j] < lower_[j] || x[j] > upper_[j]) return false;
    return true;
}

PointSet::PointSet(Domain domain, std::vector<double> coords, std::string label)
    : domain_(std::move(domain)), coords_(std::move(coords)), label_(std::move(label)) {
    if (coords_.size() % dim() != 0) throw DimensionError("coordinate count is not a multiple of the dimension");
    for (std::size_t i = 0; i < size(); ++i)
        if (!domain_.contains((*this)[i])) throw DimensionError("point " + std::to_string(i) + " lies outside the domain");
}

PointSet PointSet::prefix(std::size_t count) const {
    count = std::min(count, size());
    return {domain_, std::vector<double>(coords_.begin(), coords_.begin() + static_cast<std::ptrdiff_t>(count * dim())), label_};
}

PointSet PointSet::subset(std::span<const std::size_t> indices) const {
    std::vector<double> c;
    c.reserve(indices.size() * dim());
    for (std::size_t i : indices) {
        if (i >= size()) throw DimensionError("subset index out of range");
        auto p = (*this)[i];
        c.insert(c.end(), p.begin(), p.end());
    }
    return {domain_, std::move(c), label_};
}

PointSet PointSet::with_point(std::span<const double> x) const {
    std::vector<double> c = coords_;
    c.insert(c.end(), x.begin(), x.end());
    return {domain_, std::move(c), label_};
}

std::string MeasureSpec::name() const {
    switch (kind) {
        case Kind::Grid: return "grid";
        case Kind::UniformIid: return "uniform";
        case Kind::GaussianMixture: return "mixture";
        case Kind::Circle: return "circle";
    }
    return "unknown";
}

PointSet gen_grid(const Domain& domain, std::size_t m, const SamplingLimits& limits) {
    if (m < 1) throw SizeError("grid needs at least one point per axis");
    const std::size_t d = domain.dim();
    double total = std::pow(static_cast<double>(m), static_cast<double>(d));
    if (total > static_cast<double>(limits.max_points))
        throw SizeError("grid of " + std::to_string(m) + "^" + std::to_string(d) + " points exceeds the cap of " +
                        std::to_string(limits.max_points));
    const std::size_t n = static_cast<std::size_t>(total);

    std::vector<std::vector<double>> axis(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = domain.lower()[j];
        const double hi = domain.upper()[j];
        if (m == 1) {
            axis[j] = {0.5 * (lo + hi)};
            continue;
        }
        axis[j].resize(m);
        for (std::size_t k = 0; k < m; ++k)
            axis[j][k] = k + 1 == m ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
    }

    std::vector<double> coords;
    coords.reserve(n * d);
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t j = 0; j < d; ++j) coords.push_back(axis[j][idx[j]]);
        // last axis varies fastest
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < m) break;
            idx[j] = 0;
        }
    }
    return {domain, std::move(coords), "grid"};
}

PointSet gen_sample(const MeasureSpec& spec, const Domain& domain, std::size_t n, const SamplingLimits& limits) {
    const std::size_t d = domain.dim();
    if (n > limits.max_points) throw SizeError("sample size exceeds the cap");
    if (n == 0) return {domain, {}, spec.name()};

    if (spec.kind == MeasureSpec::Kind::Grid) {
        auto m = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d))));
        std::size_t count = 1;
        for (std::size_t j = 0; j < d; ++j) count *= m;
        if (count != n) throw SizeError("grid measure needs n to be a perfect d-th power");
        return gen_grid(domain, m, limits);
    }

    Rng rng(spec.seed);
    std::vector<double> coords;
    coords.reserve(n * d);
    const auto& lo = domain.lower();
    const auto& hi = domain.upper();

    switch (spec.kind) {
        case MeasureSpec::Kind::UniformIid:
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) coords.push_back(lo[j] + (hi[j] - lo[j]) * rng.uniform());
            break;

        case MeasureSpec::Kind::GaussianMixture: {
            const auto& comps = spec.components;
            if (comps.empty()) throw SamplingError("mixture has no components");
            double wsum = 0.0;
            for (const auto& c : comps) {
                if (!(c.weight > 0.0)) throw SamplingError("mixture weights must be positive");
                if (!(c.width > 0.0)) throw SamplingError("mixture widths must be positive");
                if (c.center.size() != d) throw DimensionError("mixture center dimension mismatch");
                wsum += c.weight;
            }
            if (std::fabs(wsum - 1.0) > 1e-9) throw SamplingError("mixture weights must sum to 1");
            std::vector<double> cumulative;
            double acc = 0.0;
            for (const auto& c : comps) cumulative.push_back(acc += c.weight / wsum);

            const std::size_t cap = limits.attempts_per_point * n + limits.attempts_per_point;
            std::size_t attempts = 0;
            std::vector<double> x(d);
            while (coords.size() < n * d) {
                if (++attempts > cap) throw SamplingError("mixture rejection sampling exceeded its iteration cap");
                double u = rng.uniform();
                std::size_t k = static_cast<std::size_t>(std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
                if (k >= comps.size()) k = comps.size() - 1;
                for (std::size_t j = 0; j < d; ++j) x[j] = comps[k].center[j] + comps[k].width * rng.normal();
                if (domain.contains(x)) coords.insert(coords.end(), x.begin(), x.end());
            }
            break;
        }

        case MeasureSpec::Kind::Circle: {
            if (d < 2) throw DimensionError("circle measure needs d >= 2");
            std::vector<double> mid(d);
            for (std::size_t j = 0; j < d; ++j) mid[j] = 0.5 * (lo[j] + hi[j]);
            const double radius = 0.4 * std::min(hi[0] - lo[0], hi[1] - lo[1]);
            for (std::size_t i = 0; i < n; ++i) {
                double t = 2.0 * 3.141592653589793 * rng.uniform();
                for (std::size_t j = 0; j < d; ++j) coords.push_back(mid[j]);
                coords[coords.size() - d] = mid[0] + radius * std::cos(t);
                coords[coords.size() - d + 1] = mid[1] + radius * std::sin(t);
            }
            break;
        }

        case MeasureSpec::Kind::Grid: break;
    }
    return {domain, std::move(coords), spec.name()};
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double t = a[j] - b[j];
        s += t * t;
    }
    return std::sqrt(s);
}

FillDistance fill_distance(const PointSet& x, std::size_t resolution) {
    if (x.empty()) throw SizeError("fill distance of an empty set");
    const std::size_t d = x.dim();
    const auto& lo = x.domain().lower();
    const auto& hi = x.domain().upper();

    if (d == 1) {
        std::vector<double> v(x.coords());
        std::sort(v.begin(), v.end());
        double best = std::max(v.front() - lo[0], hi[0] - v.back());
        for (std::size_t i = 1; i < v.size(); ++i) best = std::max(best, 0.5 * (v[i] - v[i - 1]));
        return {best, 0.0, true};
    }

    if (resolution < 2) resolution = 2;
    double spacing = 0.0;
    for (std::size_t j = 0; j < d; ++j) spacing = std::max(spacing, (hi[j] - lo[j]) / static_cast<double>(resolution - 1));
    Domain dom = x.domain();
    PointSet cand = gen_grid(dom, resolution, SamplingLimits{std::numeric_limits<std::size_t>::max(), 1});

    double best = 0.0;
    for (std::size_t c = 0; c < cand.size(); ++c) {
        auto p = cand[c];
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size() && nearest > best; ++i) nearest = std::min(nearest, distance(p, x[i]));
        best = std::max(best, nearest);
    }
    return {best, spacing, false};
}

double separation(const PointSet& x) {
    if (x.size() < 2) throw SizeError("separation needs at least two points");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) best = std::min(best, distance(x[i], x[j]));
    return best;
}

void write_points_csv(const PointSet& x, std::ostream& out) {
    for (std::size_t j = 0; j < x.dim(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto p = x[i];
        for (std::size_t j = 0; j < x.dim(); ++j) {
            auto r = std::to_chars(buf, buf + sizeof buf, p[j]);
            if (j) out << ',';
            out.write(buf, r.ptr - buf);
        }
        out << '\n';
    }
}

PointSet read_points_csv(std::istream& in, const Domain& domain, std::string label) {
    std::string line;
    std::vector<double> coords;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line[0] == 'x') continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
                throw ParseError("points csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            coords.push_back(v);
            ++count;
        }
        if (count != domain.dim())
            throw ParseError("points csv line " + std::to_string(lineno) + ": expected " + std::to_string(domain.dim()) + " columns");
    }
    return {domain, std::move(coords), std::move(label)};
}

}  // namespace ks
