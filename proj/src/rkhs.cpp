#include "ks/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ks/error.hpp"
#include "ks/rng.hpp"
#include "ks/simd.hpp"

namespace ks {

DD Interpolant::operator()(std::span<const double> z) const {
    if (alphas.empty()) return {};
    DDVector col = kernel_column(centers, kernel, z);
    return simd::active().dot(col.hi(), col.lo(), alphas.hi(), alphas.lo(), col.size());
}

Interpolant expansion(PointSet centers, const DDVector& coefs, const KernelSpec& k) {
    if (coefs.size() != centers.size()) throw DimensionError("expansion: coefficient count differs from center count");
    return {coefs, std::move(centers), k, 0.0, 0.0};
}

Interpolant interpolate(const PointSet& x, const DDVector& values, const KernelSpec& k, double ridge) {
    if (values.size() != x.size()) throw DimensionError("interpolate: value count differs from point count");
    GramMatrix g = assemble(x, k, Scaling::Unscaled);
    SpdSolve s = solve_spd(g, values, ridge);
    return {std::move(s.x), x, k, ridge, s.residual_inf};
}

Interpolant interpolate_regularized(const PointSet& x, const DDVector& values, const KernelSpec& k, double start,
                                    double max_ridge) {
    try {
        return interpolate(x, values, k, 0.0);
    } catch (const RankDeficiencyError&) {
    }
    const double scale = kappa(k);
    for (double r = start; r <= max_ridge * (1.0 + 1e-12); r *= 10.0) {
        try {
            return interpolate(x, values, k, r * scale);
        } catch (const RankDeficiencyError&) {
        }
    }
    throw RankDeficiencyError("interpolate_regularized: Gram matrix singular even with ridge " +
                                  std::to_string(max_ridge * scale),
                              0);
}

DD eval(const Interpolant& f, std::span<const double> z) { return f(z); }

DD eval(const NystromFunction& f, std::span<const double> z) { return f(z); }

DDVector values_on(const Interpolant& f, const PointSet& x) {
    DDVector v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v.set(i, f(x[i]));
    return v;
}

DD rkhs_norm(const Interpolant& f) {
    if (f.alphas.empty()) return {};
    GramMatrix g = assemble(f.centers, f.kernel, Scaling::Unscaled);
    DDVector ga = g.entries.multiply(f.alphas);
    DD q = simd::active().dot(f.alphas.hi(), f.alphas.lo(), ga.hi(), ga.lo(), ga.size());
    if (q.hi < -1e-24) throw ConsistencyError("rkhs_norm: negative quadratic form " + dd::to_string(q, 6));
    return q.hi <= 0.0 ? DD() : dd::sqrt(q);
}

std::vector<DD> coefficients(const DDVector& values, const EigenSystem& es) {
    const std::size_t n = es.size();
    if (values.size() != n) throw DimensionError("coefficients: value count differs from eigen system size");
    if (es.efuncs.rows() != n) throw std::invalid_argument("coefficients: eigen system has no eigenfunctions");
    const auto& kern = simd::active();
    std::vector<DD> a(n);
    for (std::size_t i = 0; i < n; ++i)
        a[i] = dd::div(kern.dot(es.efuncs.row_hi(i), es.efuncs.row_lo(i), values.hi(), values.lo(), n),
                       static_cast<double>(n));
    return a;
}

namespace {

struct PatternSearch {
    const Cholesky& chol;
    std::size_t n;
    DD best;
    std::vector<std::int8_t> best_pattern;
    std::size_t count = 0;

    void consider(std::vector<std::int8_t> pattern) {
        if (pattern[0] < 0)
            for (auto& s : pattern) s = static_cast<std::int8_t>(-s);
        DDVector b(n);
        for (std::size_t i = 0; i < n; ++i) b.set(i, DD(static_cast<double>(pattern[i])));
        DD q = chol.inverse_quadratic(b);
        ++count;
        // Lexicographic order with '+' first is the reverse of numeric order on int8.
        if (best_pattern.empty() || q > best ||
            (q == best && std::lexicographical_compare(pattern.begin(), pattern.end(), best_pattern.begin(),
                                                       best_pattern.end(), std::greater<>()))) {
            best = q;
            best_pattern = std::move(pattern);
        }
    }
};

}  // namespace

ShatterResult min_shatter_norm(const PointSet& x, const KernelSpec& k, double gamma, const ShatterOptions& options) {
    const std::size_t n = x.size();
    if (n == 0) throw SizeError("min_shatter_norm: empty point set");
    if (!(gamma > 0.0)) throw std::invalid_argument("min_shatter_norm: gamma must be positive");
    if (options.mode == ShatterMode::Brute && n > options.brute_limit)
        throw SizeError("min_shatter_norm: brute force needs n <= " + std::to_string(options.brute_limit) + ", got " +
                        std::to_string(n));

    GramMatrix g = assemble(x, k, Scaling::Unscaled);
    Cholesky chol(g.entries, 0.0);
    PatternSearch search{chol, n, DD(), {}};

    if (options.mode == ShatterMode::Brute) {
        const std::uint64_t total = std::uint64_t{1} << (n - 1);
        std::vector<std::int8_t> pattern(n);
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            pattern[0] = 1;
            for (std::size_t i = 1; i < n; ++i) pattern[i] = (mask >> (n - 1 - i)) & 1 ? -1 : 1;
            search.consider(pattern);
        }
    } else {
        // The largest sigma^T G^{-1} sigma comes from patterns aligned with the
        // bottom of the spectrum.
        GramMatrix op = assemble(x, k, Scaling::Operator);
        SymmetricEigen se = jacobi_eigen(op.entries);
        std::vector<std::int8_t> pattern(n);
        for (std::size_t j = n; j-- > 0;) {
            for (std::size_t i = 0; i < n; ++i) pattern[i] = se.vectors(j, i).hi < 0.0 ? -1 : 1;
            search.consider(pattern);
        }
        Rng rng(derive_stream(options.seed, 0x5a77e4));
        for (std::size_t r = 0; r < options.random_patterns; ++r) {
            for (std::size_t i = 0; i < n; ++i) pattern[i] = rng.next() >> 63 ? -1 : 1;
            search.consider(pattern);
        }
    }

    ShatterResult out;
    out.radius = dd::mul(dd::sqrt(search.best), gamma);
    out.worst_pattern = std::move(search.best_pattern);
    out.gamma = gamma;
    out.n = n;
    out.patterns = search.count;
    out.lower_bound = options.mode == ShatterMode::Heuristic;
    return out;
}

}  // namespace ks
