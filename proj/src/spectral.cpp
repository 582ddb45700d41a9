#include "ks/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ks/error.hpp"
#include "ks/simd.hpp"

namespace ks {

const char* to_string(Precision p) { return p == Precision::DoubleDouble ? "dd" : "f64"; }

double precision_floor(Precision p, double kappa) {
    return p == Precision::DoubleDouble ? 1e-30 * kappa : 10.0 * 0x1.0p-52 * kappa;
}

namespace {

double frobenius(const DDMatrix& a, bool off_only) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (off_only && i == j) continue;
            double v = a.row_hi(i)[j];
            s += v * v;
        }
    return std::sqrt(s);
}

struct Rotation {
    DD c;
    DD s;
    DD t;
};

Rotation rotation_for(DD app, DD aqq, DD apq) {
    DD theta = dd::div(dd::sub(aqq, app), dd::mul(apq, 2.0));
    DD t;
    if (std::fabs(theta.hi) > 1e100) {
        t = dd::div(DD(0.5), theta);
    } else {
        DD denom = dd::add(dd::abs(theta), dd::sqrt(dd::add(dd::sqr(theta), DD(1.0))));
        t = dd::div(DD(theta.hi < 0.0 ? -1.0 : 1.0), denom);
    }
    DD c = dd::div(DD(1.0), dd::sqrt(dd::add(dd::sqr(t), DD(1.0))));
    return {c, dd::mul(t, c), t};
}

template <class Less>
std::vector<std::size_t> descending_order(std::size_t n, Less greater) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), greater);
    return order;
}

}  // namespace

SymmetricEigen jacobi_eigen(DDMatrix a, const JacobiOptions& options) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionError("jacobi_eigen needs a square matrix");
    if (!a.is_symmetric()) throw DimensionError("jacobi_eigen needs a symmetric matrix");

    const auto& kern = simd::active();
    DDMatrix vt = options.vectors ? DDMatrix::identity(n) : DDMatrix();
    const double fro = frobenius(a, false);
    const double tiny = fro * 1e-300;

    int sweep = 0;
    bool converged = n <= 1;
    while (!converged && sweep < options.max_sweeps) {
        ++sweep;
        std::size_t rotations = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                DD apq = a(p, q);
                if (apq.hi == 0.0) continue;
                DD app = a(p, p);
                DD aqq = a(q, q);
                // Negligible against the geometric mean of the diagonal: drop it
                // (a relative perturbation of at most one unit of roundoff).
                if (std::fabs(apq.hi) <= dd::kEpsilon * std::sqrt(std::fabs(app.hi) * std::fabs(aqq.hi)) ||
                    std::fabs(apq.hi) <= tiny) {
                    a.set(p, q, DD());
                    a.set(q, p, DD());
                    continue;
                }
                Rotation r = rotation_for(app, aqq, apq);
                DD tapq = dd::mul(r.t, apq);

                kern.rotate(a.row_hi(p), a.row_lo(p), a.row_hi(q), a.row_lo(q), n, r.c, r.s);
                a.set(p, p, dd::sub(app, tapq));
                a.set(q, q, dd::add(aqq, tapq));
                a.set(p, q, DD());
                a.set(q, p, DD());
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    a.set(k, p, a(p, k));
                    a.set(k, q, a(q, k));
                }
                if (options.vectors) kern.rotate(vt.row_hi(p), vt.row_lo(p), vt.row_hi(q), vt.row_lo(q), n, r.c, r.s);
                ++rotations;
            }
        }
        converged = rotations == 0;
    }

    const double off = frobenius(a, true);
    if (!converged && off > options.off_tolerance * fro)
        throw ConvergenceError("jacobi_eigen: no convergence after " + std::to_string(sweep) +
                                   " sweeps, off-diagonal norm " + std::to_string(off),
                               off);

    auto order = descending_order(n, [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.sweeps = sweep;
    out.off_norm = off;
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.values[k] = a(order[k], order[k]);

    if (options.vectors) {
        out.vectors = DDMatrix(n, n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t src = order[k];
            std::size_t arg = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::fabs(vt.row_hi(src)[i]) > std::fabs(vt.row_hi(src)[arg])) arg = i;
            const bool flip = vt.row_hi(src)[arg] < 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                DD v = vt(src, i);
                out.vectors.set(k, i, flip ? dd::neg(v) : v);
            }
        }
    }
    return out;
}

SymmetricEigenF64 jacobi_eigen_f64(std::vector<double> a, std::size_t n, const JacobiOptions& options) {
    if (a.size() != n * n) throw DimensionError("jacobi_eigen_f64: size mismatch");
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (at(i, j) != at(j, i)) throw DimensionError("jacobi_eigen_f64 needs a symmetric matrix");

    std::vector<double> vt;
    if (options.vectors) {
        vt.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
    }
    double fro = 0.0;
    for (double v : a) fro += v * v;
    fro = std::sqrt(fro);
    constexpr double eps = 0x1.0p-53;

    int sweep = 0;
    bool converged = n <= 1;
    while (!converged && sweep < options.max_sweeps) {
        ++sweep;
        std::size_t rotations = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (apq == 0.0) continue;
                double app = at(p, p);
                double aqq = at(q, q);
                if (std::fabs(apq) <= eps * std::sqrt(std::fabs(app * aqq)) || std::fabs(apq) <= fro * 1e-300) {
                    at(p, q) = at(q, p) = 0.0;
                    continue;
                }
                double theta = (aqq - app) / (2.0 * apq);
                double t = std::fabs(theta) > 1e100 ? 0.5 / theta
                                                    : (theta < 0 ? -1.0 : 1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double x = at(p, k);
                    double y = at(q, k);
                    at(p, k) = c * x - s * y;
                    at(q, k) = s * x + c * y;
                }
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = at(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    at(k, p) = at(p, k);
                    at(k, q) = at(q, k);
                }
                if (options.vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        double x = vt[p * n + k];
                        double y = vt[q * n + k];
                        vt[p * n + k] = c * x - s * y;
                        vt[q * n + k] = s * x + c * y;
                    }
                }
                ++rotations;
            }
        }
        converged = rotations == 0;
    }
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) off += at(i, j) * at(i, j);
    off = std::sqrt(off);
    if (!converged && off > 1e-14 * fro)
        throw ConvergenceError("jacobi_eigen_f64: no convergence after " + std::to_string(sweep) + " sweeps", off);

    auto order = descending_order(n, [&](std::size_t i, std::size_t j) { return at(i, i) > at(j, j); });
    SymmetricEigenF64 out;
    out.sweeps = sweep;
    out.off_norm = off;
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.values[k] = at(order[k], order[k]);
    if (options.vectors) {
        out.vectors.resize(n * n);
        for (std::size_t k = 0; k < n; ++k) {
            const double* row = vt.data() + order[k] * n;
            std::size_t arg = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::fabs(row[i]) > std::fabs(row[arg])) arg = i;
            const double sign = row[arg] < 0.0 ? -1.0 : 1.0;
            for (std::size_t i = 0; i < n; ++i) out.vectors[k * n + i] = sign * row[i];
        }
    }
    return out;
}

std::size_t EigenSystem::resolvable() const {
    return static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), std::uint8_t{0}));
}

DDVector EigenSystem::efunc_values(std::size_t k) const {
    DDVector v(efuncs.cols());
    for (std::size_t i = 0; i < efuncs.cols(); ++i) v.set(i, efuncs(k, i));
    return v;
}

EigenSystem eig_sym(const GramMatrix& a, Precision precision, const JacobiOptions& options) {
    if (a.scaling != Scaling::Operator) throw std::invalid_argument("eig_sym expects an operator-scaled Gram matrix");
    const std::size_t n = a.size();
    EigenSystem es{.lambdas = {},
                   .clamped = {},
                   .efuncs = options.vectors ? DDMatrix(n, n) : DDMatrix(),
                   .points = a.points,
                   .kernel = a.kernel,
                   .floor = precision_floor(precision, kappa(a.kernel)),
                   .precision = precision};
    const DD root_n = dd::sqrt(DD(static_cast<double>(n)));
    es.lambdas.resize(n);
    es.clamped.resize(n, 0);

    auto clamp = [&](std::size_t k, DD v) {
        if (v.hi < es.floor) {
            es.lambdas[k] = DD();
            es.clamped[k] = 1;
        } else {
            es.lambdas[k] = v;
        }
    };

    if (precision == Precision::DoubleDouble) {
        SymmetricEigen se = jacobi_eigen(a.entries, options);
        es.sweeps = se.sweeps;
        es.off_norm = se.off_norm;
        for (std::size_t k = 0; k < n; ++k) {
            clamp(k, se.values[k]);
            if (!options.vectors) continue;
            for (std::size_t i = 0; i < n; ++i) es.efuncs.set(k, i, dd::mul(se.vectors(k, i), root_n));
        }
    } else {
        std::vector<double> m(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m[i * n + j] = dd::to_double(a.entries(i, j));
        SymmetricEigenF64 se = jacobi_eigen_f64(std::move(m), n, options);
        es.sweeps = se.sweeps;
        es.off_norm = se.off_norm;
        const double rn = std::sqrt(static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k) {
            clamp(k, DD(se.values[k]));
            if (!options.vectors) continue;
            for (std::size_t i = 0; i < n; ++i) es.efuncs.set(k, i, DD(se.vectors[k * n + i] * rn));
        }
    }
    return es;
}

DD NystromFunction::operator()(std::span<const double> z) const {
    DDVector col = kernel_column(centers, kernel, z);
    return simd::active().dot(col.hi(), col.lo(), weights.hi(), weights.lo(), col.size());
}

DD NystromFunction::rkhs_norm_squared() const {
    GramMatrix g = assemble(centers, kernel, Scaling::Unscaled);
    DDVector gb = g.entries.multiply(weights);
    return simd::active().dot(weights.hi(), weights.lo(), gb.hi(), gb.lo(), weights.size());
}

NystromFunction nystrom(const EigenSystem& es, std::size_t k) {
    if (k >= es.size()) throw std::out_of_range("nystrom: eigen index out of range");
    if (es.clamped[k] || es.lambdas[k].hi <= es.floor)
        throw PrecisionError("nystrom: eigenvalue " + std::to_string(k) + " is below the precision floor");
    const std::size_t n = es.size();
    const DD scale = dd::mul(es.lambdas[k], static_cast<double>(n));
    DDVector w(n);
    for (std::size_t i = 0; i < n; ++i) w.set(i, dd::div(es.efuncs(k, i), scale));
    return {es.lambdas[k], std::move(w), es.points, es.kernel};
}

Cholesky::Cholesky(const DDMatrix& g, double ridge) : l_(g.rows(), g.rows()), lt_(g.rows(), g.rows()) {
    const std::size_t n = g.rows();
    if (g.cols() != n) throw DimensionError("Cholesky needs a square matrix");
    const auto& kern = simd::active();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(g(i, i).hi + ridge));
    const double tol = kPivotTolerance * max_diag;

    for (std::size_t j = 0; j < n; ++j) {
        DD d = dd::sub(dd::add(g(j, j), DD(ridge)), kern.dot(l_.row_hi(j), l_.row_lo(j), l_.row_hi(j), l_.row_lo(j), j));
        if (!(d.hi > tol))
            throw RankDeficiencyError("Cholesky pivot " + std::to_string(j) +
                                          " is at or below the arithmetic resolution; the matrix is numerically "
                                          "singular (use a positive ridge)",
                                      j);
        DD ljj = dd::sqrt(d);
        l_.set(j, j, ljj);
        lt_.set(j, j, ljj);
        for (std::size_t i = j + 1; i < n; ++i) {
            DD s = dd::sub(g(i, j), kern.dot(l_.row_hi(i), l_.row_lo(i), l_.row_hi(j), l_.row_lo(j), j));
            DD lij = dd::div(s, ljj);
            l_.set(i, j, lij);
            lt_.set(j, i, lij);
        }
    }
}

DDVector Cholesky::forward(const DDVector& b) const {
    const std::size_t n = size();
    if (b.size() != n) throw DimensionError("Cholesky: right-hand side length mismatch");
    const auto& kern = simd::active();
    DDVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        DD s = dd::sub(b[i], kern.dot(l_.row_hi(i), l_.row_lo(i), y.hi(), y.lo(), i));
        y.set(i, dd::div(s, l_(i, i)));
    }
    return y;
}

DDVector Cholesky::solve(const DDVector& b) const {
    const std::size_t n = size();
    DDVector y = forward(b);
    const auto& kern = simd::active();
    DDVector x(n);
    for (std::size_t i = n; i-- > 0;) {
        DD s = dd::sub(y[i], kern.dot(lt_.row_hi(i) + i + 1, lt_.row_lo(i) + i + 1, x.hi() + i + 1, x.lo() + i + 1, n - i - 1));
        x.set(i, dd::div(s, lt_(i, i)));
    }
    return x;
}

DD Cholesky::inverse_quadratic(const DDVector& b) const {
    DDVector y = forward(b);
    return simd::active().dot(y.hi(), y.lo(), y.hi(), y.lo(), y.size());
}

SpdSolve solve_spd(const GramMatrix& g, const DDVector& b, double ridge) {
    if (g.scaling != Scaling::Unscaled) throw std::invalid_argument("solve_spd expects an unscaled Gram matrix");
    if (ridge < 0.0) throw std::invalid_argument("solve_spd: ridge must be nonnegative");
    Cholesky chol(g.entries, ridge);
    SpdSolve out{chol.solve(b), 0.0, ridge};
    DDVector gx = g.entries.multiply(out.x);
    for (std::size_t i = 0; i < b.size(); ++i)
        out.residual_inf = std::max(out.residual_inf, std::fabs(dd::to_double(dd::sub(gx[i], b[i]))));
    return out;
}

namespace {

// Partial Cholesky in the given pivot order. Returns L as an n x m row-major matrix.
DDMatrix partial_cholesky(const PointSet& x, const KernelSpec& k, std::span<const std::size_t> pivots, double tol) {
    const std::size_t n = x.size();
    const std::size_t m = pivots.size();
    const auto& kern = simd::active();
    DDMatrix cols(m, n);  // row j holds column j of L
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t p = pivots[j];
        DDVector c = kernel_column(x, k, x[p]);
        for (std::size_t l = 0; l < j; ++l)
            kern.axpy(dd::neg(cols(l, p)), cols.row_hi(l), cols.row_lo(l), c.hi(), c.lo(), n);
        DD d = c[p];
        if (!(d.hi > tol))
            throw RankDeficiencyError("nystrom_lowrank: pivot block is numerically singular at pivot " +
                                          std::to_string(j) + " (point " + std::to_string(p) + "); choose different pivots",
                                      j);
        DD inv = dd::div(DD(1.0), dd::sqrt(d));
        for (std::size_t i = 0; i < n; ++i) cols.set(j, i, dd::mul(c[i], inv));
    }
    DDMatrix l(n, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) l.set(i, j, cols(j, i));
    return l;
}

}  // namespace

DDMatrix nystrom_lowrank(const PointSet& x, const KernelSpec& k, std::span<const std::size_t> pivots) {
    const std::size_t n = x.size();
    if (pivots.size() > n) throw SizeError("nystrom_lowrank: more pivots than points");
    std::vector<std::size_t> sorted(pivots.begin(), pivots.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("nystrom_lowrank: pivots must be distinct");
    if (!sorted.empty() && sorted.back() >= n) throw std::out_of_range("nystrom_lowrank: pivot index out of range");

    DDMatrix a(n, n);
    if (pivots.empty()) return a;
    DDMatrix l = partial_cholesky(x, k, pivots, kPivotTolerance * kappa(k));
    const auto& kern = simd::active();
    const std::size_t m = pivots.size();
    const double scale = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            DD v = dd::div(kern.dot(l.row_hi(i), l.row_lo(i), l.row_hi(j), l.row_lo(j), m), scale);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    return a;
}

std::vector<std::size_t> greedy_pivots(const PointSet& x, const KernelSpec& k, std::size_t max_rank, double rel_tol) {
    const std::size_t n = x.size();
    max_rank = std::min(max_rank, n);
    const auto& kern = simd::active();
    std::vector<DD> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = k(x[i], x[i]);
    const double tol = rel_tol * kappa(k);

    std::vector<std::size_t> order;
    DDMatrix cols(max_rank, n);
    std::vector<std::uint8_t> used(n, 0);
    while (order.size() < max_rank) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i] && (best == n || resid[i] > resid[best])) best = i;
        if (best == n || !(resid[best].hi > tol)) break;
        const std::size_t j = order.size();
        DDVector c = kernel_column(x, k, x[best]);
        for (std::size_t l = 0; l < j; ++l)
            kern.axpy(dd::neg(cols(l, best)), cols.row_hi(l), cols.row_lo(l), c.hi(), c.lo(), n);
        DD inv = dd::div(DD(1.0), dd::sqrt(c[best]));
        for (std::size_t i = 0; i < n; ++i) {
            DD v = dd::mul(c[i], inv);
            cols.set(j, i, v);
            resid[i] = dd::sub(resid[i], dd::sqr(v));
        }
        used[best] = 1;
        order.push_back(best);
    }
    return order;
}

DD opnorm(const DDMatrix& a) {
    if (a.rows() == 0) return {};
    JacobiOptions opt;
    opt.vectors = false;
    SymmetricEigen se = jacobi_eigen(a, opt);
    DD best;
    for (DD v : se.values) best = std::max(best, dd::abs(v));
    return best;
}

}  // namespace ks
