#include "ks/gd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ks/error.hpp"
#include "ks/simd.hpp"
#include "ks/spectral.hpp"

namespace ks {

namespace {

struct Attempt {
    GdTrajectory traj;
    bool diverged = false;
};

Attempt run(const GramMatrix& g, const std::vector<double>& y, double eta, double sqrt_kappa, const GdOptions& o) {
    const std::size_t n = g.size();
    const auto& kern = simd::active();
    const double step_scale = eta * 2.0 / static_cast<double>(n);
    Attempt out;
    GdTrajectory& t = out.traj;
    t.eta = eta;
    t.alphas = DDVector(n);
    t.steps.reserve(std::min<std::size_t>(o.max_steps + 1, 1 << 16));

    DDVector r(n);
    DD prev_norm;
    double prev_bound = 0.0;
    double prev_loss = 0.0;
    int rising = 0;
    for (std::size_t step = 0;; ++step) {
        // One matvec gives both the predictions and the norm.
        DDVector ga = g.entries.multiply(t.alphas);
        double loss = 0.0;
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            DD ri = dd::sub(ga[i], DD(y[i]));
            r.set(i, ri);
            loss += ri.hi * ri.hi;
            abs_sum += std::fabs(ri.hi);
        }
        loss /= static_cast<double>(n);
        DD q = kern.dot(t.alphas.hi(), t.alphas.lo(), ga.hi(), ga.lo(), n);
        DD norm = q.hi > 0.0 ? dd::sqrt(q) : DD();

        GdStep rec;
        rec.step = step;
        rec.loss = loss;
        rec.norm = norm;
        if (step > 0) {
            rec.increment = dd::to_double(dd::sub(norm, prev_norm));
            rec.bound = prev_bound;
            rec.within_bound = rec.increment <= rec.bound * (1.0 + o.bound_slack) + o.bound_slack * norm.hi;
            if (!rec.within_bound) ++t.bound_violations;
            rising = loss > prev_loss ? rising + 1 : 0;
        }
        t.steps.push_back(rec);

        if (loss <= o.stop_loss) {
            t.converged = true;
            t.steps_to_fit = step;
            return out;
        }
        if (rising >= o.divergence_window || !std::isfinite(loss)) {
            out.diverged = true;
            return out;
        }
        if (step == o.max_steps) {
            t.steps_to_fit = o.max_steps;
            return out;
        }
        prev_norm = norm;
        prev_loss = loss;
        prev_bound = step_scale * sqrt_kappa * abs_sum;
        kern.axpy(DD(-step_scale), r.hi(), r.lo(), t.alphas.hi(), t.alphas.lo(), n);
    }
}

}  // namespace

GdTrajectory gd_train(const PointSet& x, const std::vector<double>& y, const KernelSpec& k, const GdOptions& options) {
    if (y.size() != x.size()) throw DimensionError("gd_train: label count differs from point count");
    if (x.empty()) throw SizeError("gd_train: empty point set");
    const double lambda_max = dd::to_double(opnorm(assemble(x, k, Scaling::Operator).entries));
    if (options.eta < 0.0) throw StepSizeError("gd_train: negative step size");
    if (options.eta > 1.0 / lambda_max)
        throw StepSizeError("gd_train: step size " + std::to_string(options.eta) + " exceeds 1/lambda_max = " +
                            std::to_string(1.0 / lambda_max));
    double eta = options.eta > 0.0 ? options.eta : 0.5 / lambda_max;

    GramMatrix g = assemble(x, k, Scaling::Unscaled);
    const double sqrt_kappa = std::sqrt(kappa(k));
    for (int h = 0; h <= options.max_halvings; ++h) {
        Attempt a = run(g, y, eta, sqrt_kappa, options);
        if (!a.diverged) {
            a.traj.lambda_max = lambda_max;
            a.traj.halvings = h;
            return a.traj;
        }
        eta *= 0.5;
    }
    throw StepSizeError("gd_train: loss still diverging after " + std::to_string(options.max_halvings) +
                        " step-size halvings");
}

}  // namespace ks
