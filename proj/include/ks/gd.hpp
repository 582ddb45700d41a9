#pragma once
// Gradient descent on the squared loss in coefficient space,
//   alpha <- alpha - eta (2/n) r,   r_i = f(x_i) - y_i,
// starting from f = 0, with per-step RKHS norm bookkeeping.

#include <cstddef>
#include <vector>

#include "ks/geometry.hpp"
#include "ks/kernel.hpp"
#include "ks/matrix.hpp"

namespace ks {

struct GdStep {
    std::size_t step = 0;
    double loss = 0.0;       // (1/n) sum r_i^2 at f_t
    DD norm;                 // |f_t|_H
    double increment = 0.0;  // |f_t|_H - |f_{t-1}|_H (0 at t = 0)
    double bound = 0.0;      // eta (2/n) sqrt(kappa) sum |r_i| at f_{t-1}
    bool within_bound = true;
};

struct GdOptions {
    double eta = 0.0;              // 0: 1 / (2 lambda_max(K_n))
    std::size_t max_steps = 100000;
    double stop_loss = 0.0;        // stop once loss <= stop_loss
    int divergence_window = 5;     // consecutive loss increases that count as divergence
    int max_halvings = 20;
    // Slack on the increment check for double-double rounding in the norm.
    double bound_slack = 64.0 * dd::kEpsilon;
};

struct GdTrajectory {
    std::vector<GdStep> steps;     // steps[t] describes f_t
    double eta = 0.0;              // step size actually used
    double lambda_max = 0.0;
    int halvings = 0;
    bool converged = false;
    std::size_t steps_to_fit = 0;  // first t with loss <= stop_loss; max_steps if never
    std::size_t bound_violations = 0;
    DDVector alphas;
};

// Throws StepSizeError if options.eta exceeds 1/lambda_max(K_n), or if the
// run keeps diverging after max_halvings restarts with eta halved.
GdTrajectory gd_train(const PointSet& x, const std::vector<double>& y, const KernelSpec& k,
                      const GdOptions& options = {});

}  // namespace ks
