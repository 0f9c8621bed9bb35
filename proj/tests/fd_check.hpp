#pragma once

// Central finite-difference oracle used by the gradient tests. Independent of
// the backward passes it checks: it only re-runs forward code.

#include <cmath>
#include <functional>

#include "hanforge/tensor.hpp"

namespace fd {

inline constexpr double kStep = 1e-5;

// d f / d x at the current value of x, by central differences.
inline double central_diff(const std::function<double()>& f, double& x, double step = kStep) {
    double orig = x;
    x = orig + step;
    double fp = f();
    x = orig - step;
    double fm = f();
    x = orig;
    return (fp - fm) / (2.0 * step);
}

// Symmetric relative error. The denominator floor absorbs central-difference
// noise (~1e-10 absolute at step 1e-5) on near-zero gradients; a wrong
// gradient formula still shows up at the scale of the gradients themselves.
inline double rel_error(double analytic, double numeric) {
    double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-3);
    return std::abs(analytic - numeric) / denom;
}

// Max relative error between an analytic gradient tensor and finite
// differences of `loss` w.r.t. each entry of `param`.
inline double max_rel_error(const std::function<double()>& loss, hanforge::Tensor& param,
                            const hanforge::Tensor& analytic, double step = kStep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        double numeric = central_diff(loss, param[i], step);
        worst = std::max(worst, rel_error(analytic[i], numeric));
    }
    return worst;
}

}  // namespace fd
