// Test-only finite-difference gradient oracle: central differences with
// h = 1e-5 in double precision, compared against tape gradients.
//
// Central differences themselves carry O(h^2) truncation error, so an
// element whose true gradient is tiny relative to the loss scale cannot be
// verified to a pure relative tolerance. The comparison therefore uses the
// usual atol + rtol form: a violation is |fd - an| > atol + rtol*max(|fd|,
// |an|), with rtol = 1e-4 and atol floored at 1e-7 times the loss magnitude.
// The reported score is the worst |fd - an| / (atol + rtol*max(...)); values
// below 1 mean every element passed at rel. 1e-4.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "retroforecast/params.hpp"

namespace rftest {

constexpr double kGradRtol = 1e-4;

inline double grad_atol(double loss_scale) {
    return 1e-7 * std::max(1.0, std::fabs(loss_scale));
}

struct GradCheckResult {
    double max_violation = 0.0;  // < 1 means pass at rtol 1e-4
    std::string worst_param;

    // max relative error among elements, evaluated per the atol+rtol rule
    double max_rel_err() const { return max_violation * kGradRtol; }
};

// loss_fn() must evaluate the forward pass from the CURRENT store values.
// analytic gradients are read from the store (caller runs backward first).
inline GradCheckResult finite_diff_check(rf::ParamStore& ps,
                                         const std::function<double()>& loss_fn,
                                         double h = 1e-5) {
    GradCheckResult res;
    const double atol = grad_atol(loss_fn());
    for (const std::string& name : ps.names()) {
        rf::Matrix& value = ps.at(name).value;
        const rf::Matrix& grad = ps.at(name).grad;
        for (size_t i = 0; i < value.size(); ++i) {
            const double orig = value.raw()[i];
            value.raw()[i] = orig + h;
            const double up = loss_fn();
            value.raw()[i] = orig - h;
            const double down = loss_fn();
            value.raw()[i] = orig;
            const double fd = (up - down) / (2.0 * h);
            const double an = grad.raw()[i];
            const double bound = atol + kGradRtol * std::max(std::fabs(fd), std::fabs(an));
            const double violation = std::fabs(fd - an) / bound;
            if (violation > res.max_violation) {
                res.max_violation = violation;
                res.worst_param = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return res;
}

// Same check for a free input vector (e.g. the MAP variables); returns the
// worst violation ratio (< 1 is a pass).
inline double finite_diff_check_vector(std::vector<double>& x,
                                       const std::vector<double>& analytic,
                                       const std::function<double()>& loss_fn, double h = 1e-5) {
    double max_violation = 0.0;
    const double atol = grad_atol(loss_fn());
    for (size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = loss_fn();
        x[i] = orig - h;
        const double down = loss_fn();
        x[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        const double bound = atol + kGradRtol * std::max(std::fabs(fd), std::fabs(analytic[i]));
        max_violation = std::max(max_violation, std::fabs(fd - analytic[i]) / bound);
    }
    return max_violation;
}

}  // namespace rftest
