// Forecast-comparison statistics: RMSE, the Diebold-Mariano test with the
// Harvey small-sample correction, and Pearson correlation with its t-test.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "matrix.hpp"

namespace rf {

// Regularized incomplete beta I_x(a,b) via the standard continued fraction.
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    auto betacf = [](double a, double b, double x) {
        constexpr int kMaxIter = 300;
        constexpr double kEps = 3e-16, kFpMin = 1e-300;
        const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
        double c = 1.0, d = 1.0 - qab * x / qap;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIter; ++m) {
            const int m2 = 2 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < kFpMin) d = kFpMin;
            c = 1.0 + aa / c;
            if (std::fabs(c) < kFpMin) c = kFpMin;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < kFpMin) d = kFpMin;
            c = 1.0 + aa / c;
            if (std::fabs(c) < kFpMin) c = kFpMin;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < kEps) break;
        }
        return h;
    };
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return incomplete_beta(0.5 * df, 0.5, x);
}

// ---------------------------------------------------------------------- RMSE

struct RmseResult {
    double global = 0.0;
    std::vector<double> per_horizon;  // column-wise RMSE, length m
};

inline RmseResult rmse(const Matrix& pred, const Matrix& truth) {
    require_shape(pred, truth, "rmse");
    if (pred.rows() == 0) throw std::invalid_argument("rmse: empty input");
    RmseResult r;
    r.per_horizon.assign(pred.cols(), 0.0);
    for (size_t i = 0; i < pred.rows(); ++i)
        for (size_t j = 0; j < pred.cols(); ++j) {
            const double e = pred(i, j) - truth(i, j);
            r.per_horizon[j] += e * e;
        }
    double total = 0.0;
    for (double& v : r.per_horizon) {
        total += v;
        v = std::sqrt(v / static_cast<double>(pred.rows()));
    }
    r.global = std::sqrt(total / static_cast<double>(pred.size()));
    return r;
}

// ------------------------------------------------------- Diebold-Mariano

struct DmResult {
    double stat = 0.0;
    double p = 1.0;
    size_t n = 0;
    bool degenerate = false;  // zero loss-differential variance with nonzero mean
};

// losses are per-window mean squared errors; h is the forecast horizon.
// Long-run variance uses the rectangular kernel up to lag h-1, and the stat
// carries the Harvey/Leybourne/Newbold small-sample factor; p is two-sided
// Student-t with n-1 degrees of freedom.
inline DmResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b,
                        size_t h) {
    if (loss_a.size() != loss_b.size())
        throw std::invalid_argument("dm_test: loss sequences differ in length");
    const size_t n = loss_a.size();
    if (n < 10) throw std::invalid_argument("dm_test: need at least 10 observations");
    if (h < 1) throw std::invalid_argument("dm_test: horizon must be >= 1");

    std::vector<double> d(n);
    double mean = 0.0;
    for (size_t t = 0; t < n; ++t) {
        d[t] = loss_a[t] - loss_b[t];
        mean += d[t];
    }
    mean /= static_cast<double>(n);

    const size_t max_lag = std::min(h - 1, n - 1);
    double lrv = 0.0;
    for (size_t lag = 0; lag <= max_lag; ++lag) {
        double gamma = 0.0;
        for (size_t t = lag; t < n; ++t) gamma += (d[t] - mean) * (d[t - lag] - mean);
        gamma /= static_cast<double>(n);
        lrv += (lag == 0) ? gamma : 2.0 * gamma;
    }

    DmResult r;
    r.n = n;
    if (lrv <= 0.0) {
        // rectangular-kernel LRV can go nonpositive; fall back to gamma_0
        double g0 = 0.0;
        for (size_t t = 0; t < n; ++t) g0 += (d[t] - mean) * (d[t] - mean);
        g0 /= static_cast<double>(n);
        if (g0 <= 0.0) {
            if (mean == 0.0) {
                r.stat = 0.0;
                r.p = 1.0;
            } else {
                r.degenerate = true;
                r.stat = (mean > 0.0) ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
                r.p = 0.0;
            }
            return r;
        }
        lrv = g0;
    }

    const double nd = static_cast<double>(n), hd = static_cast<double>(h);
    const double dm = mean / std::sqrt(lrv / nd);
    const double harvey = std::sqrt((nd + 1.0 - 2.0 * hd + hd * (hd - 1.0) / nd) / nd);
    r.stat = dm * harvey;
    r.p = student_t_two_sided_p(r.stat, nd - 1.0);
    return r;
}

// ------------------------------------------------------------- correlation

struct CorrResult {
    double r = 0.0;
    double p = 1.0;
    size_t n = 0;
    bool undefined = false;  // zero variance on either side
};

inline CorrResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const size_t n = x.size();
    if (n < 3) throw std::invalid_argument("pearson: need at least 3 points");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    CorrResult c;
    c.n = n;
    if (sxx <= 0.0 || syy <= 0.0) {
        c.undefined = true;
        return c;
    }
    c.r = sxy / std::sqrt(sxx * syy);
    const double r2 = std::min(c.r * c.r, 1.0 - 1e-15);
    const double t = c.r * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - r2));
    c.p = student_t_two_sided_p(t, static_cast<double>(n) - 2.0);
    return c;
}

}  // namespace rf
