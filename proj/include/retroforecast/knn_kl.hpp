// k-nearest-neighbor Kullback-Leibler estimation between point clouds.
//
// knn_kl implements the Perez-Cruz estimator with brute-force exact
// distances:
//   D(P||Q) ~= (d/N) * sum_i log(nu_k(x_i; Y) / rho_k(x_i; X\{x_i}))
//              + log(M/(N-1))
// When a query point has an exact duplicate in Y (the X = Y case), that one
// match is treated as the query itself and skipped, so identical samples
// estimate ~log(M/(N-1)) ~ 0. Remaining zero k-th distances (genuine data
// duplicates, e.g. shot-noise plateaus) are replaced by the smallest
// positive distance seen in the call, or 1e-12 if every distance is zero,
// before taking logs.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "matrix.hpp"

namespace rf {

namespace detail {

inline double sq_dist(const double* a, const double* b, size_t d) {
    double s = 0.0;
    for (size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

// k-th smallest entry of buf (1-based k), destroys buf order.
inline double kth_smallest(std::vector<double>& buf, size_t k) {
    std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end());
    return buf[k - 1];
}

}  // namespace detail

inline double knn_kl(const Matrix& X, const Matrix& Y, size_t k) {
    if (X.cols() != Y.cols()) throw std::invalid_argument("knn_kl: dimension mismatch");
    if (k < 1) throw std::invalid_argument("knn_kl: k must be >= 1");
    const size_t N = X.rows(), M = Y.rows(), d = X.cols();
    if (N <= k) throw std::invalid_argument("knn_kl: need |X| > k");
    if (M < k) throw std::invalid_argument("knn_kl: need |Y| >= k");

    std::vector<double> rho(N), nu(N), buf;
    double min_pos_sq = std::numeric_limits<double>::infinity();
    buf.reserve(std::max(N, M));
    for (size_t i = 0; i < N; ++i) {
        const double* xi = X.row(i);
        buf.clear();
        for (size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const double ds = detail::sq_dist(xi, X.row(j), d);
            if (ds > 0.0) min_pos_sq = std::min(min_pos_sq, ds);
            buf.push_back(ds);
        }
        rho[i] = detail::kth_smallest(buf, k);
        buf.clear();
        bool self_skipped = false;
        for (size_t j = 0; j < M; ++j) {
            const double ds = detail::sq_dist(xi, Y.row(j), d);
            if (ds == 0.0 && !self_skipped) {
                self_skipped = true;
                continue;
            }
            if (ds > 0.0) min_pos_sq = std::min(min_pos_sq, ds);
            buf.push_back(ds);
        }
        if (buf.size() < k) throw std::invalid_argument("knn_kl: need |Y| >= k distinct points");
        nu[i] = detail::kth_smallest(buf, k);
    }
    const double eps = std::isfinite(min_pos_sq) ? std::sqrt(min_pos_sq) : 1e-12;
    double acc = 0.0;
    for (size_t i = 0; i < N; ++i) {
        double r = std::sqrt(rho[i]), v = std::sqrt(nu[i]);
        if (r == 0.0) r = eps;
        if (v == 0.0) v = eps;
        acc += std::log(v / r);
    }
    return static_cast<double>(d) / static_cast<double>(N) * acc +
           std::log(static_cast<double>(M) / static_cast<double>(N - 1));
}

// Symmetrized form: J = (KL(F||B) + KL(B||F)) / 2. Raw estimate; callers
// clamp at zero for reporting.
inline double j_divergence(const Matrix& F, const Matrix& B, size_t k) {
    return 0.5 * knn_kl(F, B, k) + 0.5 * knn_kl(B, F, k);
}

}  // namespace rf
