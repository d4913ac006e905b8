// Model-free arrow-of-time diagnostic.
//
// Forward/backward 2w-length embeddings (LEVEL on raw values, DIFF on first
// differences) are compared with the symmetrized kNN KL divergence; block
// permutation of forward/backward roles gives a Monte Carlo p-value per
// (representation, window) scale, and the GO/NO-GO verdict requires c_min
// significant scales within one representation.
//
// The permutation test runs on a precomputed neighbor-cache engine: the 2N
// union points never move, only their F/B side assignment changes, so k-th
// same-side and other-side distances come from one cached sorted neighbor
// list per point (with an exact full-scan fallback when the cache is too
// shallow). With the identity assignment the engine reproduces knn_kl()
// exactly; a test pins that equivalence.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "knn_kl.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "series.hpp"

namespace rf {

enum class Representation { LEVEL, DIFF };

inline const char* to_string(Representation r) {
    return r == Representation::LEVEL ? "LEVEL" : "DIFF";
}

enum class Verdict { GO, NOGO };

inline const char* to_string(Verdict v) { return v == Verdict::GO ? "GO" : "NOGO"; }

struct ArrowConfig {
    std::vector<size_t> windows{2, 4, 8};
    std::vector<Representation> representations{Representation::LEVEL, Representation::DIFF};
    size_t k_nn = 5;
    size_t n_perm = 500;
    double alpha = 0.05;
    size_t c_min = 2;
    uint64_t seed = 42;
    size_t max_embed = 4000;

    void validate() const {
        if (k_nn < 1 || n_perm < 1) throw std::invalid_argument("ArrowConfig: k_nn, n_perm >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ArrowConfig: alpha in (0,1)");
        if (c_min > windows.size())
            throw std::invalid_argument("ArrowConfig: c_min exceeds number of window scales");
    }
};

struct ScaleResult {
    Representation representation = Representation::LEVEL;
    size_t w = 0;
    double j_obs = 0.0;  // clamped at 0 for reporting
    double p_perm = 1.0;
    size_t n_embeddings = 0;
};

struct ArrowReport {
    std::vector<ScaleResult> scale_results;
    Verdict verdict = Verdict::NOGO;
    double delta_arrow = 0.0;
    size_t significant_level = 0;
    size_t significant_diff = 0;
};

struct EmbeddingPair {
    Matrix F;
    Matrix B;
};

// Forward rows [s_t..s_{t+2w-1}] and their full reversals; DIFF embeds first
// differences instead. Rows are subsampled (seeded, order-preserving) to
// max_embed when larger; max_embed = 0 disables the cap.
inline EmbeddingPair build_embeddings(const std::vector<double>& values, size_t w,
                                      Representation rep, size_t max_embed = 0,
                                      uint64_t subsample_seed = 0) {
    if (w < 1) throw std::invalid_argument("build_embeddings: w >= 1");
    const std::vector<double>* src = &values;
    std::vector<double> diffs;
    if (rep == Representation::DIFF) {
        if (values.size() < 2) throw std::runtime_error("insufficient data: series too short");
        diffs.resize(values.size() - 1);
        for (size_t i = 0; i + 1 < values.size(); ++i) diffs[i] = values[i + 1] - values[i];
        src = &diffs;
    }
    const size_t len = src->size();
    const size_t dim = 2 * w;
    if (len < dim)
        throw std::runtime_error("insufficient data: series too short for w=" + std::to_string(w));
    const size_t total = len - dim + 1;

    std::vector<size_t> keep;
    if (max_embed > 0 && total > max_embed) {
        RngStream rng = RngStream::derive(subsample_seed, "arrow_subsample",
                                          {static_cast<uint64_t>(rep == Representation::DIFF),
                                           static_cast<uint64_t>(w)});
        keep = rng.sample_indices(total, max_embed);
    } else {
        keep.resize(total);
        for (size_t i = 0; i < total; ++i) keep[i] = i;
    }

    EmbeddingPair out{Matrix(keep.size(), dim), Matrix(keep.size(), dim)};
    for (size_t r = 0; r < keep.size(); ++r) {
        const size_t t = keep[r];
        for (size_t j = 0; j < dim; ++j) {
            const double v = (*src)[t + j];
            out.F(r, j) = v;
            out.B(r, dim - 1 - j) = v;
        }
    }
    return out;
}

namespace detail {

// Fixed union of F and B points; evaluates J for any F/B side assignment.
class JPermutationEngine {
public:
    JPermutationEngine(const Matrix& F, const Matrix& B, size_t k, size_t cache_depth = 64)
        : k_(k), n_pairs_(F.rows()), dim_(F.cols()), cache_depth_(cache_depth) {
        if (F.rows() != B.rows() || F.cols() != B.cols())
            throw std::invalid_argument("JPermutationEngine: F/B shape mismatch");
        if (n_pairs_ <= k_) throw std::runtime_error("insufficient data: need more than k embeddings");
        const size_t total = 2 * n_pairs_;
        points_ = Matrix(total, dim_);
        for (size_t i = 0; i < n_pairs_; ++i)
            for (size_t j = 0; j < dim_; ++j) {
                points_(i, j) = F(i, j);
                points_(n_pairs_ + i, j) = B(i, j);
            }
        build_cache();
    }

    // swapped[i] != 0 means pair i contributes B_i to the forward side.
    double j_for(const std::vector<uint8_t>& swapped) const {
        const size_t total = 2 * n_pairs_;
        double sum_x = 0.0, sum_y = 0.0;
        for (size_t p = 0; p < total; ++p) {
            double rho, nu;
            kth_side_distances(p, swapped, rho, nu);
            if (rho == 0.0) rho = eps_;
            if (nu == 0.0) nu = eps_;
            const double term = std::log(nu / rho);
            if (in_forward(p, swapped))
                sum_x += term;
            else
                sum_y += term;
        }
        const double n = static_cast<double>(n_pairs_);
        const double d = static_cast<double>(dim_);
        const double kl_xy = d / n * sum_x + std::log(n / (n - 1.0));
        const double kl_yx = d / n * sum_y + std::log(n / (n - 1.0));
        return 0.5 * (kl_xy + kl_yx);
    }

    double j_observed() const { return j_for(std::vector<uint8_t>(n_pairs_, 0)); }

    size_t n_pairs() const { return n_pairs_; }

private:
    struct Neighbor {
        double dist_sq;
        uint32_t index;
    };

    bool in_forward(size_t p, const std::vector<uint8_t>& swapped) const {
        const bool is_f_point = p < n_pairs_;
        const bool sw = swapped[p % n_pairs_] != 0;
        return is_f_point != sw;
    }

    void build_cache() {
        const size_t total = 2 * n_pairs_;
        const size_t depth = std::min(cache_depth_, total - 1);
        cache_.resize(total * depth);
        depth_ = depth;
        double min_pos = std::numeric_limits<double>::infinity();
        std::vector<Neighbor> row(total);
        for (size_t p = 0; p < total; ++p) {
            size_t count = 0;
            const double* xp = points_.row(p);
            for (size_t q = 0; q < total; ++q) {
                if (q == p) continue;
                const double ds = sq_dist(xp, points_.row(q), dim_);
                if (ds > 0.0) min_pos = std::min(min_pos, ds);
                row[count++] = Neighbor{ds, static_cast<uint32_t>(q)};
            }
            std::nth_element(row.begin(), row.begin() + depth - 1, row.begin() + count,
                             [](const Neighbor& a, const Neighbor& b) { return a.dist_sq < b.dist_sq; });
            std::sort(row.begin(), row.begin() + depth,
                      [](const Neighbor& a, const Neighbor& b) { return a.dist_sq < b.dist_sq; });
            std::copy(row.begin(), row.begin() + depth, cache_.begin() + p * depth);
        }
        eps_ = std::isfinite(min_pos) ? std::sqrt(min_pos) : 1e-12;
    }

    void kth_side_distances(size_t p, const std::vector<uint8_t>& swapped, double& rho,
                            double& nu) const {
        const bool own_fwd = in_forward(p, swapped);
        size_t own_count = 0, other_count = 0;
        rho = -1.0;
        nu = -1.0;
        const Neighbor* list = cache_.data() + p * depth_;
        for (size_t j = 0; j < depth_; ++j) {
            const bool fwd = in_forward(list[j].index, swapped);
            if (fwd == own_fwd) {
                if (++own_count == k_ && rho < 0.0) rho = std::sqrt(list[j].dist_sq);
            } else {
                if (++other_count == k_ && nu < 0.0) nu = std::sqrt(list[j].dist_sq);
            }
            if (rho >= 0.0 && nu >= 0.0) return;
        }
        full_scan(p, swapped, own_fwd, rho, nu);
    }

    void full_scan(size_t p, const std::vector<uint8_t>& swapped, bool own_fwd, double& rho,
                   double& nu) const {
        const size_t total = 2 * n_pairs_;
        std::vector<double> own, other;
        own.reserve(n_pairs_);
        other.reserve(n_pairs_);
        const double* xp = points_.row(p);
        for (size_t q = 0; q < total; ++q) {
            if (q == p) continue;
            const double ds = sq_dist(xp, points_.row(q), dim_);
            (in_forward(q, swapped) == own_fwd ? own : other).push_back(ds);
        }
        rho = std::sqrt(kth_smallest(own, k_));
        nu = std::sqrt(kth_smallest(other, k_));
    }

    static double sq_dist(const double* a, const double* b, size_t d) {
        return rf::detail::sq_dist(a, b, d);
    }
    static double kth_smallest(std::vector<double>& v, size_t k) {
        return rf::detail::kth_smallest(v, k);
    }

    size_t k_, n_pairs_, dim_, cache_depth_, depth_ = 0;
    Matrix points_;
    std::vector<Neighbor> cache_;
    double eps_ = 1e-12;
};

}  // namespace detail

// Observed J plus a block permutation null: pair indices are partitioned
// into contiguous blocks of length w and each block's F/B roles are swapped
// with probability 1/2 per replicate. p uses the add-one estimator over raw
// (unclamped) J values; j_obs is clamped at zero for reporting.
inline ScaleResult block_permutation_test(const std::vector<double>& values, size_t w,
                                          Representation rep, const ArrowConfig& cfg) {
    cfg.validate();
    const EmbeddingPair emb = build_embeddings(values, w, rep, cfg.max_embed, cfg.seed);
    if (emb.F.rows() <= cfg.k_nn)
        throw std::runtime_error("insufficient data: only " + std::to_string(emb.F.rows()) +
                                 " embeddings at w=" + std::to_string(w));
    detail::JPermutationEngine engine(emb.F, emb.B, cfg.k_nn);
    const double j_raw = engine.j_observed();

    const size_t n = engine.n_pairs();
    const size_t n_blocks = (n + w - 1) / w;
    size_t exceed = 0;
    std::vector<uint8_t> swapped(n);
    const uint64_t rep_tag = (rep == Representation::DIFF) ? 1 : 0;
    for (size_t r = 0; r < cfg.n_perm; ++r) {
        RngStream rng = RngStream::derive(cfg.seed, "arrow_perm",
                                          {rep_tag, static_cast<uint64_t>(w), r});
        for (size_t b = 0; b < n_blocks; ++b) {
            const uint8_t flip = rng.bernoulli(0.5) ? 1 : 0;
            const size_t lo = b * w, hi = std::min(lo + w, n);
            for (size_t i = lo; i < hi; ++i) swapped[i] = flip;
        }
        if (engine.j_for(swapped) >= j_raw) ++exceed;
    }

    ScaleResult res;
    res.representation = rep;
    res.w = w;
    res.j_obs = std::max(j_raw, 0.0);
    res.p_perm = static_cast<double>(1 + exceed) / static_cast<double>(cfg.n_perm + 1);
    res.n_embeddings = n;
    return res;
}

inline ArrowReport arrow_verdict(const std::vector<double>& values, const ArrowConfig& cfg) {
    cfg.validate();
    ArrowReport report;
    for (Representation rep : cfg.representations)
        for (size_t w : cfg.windows)
            report.scale_results.push_back(block_permutation_test(values, w, rep, cfg));

    for (const ScaleResult& sr : report.scale_results) {
        if (sr.p_perm < cfg.alpha) {
            if (sr.representation == Representation::LEVEL)
                ++report.significant_level;
            else
                ++report.significant_diff;
        }
    }
    report.verdict = (report.significant_level >= cfg.c_min || report.significant_diff >= cfg.c_min)
                         ? Verdict::GO
                         : Verdict::NOGO;

    std::vector<double> js;
    for (const ScaleResult& sr : report.scale_results) js.push_back(sr.j_obs);
    std::sort(js.begin(), js.end());
    const size_t half = js.size() / 2;
    report.delta_arrow =
        (js.size() % 2 == 1) ? js[half] : 0.5 * (js[half - 1] + js[half]);
    return report;
}

inline ArrowReport arrow_verdict(const TimeSeries& series, const ArrowConfig& cfg) {
    return arrow_verdict(series.values, cfg);
}

inline nlohmann::json to_json(const ArrowReport& r) {
    nlohmann::json scales = nlohmann::json::array();
    for (const ScaleResult& sr : r.scale_results)
        scales.push_back({{"representation", to_string(sr.representation)},
                          {"w", sr.w},
                          {"j_obs", sr.j_obs},
                          {"p_perm", sr.p_perm},
                          {"n_embeddings", sr.n_embeddings}});
    return {{"scale_results", scales},
            {"verdict", to_string(r.verdict)},
            {"delta_arrow", r.delta_arrow},
            {"significant_counts",
             {{"LEVEL", r.significant_level}, {"DIFF", r.significant_diff}}}};
}

}  // namespace rf
