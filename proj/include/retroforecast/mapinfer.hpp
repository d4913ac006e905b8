// Retrodictive MAP inference: minimize, over a candidate future y and
// latent z,
//   -log p(x_obs | y, z) + lambda_prior * (-log p(y)) + lambda_y * ||y - y_fic||^2
//   - log p(z)
// with p(y) either the trained RealNVP prior (inv-flow) or a standard normal
// (inv-gauss), and p(z) standard normal. Each window runs K Adam restarts
// for a fixed number of steps with per-restart global-norm gradient
// clipping; restart 0 warm-starts from the forward-CVAE prediction (FIC)
// and the rest draw y from the active prior.
//
// Windows and restarts are mathematically independent rows, so the
// optimizer batches them through the tape in chunks; results are identical
// to one-at-a-time runs because every RNG draw comes from a per
// (window, restart) stream and no reduction mixes rows.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "flow.hpp"
#include "matrix.hpp"
#include "models.hpp"
#include "nn.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace rf {

struct MapConfig {
    size_t restarts = 5;    // K
    size_t steps = 200;     // N
    double lr = 5e-2;
    double clip_norm = 5.0;
    double lambda_prior = 2.0;
    double lambda_y = 0.0;
    uint64_t seed = 42;
    bool use_fic = true;

    void validate() const {
        if (restarts < 1) throw std::invalid_argument("MapConfig: restarts >= 1");
        if (!(lr > 0.0)) throw std::invalid_argument("MapConfig: lr > 0");
        if (lambda_prior < 0.0 || lambda_y < 0.0)
            throw std::invalid_argument("MapConfig: lambdas must be >= 0");
    }
};

enum class MapPrior { flow, gauss };

struct ForecastResult {
    std::vector<double> y_hat;
    std::vector<double> z_hat;
    double map_loss_best = 0.0;
    std::vector<double> map_losses_all;  // one per restart, restart order
    double retro_nll = 0.0;
    double dispersion = 0.0;  // mean over coordinates of std of y_hat across restarts
    bool used_fic = false;
};

namespace detail {

struct MapTerms {
    double objective;
    double recon_nll;
};

// Tape-free objective per row; also used to report the final losses.
inline std::vector<MapTerms> map_terms_plain(const InverseCvae& icvae, const FlowModel* flow,
                                             MapPrior prior, const Matrix& x_rep, const Matrix& y,
                                             const Matrix& z, const Matrix* y_fic_rep,
                                             const MapConfig& cfg) {
    const size_t rows = y.rows();
    Matrix dec_in(rows, y.cols() + z.cols());
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < y.cols(); ++j) dec_in(i, j) = y(i, j);
        for (size_t j = 0; j < z.cols(); ++j) dec_in(i, y.cols() + j) = z(i, j);
    }
    const PlainNetOutput dec =
        network_forward_plain(icvae.params, "icvae.dec", icvae.decoder_spec, dec_in);
    const std::vector<double> recon_ll = gaussian_logpdf_rows_plain(x_rep, dec.mean, dec.log_std);

    std::vector<double> prior_nll(rows, 0.0);
    if (prior == MapPrior::flow) {
        const std::vector<double> lp = flow_logprob_rows_plain(flow->params, "flow",
                                                               flow->spec, y);
        for (size_t i = 0; i < rows; ++i) prior_nll[i] = -lp[i];
    } else {
        for (size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < y.cols(); ++j)
                s += 0.5 * y(i, j) * y(i, j) + ad::kHalfLog2Pi;
            prior_nll[i] = s;
        }
    }

    std::vector<MapTerms> out(rows);
    for (size_t i = 0; i < rows; ++i) {
        double z_nll = 0.0;
        for (size_t j = 0; j < z.cols(); ++j) z_nll += 0.5 * z(i, j) * z(i, j) + ad::kHalfLog2Pi;
        double fic_pen = 0.0;
        if (cfg.lambda_y > 0.0 && y_fic_rep) {
            for (size_t j = 0; j < y.cols(); ++j) {
                const double d = y(i, j) - (*y_fic_rep)(i, j);
                fic_pen += d * d;
            }
        }
        out[i].recon_nll = -recon_ll[i];
        out[i].objective = out[i].recon_nll + cfg.lambda_prior * prior_nll[i] + z_nll +
                           cfg.lambda_y * fic_pen;
    }
    return out;
}

}  // namespace detail

// Scalar MAP objective for one window, differentiable in (y, z); gradients
// are written to grad_y / grad_z when requested.
inline double map_objective(const InverseCvae& icvae, const FlowModel* flow, MapPrior prior,
                            const std::vector<double>& x_obs, const std::vector<double>& y,
                            const std::vector<double>& z, const MapConfig& cfg,
                            std::vector<double>* grad_y = nullptr,
                            std::vector<double>* grad_z = nullptr,
                            const std::vector<double>* y_fic = nullptr) {
    if (prior == MapPrior::flow && !flow)
        throw std::invalid_argument("map_objective: flow prior requested without a flow model");
    if (cfg.lambda_y > 0.0 && !y_fic)
        throw std::invalid_argument("map_objective: lambda_y > 0 requires y_fic");
    if (x_obs.size() != icvae.x_dim || y.size() != icvae.y_dim || z.size() != icvae.z_dim)
        throw std::invalid_argument("map_objective: x/y/z dimension mismatch");
    ad::Tape tape;
    PassContext ctx(tape);
    ctx.add_frozen(icvae.params);
    if (flow) ctx.add_frozen(flow->params);

    ad::Var yv = tape.leaf(Matrix::row_vector(y));
    ad::Var zv = tape.leaf(Matrix::row_vector(z));
    ad::Var xv = tape.leaf(Matrix::row_vector(x_obs));

    NetOutput dec = network_forward(ctx, "icvae.dec", icvae.decoder_spec,
                                    ad::concat_cols(tape, yv, zv));
    ad::Var recon_nll =
        ad::scale(tape, ad::gaussian_logpdf_rows(tape, xv, dec.mean, dec.log_std), -1.0);
    ad::Var prior_nll = (prior == MapPrior::flow)
                            ? ad::scale(tape, flow_logprob_rows(ctx, "flow", flow->spec, yv), -1.0)
                            : ad::std_normal_nll_rows(tape, yv);
    ad::Var obj = ad::add(tape, recon_nll, ad::scale(tape, prior_nll, cfg.lambda_prior));
    obj = ad::add(tape, obj, ad::std_normal_nll_rows(tape, zv));
    if (cfg.lambda_y > 0.0) {
        ad::Var fic = tape.leaf(Matrix::row_vector(*y_fic));
        ad::Var pen = ad::sum_cols(tape, ad::square(tape, ad::sub(tape, yv, fic)));
        obj = ad::add(tape, obj, ad::scale(tape, pen, cfg.lambda_y));
    }
    ad::Var total = ad::sum_all(tape, obj);
    if (grad_y || grad_z) {
        tape.backward(total);
        if (grad_y) *grad_y = tape.grad(yv).raw();
        if (grad_z) *grad_z = tape.grad(zv).raw();
    }
    return tape.val(total)(0, 0);
}

// Forward-Inverse Chaining warm start: the forward-CVAE averaged prediction.
inline Matrix fic_warmstart(const ForwardCvae& fcvae, const Matrix& x_obs,
                            const std::vector<size_t>& window_ids, uint64_t seed) {
    return forward_cvae_predict(fcvae, x_obs, window_ids, seed);
}

// Batched multi-restart MAP descent. y_fic may be null (restart 0 then
// samples from the prior like the others).
inline std::vector<ForecastResult> map_optimize_batch(
    const InverseCvae& icvae, const FlowModel* flow, MapPrior prior, const Matrix& x_obs,
    const std::vector<size_t>& window_ids, const Matrix* y_fic, const MapConfig& cfg) {
    cfg.validate();
    if (prior == MapPrior::flow && !flow)
        throw std::invalid_argument("map_optimize: flow prior requested without a flow model");
    if (cfg.lambda_y > 0.0 && !y_fic)
        throw std::invalid_argument("map_optimize: lambda_y > 0 requires FIC predictions");
    if (window_ids.size() != x_obs.rows())
        throw std::invalid_argument("map_optimize: ids/rows mismatch");
    if (y_fic && (y_fic->rows() != x_obs.rows() || y_fic->cols() != icvae.y_dim))
        throw std::invalid_argument("map_optimize: y_fic shape mismatch");

    const size_t n_windows = x_obs.rows();
    const size_t K = cfg.restarts;
    const size_t m = icvae.y_dim, zd = icvae.z_dim, n = icvae.x_dim;
    std::vector<ForecastResult> results(n_windows);

    const size_t windows_per_chunk = std::max<size_t>(1, 640 / K);
    for (size_t chunk_lo = 0; chunk_lo < n_windows; chunk_lo += windows_per_chunk) {
        const size_t chunk_hi = std::min(chunk_lo + windows_per_chunk, n_windows);
        const size_t B = chunk_hi - chunk_lo;
        const size_t R = B * K;

        Matrix Y(R, m), Z(R, zd), X_rep(R, n);
        Matrix y_fic_rep;
        if (y_fic && cfg.lambda_y > 0.0) y_fic_rep = Matrix(R, m);

        // Initialization; one stream per (window, restart).
        std::vector<size_t> sampled_rows;
        Matrix u_buf(R, m);
        for (size_t b = 0; b < B; ++b) {
            const size_t wi = chunk_lo + b;
            for (size_t k = 0; k < K; ++k) {
                const size_t r = b * K + k;
                for (size_t j = 0; j < n; ++j) X_rep(r, j) = x_obs(wi, j);
                if (y_fic && cfg.lambda_y > 0.0)
                    for (size_t j = 0; j < m; ++j) y_fic_rep(r, j) = (*y_fic)(wi, j);
                RngStream rng = RngStream::derive(cfg.seed, "map/init", {window_ids[wi], k});
                if (k == 0 && cfg.use_fic && y_fic) {
                    for (size_t j = 0; j < m; ++j) Y(r, j) = (*y_fic)(wi, j);
                    for (size_t j = 0; j < zd; ++j) Z(r, j) = 0.0;
                } else {
                    for (size_t j = 0; j < m; ++j) u_buf(r, j) = rng.normal();
                    sampled_rows.push_back(r);
                    for (size_t j = 0; j < zd; ++j) Z(r, j) = rng.normal();
                }
            }
        }
        if (!sampled_rows.empty()) {
            if (prior == MapPrior::flow) {
                Matrix u(sampled_rows.size(), m);
                for (size_t i = 0; i < sampled_rows.size(); ++i)
                    for (size_t j = 0; j < m; ++j) u(i, j) = u_buf(sampled_rows[i], j);
                const Matrix ys = flow_inverse_plain(flow->params, "flow", flow->spec, u);
                for (size_t i = 0; i < sampled_rows.size(); ++i)
                    for (size_t j = 0; j < m; ++j) Y(sampled_rows[i], j) = ys(i, j);
            } else {
                for (size_t r : sampled_rows)
                    for (size_t j = 0; j < m; ++j) Y(r, j) = u_buf(r, j);
            }
        }

        // Adam over (Y, Z) with per-row clipping.
        Matrix my(R, m), vy(R, m), mz(R, zd), vz(R, zd);
        for (size_t step = 1; step <= cfg.steps; ++step) {
            ad::Tape tape;
            PassContext ctx(tape);
            ctx.add_frozen(icvae.params);
            if (flow) ctx.add_frozen(flow->params);

            ad::Var yv = tape.leaf(Y);
            ad::Var zv = tape.leaf(Z);
            ad::Var xv = tape.leaf(X_rep);
            NetOutput dec = network_forward(ctx, "icvae.dec", icvae.decoder_spec,
                                            ad::concat_cols(tape, yv, zv));
            ad::Var recon_nll = ad::scale(
                tape, ad::gaussian_logpdf_rows(tape, xv, dec.mean, dec.log_std), -1.0);
            ad::Var prior_nll =
                (prior == MapPrior::flow)
                    ? ad::scale(tape, flow_logprob_rows(ctx, "flow", flow->spec, yv), -1.0)
                    : ad::std_normal_nll_rows(tape, yv);
            ad::Var obj = ad::add(tape, recon_nll, ad::scale(tape, prior_nll, cfg.lambda_prior));
            obj = ad::add(tape, obj, ad::std_normal_nll_rows(tape, zv));
            if (cfg.lambda_y > 0.0) {
                ad::Var fic = tape.leaf(y_fic_rep);
                ad::Var pen = ad::sum_cols(tape, ad::square(tape, ad::sub(tape, yv, fic)));
                obj = ad::add(tape, obj, ad::scale(tape, pen, cfg.lambda_y));
            }
            const Matrix& obj_rows = tape.val(obj);
            for (size_t r = 0; r < R; ++r)
                if (!std::isfinite(obj_rows(r, 0)))
                    throw std::runtime_error(
                        "MAP optimization: non-finite objective at window " +
                        std::to_string(window_ids[chunk_lo + r / K]) + ", restart " +
                        std::to_string(r % K));
            ad::Var total = ad::sum_all(tape, obj);
            tape.backward(total);
            const Matrix& gy = tape.grad(yv);
            const Matrix& gz = tape.grad(zv);

            const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step));
            for (size_t r = 0; r < R; ++r) {
                double norm_sq = 0.0;
                for (size_t j = 0; j < m; ++j) norm_sq += gy(r, j) * gy(r, j);
                for (size_t j = 0; j < zd; ++j) norm_sq += gz(r, j) * gz(r, j);
                const double norm = std::sqrt(norm_sq);
                const double f =
                    (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;
                auto adam_update = [&](double g, double& mm, double& vv, double& x) {
                    g *= f;
                    mm = 0.9 * mm + 0.1 * g;
                    vv = 0.999 * vv + 0.001 * g * g;
                    x -= cfg.lr * (mm / bc1) / (std::sqrt(vv / bc2) + 1e-8);
                };
                for (size_t j = 0; j < m; ++j)
                    adam_update(gy(r, j), my(r, j), vy(r, j), Y(r, j));
                for (size_t j = 0; j < zd; ++j)
                    adam_update(gz(r, j), mz(r, j), vz(r, j), Z(r, j));
            }
        }

        // Final objective values and selection.
        const std::vector<detail::MapTerms> terms = detail::map_terms_plain(
            icvae, flow, prior, X_rep, Y, Z,
            (y_fic && cfg.lambda_y > 0.0) ? &y_fic_rep : nullptr, cfg);
        for (size_t b = 0; b < B; ++b) {
            const size_t wi = chunk_lo + b;
            ForecastResult& res = results[wi];
            res.used_fic = cfg.use_fic && y_fic != nullptr;
            res.map_losses_all.resize(K);
            size_t best_k = 0;
            for (size_t k = 0; k < K; ++k) {
                const double obj_k = terms[b * K + k].objective;
                if (!std::isfinite(obj_k))
                    throw std::runtime_error("MAP optimization: non-finite objective at window " +
                                             std::to_string(window_ids[wi]) + ", restart " +
                                             std::to_string(k));
                res.map_losses_all[k] = obj_k;
                if (obj_k < res.map_losses_all[best_k]) best_k = k;
            }
            res.map_loss_best = res.map_losses_all[best_k];
            res.retro_nll = terms[b * K + best_k].recon_nll;
            res.y_hat.resize(m);
            res.z_hat.resize(zd);
            for (size_t j = 0; j < m; ++j) res.y_hat[j] = Y(b * K + best_k, j);
            for (size_t j = 0; j < zd; ++j) res.z_hat[j] = Z(b * K + best_k, j);

            double disp = 0.0;
            for (size_t j = 0; j < m; ++j) {
                double mean = 0.0;
                for (size_t k = 0; k < K; ++k) mean += Y(b * K + k, j);
                mean /= static_cast<double>(K);
                double var = 0.0;
                for (size_t k = 0; k < K; ++k) {
                    const double d = Y(b * K + k, j) - mean;
                    var += d * d;
                }
                disp += std::sqrt(var / static_cast<double>(K));
            }
            res.dispersion = disp / static_cast<double>(m);
        }
    }
    return results;
}

inline ForecastResult map_optimize(const InverseCvae& icvae, const FlowModel* flow, MapPrior prior,
                                   const std::vector<double>& x_obs, size_t window_id,
                                   const std::vector<double>* y_fic, const MapConfig& cfg) {
    Matrix x(1, x_obs.size());
    for (size_t j = 0; j < x_obs.size(); ++j) x(0, j) = x_obs[j];
    Matrix fic;
    if (y_fic) {
        fic = Matrix(1, y_fic->size());
        for (size_t j = 0; j < y_fic->size(); ++j) fic(0, j) = (*y_fic)[j];
    }
    return map_optimize_batch(icvae, flow, prior, x, {window_id}, y_fic ? &fic : nullptr,
                              cfg)[0];
}

}  // namespace rf
