// The five forecasting backbones over a standardized WindowedDataset:
//   naive   unconditional mean of training futures
//   mlp     forward MLP trained on MSE
//   fcvae   forward CVAE (prior net, encoder, decoder on (x,z)), ELBO
//   icvae   inverse CVAE (decoder reconstructs the past from (y,z)), ELBO
//   flow    RealNVP maximum-likelihood prior over training futures
//
// All training is mini-batch Adam with seeded shuffling and a best-validation
// checkpoint over the configured epochs. Validation losses are evaluated
// tape-free with a fixed per-run noise draw so epochs compare like for like.
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "autodiff.hpp"
#include "flow.hpp"
#include "ingest.hpp"
#include "matrix.hpp"
#include "nn.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace rf {

struct TrainConfig {
    double lr = 2e-3;
    size_t epochs = 80;
    double beta_kl = 1.0;
    size_t batch = 128;
    uint64_t seed = 42;

    AdamConfig adam() const { return AdamConfig{lr, 0.9, 0.999, 1e-8, 0.0}; }

    void validate() const {
        if (!(lr > 0.0) || epochs < 1 || batch < 1)
            throw std::invalid_argument("TrainConfig: lr, epochs, batch must be positive");
        if (beta_kl < 0.0) throw std::invalid_argument("TrainConfig: beta_kl must be >= 0");
    }
};

struct TrainCurve {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    size_t best_epoch = 0;
    double best_val = 0.0;
};

namespace detail {

inline Matrix gather_rows(const Matrix& src, const std::vector<size_t>& idx) {
    Matrix out(idx.size(), src.cols());
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < src.cols(); ++j) out(i, j) = src(idx[i], j);
    return out;
}

inline Matrix slice_rows(const Matrix& src, size_t from, size_t to) {
    Matrix out(to - from, src.cols());
    for (size_t i = from; i < to; ++i)
        for (size_t j = 0; j < src.cols(); ++j) out(i - from, j) = src(i, j);
    return out;
}

inline Matrix normal_matrix(size_t rows, size_t cols, RngStream& rng) {
    Matrix m(rows, cols);
    for (double& v : m.raw()) v = rng.normal();
    return m;
}

// Shared epoch/batch/checkpoint skeleton. batch_loss must run the tape,
// backward and the Adam step, returning the batch loss; val_loss is
// evaluated tape-free after every epoch.
template <typename BatchLoss, typename ValLoss>
TrainCurve run_training(ParamStore& ps, size_t n_train, const TrainConfig& cfg,
                        const std::string& tag, BatchLoss&& batch_loss, ValLoss&& val_loss) {
    cfg.validate();
    TrainCurve curve;
    std::vector<Matrix> best = ps.snapshot_values();
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<size_t> order(n_train);
    for (size_t i = 0; i < n_train; ++i) order[i] = i;

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream shuffle_rng = RngStream::derive(cfg.seed, tag + "/shuffle", {epoch});
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t n_batches = 0;
        for (size_t start = 0; start < n_train; start += cfg.batch) {
            const size_t stop = std::min(start + cfg.batch, n_train);
            std::vector<size_t> idx(order.begin() + start, order.begin() + stop);
            const double loss = batch_loss(idx, epoch, n_batches);
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged (non-finite loss) in " + tag +
                                         " at epoch " + std::to_string(epoch));
            epoch_loss += loss;
            ++n_batches;
        }
        curve.train_loss.push_back(epoch_loss / static_cast<double>(n_batches));
        const double vl = val_loss();
        curve.val_loss.push_back(vl);
        if (vl < best_val) {
            best_val = vl;
            best = ps.snapshot_values();
            curve.best_epoch = epoch;
        }
    }
    ps.restore_values(best);
    curve.best_val = best_val;
    return curve;
}

}  // namespace detail

// ------------------------------------------------------------------- naive

struct NaiveModel {
    std::vector<double> mean;  // length m
};

inline NaiveModel fit_naive(const WindowedDataset& ds) {
    if (ds.n_train() == 0) throw std::runtime_error("fit_naive: empty training split");
    NaiveModel model;
    model.mean.assign(ds.Y.cols(), 0.0);
    for (size_t i = 0; i < ds.train_end; ++i)
        for (size_t j = 0; j < ds.Y.cols(); ++j) model.mean[j] += ds.Y(i, j);
    for (double& v : model.mean) v /= static_cast<double>(ds.train_end);
    return model;
}

inline Matrix naive_predict(const NaiveModel& model, size_t rows) {
    Matrix out(rows, model.mean.size());
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < model.mean.size(); ++j) out(i, j) = model.mean[j];
    return out;
}

// ------------------------------------------------------------- forward MLP

struct MlpModel {
    NetworkSpec spec;
    ParamStore params;
    TrainCurve curve;
};

inline Matrix mlp_predict(const MlpModel& model, const Matrix& X) {
    return network_forward_plain(model.params, "mlp", model.spec, X).mean;
}

inline MlpModel train_forward_mlp(const WindowedDataset& ds, const TrainConfig& cfg) {
    MlpModel model;
    model.spec = NetworkSpec{ds.X.cols(), {128, 128}, ds.Y.cols(), Activation::relu, false};
    RngStream init_rng = RngStream::derive(cfg.seed, "mlp/init");
    init_network(model.params, "mlp", model.spec, init_rng);

    const Matrix val_x = detail::slice_rows(ds.X, ds.train_end, ds.val_end);
    const Matrix val_y = detail::slice_rows(ds.Y, ds.train_end, ds.val_end);
    const AdamConfig adam = cfg.adam();

    model.curve = detail::run_training(
        model.params, ds.n_train(), cfg, "mlp",
        [&](const std::vector<size_t>& idx, size_t, size_t) {
            ad::Tape tape;
            PassContext ctx(tape, model.params);
            ad::Var x = ctx.constant(detail::gather_rows(ds.X, idx));
            ad::Var y = ctx.constant(detail::gather_rows(ds.Y, idx));
            ad::Var pred = network_forward(ctx, "mlp", model.spec, x).mean;
            ad::Var loss = ad::mean_all(tape, ad::square(tape, ad::sub(tape, pred, y)));
            const double value = tape.val(loss)(0, 0);
            if (!std::isfinite(value)) return value;
            model.params.zero_grad();
            ctx.backward(loss);
            model.params.adam_step(adam);
            return value;
        },
        [&]() {
            const Matrix pred = mlp_predict(model, val_x);
            double s = 0.0;
            for (size_t i = 0; i < pred.size(); ++i) {
                const double e = pred.raw()[i] - val_y.raw()[i];
                s += e * e;
            }
            return s / static_cast<double>(pred.size());
        });
    return model;
}

// ------------------------------------------------------------ forward CVAE

struct ForwardCvae {
    size_t x_dim = 0, y_dim = 0, z_dim = 8, n_samples = 64;
    NetworkSpec prior_spec, encoder_spec, decoder_spec;
    ParamStore params;
    TrainCurve curve;
};

inline ForwardCvae make_forward_cvae(size_t x_dim, size_t y_dim, uint64_t seed) {
    ForwardCvae m;
    m.x_dim = x_dim;
    m.y_dim = y_dim;
    m.prior_spec = NetworkSpec{x_dim, {128, 128}, m.z_dim, Activation::relu, true};
    m.encoder_spec = NetworkSpec{x_dim + y_dim, {128, 128}, m.z_dim, Activation::relu, true};
    m.decoder_spec = NetworkSpec{x_dim + m.z_dim, {128, 128}, y_dim, Activation::relu, true};
    RngStream rng = RngStream::derive(seed, "fcvae/init");
    init_network(m.params, "fcvae.prior", m.prior_spec, rng);
    init_network(m.params, "fcvae.enc", m.encoder_spec, rng);
    init_network(m.params, "fcvae.dec", m.decoder_spec, rng);
    return m;
}

// Averaged decoder means over n_samples prior-net draws, one RNG stream per
// window id (so subsetting the evaluation set never changes a prediction).
inline Matrix forward_cvae_predict(const ForwardCvae& m, const Matrix& X,
                                   const std::vector<size_t>& window_ids, uint64_t seed) {
    if (window_ids.size() != X.rows())
        throw std::invalid_argument("forward_cvae_predict: ids/rows mismatch");
    const PlainNetOutput prior = network_forward_plain(m.params, "fcvae.prior", m.prior_spec, X);
    Matrix out(X.rows(), m.y_dim);
    for (size_t i = 0; i < X.rows(); ++i) {
        RngStream rng = RngStream::derive(seed, "fcvae/predict", {window_ids[i]});
        Matrix dec_in(m.n_samples, m.x_dim + m.z_dim);
        for (size_t s = 0; s < m.n_samples; ++s) {
            for (size_t j = 0; j < m.x_dim; ++j) dec_in(s, j) = X(i, j);
            for (size_t j = 0; j < m.z_dim; ++j)
                dec_in(s, m.x_dim + j) =
                    prior.mean(i, j) + std::exp(prior.log_std(i, j)) * rng.normal();
        }
        const Matrix mu =
            network_forward_plain(m.params, "fcvae.dec", m.decoder_spec, dec_in).mean;
        for (size_t j = 0; j < m.y_dim; ++j) {
            double acc = 0.0;
            for (size_t s = 0; s < m.n_samples; ++s) acc += mu(s, j);
            out(i, j) = acc / static_cast<double>(m.n_samples);
        }
    }
    return out;
}

namespace detail {

// Tape-free ELBO loss used for validation (fixed eps across epochs).
inline double cvae_val_loss(const ParamStore& ps, const NetworkSpec& enc_spec,
                            const std::string& enc_prefix, const NetworkSpec& dec_spec,
                            const std::string& dec_prefix, const Matrix& cond_enc,
                            const Matrix& target, const Matrix& dec_cond, const Matrix& eps,
                            double beta, const PlainNetOutput* prior) {
    const PlainNetOutput q = network_forward_plain(ps, enc_prefix, enc_spec, cond_enc);
    Matrix dec_in(target.rows(), dec_cond.cols() + eps.cols());
    for (size_t i = 0; i < target.rows(); ++i) {
        for (size_t j = 0; j < dec_cond.cols(); ++j) dec_in(i, j) = dec_cond(i, j);
        for (size_t j = 0; j < eps.cols(); ++j)
            dec_in(i, dec_cond.cols() + j) =
                q.mean(i, j) + std::exp(q.log_std(i, j)) * eps(i, j);
    }
    const PlainNetOutput p = network_forward_plain(ps, dec_prefix, dec_spec, dec_in);
    const std::vector<double> recon = gaussian_logpdf_rows_plain(target, p.mean, p.log_std);
    double loss = 0.0;
    for (size_t i = 0; i < target.rows(); ++i) {
        double kl = 0.0;
        for (size_t j = 0; j < eps.cols(); ++j) {
            const double lq = q.log_std(i, j), mq = q.mean(i, j);
            if (prior) {
                const double lp = prior->log_std(i, j), mp = prior->mean(i, j);
                kl += (lp - lq) +
                      0.5 * (std::exp(2.0 * lq) + (mq - mp) * (mq - mp)) * std::exp(-2.0 * lp) -
                      0.5;
            } else {
                kl += 0.5 * (mq * mq + std::exp(2.0 * lq) - 1.0 - 2.0 * lq);
            }
        }
        loss += -recon[i] + beta * kl;
    }
    return loss / static_cast<double>(target.rows());
}

}  // namespace detail

inline ForwardCvae train_forward_cvae(const WindowedDataset& ds, const TrainConfig& cfg) {
    ForwardCvae m = make_forward_cvae(ds.X.cols(), ds.Y.cols(), cfg.seed);
    const AdamConfig adam = cfg.adam();

    const Matrix val_x = detail::slice_rows(ds.X, ds.train_end, ds.val_end);
    const Matrix val_y = detail::slice_rows(ds.Y, ds.train_end, ds.val_end);
    Matrix val_xy(val_x.rows(), val_x.cols() + val_y.cols());
    for (size_t i = 0; i < val_x.rows(); ++i) {
        for (size_t j = 0; j < val_x.cols(); ++j) val_xy(i, j) = val_x(i, j);
        for (size_t j = 0; j < val_y.cols(); ++j) val_xy(i, val_x.cols() + j) = val_y(i, j);
    }
    RngStream val_eps_rng = RngStream::derive(cfg.seed, "fcvae/val_eps");
    const Matrix val_eps = detail::normal_matrix(val_x.rows(), m.z_dim, val_eps_rng);

    m.curve = detail::run_training(
        m.params, ds.n_train(), cfg, "fcvae",
        [&](const std::vector<size_t>& idx, size_t epoch, size_t batch_i) {
            ad::Tape tape;
            PassContext ctx(tape, m.params);
            ad::Var x = ctx.constant(detail::gather_rows(ds.X, idx));
            ad::Var y = ctx.constant(detail::gather_rows(ds.Y, idx));
            RngStream eps_rng = RngStream::derive(cfg.seed, "fcvae/eps", {epoch, batch_i});
            ad::Var eps = ctx.constant(detail::normal_matrix(idx.size(), m.z_dim, eps_rng));

            NetOutput prior = network_forward(ctx, "fcvae.prior", m.prior_spec, x);
            NetOutput q = network_forward(
                ctx, "fcvae.enc", m.encoder_spec, ad::concat_cols(tape, x, y));
            ad::Var z = ad::add(tape, q.mean,
                                ad::mul(tape, ad::exp_(tape, q.log_std), eps));
            NetOutput dec = network_forward(ctx, "fcvae.dec", m.decoder_spec,
                                            ad::concat_cols(tape, x, z));
            ad::Var recon = ad::gaussian_logpdf_rows(tape, y, dec.mean, dec.log_std);
            ad::Var kl = ad::kl_diag_gaussians_rows(tape, q.mean, q.log_std, prior.mean,
                                                    prior.log_std);
            ad::Var obj = ad::add(tape, ad::scale(tape, recon, -1.0),
                                  ad::scale(tape, kl, cfg.beta_kl));
            ad::Var loss = ad::mean_all(tape, obj);
            const double value = tape.val(loss)(0, 0);
            if (!std::isfinite(value)) return value;
            m.params.zero_grad();
            ctx.backward(loss);
            m.params.adam_step(adam);
            return value;
        },
        [&]() {
            const PlainNetOutput prior =
                network_forward_plain(m.params, "fcvae.prior", m.prior_spec, val_x);
            return detail::cvae_val_loss(m.params, m.encoder_spec, "fcvae.enc", m.decoder_spec,
                                         "fcvae.dec", val_xy, val_y, val_x, val_eps, cfg.beta_kl,
                                         &prior);
        });
    return m;
}

// ------------------------------------------------------------ inverse CVAE

struct InverseCvae {
    size_t x_dim = 0, y_dim = 0, z_dim = 8;
    NetworkSpec encoder_spec, decoder_spec;
    ParamStore params;
    TrainCurve curve;
};

inline InverseCvae make_inverse_cvae(size_t x_dim, size_t y_dim, uint64_t seed) {
    InverseCvae m;
    m.x_dim = x_dim;
    m.y_dim = y_dim;
    m.encoder_spec = NetworkSpec{x_dim + y_dim, {128, 128}, m.z_dim, Activation::relu, true};
    m.decoder_spec = NetworkSpec{y_dim + m.z_dim, {128, 128}, x_dim, Activation::relu, true};
    RngStream rng = RngStream::derive(seed, "icvae/init");
    init_network(m.params, "icvae.enc", m.encoder_spec, rng);
    init_network(m.params, "icvae.dec", m.decoder_spec, rng);
    return m;
}

inline InverseCvae train_inverse_cvae(const WindowedDataset& ds, const TrainConfig& cfg) {
    InverseCvae m = make_inverse_cvae(ds.X.cols(), ds.Y.cols(), cfg.seed);
    const AdamConfig adam = cfg.adam();

    const Matrix val_x = detail::slice_rows(ds.X, ds.train_end, ds.val_end);
    const Matrix val_y = detail::slice_rows(ds.Y, ds.train_end, ds.val_end);
    Matrix val_xy(val_x.rows(), val_x.cols() + val_y.cols());
    for (size_t i = 0; i < val_x.rows(); ++i) {
        for (size_t j = 0; j < val_x.cols(); ++j) val_xy(i, j) = val_x(i, j);
        for (size_t j = 0; j < val_y.cols(); ++j) val_xy(i, val_x.cols() + j) = val_y(i, j);
    }
    RngStream val_eps_rng = RngStream::derive(cfg.seed, "icvae/val_eps");
    const Matrix val_eps = detail::normal_matrix(val_x.rows(), m.z_dim, val_eps_rng);

    m.curve = detail::run_training(
        m.params, ds.n_train(), cfg, "icvae",
        [&](const std::vector<size_t>& idx, size_t epoch, size_t batch_i) {
            ad::Tape tape;
            PassContext ctx(tape, m.params);
            ad::Var x = ctx.constant(detail::gather_rows(ds.X, idx));
            ad::Var y = ctx.constant(detail::gather_rows(ds.Y, idx));
            RngStream eps_rng = RngStream::derive(cfg.seed, "icvae/eps", {epoch, batch_i});
            ad::Var eps = ctx.constant(detail::normal_matrix(idx.size(), m.z_dim, eps_rng));

            NetOutput q = network_forward(
                ctx, "icvae.enc", m.encoder_spec, ad::concat_cols(tape, x, y));
            ad::Var z = ad::add(tape, q.mean,
                                ad::mul(tape, ad::exp_(tape, q.log_std), eps));
            NetOutput dec = network_forward(ctx, "icvae.dec", m.decoder_spec,
                                            ad::concat_cols(tape, y, z));
            ad::Var recon = ad::gaussian_logpdf_rows(tape, x, dec.mean, dec.log_std);
            ad::Var kl = ad::kl_to_std_normal_rows(tape, q.mean, q.log_std);
            ad::Var obj = ad::add(tape, ad::scale(tape, recon, -1.0),
                                  ad::scale(tape, kl, cfg.beta_kl));
            ad::Var loss = ad::mean_all(tape, obj);
            const double value = tape.val(loss)(0, 0);
            if (!std::isfinite(value)) return value;
            m.params.zero_grad();
            ctx.backward(loss);
            m.params.adam_step(adam);
            return value;
        },
        [&]() {
            return detail::cvae_val_loss(m.params, m.encoder_spec, "icvae.enc", m.decoder_spec,
                                         "icvae.dec", val_xy, val_x, val_y, val_eps, cfg.beta_kl,
                                         nullptr);
        });
    return m;
}

// -------------------------------------------------------------- flow prior

struct FlowModel {
    FlowSpec spec;
    ParamStore params;
    TrainCurve curve;
};

inline FlowModel make_flow(size_t y_dim, uint64_t seed) {
    FlowModel m;
    m.spec.dim = y_dim;
    RngStream rng = RngStream::derive(seed, "flow/init");
    init_flow(m.params, "flow", m.spec, rng);
    return m;
}

inline FlowModel train_flow(const Matrix& train_y, const Matrix& val_y, const TrainConfig& cfg) {
    FlowModel m = make_flow(train_y.cols(), cfg.seed);
    const AdamConfig adam = cfg.adam();

    m.curve = detail::run_training(
        m.params, train_y.rows(), cfg, "flow",
        [&](const std::vector<size_t>& idx, size_t, size_t) {
            ad::Tape tape;
            PassContext ctx(tape, m.params);
            ad::Var y = ctx.constant(detail::gather_rows(train_y, idx));
            ad::Var logp = flow_logprob_rows(ctx, "flow", m.spec, y);
            ad::Var loss = ad::scale(tape, ad::mean_all(tape, logp), -1.0);
            const double value = tape.val(loss)(0, 0);
            if (!std::isfinite(value)) return value;
            m.params.zero_grad();
            ctx.backward(loss);
            m.params.adam_step(adam);
            return value;
        },
        [&]() {
            const std::vector<double> lp = flow_logprob_rows_plain(m.params, "flow", m.spec, val_y);
            double s = 0.0;
            for (double v : lp) s += v;
            return -s / static_cast<double>(lp.size());
        });
    return m;
}

inline FlowModel train_flow(const WindowedDataset& ds, const TrainConfig& cfg) {
    return train_flow(detail::slice_rows(ds.Y, 0, ds.train_end),
                      detail::slice_rows(ds.Y, ds.train_end, ds.val_end), cfg);
}

// ------------------------------------------------------------ model bundle

struct ModelBundle {
    NaiveModel naive;
    MlpModel mlp;
    ForwardCvae fcvae;
    InverseCvae icvae;
    FlowModel flow;
    Scaler scaler;
    WindowConfig window;
    TrainConfig train_config;
};

inline ModelBundle train_all(const WindowedDataset& ds, const TrainConfig& cfg) {
    ModelBundle b;
    b.naive = fit_naive(ds);
    b.mlp = train_forward_mlp(ds, cfg);
    b.fcvae = train_forward_cvae(ds, cfg);
    b.icvae = train_inverse_cvae(ds, cfg);
    b.flow = train_flow(ds, cfg);
    b.scaler = ds.scaler;
    b.window = ds.config;
    b.train_config = cfg;
    return b;
}

namespace detail {
inline nlohmann::json curve_json(const TrainCurve& c) {
    return {{"train_loss", c.train_loss},
            {"val_loss", c.val_loss},
            {"best_epoch", c.best_epoch},
            {"best_val", c.best_val}};
}
}  // namespace detail

inline void save_bundle(const ModelBundle& b, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto path = [&](const char* f) { return (fs::path(dir) / f).string(); };
    b.mlp.params.save(path("mlp.bin"), path("mlp.json"));
    b.fcvae.params.save(path("fcvae.bin"), path("fcvae.json"));
    b.icvae.params.save(path("icvae.bin"), path("icvae.json"));
    b.flow.params.save(path("flow.bin"), path("flow.json"));
    nlohmann::json manifest{
        {"format", "rf-bundle-v1"},
        {"naive_mean", b.naive.mean},
        {"x_dim", b.icvae.x_dim},
        {"y_dim", b.icvae.y_dim},
        {"z_dim", b.icvae.z_dim},
        {"n_samples", b.fcvae.n_samples},
        {"flow_layers", b.flow.spec.n_layers},
        {"flow_hidden", b.flow.spec.hidden},
        {"scaler", {{"mean", b.scaler.mean}, {"std", b.scaler.std}}},
        {"window",
         {{"past_len", b.window.past_len},
          {"horizon", b.window.horizon},
          {"stride", b.window.stride}}},
        {"train_config",
         {{"lr", b.train_config.lr},
          {"epochs", b.train_config.epochs},
          {"beta_kl", b.train_config.beta_kl},
          {"batch", b.train_config.batch},
          {"seed", b.train_config.seed}}},
        {"curves",
         {{"mlp", detail::curve_json(b.mlp.curve)},
          {"fcvae", detail::curve_json(b.fcvae.curve)},
          {"icvae", detail::curve_json(b.icvae.curve)},
          {"flow", detail::curve_json(b.flow.curve)}}},
    };
    std::ofstream mf(path("manifest.json"));
    if (!mf) throw std::runtime_error("cannot open for writing: " + path("manifest.json"));
    mf << manifest.dump(2) << '\n';
}

inline ModelBundle load_bundle(const std::string& dir) {
    namespace fs = std::filesystem;
    auto path = [&](const char* f) { return (fs::path(dir) / f).string(); };
    std::ifstream mf(path("manifest.json"));
    if (!mf) throw std::runtime_error("missing bundle manifest in " + dir);
    nlohmann::json manifest;
    mf >> manifest;

    ModelBundle b;
    const size_t x_dim = manifest.at("x_dim").get<size_t>();
    const size_t y_dim = manifest.at("y_dim").get<size_t>();
    b.naive.mean = manifest.at("naive_mean").get<std::vector<double>>();

    b.mlp.spec = NetworkSpec{x_dim, {128, 128}, y_dim, Activation::relu, false};
    b.mlp.params = ParamStore::load(path("mlp.bin"), path("mlp.json"));

    b.fcvae = ForwardCvae{};
    b.fcvae.x_dim = x_dim;
    b.fcvae.y_dim = y_dim;
    b.fcvae.n_samples = manifest.at("n_samples").get<size_t>();
    b.fcvae.prior_spec = NetworkSpec{x_dim, {128, 128}, b.fcvae.z_dim, Activation::relu, true};
    b.fcvae.encoder_spec =
        NetworkSpec{x_dim + y_dim, {128, 128}, b.fcvae.z_dim, Activation::relu, true};
    b.fcvae.decoder_spec =
        NetworkSpec{x_dim + b.fcvae.z_dim, {128, 128}, y_dim, Activation::relu, true};
    b.fcvae.params = ParamStore::load(path("fcvae.bin"), path("fcvae.json"));

    b.icvae = InverseCvae{};
    b.icvae.x_dim = x_dim;
    b.icvae.y_dim = y_dim;
    b.icvae.encoder_spec =
        NetworkSpec{x_dim + y_dim, {128, 128}, b.icvae.z_dim, Activation::relu, true};
    b.icvae.decoder_spec =
        NetworkSpec{y_dim + b.icvae.z_dim, {128, 128}, x_dim, Activation::relu, true};
    b.icvae.params = ParamStore::load(path("icvae.bin"), path("icvae.json"));

    b.flow.spec.dim = y_dim;
    b.flow.spec.n_layers = manifest.at("flow_layers").get<size_t>();
    b.flow.spec.hidden = manifest.at("flow_hidden").get<std::vector<size_t>>();
    b.flow.params = ParamStore::load(path("flow.bin"), path("flow.json"));

    b.scaler.mean = manifest.at("scaler").at("mean").get<double>();
    b.scaler.std = manifest.at("scaler").at("std").get<double>();
    b.window.past_len = manifest.at("window").at("past_len").get<size_t>();
    b.window.horizon = manifest.at("window").at("horizon").get<size_t>();
    b.window.stride = manifest.at("window").at("stride").get<size_t>();
    const auto& tc = manifest.at("train_config");
    b.train_config.lr = tc.at("lr").get<double>();
    b.train_config.epochs = tc.at("epochs").get<size_t>();
    b.train_config.beta_kl = tc.at("beta_kl").get<double>();
    b.train_config.batch = tc.at("batch").get<size_t>();
    b.train_config.seed = tc.at("seed").get<uint64_t>();
    return b;
}

}  // namespace rf
