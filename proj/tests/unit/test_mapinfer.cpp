#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "retroforecast/ingest.hpp"
#include "retroforecast/mapinfer.hpp"
#include "retroforecast/models.hpp"
#include "retroforecast/procgen.hpp"
#include "retroforecast/rng.hpp"

using namespace rf;

namespace {

struct SmallModels {
    InverseCvae icvae;
    FlowModel flow;
    WindowedDataset ds;
};

SmallModels trained_small_models() {
    static SmallModels cached = [] {
        SmallModels sm;
        sm.ds = build_dataset(gen_case_a(1500, 42), WindowConfig{12, 6, 1});
        TrainConfig cfg;
        cfg.epochs = 6;
        cfg.seed = 3;
        sm.icvae = train_inverse_cvae(sm.ds, cfg);
        sm.flow = train_flow(sm.ds, cfg);
        return sm;
    }();
    return cached;
}

std::vector<double> row_of(const Matrix& m, size_t i) {
    return std::vector<double>(m.row(i), m.row(i) + m.cols());
}

}  // namespace

TEST_CASE("MAP objective gradient matches finite differences") {
    SmallModels sm = trained_small_models();
    RngStream rng(5);
    std::vector<double> x = row_of(sm.ds.X, sm.ds.val_end + 1);
    std::vector<double> y(sm.icvae.y_dim), z(sm.icvae.z_dim);
    for (double& v : y) v = 0.5 * rng.normal();
    for (double& v : z) v = 0.5 * rng.normal();

    for (MapPrior prior : {MapPrior::flow, MapPrior::gauss}) {
        CAPTURE(prior == MapPrior::flow);
        MapConfig cfg;
        cfg.lambda_prior = 2.0;
        std::vector<double> gy, gz;
        map_objective(sm.icvae, &sm.flow, prior, x, y, z, cfg, &gy, &gz);
        auto eval = [&]() {
            return map_objective(sm.icvae, &sm.flow, prior, x, y, z, cfg);
        };
        CHECK(rftest::finite_diff_check_vector(y, gy, eval) < 1.0);
        CHECK(rftest::finite_diff_check_vector(z, gz, eval) < 1.0);
    }
}

TEST_CASE("objective ignores y when the decoder has zero weights") {
    InverseCvae dead = make_inverse_cvae(8, 4, 77);
    for (const std::string& n : dead.params.names())
        dead.params.at(n).value.fill(0.0);
    FlowModel flow = make_flow(4, 78);

    MapConfig cfg;
    cfg.lambda_prior = 0.0;
    cfg.lambda_y = 0.0;
    RngStream rng(6);
    std::vector<double> x(8), y(4), z(8, 0.25);
    for (double& v : x) v = rng.normal();
    for (double& v : y) v = rng.normal();
    std::vector<double> gy, gz;
    map_objective(dead, &flow, MapPrior::flow, x, y, z, cfg, &gy, &gz);
    for (double g : gy) CHECK(g == 0.0);
}

TEST_CASE("objective increases linearly with lambda_prior") {
    SmallModels sm = trained_small_models();
    RngStream rng(7);
    std::vector<double> x = row_of(sm.ds.X, sm.ds.val_end + 2);
    std::vector<double> y(sm.icvae.y_dim, 3.0);  // far out, -log p(y) > 0 for sure
    std::vector<double> z(sm.icvae.z_dim, 0.0);

    MapConfig lo, hi;
    lo.lambda_prior = 1.0;
    hi.lambda_prior = 3.0;
    const double vlo = map_objective(sm.icvae, &sm.flow, MapPrior::flow, x, y, z, lo);
    const double vhi = map_objective(sm.icvae, &sm.flow, MapPrior::flow, x, y, z, hi);
    // -log p(y) at ||y||=3*sqrt(m) under any roughly standard prior is positive
    CHECK(vhi > vlo);
}

TEST_CASE("K=1 N=0 returns the initialization") {
    SmallModels sm = trained_small_models();
    const Matrix x = detail::slice_rows(sm.ds.X, sm.ds.val_end, sm.ds.val_end + 2);
    Matrix fic(2, sm.icvae.y_dim);
    RngStream rng(9);
    for (double& v : fic.raw()) v = rng.normal();

    MapConfig cfg;
    cfg.restarts = 1;
    cfg.steps = 0;
    const std::vector<ForecastResult> res =
        map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, {0, 1}, &fic, cfg);
    REQUIRE(res.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(res[i].used_fic);
        CHECK(res[i].dispersion == 0.0);
        for (size_t j = 0; j < sm.icvae.y_dim; ++j) REQUIRE(res[i].y_hat[j] == fic(i, j));
        for (double zv : res[i].z_hat) REQUIRE(zv == 0.0);
    }

    // disabled-FIC mode draws restart 0 from the prior instead
    MapConfig nofic = cfg;
    nofic.use_fic = false;
    const std::vector<ForecastResult> res2 =
        map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, {0, 1}, &fic, nofic);
    CHECK_FALSE(res2[0].used_fic);
    bool differs = false;
    for (size_t j = 0; j < sm.icvae.y_dim; ++j) differs |= (res2[0].y_hat[j] != fic(0, j));
    CHECK(differs);
}

TEST_CASE("linear-Gaussian MAP matches the closed-form posterior mode") {
    // decoder with no hidden layers and unit sigma: mu_x = [y z] W + b
    const size_t n = 4, m = 3, zd = 2;
    InverseCvae lin;
    lin.x_dim = n;
    lin.y_dim = m;
    lin.z_dim = zd;
    lin.encoder_spec = NetworkSpec{n + m, {}, zd, Activation::identity, true};
    lin.decoder_spec = NetworkSpec{m + zd, {}, n, Activation::identity, true};
    RngStream rng(12);
    init_network(lin.params, "icvae.enc", lin.encoder_spec, rng);
    init_network(lin.params, "icvae.dec", lin.decoder_spec, rng);
    lin.params.at("icvae.dec.logstd.W").value.fill(0.0);  // sigma = exp(0) = 1
    lin.params.at("icvae.dec.logstd.b").value.fill(0.0);
    Matrix& W = lin.params.at("icvae.dec.mean.W").value;  // (m+zd) x n
    Matrix& bvec = lin.params.at("icvae.dec.mean.b").value;
    for (double& v : W.raw()) v = 0.5 * rng.normal();
    for (double& v : bvec.raw()) v = 0.2 * rng.normal();

    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();

    MapConfig cfg;
    cfg.restarts = 2;
    cfg.steps = 4000;
    cfg.lambda_prior = 2.0;
    cfg.seed = 99;
    cfg.use_fic = false;
    const ForecastResult res =
        map_optimize(lin, nullptr, MapPrior::gauss, x, /*window_id=*/0, nullptr, cfg);

    // closed form: (M^T M + D) v = M^T (x - b), M = W^T, D = diag(lp*I_m, I_zd)
    const size_t dim = m + zd;
    std::vector<std::vector<double>> A(dim, std::vector<double>(dim, 0.0));
    std::vector<double> rhs(dim, 0.0);
    for (size_t i = 0; i < dim; ++i)
        for (size_t j = 0; j < dim; ++j)
            for (size_t r = 0; r < n; ++r) A[i][j] += W(i, r) * W(j, r);
    for (size_t i = 0; i < m; ++i) A[i][i] += cfg.lambda_prior;
    for (size_t i = m; i < dim; ++i) A[i][i] += 1.0;
    for (size_t i = 0; i < dim; ++i)
        for (size_t r = 0; r < n; ++r) rhs[i] += W(i, r) * (x[r] - bvec(0, r));
    // Gaussian elimination with partial pivoting
    for (size_t c = 0; c < dim; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < dim; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        std::swap(A[piv], A[c]);
        std::swap(rhs[piv], rhs[c]);
        for (size_t r = c + 1; r < dim; ++r) {
            const double f = A[r][c] / A[c][c];
            for (size_t k = c; k < dim; ++k) A[r][k] -= f * A[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> sol(dim);
    for (size_t c = dim; c-- > 0;) {
        double s = rhs[c];
        for (size_t k = c + 1; k < dim; ++k) s -= A[c][k] * sol[k];
        sol[c] = s / A[c][c];
    }

    for (size_t j = 0; j < m; ++j)
        CHECK(res.y_hat[j] == Catch::Approx(sol[j]).margin(1e-3));
    for (size_t j = 0; j < zd; ++j)
        CHECK(res.z_hat[j] == Catch::Approx(sol[m + j]).margin(1e-3));
}

TEST_CASE("best-of-K never worsens with more restarts") {
    SmallModels sm = trained_small_models();
    const Matrix x = detail::slice_rows(sm.ds.X, sm.ds.val_end, sm.ds.val_end + 4);
    const std::vector<size_t> ids{10, 11, 12, 13};
    Matrix fic(4, sm.icvae.y_dim);
    for (double& v : fic.raw()) v = 0.0;

    MapConfig c3, c5;
    c3.restarts = 3;
    c3.steps = 25;
    c3.seed = 21;
    c5 = c3;
    c5.restarts = 5;
    const auto r3 = map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, ids, &fic, c3);
    const auto r5 = map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, ids, &fic, c5);
    for (size_t i = 0; i < ids.size(); ++i) {
        // shared per-(window,restart) streams: the first 3 restarts coincide
        for (size_t k = 0; k < 3; ++k)
            REQUIRE(r5[i].map_losses_all[k] == Catch::Approx(r3[i].map_losses_all[k]).margin(0));
        CHECK(r5[i].map_loss_best <= r3[i].map_loss_best + 1e-12);
    }
}

TEST_CASE("descent reduces the objective on nearly every window") {
    SmallModels sm = trained_small_models();
    const size_t count = 24;
    const Matrix x = detail::slice_rows(sm.ds.X, sm.ds.val_end, sm.ds.val_end + count);
    std::vector<size_t> ids;
    for (size_t i = 0; i < count; ++i) ids.push_back(i);

    MapConfig init_cfg;
    init_cfg.restarts = 2;
    init_cfg.steps = 0;
    init_cfg.seed = 31;
    init_cfg.use_fic = false;
    MapConfig run_cfg = init_cfg;
    run_cfg.steps = 60;
    const auto before =
        map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, ids, nullptr, init_cfg);
    const auto after =
        map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, ids, nullptr, run_cfg);
    size_t improved = 0;
    for (size_t i = 0; i < count; ++i) {
        size_t ok = 0;
        for (size_t k = 0; k < 2; ++k)
            if (after[i].map_losses_all[k] <= before[i].map_losses_all[k] + 1e-9) ++ok;
        if (ok == 2) ++improved;
    }
    CHECK(static_cast<double>(improved) / count >= 0.95);
}

TEST_CASE("MAP runs are deterministic and batching-invariant") {
    SmallModels sm = trained_small_models();
    const Matrix x = detail::slice_rows(sm.ds.X, sm.ds.val_end, sm.ds.val_end + 3);
    const std::vector<size_t> ids{100, 200, 300};
    Matrix fic(3, sm.icvae.y_dim);
    RngStream rng(14);
    for (double& v : fic.raw()) v = 0.3 * rng.normal();

    MapConfig cfg;
    cfg.restarts = 2;
    cfg.steps = 20;
    cfg.seed = 5;
    const auto batch = map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, ids, &fic, cfg);
    const auto batch2 = map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, ids, &fic, cfg);
    for (size_t i = 0; i < 3; ++i) {
        REQUIRE(batch[i].y_hat == batch2[i].y_hat);
        REQUIRE(batch[i].map_losses_all == batch2[i].map_losses_all);
    }
    for (size_t i = 0; i < 3; ++i) {
        const std::vector<double> xi = row_of(x, i);
        const std::vector<double> fi = row_of(fic, i);
        const ForecastResult single =
            map_optimize(sm.icvae, &sm.flow, MapPrior::flow, xi, ids[i], &fi, cfg);
        for (size_t j = 0; j < sm.icvae.y_dim; ++j)
            REQUIRE(single.y_hat[j] == Catch::Approx(batch[i].y_hat[j]).margin(1e-12));
        REQUIRE(single.map_loss_best == Catch::Approx(batch[i].map_loss_best).margin(1e-12));
    }
}

TEST_CASE("trained decoder is coupled to y") {
    SmallModels sm = trained_small_models();
    RngStream rng(15);
    MapConfig cfg;
    cfg.lambda_prior = 0.0;  // isolate the reconstruction term
    double grad_norm = 0.0;
    for (int probe = 0; probe < 5; ++probe) {
        std::vector<double> x = row_of(sm.ds.X, sm.ds.val_end + probe);
        std::vector<double> y(sm.icvae.y_dim), z(sm.icvae.z_dim);
        for (double& v : y) v = rng.normal();
        for (double& v : z) v = rng.normal();
        std::vector<double> gy, gz;
        map_objective(sm.icvae, &sm.flow, MapPrior::gauss, x, y, z, cfg, &gy, &gz);
        for (double g : gy) grad_norm += g * g;
    }
    CHECK(grad_norm > 1e-8);
}

TEST_CASE("fic_warmstart is exactly the forward-CVAE prediction") {
    const WindowedDataset ds = build_dataset(gen_case_d(700, 4), WindowConfig{12, 6, 1});
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 10;
    const ForwardCvae fcvae = train_forward_cvae(ds, cfg);
    const Matrix x = detail::slice_rows(ds.X, ds.val_end, ds.val_end + 5);
    const std::vector<size_t> ids{1, 2, 3, 4, 5};
    const Matrix a = fic_warmstart(fcvae, x, ids, 42);
    const Matrix b = forward_cvae_predict(fcvae, x, ids, 42);
    for (size_t i = 0; i < a.size(); ++i) REQUIRE(a.raw()[i] == b.raw()[i]);
}

TEST_CASE("MAP validates its inputs") {
    SmallModels sm = trained_small_models();
    const Matrix x = detail::slice_rows(sm.ds.X, 0, 1);
    MapConfig cfg;
    CHECK_THROWS(map_optimize_batch(sm.icvae, nullptr, MapPrior::flow, x, {0}, nullptr, cfg));
    MapConfig need_fic;
    need_fic.lambda_y = 1.0;
    CHECK_THROWS(
        map_optimize_batch(sm.icvae, &sm.flow, MapPrior::flow, x, {0}, nullptr, need_fic));
}
