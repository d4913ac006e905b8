#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "retroforecast/eval.hpp"
#include "retroforecast/pipeline.hpp"

using namespace rf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig micro_config(const std::string& out_dir) {
    RunConfig cfg;
    cfg.cases = {{"A", Verdict::GO, true, "", "", "", {}},
                 {"D", Verdict::NOGO, true, "", "", "", {}}};
    cfg.series_length = 1200;
    cfg.seed = 42;
    cfg.window = WindowConfig{16, 8, 1};
    cfg.arrow.n_perm = 30;
    cfg.arrow.max_embed = 400;
    cfg.train.epochs = 2;
    cfg.map.steps = 40;
    cfg.subsample = 16;
    cfg.out_dir = out_dir;
    return cfg;
}

}  // namespace

TEST_CASE("forecast CSV round-trips") {
    Matrix t(3, 4), h(3, 4);
    RngStream rng(1);
    for (double& v : t.raw()) v = rng.normal();
    for (double& v : h.raw()) v = rng.normal();
    const std::vector<size_t> ids{5, 9, 12};
    const std::string path = (fs::temp_directory_path() / "rf_fc.csv").string();
    write_forecast_csv(path, ids, t, h);
    const ForecastTable back = read_forecast_csv(path);
    REQUIRE(back.window_ids == ids);
    for (size_t i = 0; i < t.size(); ++i) {
        REQUIRE(back.y_true.raw()[i] == t.raw()[i]);
        REQUIRE(back.y_hat.raw()[i] == h.raw()[i]);
    }
    fs::remove(path);
}

TEST_CASE("run config JSON round-trips") {
    RunConfig cfg = RunConfig::synthetic_default();
    cfg.seed = 7;
    cfg.subsample = 33;
    cfg.arrow.n_perm = 123;
    cfg.map.lambda_prior = 1.5;
    cfg.train.epochs = 11;
    const RunConfig back = run_config_from_json(to_json(cfg));
    CHECK(back.seed == 7);
    CHECK(back.subsample == 33);
    CHECK(back.arrow.n_perm == 123);
    CHECK(back.map.lambda_prior == 1.5);
    CHECK(back.train.epochs == 11);
    CHECK(back.train.seed == 7);  // seeds follow the run seed
    REQUIRE(back.cases.size() == 4);
    CHECK(back.cases[2].name == "C");
    CHECK(back.cases[2].expected == Verdict::GO);
}

TEST_CASE("evaluate_case computes ratios and DM against mlp") {
    RngStream rng(3);
    Matrix truth(40, 4);
    for (double& v : truth.raw()) v = rng.normal();
    std::map<std::string, Matrix> preds;
    preds["mlp"] = truth;  // perfect
    Matrix off = truth;
    for (double& v : off.raw()) v += 0.5;
    preds["inv-flow"] = off;  // constant offset
    const EvalReport r = evaluate_case("X", preds, truth);
    CHECK(r.methods.at("mlp").rmse == 0.0);
    CHECK(r.methods.at("inv-flow").rmse == Catch::Approx(0.5));
    CHECK(std::isinf(r.ratio_inv_mlp));
    // a uniformly worse method must come out strongly significant
    CHECK(r.dm.stat > 0.0);
    CHECK(r.dm.p < 1e-6);
}

TEST_CASE("scorecard threshold mechanics") {
    CaseOutcome go_good;
    go_good.name = "A";
    go_good.expected = go_good.observed = Verdict::GO;
    go_good.synthetic = true;
    go_good.rmse_inv_flow = 1.0;
    go_good.rmse_inv_gauss = 1.1;
    go_good.ratio = 0.95;

    CaseOutcome nogo;
    nogo.name = "B";
    nogo.expected = nogo.observed = Verdict::NOGO;
    nogo.synthetic = true;
    nogo.ratio = 1.870;

    SECTION("all pass with the observed-style values") {
        const Scorecard sc = make_scorecard({go_good, nogo});
        CHECK(sc.p1.pass);
        CHECK(sc.p2.pass);
        CHECK(sc.p3.pass);
        CHECK(sc.p4.pass);
        CHECK(sc.all_pass);
    }

    SECTION("a fabricated ratio 1.20 on a GO case fails P4") {
        CaseOutcome bad = go_good;
        bad.ratio = 1.20;
        const Scorecard sc = make_scorecard({bad, nogo});
        CHECK_FALSE(sc.p4.pass);
        CHECK(sc.p1.pass);
        CHECK_FALSE(sc.all_pass);
    }

    SECTION("verdict mismatch fails P1") {
        CaseOutcome wrong = nogo;
        wrong.observed = Verdict::GO;
        const Scorecard sc = make_scorecard({go_good, wrong});
        CHECK_FALSE(sc.p1.pass);
    }

    SECTION("flow not beating gauss fails P2") {
        CaseOutcome tie = go_good;
        tie.rmse_inv_gauss = tie.rmse_inv_flow;
        const Scorecard sc = make_scorecard({tie, nogo});
        CHECK_FALSE(sc.p2.pass);
    }

    SECTION("NOGO ratio below threshold fails P3") {
        CaseOutcome leak = nogo;
        leak.ratio = 0.80;
        const Scorecard sc = make_scorecard({go_good, leak});
        CHECK_FALSE(sc.p3.pass);
    }
}

TEST_CASE("empty case set is rejected") {
    RunConfig cfg;
    cfg.cases.clear();
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("micro reproduce is deterministic and export tables are consistent") {
    const std::string dir1 = (fs::temp_directory_path() / "rf_run1").string();
    const std::string dir2 = (fs::temp_directory_path() / "rf_run2").string();
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    std::ostringstream sink;

    const Scorecard s1 = reproduce(micro_config(dir1), sink);
    const Scorecard s2 = reproduce(micro_config(dir2), sink);
    (void)s1;
    (void)s2;
    CHECK(slurp(dir1 + "/scorecard.json") == slurp(dir2 + "/scorecard.json"));

    // export and cross-check the ratio column against the eval files
    export_tables(dir1);
    std::ifstream table(dir1 + "/table_results.csv");
    REQUIRE(table);
    std::string header, line;
    std::getline(table, header);
    size_t rows = 0;
    while (std::getline(table, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name, verdict, rest;
        std::getline(ls, name, ',');
        std::getline(ls, verdict, ',');
        std::vector<double> nums;
        while (std::getline(ls, rest, ',')) nums.push_back(std::stod(rest));
        REQUIRE(nums.size() == 7);  // naive, mlp, cvae, invflow, ratio, dm_stat, dm_p
        CHECK(nums[4] == Catch::Approx(nums[3] / nums[1]).margin(1e-12));
        ++rows;
    }
    CHECK(rows == 2);

    // per-horizon table covers both cases and all five methods
    std::ifstream ph(dir1 + "/table_per_horizon.csv");
    REQUIRE(ph);
    size_t ph_rows = 0;
    std::getline(ph, header);
    while (std::getline(ph, line))
        if (!line.empty()) ++ph_rows;
    CHECK(ph_rows == 2 * 5 * 8);  // cases x methods x horizon

    // stage isolation: manifest lists every stage with checksums
    std::ifstream mf(dir1 + "/manifest.json");
    REQUIRE(mf);
    nlohmann::json manifest;
    mf >> manifest;
    CHECK(manifest.at("stages").size() >= 2 * 5 + 1);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("export_tables on a missing run errors") {
    CHECK_THROWS(export_tables("/nonexistent/run"));
}
