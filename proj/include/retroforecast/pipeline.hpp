// End-to-end orchestration: generate -> diagnose -> ingest -> train ->
// forecast -> evaluate -> scorecard, with file-based stage isolation inside
// a run directory, a manifest of per-stage wall times and artifact
// checksums, and table exports for external plotting.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arrow.hpp"
#include "eval.hpp"
#include "ingest.hpp"
#include "mapinfer.hpp"
#include "models.hpp"
#include "procgen.hpp"
#include "series.hpp"
#include "stats.hpp"

namespace rf {

constexpr const char* kVersion = "0.1.0";

struct CaseSpec {
    std::string name;      // A, B, C, D, ERA5, ERA_ssrd
    Verdict expected = Verdict::NOGO;
    bool synthetic = true;
    std::string csv_path;  // external cases only
    std::string value_column;
    std::string timestamp_column;
    PreprocessSpec preprocess;
};

struct RunConfig {
    std::vector<CaseSpec> cases;
    size_t series_length = 20000;
    uint64_t seed = 42;
    WindowConfig window;
    ArrowConfig arrow;
    TrainConfig train;
    MapConfig map;
    size_t subsample = 256;  // 0 = full test split
    std::string out_dir = "runs/default";

    void validate() const {
        if (cases.empty()) throw std::invalid_argument("RunConfig: empty case set");
        window.validate();
        arrow.validate();
        train.validate();
        map.validate();
        for (const CaseSpec& c : cases)
            if (!c.synthetic && c.csv_path.empty())
                throw std::invalid_argument("RunConfig: external case '" + c.name +
                                            "' needs csv_path");
    }

    static RunConfig synthetic_default() {
        RunConfig cfg;
        cfg.cases = {{"A", Verdict::GO, true, "", "", "", {}},
                     {"B", Verdict::NOGO, true, "", "", "", {}},
                     {"C", Verdict::GO, true, "", "", "", {}},
                     {"D", Verdict::NOGO, true, "", "", "", {}}};
        return cfg;
    }
};

inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json cases = nlohmann::json::array();
    for (const CaseSpec& c : cfg.cases) {
        nlohmann::json jc{{"name", c.name},
                          {"expected", to_string(c.expected)},
                          {"synthetic", c.synthetic}};
        if (!c.synthetic) {
            jc["csv_path"] = c.csv_path;
            jc["value_column"] = c.value_column;
            if (!c.timestamp_column.empty()) jc["timestamp_column"] = c.timestamp_column;
            jc["log_transform"] = c.preprocess.log_transform;
            if (c.preprocess.daylight)
                jc["daylight"] = {{"lat", c.preprocess.daylight->lat_deg},
                                  {"lon", c.preprocess.daylight->lon_deg},
                                  {"zenith_max", c.preprocess.daylight->zenith_max_deg}};
        }
        cases.push_back(jc);
    }
    return {{"cases", cases},
            {"series_length", cfg.series_length},
            {"seed", cfg.seed},
            {"window",
             {{"past_len", cfg.window.past_len},
              {"horizon", cfg.window.horizon},
              {"stride", cfg.window.stride}}},
            {"arrow",
             {{"windows", cfg.arrow.windows},
              {"k_nn", cfg.arrow.k_nn},
              {"n_perm", cfg.arrow.n_perm},
              {"alpha", cfg.arrow.alpha},
              {"c_min", cfg.arrow.c_min},
              {"max_embed", cfg.arrow.max_embed}}},
            {"train",
             {{"lr", cfg.train.lr},
              {"epochs", cfg.train.epochs},
              {"beta_kl", cfg.train.beta_kl},
              {"batch", cfg.train.batch}}},
            {"map",
             {{"restarts", cfg.map.restarts},
              {"steps", cfg.map.steps},
              {"lr", cfg.map.lr},
              {"clip_norm", cfg.map.clip_norm},
              {"lambda_prior", cfg.map.lambda_prior},
              {"lambda_y", cfg.map.lambda_y},
              {"use_fic", cfg.map.use_fic}}},
            {"subsample", cfg.subsample},
            {"out_dir", cfg.out_dir}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.cases.clear();
    for (const auto& jc : j.at("cases")) {
        CaseSpec c;
        c.name = jc.at("name").get<std::string>();
        c.expected = jc.at("expected").get<std::string>() == "GO" ? Verdict::GO : Verdict::NOGO;
        c.synthetic = jc.at("synthetic").get<bool>();
        if (!c.synthetic) {
            c.csv_path = jc.at("csv_path").get<std::string>();
            c.value_column = jc.at("value_column").get<std::string>();
            if (jc.contains("timestamp_column"))
                c.timestamp_column = jc.at("timestamp_column").get<std::string>();
            c.preprocess.log_transform = jc.value("log_transform", false);
            if (jc.contains("daylight"))
                c.preprocess.daylight =
                    DaylightFilter{jc.at("daylight").at("lat").get<double>(),
                                   jc.at("daylight").at("lon").get<double>(),
                                   jc.at("daylight").at("zenith_max").get<double>()};
        }
        cfg.cases.push_back(c);
    }
    if (j.contains("series_length")) cfg.series_length = j.at("series_length").get<size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("window")) {
        cfg.window.past_len = j.at("window").value("past_len", cfg.window.past_len);
        cfg.window.horizon = j.at("window").value("horizon", cfg.window.horizon);
        cfg.window.stride = j.at("window").value("stride", cfg.window.stride);
    }
    if (j.contains("arrow")) {
        const auto& a = j.at("arrow");
        if (a.contains("windows")) cfg.arrow.windows = a.at("windows").get<std::vector<size_t>>();
        cfg.arrow.k_nn = a.value("k_nn", cfg.arrow.k_nn);
        cfg.arrow.n_perm = a.value("n_perm", cfg.arrow.n_perm);
        cfg.arrow.alpha = a.value("alpha", cfg.arrow.alpha);
        cfg.arrow.c_min = a.value("c_min", cfg.arrow.c_min);
        cfg.arrow.max_embed = a.value("max_embed", cfg.arrow.max_embed);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.lr = t.value("lr", cfg.train.lr);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.beta_kl = t.value("beta_kl", cfg.train.beta_kl);
        cfg.train.batch = t.value("batch", cfg.train.batch);
    }
    if (j.contains("map")) {
        const auto& m = j.at("map");
        cfg.map.restarts = m.value("restarts", cfg.map.restarts);
        cfg.map.steps = m.value("steps", cfg.map.steps);
        cfg.map.lr = m.value("lr", cfg.map.lr);
        cfg.map.clip_norm = m.value("clip_norm", cfg.map.clip_norm);
        cfg.map.lambda_prior = m.value("lambda_prior", cfg.map.lambda_prior);
        cfg.map.lambda_y = m.value("lambda_y", cfg.map.lambda_y);
        cfg.map.use_fic = m.value("use_fic", cfg.map.use_fic);
    }
    if (j.contains("subsample")) cfg.subsample = j.at("subsample").get<size_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.train.seed = cfg.seed;
    cfg.arrow.seed = cfg.seed;
    cfg.map.seed = cfg.seed;
    return cfg;
}

// -------------------------------------------------------------- artifacts

inline uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checksum: cannot read " + path);
    uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<uint8_t>(buf[i]);
            h *= 1099511628211ull;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

inline void write_json_atomic(const nlohmann::json& j, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// Forecast CSV: window_index,horizon_step,y_true,y_hat (standardized space).
inline void write_forecast_csv(const std::string& path, const std::vector<size_t>& window_ids,
                               const Matrix& y_true, const Matrix& y_hat) {
    require_shape(y_true, y_hat, "write_forecast_csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "window_index,horizon_step,y_true,y_hat\n";
    out.precision(17);
    for (size_t i = 0; i < y_true.rows(); ++i)
        for (size_t j = 0; j < y_true.cols(); ++j)
            out << window_ids[i] << ',' << (j + 1) << ',' << y_true(i, j) << ',' << y_hat(i, j)
                << '\n';
}

struct ForecastTable {
    std::vector<size_t> window_ids;  // unique, in file order
    Matrix y_true;
    Matrix y_hat;
};

inline ForecastTable read_forecast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing forecasts: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<size_t> ids;
    std::vector<double> truths, hats;
    size_t horizon = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        size_t wid, h;
        double yt, yh;
        char c;
        ls >> wid >> c >> h >> c >> yt >> c >> yh;
        if (!ls) throw std::runtime_error("bad forecast row in " + path);
        if (h > horizon) horizon = h;
        if (ids.empty() || ids.back() != wid) ids.push_back(wid);
        truths.push_back(yt);
        hats.push_back(yh);
    }
    if (ids.empty() || horizon == 0) throw std::runtime_error("empty forecasts: " + path);
    ForecastTable t;
    t.window_ids = ids;
    t.y_true = Matrix(ids.size(), horizon);
    t.y_hat = Matrix(ids.size(), horizon);
    if (truths.size() != ids.size() * horizon)
        throw std::runtime_error("ragged forecast table in " + path);
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = 0; j < horizon; ++j) {
            t.y_true(i, j) = truths[i * horizon + j];
            t.y_hat(i, j) = hats[i * horizon + j];
        }
    return t;
}

// --------------------------------------------------------------- manifest

class RunManifest {
public:
    RunManifest(const std::string& run_dir, const nlohmann::json& config_snapshot)
        : path_((std::filesystem::path(run_dir) / "manifest.json").string()) {
        doc_["version"] = kVersion;
        doc_["config"] = config_snapshot;
        doc_["stages"] = nlohmann::json::array();
    }

    void record_stage(const std::string& name, double wall_seconds,
                      const std::vector<std::string>& artifacts) {
        nlohmann::json arts = nlohmann::json::array();
        for (const std::string& a : artifacts) {
            std::ostringstream hex;
            hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a_file(a);
            arts.push_back({{"path", a}, {"fnv1a64", hex.str()}});
        }
        doc_["stages"].push_back(
            {{"name", name}, {"wall_seconds", wall_seconds}, {"artifacts", arts}});
        write_json_atomic(doc_, path_);
    }

private:
    std::string path_;
    nlohmann::json doc_;
};

// -------------------------------------------------------------- stages

struct StageTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline TimeSeries load_case_series(const CaseSpec& c, const RunConfig& cfg) {
    if (c.synthetic) return generate_case(c.name.at(0), cfg.series_length, cfg.seed);
    std::optional<std::string> tcol;
    if (!c.timestamp_column.empty()) tcol = c.timestamp_column;
    const LoadedSeries loaded = load_csv(c.csv_path, c.value_column, tcol);
    return preprocess(loaded.series, c.preprocess, loaded.timestamps);
}

struct CaseRunResult {
    ArrowReport arrow;
    EvalReport eval;
};

// All five methods forecast the same subsampled test windows; MAP methods
// also emit a per-window JSON sidecar with losses and dispersion.
inline std::map<std::string, Matrix> forecast_all_methods(
    const ModelBundle& bundle, const WindowedDataset& ds, const std::vector<size_t>& window_ids,
    const MapConfig& map_cfg, std::vector<double>* retro_nll_out, double* dispersion_mean_out,
    const std::string& out_dir_or_empty) {
    const Matrix X = detail::gather_rows(ds.X, window_ids);
    std::map<std::string, Matrix> preds;
    preds["naive"] = naive_predict(bundle.naive, X.rows());
    preds["mlp"] = mlp_predict(bundle.mlp, X);
    const Matrix fic = forward_cvae_predict(bundle.fcvae, X, window_ids, map_cfg.seed);
    preds["cvae"] = fic;

    for (const MapPrior prior : {MapPrior::flow, MapPrior::gauss}) {
        const char* method = prior == MapPrior::flow ? "inv-flow" : "inv-gauss";
        const std::vector<ForecastResult> res = map_optimize_batch(
            bundle.icvae, &bundle.flow, prior, X, window_ids, &fic, map_cfg);
        Matrix yhat(res.size(), bundle.icvae.y_dim);
        nlohmann::json windows = nlohmann::json::array();
        double disp_acc = 0.0;
        for (size_t i = 0; i < res.size(); ++i) {
            for (size_t j = 0; j < yhat.cols(); ++j) yhat(i, j) = res[i].y_hat[j];
            disp_acc += res[i].dispersion;
            windows.push_back({{"window_index", window_ids[i]},
                               {"map_losses", res[i].map_losses_all},
                               {"map_loss_best", res[i].map_loss_best},
                               {"retro_nll", res[i].retro_nll},
                               {"dispersion", res[i].dispersion},
                               {"used_fic", res[i].used_fic}});
        }
        if (prior == MapPrior::flow) {
            if (retro_nll_out) {
                retro_nll_out->clear();
                for (const ForecastResult& r : res) retro_nll_out->push_back(r.retro_nll);
            }
            if (dispersion_mean_out)
                *dispersion_mean_out = disp_acc / static_cast<double>(res.size());
        }
        if (!out_dir_or_empty.empty())
            write_json_atomic(nlohmann::json{{"method", method}, {"windows", windows}},
                              (std::filesystem::path(out_dir_or_empty) /
                               (std::string("map_") + method + ".json"))
                                  .string());
        preds[method] = std::move(yhat);
    }
    return preds;
}

inline std::vector<size_t> pick_test_windows(const WindowedDataset& ds, size_t subsample,
                                             uint64_t seed) {
    std::vector<size_t> ids;
    if (subsample > 0 && ds.n_test() > subsample) {
        RngStream rng = RngStream::derive(seed, "test_subsample");
        ids = rng.sample_indices(ds.n_test(), subsample);
        for (size_t& v : ids) v += ds.val_end;
    } else {
        for (size_t i = ds.val_end; i < ds.n_windows(); ++i) ids.push_back(i);
    }
    return ids;
}

// Runs one case inside run_dir/<case>/ and returns its reports.
inline CaseRunResult run_case(const CaseSpec& c, const RunConfig& cfg, RunManifest& manifest,
                              std::ostream& log = std::cout) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(cfg.out_dir) / c.name;
    fs::create_directories(dir);
    auto p = [&](const std::string& f) { return (dir / f).string(); };
    const std::string stage_prefix = "case_" + c.name + "/";

    // generate / load
    StageTimer t0;
    const TimeSeries series = load_case_series(c, cfg);
    write_series_csv(series, p("series.csv"));
    manifest.record_stage(stage_prefix + "series", t0.seconds(), {p("series.csv")});
    log << "[" << c.name << "] series ready, T=" << series.length() << "\n";

    // diagnose
    StageTimer t1;
    ArrowConfig arrow_cfg = cfg.arrow;
    arrow_cfg.seed = cfg.seed;
    CaseRunResult out;
    out.arrow = arrow_verdict(series, arrow_cfg);
    write_json_atomic(to_json(out.arrow), p("arrow.json"));
    manifest.record_stage(stage_prefix + "diagnose", t1.seconds(), {p("arrow.json")});
    log << "[" << c.name << "] verdict " << to_string(out.arrow.verdict)
        << " delta_arrow=" << out.arrow.delta_arrow << "\n";

    // ingest
    StageTimer t2;
    const WindowedDataset ds = build_dataset(series, cfg.window);
    save_dataset(ds, p("ds.bin"));
    manifest.record_stage(stage_prefix + "ingest", t2.seconds(),
                          {p("ds.bin"), p("ds.bin.json")});

    // train
    StageTimer t3;
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    const ModelBundle bundle = train_all(ds, train_cfg);
    save_bundle(bundle, p("bundle"));
    manifest.record_stage(stage_prefix + "train", t3.seconds(),
                          {p("bundle/manifest.json")});
    log << "[" << c.name << "] models trained\n";

    // forecast
    StageTimer t4;
    MapConfig map_cfg = cfg.map;
    map_cfg.seed = cfg.seed;
    const std::vector<size_t> window_ids = pick_test_windows(ds, cfg.subsample, cfg.seed);
    std::vector<double> retro_nll;
    double dispersion_mean = 0.0;
    const std::map<std::string, Matrix> preds = forecast_all_methods(
        bundle, ds, window_ids, map_cfg, &retro_nll, &dispersion_mean, dir.string());
    const Matrix truth = detail::gather_rows(ds.Y, window_ids);
    std::vector<std::string> forecast_files;
    for (const auto& [method, yhat] : preds) {
        const std::string fp = p("forecasts_" + method + ".csv");
        write_forecast_csv(fp, window_ids, truth, yhat);
        forecast_files.push_back(fp);
    }
    manifest.record_stage(stage_prefix + "forecast", t4.seconds(), forecast_files);
    log << "[" << c.name << "] forecasts done on " << window_ids.size() << " windows\n";

    // evaluate
    StageTimer t5;
    out.eval = evaluate_case(c.name, preds, truth, &retro_nll, dispersion_mean);
    write_json_atomic(to_json(out.eval), p("eval.json"));
    manifest.record_stage(stage_prefix + "evaluate", t5.seconds(), {p("eval.json")});
    log << "[" << c.name << "] rmse mlp=" << out.eval.methods.at("mlp").rmse
        << " inv-flow=" << out.eval.methods.at("inv-flow").rmse
        << " ratio=" << out.eval.ratio_inv_mlp << "\n";
    return out;
}

inline CaseOutcome outcome_from_reports(const CaseSpec& c, const ArrowReport& arrow,
                                        const EvalReport& eval) {
    CaseOutcome o;
    o.name = c.name;
    o.expected = c.expected;
    o.synthetic = c.synthetic;
    o.observed = arrow.verdict;
    o.delta_arrow = arrow.delta_arrow;
    o.rmse_naive = eval.methods.at("naive").rmse;
    o.rmse_mlp = eval.methods.at("mlp").rmse;
    o.rmse_cvae = eval.methods.at("cvae").rmse;
    o.rmse_inv_flow = eval.methods.at("inv-flow").rmse;
    o.rmse_inv_gauss = eval.methods.at("inv-gauss").rmse;
    o.ratio = eval.ratio_inv_mlp;
    o.dm = eval.dm;
    return o;
}

inline void print_scorecard_table(const std::vector<CaseOutcome>& cases, const Scorecard& sc,
                                  std::ostream& os) {
    os << "Case      Verdict  Naive    MLP      CVAE     InvFlow  Ratio    DMstat    DMp\n";
    for (const CaseOutcome& c : cases) {
        std::ostringstream row;
        row << std::left << std::setw(10) << c.name << std::setw(9) << to_string(c.observed)
            << std::fixed << std::setprecision(3) << std::setw(9) << c.rmse_naive << std::setw(9)
            << c.rmse_mlp << std::setw(9) << c.rmse_cvae << std::setw(9) << c.rmse_inv_flow
            << std::setw(9) << c.ratio << std::showpos << std::setw(10) << c.dm.stat
            << std::noshowpos << std::setprecision(4) << c.dm.p;
        os << row.str() << "\n";
    }
    auto line = [&](const char* id, const PredictionResult& p) {
        os << id << ": " << (p.applicable ? (p.pass ? "PASS" : "FAIL") : "SKIP") << " - "
           << p.criterion << "\n";
    };
    line("P1", sc.p1);
    line("P2", sc.p2);
    line("P3", sc.p3);
    line("P4", sc.p4);
    os << (sc.all_pass ? "all predictions PASS" : "some predictions FAIL") << "\n";
}

// Full reproduction; returns the scorecard and leaves all artifacts in
// cfg.out_dir. Stage failures propagate with the case/stage in the message;
// artifacts written so far stay on disk.
inline Scorecard reproduce(const RunConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    RunManifest manifest(cfg.out_dir, to_json(cfg));
    write_json_atomic(to_json(cfg), (fs::path(cfg.out_dir) / "config.json").string());

    std::vector<CaseOutcome> outcomes;
    for (const CaseSpec& c : cfg.cases) {
        try {
            const CaseRunResult r = run_case(c, cfg, manifest, log);
            outcomes.push_back(outcome_from_reports(c, r.arrow, r.eval));
        } catch (const std::exception& e) {
            throw std::runtime_error("case " + c.name + " failed: " + e.what());
        }
    }
    const Scorecard sc = make_scorecard(outcomes);
    nlohmann::json sj = to_json(sc);
    nlohmann::json case_json = nlohmann::json::array();
    for (const CaseOutcome& o : outcomes)
        case_json.push_back({{"name", o.name},
                             {"expected", to_string(o.expected)},
                             {"observed", to_string(o.observed)},
                             {"delta_arrow", o.delta_arrow},
                             {"rmse",
                              {{"naive", o.rmse_naive},
                               {"mlp", o.rmse_mlp},
                               {"cvae", o.rmse_cvae},
                               {"inv-flow", o.rmse_inv_flow},
                               {"inv-gauss", o.rmse_inv_gauss}}},
                             {"ratio_inv_mlp", o.ratio},
                             {"dm", {{"stat", o.dm.stat}, {"p", o.dm.p}, {"n", o.dm.n}}}});
    sj["cases"] = case_json;
    StageTimer t;
    write_json_atomic(sj, (fs::path(cfg.out_dir) / "scorecard.json").string());
    manifest.record_stage("scorecard", t.seconds(),
                          {(fs::path(cfg.out_dir) / "scorecard.json").string()});
    print_scorecard_table(outcomes, sc, log);
    return sc;
}

// CSV exports of the summary table and per-horizon curves from a completed
// run directory.
inline void export_tables(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const std::string score_path = (fs::path(run_dir) / "scorecard.json").string();
    std::ifstream sin(score_path);
    if (!sin) throw std::runtime_error("incomplete run: missing " + score_path);
    nlohmann::json score;
    sin >> score;

    std::ofstream table((fs::path(run_dir) / "table_results.csv").string());
    table << "case,verdict,naive,mlp,cvae,invflow,ratio,dm_stat,dm_p\n";
    table.precision(17);
    std::ofstream horizons((fs::path(run_dir) / "table_per_horizon.csv").string());
    horizons << "case,method,horizon,rmse\n";
    horizons.precision(17);

    for (const auto& c : score.at("cases")) {
        const std::string name = c.at("name").get<std::string>();
        const std::string eval_path = (fs::path(run_dir) / name / "eval.json").string();
        std::ifstream ein(eval_path);
        if (!ein) throw std::runtime_error("incomplete run: missing eval.json for case " + name);
        nlohmann::json eval;
        ein >> eval;
        table << name << ',' << c.at("observed").get<std::string>() << ','
              << c.at("rmse").at("naive").get<double>() << ','
              << c.at("rmse").at("mlp").get<double>() << ','
              << c.at("rmse").at("cvae").get<double>() << ','
              << c.at("rmse").at("inv-flow").get<double>() << ','
              << c.at("ratio_inv_mlp").get<double>() << ',' << c.at("dm").at("stat").get<double>()
              << ',' << c.at("dm").at("p").get<double>() << '\n';
        for (const auto& [method, ev] : eval.at("methods").items()) {
            const auto ph = ev.at("per_horizon").get<std::vector<double>>();
            for (size_t h = 0; h < ph.size(); ++h)
                horizons << name << ',' << method << ',' << (h + 1) << ',' << ph[h] << '\n';
        }
    }
}

}  // namespace rf
