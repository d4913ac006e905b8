// retroforecast: command-line front end for the retrodictive forecasting
// toolkit. Subcommands mirror the pipeline stages; `reproduce` chains them
// all per case and emits the falsifiable-prediction scorecard.
//
// Exit codes: 0 success, 10 NO-GO verdict (diagnose only), 1 error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "retroforecast/arrow.hpp"
#include "retroforecast/eval.hpp"
#include "retroforecast/ingest.hpp"
#include "retroforecast/mapinfer.hpp"
#include "retroforecast/models.hpp"
#include "retroforecast/pipeline.hpp"
#include "retroforecast/procgen.hpp"
#include "retroforecast/series.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoGo = 10;

rf::TimeSeries series_from_csv(const std::string& path) {
    const rf::LoadedSeries loaded = rf::load_csv(path, "value");
    return loaded.series;
}

// --data accepts either a series CSV or a dataset blob; datasets carry the
// preprocessed source series for exactly this purpose.
std::vector<double> values_for_diagnosis(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
        return series_from_csv(path).values;
    return rf::load_dataset(path).series;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrodictive time-series forecasting toolkit"};
    app.require_subcommand(1);

    // ---- generate
    auto* gen = app.add_subcommand("generate", "emit a synthetic benchmark series as CSV");
    std::string gen_case = "A";
    size_t gen_T = 20000;
    uint64_t gen_seed = 42;
    std::string gen_out = "series.csv";
    gen->add_option("--case", gen_case, "process case: A, B, C or D")->required();
    gen->add_option("--T", gen_T, "series length");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // ---- ingest
    auto* ing = app.add_subcommand("ingest", "preprocess a CSV series and build a dataset");
    std::string ing_csv, ing_value_col = "value", ing_ts_col, ing_out = "ds.bin";
    bool ing_log = false;
    double ing_lat = 0.0, ing_lon = 0.0, ing_zenith = 80.0;
    bool ing_daylight = false;
    size_t ing_n = 32, ing_m = 16, ing_stride = 1;
    ing->add_option("--csv", ing_csv, "input CSV")->required();
    ing->add_option("--value-col", ing_value_col, "value column name");
    ing->add_option("--timestamp-col", ing_ts_col, "timestamp column (for the daylight filter)");
    ing->add_flag("--log", ing_log, "log-transform values (clip below at 0.1)");
    ing->add_flag("--daylight", ing_daylight, "drop samples with solar zenith >= --zenith-max");
    ing->add_option("--lat", ing_lat, "latitude in degrees (daylight filter)");
    ing->add_option("--lon", ing_lon, "longitude in degrees (daylight filter)");
    ing->add_option("--zenith-max", ing_zenith, "zenith threshold in degrees");
    ing->add_option("--past-len", ing_n, "past window length n");
    ing->add_option("--horizon", ing_m, "forecast horizon m");
    ing->add_option("--stride", ing_stride, "window stride");
    ing->add_option("--out", ing_out, "output dataset path")->required();

    // ---- diagnose
    auto* diag = app.add_subcommand("diagnose", "arrow-of-time GO/NO-GO diagnostic");
    std::string diag_data, diag_out = "arrow.json";
    uint64_t diag_seed = 42;
    size_t diag_nperm = 500;
    diag->add_option("--data", diag_data, "series CSV or dataset blob")->required();
    diag->add_option("--out", diag_out, "report path");
    diag->add_option("--seed", diag_seed, "RNG seed");
    diag->add_option("--n-perm", diag_nperm, "permutation count");

    // ---- train
    auto* train = app.add_subcommand("train", "train all method backbones on a dataset");
    std::string train_data, train_out = "bundle";
    uint64_t train_seed = 42;
    size_t train_epochs = 80;
    double train_lr = 2e-3;
    std::string train_methods = "all";
    train->add_option("--data", train_data, "dataset blob")->required();
    train->add_option("--methods", train_methods, "only 'all' is supported");
    train->add_option("--seed", train_seed, "RNG seed");
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--lr", train_lr, "Adam learning rate");
    train->add_option("--out", train_out, "bundle directory")->required();

    // ---- forecast
    auto* fc = app.add_subcommand("forecast", "run one method over test windows");
    std::string fc_bundle, fc_data, fc_method = "inv-flow", fc_out = "forecasts.csv";
    std::string fc_split = "test";
    size_t fc_subsample = 256;
    uint64_t fc_seed = 42;
    fc->add_option("--bundle", fc_bundle, "trained bundle directory")->required();
    fc->add_option("--data", fc_data, "dataset blob")->required();
    fc->add_option("--split", fc_split, "only 'test' is supported");
    fc->add_option("--subsample", fc_subsample, "test windows to evaluate (0 = all)");
    fc->add_option("--method", fc_method, "naive|mlp|cvae|inv-flow|inv-gauss");
    fc->add_option("--seed", fc_seed, "RNG seed");
    fc->add_option("--out", fc_out, "forecast CSV path")->required();

    // ---- evaluate
    auto* ev = app.add_subcommand("evaluate", "aggregate forecast CSVs into metrics");
    std::vector<std::string> ev_forecasts;
    std::string ev_out = "eval.json", ev_case = "case", ev_map_json;
    ev->add_option("--forecasts", ev_forecasts, "forecast CSVs, one per method")->required();
    ev->add_option("--case", ev_case, "case label for the report");
    ev->add_option("--map-json", ev_map_json, "map_inv-flow.json sidecar for RetroNLL metrics");
    ev->add_option("--out", ev_out, "report path");

    // ---- scorecard
    auto* sc = app.add_subcommand("scorecard", "P1-P4 scorecard from a completed run directory");
    std::string sc_runs, sc_out = "scorecard.json";
    sc->add_option("--runs", sc_runs, "run directory produced by reproduce")->required();
    sc->add_option("--out", sc_out, "scorecard path");

    // ---- reproduce
    auto* rep = app.add_subcommand("reproduce", "full pipeline over the configured case set");
    std::string rep_config;
    std::string rep_out;
    std::optional<uint64_t> rep_seed;
    std::optional<size_t> rep_subsample;
    bool rep_export = false;
    rep->add_option("--config", rep_config, "RunConfig JSON (defaults to synthetic A-D)");
    rep->add_option("--out", rep_out, "run directory override");
    rep->add_option("--seed", rep_seed, "seed override");
    rep->add_option("--subsample", rep_subsample, "test subsample override (0 = full)");
    rep->add_flag("--export-tables", rep_export, "also write summary CSV tables");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            if (gen_case.size() != 1 || gen_case.find_first_of("ABCD") != 0)
                throw std::invalid_argument("--case must be one of A, B, C, D");
            const rf::TimeSeries s = rf::generate_case(gen_case[0], gen_T, gen_seed);
            rf::write_series_csv(s, gen_out);
            std::cout << "wrote " << gen_out << " (T=" << s.length() << ")\n";
            return kExitOk;
        }

        if (*ing) {
            std::optional<std::string> tcol;
            if (!ing_ts_col.empty()) tcol = ing_ts_col;
            const rf::LoadedSeries loaded = rf::load_csv(ing_csv, ing_value_col, tcol);
            rf::PreprocessSpec spec;
            spec.log_transform = ing_log;
            if (ing_daylight) spec.daylight = rf::DaylightFilter{ing_lat, ing_lon, ing_zenith};
            const rf::TimeSeries pre = rf::preprocess(loaded.series, spec, loaded.timestamps);
            const rf::WindowedDataset ds =
                rf::build_dataset(pre, rf::WindowConfig{ing_n, ing_m, ing_stride});
            rf::save_dataset(ds, ing_out);
            std::cout << "wrote " << ing_out << " (" << ds.n_windows() << " windows: "
                      << ds.n_train() << "/" << ds.n_val() << "/" << ds.n_test() << ")\n";
            return kExitOk;
        }

        if (*diag) {
            rf::ArrowConfig cfg;
            cfg.seed = diag_seed;
            cfg.n_perm = diag_nperm;
            const rf::ArrowReport report = rf::arrow_verdict(values_for_diagnosis(diag_data), cfg);
            rf::write_json_atomic(rf::to_json(report), diag_out);
            std::cout << to_string(report.verdict) << " delta_arrow=" << report.delta_arrow
                      << " (report: " << diag_out << ")\n";
            return report.verdict == rf::Verdict::GO ? kExitOk : kExitNoGo;
        }

        if (*train) {
            if (train_methods != "all")
                throw std::invalid_argument("--methods: only 'all' is supported");
            const rf::WindowedDataset ds = rf::load_dataset(train_data);
            rf::TrainConfig cfg;
            cfg.seed = train_seed;
            cfg.epochs = train_epochs;
            cfg.lr = train_lr;
            const rf::ModelBundle bundle = rf::train_all(ds, cfg);
            rf::save_bundle(bundle, train_out);
            std::cout << "wrote bundle to " << train_out << "\n";
            return kExitOk;
        }

        if (*fc) {
            if (fc_split != "test")
                throw std::invalid_argument("--split: only 'test' is supported");
            const rf::WindowedDataset ds = rf::load_dataset(fc_data);
            const rf::ModelBundle bundle = rf::load_bundle(fc_bundle);
            const std::vector<size_t> ids = rf::pick_test_windows(ds, fc_subsample, fc_seed);
            const rf::Matrix X = rf::detail::gather_rows(ds.X, ids);
            const rf::Matrix truth = rf::detail::gather_rows(ds.Y, ids);
            rf::Matrix yhat;
            rf::MapConfig map_cfg;
            map_cfg.seed = fc_seed;
            if (fc_method == "naive") {
                yhat = rf::naive_predict(bundle.naive, X.rows());
            } else if (fc_method == "mlp") {
                yhat = rf::mlp_predict(bundle.mlp, X);
            } else if (fc_method == "cvae") {
                yhat = rf::forward_cvae_predict(bundle.fcvae, X, ids, fc_seed);
            } else if (fc_method == "inv-flow" || fc_method == "inv-gauss") {
                const rf::MapPrior prior =
                    fc_method == "inv-flow" ? rf::MapPrior::flow : rf::MapPrior::gauss;
                const rf::Matrix fic =
                    rf::forward_cvae_predict(bundle.fcvae, X, ids, fc_seed);
                const std::vector<rf::ForecastResult> res = rf::map_optimize_batch(
                    bundle.icvae, &bundle.flow, prior, X, ids, &fic, map_cfg);
                yhat = rf::Matrix(res.size(), bundle.icvae.y_dim);
                nlohmann::json windows = nlohmann::json::array();
                for (size_t i = 0; i < res.size(); ++i) {
                    for (size_t j = 0; j < yhat.cols(); ++j) yhat(i, j) = res[i].y_hat[j];
                    windows.push_back({{"window_index", ids[i]},
                                       {"map_losses", res[i].map_losses_all},
                                       {"map_loss_best", res[i].map_loss_best},
                                       {"retro_nll", res[i].retro_nll},
                                       {"dispersion", res[i].dispersion},
                                       {"used_fic", res[i].used_fic}});
                }
                rf::write_json_atomic(nlohmann::json{{"method", fc_method}, {"windows", windows}},
                                      fc_out + ".map.json");
            } else {
                throw std::invalid_argument("unknown method: " + fc_method);
            }
            rf::write_forecast_csv(fc_out, ids, truth, yhat);
            std::cout << "wrote " << fc_out << " (" << ids.size() << " windows)\n";
            return kExitOk;
        }

        if (*ev) {
            std::map<std::string, rf::Matrix> preds;
            rf::Matrix truth;
            for (const std::string& path : ev_forecasts) {
                const rf::ForecastTable t = rf::read_forecast_csv(path);
                // method name from forecasts_<method>.csv, else the stem
                std::string stem = fs::path(path).stem().string();
                const std::string prefix = "forecasts_";
                if (stem.rfind(prefix, 0) == 0) stem = stem.substr(prefix.size());
                preds[stem] = t.y_hat;
                truth = t.y_true;
            }
            std::vector<double> retro_nll;
            std::vector<double>* retro_ptr = nullptr;
            if (!ev_map_json.empty()) {
                std::ifstream mj(ev_map_json);
                if (!mj) throw std::runtime_error("missing map json: " + ev_map_json);
                nlohmann::json doc;
                mj >> doc;
                for (const auto& w : doc.at("windows"))
                    retro_nll.push_back(w.at("retro_nll").get<double>());
                retro_ptr = &retro_nll;
            }
            const rf::EvalReport report = rf::evaluate_case(ev_case, preds, truth, retro_ptr);
            rf::write_json_atomic(rf::to_json(report), ev_out);
            std::cout << "wrote " << ev_out << "\n";
            return kExitOk;
        }

        if (*sc) {
            const std::string cfg_path = (fs::path(sc_runs) / "config.json").string();
            std::ifstream cin_(cfg_path);
            if (!cin_) throw std::runtime_error("missing run config: " + cfg_path);
            nlohmann::json cfg_json;
            cin_ >> cfg_json;
            const rf::RunConfig cfg = rf::run_config_from_json(cfg_json);
            std::vector<rf::CaseOutcome> outcomes;
            for (const rf::CaseSpec& c : cfg.cases) {
                const fs::path dir = fs::path(sc_runs) / c.name;
                std::ifstream ain((dir / "arrow.json").string());
                std::ifstream ein((dir / "eval.json").string());
                if (!ain || !ein)
                    throw std::runtime_error("missing reports for case " + c.name + " in " +
                                             sc_runs);
                nlohmann::json aj, ej;
                ain >> aj;
                ein >> ej;
                rf::CaseOutcome o;
                o.name = c.name;
                o.expected = c.expected;
                o.synthetic = c.synthetic;
                o.observed = aj.at("verdict").get<std::string>() == "GO" ? rf::Verdict::GO
                                                                         : rf::Verdict::NOGO;
                o.delta_arrow = aj.at("delta_arrow").get<double>();
                o.rmse_naive = ej.at("methods").at("naive").at("rmse").get<double>();
                o.rmse_mlp = ej.at("methods").at("mlp").at("rmse").get<double>();
                o.rmse_cvae = ej.at("methods").at("cvae").at("rmse").get<double>();
                o.rmse_inv_flow = ej.at("methods").at("inv-flow").at("rmse").get<double>();
                o.rmse_inv_gauss = ej.at("methods").at("inv-gauss").at("rmse").get<double>();
                o.ratio = ej.at("ratio_inv_mlp").get<double>();
                o.dm.stat = ej.at("dm").at("stat").get<double>();
                o.dm.p = ej.at("dm").at("p").get<double>();
                o.dm.n = ej.at("dm").at("n").get<size_t>();
                outcomes.push_back(o);
            }
            const rf::Scorecard card = rf::make_scorecard(outcomes);
            rf::write_json_atomic(rf::to_json(card), sc_out);
            rf::print_scorecard_table(outcomes, card, std::cout);
            return kExitOk;
        }

        if (*rep) {
            rf::RunConfig cfg;
            if (!rep_config.empty()) {
                std::ifstream in(rep_config);
                if (!in) throw std::runtime_error("missing config: " + rep_config);
                nlohmann::json j;
                in >> j;
                cfg = rf::run_config_from_json(j);
            } else {
                cfg = rf::RunConfig::synthetic_default();
            }
            if (!rep_out.empty()) cfg.out_dir = rep_out;
            if (rep_seed) {
                cfg.seed = *rep_seed;
                cfg.train.seed = *rep_seed;
                cfg.arrow.seed = *rep_seed;
                cfg.map.seed = *rep_seed;
            }
            if (rep_subsample) cfg.subsample = *rep_subsample;
            rf::reproduce(cfg, std::cout);
            if (rep_export) rf::export_tables(cfg.out_dir);
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
