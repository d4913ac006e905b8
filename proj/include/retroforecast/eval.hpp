// Per-case evaluation reports and the automated falsifiable-prediction
// scorecard (P1-P4). Thresholds live in data, not code, and are echoed in
// the emitted JSON.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arrow.hpp"
#include "matrix.hpp"
#include "stats.hpp"

namespace rf {

struct MethodEval {
    double rmse = 0.0;
    std::vector<double> per_horizon;
};

struct EvalReport {
    std::string case_name;
    std::map<std::string, MethodEval> methods;  // naive, mlp, cvae, inv-flow, inv-gauss
    double ratio_inv_mlp = std::numeric_limits<double>::quiet_NaN();
    DmResult dm;            // inv-flow vs mlp, per-window MSE losses
    CorrResult retro_corr;  // retro_nll vs per-window RMSE of inv-flow
    size_t sample_count = 0;
    double dispersion_mean = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<double> per_window_mse(const Matrix& pred, const Matrix& truth) {
    require_shape(pred, truth, "per_window_mse");
    std::vector<double> out(pred.rows(), 0.0);
    for (size_t i = 0; i < pred.rows(); ++i) {
        double s = 0.0;
        for (size_t j = 0; j < pred.cols(); ++j) {
            const double e = pred(i, j) - truth(i, j);
            s += e * e;
        }
        out[i] = s / static_cast<double>(pred.cols());
    }
    return out;
}

inline EvalReport evaluate_case(const std::string& case_name,
                                const std::map<std::string, Matrix>& predictions,
                                const Matrix& truth,
                                const std::vector<double>* retro_nll = nullptr,
                                std::optional<double> dispersion_mean = std::nullopt) {
    EvalReport report;
    report.case_name = case_name;
    report.sample_count = truth.rows();
    for (const auto& [name, pred] : predictions) {
        const RmseResult r = rmse(pred, truth);
        report.methods[name] = MethodEval{r.global, r.per_horizon};
    }
    const auto inv = predictions.find("inv-flow");
    const auto mlp = predictions.find("mlp");
    if (inv != predictions.end() && mlp != predictions.end()) {
        report.ratio_inv_mlp = report.methods.at("inv-flow").rmse / report.methods.at("mlp").rmse;
        report.dm = dm_test(per_window_mse(inv->second, truth),
                            per_window_mse(mlp->second, truth), truth.cols());
        if (retro_nll) {
            std::vector<double> window_rmse = per_window_mse(inv->second, truth);
            for (double& v : window_rmse) v = std::sqrt(v);
            report.retro_corr = pearson(*retro_nll, window_rmse);
        }
    }
    if (dispersion_mean) report.dispersion_mean = *dispersion_mean;
    return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json methods;
    for (const auto& [name, ev] : r.methods)
        methods[name] = {{"rmse", ev.rmse}, {"per_horizon", ev.per_horizon}};
    nlohmann::json j{{"case", r.case_name},
                     {"methods", methods},
                     {"sample_count", r.sample_count}};
    if (std::isfinite(r.ratio_inv_mlp)) {
        j["ratio_inv_mlp"] = r.ratio_inv_mlp;
        j["dm"] = {{"stat", r.dm.stat},
                   {"p", r.dm.p},
                   {"n", r.dm.n},
                   {"degenerate", r.dm.degenerate}};
    }
    if (r.retro_corr.n > 0)
        j["retro_nll_rmse_corr"] = {{"r", r.retro_corr.r},
                                    {"p", r.retro_corr.p},
                                    {"n", r.retro_corr.n},
                                    {"undefined", r.retro_corr.undefined}};
    if (std::isfinite(r.dispersion_mean)) j["dispersion_mean"] = r.dispersion_mean;
    return j;
}

// ----------------------------------------------------------------- scorecard

struct CaseOutcome {
    std::string name;
    Verdict expected = Verdict::NOGO;
    Verdict observed = Verdict::NOGO;
    bool synthetic = true;
    double delta_arrow = 0.0;
    double rmse_naive = 0.0, rmse_mlp = 0.0, rmse_cvae = 0.0;
    double rmse_inv_flow = 0.0, rmse_inv_gauss = 0.0;
    double ratio = 0.0;  // inv-flow / mlp
    DmResult dm;
};

struct ScorecardThresholds {
    double alpha_reference = 0.05;  // informational; the verdict already embeds it
    double p3_min_ratio = 0.95;
    double p4_max_ratio = 1.05;
};

struct PredictionResult {
    bool pass = false;
    bool applicable = false;  // false when no case in the run exercises it
    std::string criterion;
    nlohmann::json observed;
};

struct Scorecard {
    PredictionResult p1, p2, p3, p4;
    bool all_pass = false;
    ScorecardThresholds thresholds;
};

inline Scorecard make_scorecard(const std::vector<CaseOutcome>& cases,
                                const ScorecardThresholds& th = {}) {
    Scorecard sc;
    sc.thresholds = th;

    sc.p1.criterion = "arrow-of-time verdict matches the expected class for every case";
    sc.p1.observed = nlohmann::json::object();
    sc.p1.pass = true;
    sc.p1.applicable = !cases.empty();
    for (const CaseOutcome& c : cases) {
        sc.p1.observed[c.name] = {{"expected", to_string(c.expected)},
                                  {"observed", to_string(c.observed)},
                                  {"delta_arrow", c.delta_arrow}};
        if (c.expected != c.observed) sc.p1.pass = false;
    }

    sc.p2.criterion = "flow prior beats the N(0,I) prior (RMSE) on GO synthetic cases";
    sc.p2.observed = nlohmann::json::object();
    sc.p2.pass = true;
    for (const CaseOutcome& c : cases) {
        if (!c.synthetic || c.expected != Verdict::GO) continue;
        sc.p2.applicable = true;
        sc.p2.observed[c.name] = {{"rmse_flow", c.rmse_inv_flow},
                                  {"rmse_gauss", c.rmse_inv_gauss}};
        if (!(c.rmse_inv_flow < c.rmse_inv_gauss)) sc.p2.pass = false;
    }

    sc.p3.criterion = "inverse/MLP RMSE ratio >= " + std::to_string(th.p3_min_ratio) +
                      " on NO-GO cases (no spurious directional advantage)";
    sc.p3.observed = nlohmann::json::object();
    sc.p3.pass = true;
    for (const CaseOutcome& c : cases) {
        if (c.expected != Verdict::NOGO) continue;
        sc.p3.applicable = true;
        sc.p3.observed[c.name] = {{"ratio", c.ratio}};
        if (!(c.ratio >= th.p3_min_ratio)) sc.p3.pass = false;
    }

    sc.p4.criterion = "inverse/MLP RMSE ratio <= " + std::to_string(th.p4_max_ratio) +
                      " on GO cases (inverse MAP competitive)";
    sc.p4.observed = nlohmann::json::object();
    sc.p4.pass = true;
    for (const CaseOutcome& c : cases) {
        if (c.expected != Verdict::GO) continue;
        sc.p4.applicable = true;
        sc.p4.observed[c.name] = {{"ratio", c.ratio},
                                  {"dm_stat", c.dm.stat},
                                  {"dm_p", c.dm.p}};
        if (!(c.ratio <= th.p4_max_ratio)) sc.p4.pass = false;
    }

    sc.all_pass = sc.p1.pass && sc.p2.pass && sc.p3.pass && sc.p4.pass;
    return sc;
}

inline nlohmann::json to_json(const Scorecard& sc) {
    auto pred = [](const PredictionResult& p) {
        return nlohmann::json{{"pass", p.pass},
                              {"applicable", p.applicable},
                              {"criterion", p.criterion},
                              {"observed", p.observed}};
    };
    return {{"thresholds",
             {{"p3_min_ratio", sc.thresholds.p3_min_ratio},
              {"p4_max_ratio", sc.thresholds.p4_max_ratio},
              {"alpha_reference", sc.thresholds.alpha_reference}}},
            {"P1", pred(sc.p1)},
            {"P2", pred(sc.p2)},
            {"P3", pred(sc.p3)},
            {"P4", pred(sc.p4)},
            {"all_pass", sc.all_pass}};
}

}  // namespace rf
