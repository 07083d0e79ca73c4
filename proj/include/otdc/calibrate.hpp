#pragma once
// Post-processing score calibration: quantile-transport both groups' score
// distributions toward their 1-D Wasserstein barycenter, interpolate with
// geometric repair s_lambda = (1-lambda) s + lambda s_hat, and pick lambda
// by linear search on the DSP objective.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "otdc/fairness.hpp"
#include "otdc/wasserstein1d.hpp"

namespace otdc {

struct CalibrationConfig {
    std::vector<RateMetric> gamma_targets = {RateMetric::TPR, RateMetric::FPR};
    double alpha = -1.0;     // barycenter weight for group a; <0 means the
                             // group-a mass fraction
    int lambda_grid = 101;   // uniform lambda points including 0 and 1
    int quantile_grid = 1000;

    void validate() const {
        if (gamma_targets.empty())
            throw std::invalid_argument("calibration: gamma_targets must be non-empty");
        if (lambda_grid < 2) throw std::invalid_argument("calibration: lambda_grid >= 2");
        if (quantile_grid < 2) throw std::invalid_argument("calibration: quantile_grid >= 2");
        if (alpha >= 0.0 && alpha > 1.0)
            throw std::invalid_argument("calibration: alpha must be in [0,1]");
    }
};

struct MetricPanel {
    double dsp_dp = 0.0;
    double dsp_eo = 0.0;
    double dsp_eod = 0.0;
    double auc = 0.0;
    double xauc_ab = 0.0;
    double xauc_ba = 0.0;
    double delta_xauc = 0.0;
};

inline MetricPanel metric_panel(const ScoreTable& t) {
    MetricPanel p;
    p.dsp_dp = dsp(t, RateMetric::PR);
    p.dsp_eo = dsp(t, RateMetric::TPR);
    p.dsp_eod = dsp_eod(t);
    p.auc = auc(t);
    p.xauc_ab = xauc(t, Group::A, Group::B);
    p.xauc_ba = xauc(t, Group::B, Group::A);
    p.delta_xauc = p.xauc_ab - p.xauc_ba;
    return p;
}

// Per-record barycenter-calibrated scores, aligned with t.records.
struct BarycenterScores {
    std::vector<std::string> ids;
    std::vector<double> values;
};

// s_hat(r) = F_bary^{-1}(F_group(score(r))) with mid-rank CDF positions,
// clamped to [0,1].
inline BarycenterScores barycenter_map(const ScoreTable& t, double alpha,
                                       int quantile_grid) {
    t.validate();
    if (!t.has_group(Group::A) || !t.has_group(Group::B))
        throw InputError("barycenter_map: both groups must be present");
    if (quantile_grid < 2)
        throw std::invalid_argument("barycenter_map: quantile_grid >= 2");

    Weighted1D sa, sb;
    for (const auto& r : t.records)
        (r.group == Group::A ? sa : sb).push_back({r.score, 1.0});
    if (alpha < 0.0)
        alpha = static_cast<double>(sa.size()) / static_cast<double>(t.records.size());
    if (alpha > 1.0) throw std::invalid_argument("barycenter_map: alpha must be in [0,1]");

    const QuantileFunction fa(sa), fb(sb);
    const QuantileFunction fbary(barycenter_1d(sa, sb, alpha, quantile_grid));

    BarycenterScores out;
    out.ids.reserve(t.records.size());
    out.values.reserve(t.records.size());
    for (const auto& r : t.records) {
        const double p = (r.group == Group::A ? fa : fb).cdf_mid(r.score);
        out.ids.push_back(r.id);
        out.values.push_back(std::clamp(fbary(p), 0.0, 1.0));
    }
    return out;
}

// Pointwise convex combination; lambda = 0 returns t unchanged, lambda = 1
// the barycenter-mapped table.
inline ScoreTable geometric_repair(const ScoreTable& t, const BarycenterScores& s_hat,
                                   double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("geometric_repair: lambda must be in [0,1]");
    if (s_hat.ids.size() != t.records.size())
        throw InputError("geometric_repair: calibrated scores not aligned with table");
    ScoreTable out = t;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        if (s_hat.ids[i] != t.records[i].id)
            throw InputError("geometric_repair: id mismatch at row " + std::to_string(i) +
                             " ('" + s_hat.ids[i] + "' vs '" + t.records[i].id + "')");
        const double s = (1.0 - lambda) * t.records[i].score + lambda * s_hat.values[i];
        out.records[i].score = std::clamp(s, 0.0, 1.0);
    }
    return out;
}

struct CalibrationResult {
    double lambda_star = 0.0;
    ScoreTable calibrated;
    MetricPanel before;
    MetricPanel after;
    double objective_before = 0.0;
    double objective_after = 0.0;
    double mean_abs_change = 0.0; // mean |s_lambda* - s|
};

// Evaluates the summed DSP objective over the gamma targets on a uniform
// lambda grid (0 included) and keeps the smallest minimizing lambda.
inline CalibrationResult search_lambda(const ScoreTable& t, const CalibrationConfig& cfg) {
    cfg.validate();
    const BarycenterScores s_hat = barycenter_map(t, cfg.alpha, cfg.quantile_grid);

    auto objective = [&](const ScoreTable& table) {
        double total = 0.0;
        for (RateMetric m : cfg.gamma_targets) total += dsp(table, m);
        return total;
    };

    CalibrationResult res;
    res.before = metric_panel(t);
    res.objective_before = objective(t);

    double best_obj = res.objective_before;
    double best_lambda = 0.0;
    for (int k = 1; k < cfg.lambda_grid; ++k) {
        const double lambda = static_cast<double>(k) / (cfg.lambda_grid - 1);
        const ScoreTable cand = geometric_repair(t, s_hat, lambda);
        const double obj = objective(cand);
        if (obj < best_obj) {
            best_obj = obj;
            best_lambda = lambda;
        }
    }
    res.lambda_star = best_lambda;
    res.calibrated = geometric_repair(t, s_hat, best_lambda);
    res.after = metric_panel(res.calibrated);
    res.objective_after = best_obj;
    double change = 0.0;
    for (std::size_t i = 0; i < t.records.size(); ++i)
        change += std::abs(res.calibrated.records[i].score - t.records[i].score);
    res.mean_abs_change = change / static_cast<double>(t.records.size());
    return res;
}

} // namespace otdc
