#pragma once
// Bias metrics over scored, group-labeled, ground-truth-labeled records:
// threshold-dependent gaps (DP, EO, EOD), their threshold-independent
// expectations (DSP), and ranking metrics (AUC, xAUC).
//
// Threshold convention is score >= tau throughout. Rate curves are exact
// empirical step functions and DSP integrals are computed exactly on the
// merged breakpoint grid.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "otdc/schema.hpp"

namespace otdc {

enum class Group : int { A = 0, B = 1 };

inline Group parse_group(const std::string& s) {
    if (s == "a") return Group::A;
    if (s == "b") return Group::B;
    throw InputError("group must be 'a' or 'b', got '" + s + "'");
}

inline const char* group_name(Group g) { return g == Group::A ? "a" : "b"; }

struct ScoreRecord {
    std::string id;
    double score = 0.0; // in [0, 1]
    Group group = Group::A;
    int label = 0; // 0 or 1
};

struct ScoreTable {
    std::vector<ScoreRecord> records;

    void validate() const {
        if (records.empty()) throw InputError("score table: empty");
        for (const auto& r : records) {
            if (!(r.score >= 0.0 && r.score <= 1.0))
                throw InputError("score table: score out of [0,1] for id '" + r.id + "'");
            if (r.label != 0 && r.label != 1)
                throw InputError("score table: label must be 0 or 1 for id '" + r.id + "'");
        }
    }

    bool has_group(Group g) const {
        for (const auto& r : records)
            if (r.group == g) return true;
        return false;
    }
};

enum class RateMetric { PR, TPR, FPR };

inline const char* rate_metric_name(RateMetric m) {
    switch (m) {
        case RateMetric::PR: return "PR";
        case RateMetric::TPR: return "TPR";
        default: return "FPR";
    }
}

inline RateMetric parse_rate_metric(const std::string& s) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(c)));
    if (t == "pr") return RateMetric::PR;
    if (t == "tpr") return RateMetric::TPR;
    if (t == "fpr") return RateMetric::FPR;
    throw InputError("unknown rate metric '" + s + "' (expected pr, tpr or fpr)");
}

// gamma(tau) = P(score >= tau | scope), a left-continuous step function.
// values[k] is gamma on (breakpoints[k-1], breakpoints[k]]; gamma = 0 right
// of the last breakpoint.
struct MetricCurve {
    RateMetric metric = RateMetric::PR;
    Group group = Group::A;
    std::vector<double> breakpoints; // sorted distinct scores in scope
    std::vector<double> values;

    double at(double tau) const {
        if (breakpoints.empty()) throw std::invalid_argument("metric curve: empty");
        if (tau <= breakpoints.front()) return values.front();
        const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), tau);
        if (it == breakpoints.end()) return 0.0;
        return values[static_cast<std::size_t>(it - breakpoints.begin())];
    }
};

namespace detail {

inline std::vector<double> scores_in_scope(const ScoreTable& t, RateMetric metric, Group g) {
    std::vector<double> s;
    for (const auto& r : t.records) {
        if (r.group != g) continue;
        if (metric == RateMetric::TPR && r.label != 1) continue;
        if (metric == RateMetric::FPR && r.label != 0) continue;
        s.push_back(r.score);
    }
    return s;
}

} // namespace detail

inline MetricCurve metric_curve(const ScoreTable& t, RateMetric metric, Group g) {
    t.validate();
    if (!t.has_group(g))
        throw InputError(std::string("metric curve: group '") + group_name(g) + "' missing");
    auto scores = detail::scores_in_scope(t, metric, g);
    if (scores.empty())
        throw InputError(std::string("metric curve: no ") +
                         (metric == RateMetric::TPR ? "positive" : "negative") +
                         " records for group '" + group_name(g) + "'");
    std::sort(scores.begin(), scores.end());
    MetricCurve curve;
    curve.metric = metric;
    curve.group = g;
    const double n = static_cast<double>(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i == 0 || scores[i] != scores[i - 1]) {
            curve.breakpoints.push_back(scores[i]);
            // P(score >= tau) for tau just at/below scores[i]
            curve.values.push_back(static_cast<double>(scores.size() - i) / n);
        }
    }
    return curve;
}

// Exact integral over tau in [0,1] of |gamma_a - gamma_b|.
inline double dsp(const ScoreTable& t, RateMetric metric) {
    const MetricCurve a = metric_curve(t, metric, Group::A);
    const MetricCurve b = metric_curve(t, metric, Group::B);
    std::vector<double> cuts = {0.0, 1.0};
    cuts.insert(cuts.end(), a.breakpoints.begin(), a.breakpoints.end());
    cuts.insert(cuts.end(), b.breakpoints.begin(), b.breakpoints.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k], hi = cuts[k + 1];
        if (hi <= lo) continue;
        const double mid = lo + (hi - lo) / 2.0; // curves are constant on (lo, hi)
        total += (hi - lo) * std::abs(a.at(mid) - b.at(mid));
    }
    return total;
}

// E_tau max(|dTPR|, |dFPR|): the EOD gap integrated exactly across thresholds.
inline double dsp_eod(const ScoreTable& t) {
    const MetricCurve ta = metric_curve(t, RateMetric::TPR, Group::A);
    const MetricCurve tb = metric_curve(t, RateMetric::TPR, Group::B);
    const MetricCurve fa = metric_curve(t, RateMetric::FPR, Group::A);
    const MetricCurve fb = metric_curve(t, RateMetric::FPR, Group::B);
    std::vector<double> cuts = {0.0, 1.0};
    for (const auto* c : {&ta, &tb, &fa, &fb})
        cuts.insert(cuts.end(), c->breakpoints.begin(), c->breakpoints.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k], hi = cuts[k + 1];
        if (hi <= lo) continue;
        const double mid = lo + (hi - lo) / 2.0;
        total += (hi - lo) * std::max(std::abs(ta.at(mid) - tb.at(mid)),
                                      std::abs(fa.at(mid) - fb.at(mid)));
    }
    return total;
}

enum class BiasKind { DP, EO, EOD };

// Absolute between-group gap at a single threshold.
inline double threshold_bias(const ScoreTable& t, double tau, BiasKind kind) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw std::invalid_argument("threshold_bias: tau must be in [0,1]");
    auto gap = [&](RateMetric m) {
        return std::abs(metric_curve(t, m, Group::A).at(tau) -
                        metric_curve(t, m, Group::B).at(tau));
    };
    switch (kind) {
        case BiasKind::DP: return gap(RateMetric::PR);
        case BiasKind::EO: return gap(RateMetric::TPR);
        default: return std::max(gap(RateMetric::TPR), gap(RateMetric::FPR));
    }
}

namespace detail {

// Mann-Whitney statistic P(pos > neg) + 0.5 P(tie) via average ranks.
inline double rank_auc(std::vector<std::pair<double, int>>& scored) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& [s, l] : scored) (l == 1 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw InputError("auc: needs at least one positive and one negative");
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < scored.size()) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (scored[k].second == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) *
                                        (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

} // namespace detail

// AUC over the whole table or within one group.
inline double auc(const ScoreTable& t) {
    t.validate();
    std::vector<std::pair<double, int>> scored;
    for (const auto& r : t.records) scored.emplace_back(r.score, r.label);
    return detail::rank_auc(scored);
}

inline double auc(const ScoreTable& t, Group g) {
    t.validate();
    std::vector<std::pair<double, int>> scored;
    for (const auto& r : t.records)
        if (r.group == g) scored.emplace_back(r.score, r.label);
    if (scored.empty())
        throw InputError(std::string("auc: group '") + group_name(g) + "' missing");
    return detail::rank_auc(scored);
}

// P(positive of pos_group outranks negative of neg_group), ties counted 1/2.
inline double xauc(const ScoreTable& t, Group pos_group, Group neg_group) {
    t.validate();
    std::vector<std::pair<double, int>> scored;
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& r : t.records) {
        if (r.group == pos_group && r.label == 1) {
            scored.emplace_back(r.score, 1);
            ++n_pos;
        } else if (r.group == neg_group && r.label == 0) {
            scored.emplace_back(r.score, 0);
            ++n_neg;
        }
    }
    if (n_pos == 0)
        throw InputError(std::string("xauc: no positives in group '") +
                         group_name(pos_group) + "'");
    if (n_neg == 0)
        throw InputError(std::string("xauc: no negatives in group '") +
                         group_name(neg_group) + "'");
    return detail::rank_auc(scored);
}

inline double delta_xauc(const ScoreTable& t) {
    return xauc(t, Group::A, Group::B) - xauc(t, Group::B, Group::A);
}

} // namespace otdc
