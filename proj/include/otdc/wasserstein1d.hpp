#pragma once
// One-dimensional optimal transport through quantile functions: exact
// Wasserstein distances for discrete supports and the two-measure barycenter
// as a pointwise quantile average.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace otdc {

struct WeightedSample {
    double value = 0.0;
    double weight = 0.0;
};

using Weighted1D = std::vector<WeightedSample>;

// Sorted, tie-merged, weight-normalized view of a weighted sample set with a
// right-continuous CDF and its generalized inverse.
class QuantileFunction {
  public:
    explicit QuantileFunction(const Weighted1D& samples) {
        if (samples.empty())
            throw std::invalid_argument("quantile: empty sample set");
        Weighted1D sorted = samples;
        for (const auto& s : sorted)
            if (!(s.weight >= 0.0) || !std::isfinite(s.weight) || !std::isfinite(s.value))
                throw std::invalid_argument("quantile: weights must be finite and >= 0");
        std::sort(sorted.begin(), sorted.end(),
                  [](const WeightedSample& a, const WeightedSample& b) {
                      return a.value < b.value;
                  });
        double total = 0.0;
        for (const auto& s : sorted) total += s.weight;
        if (!(total > 0.0)) throw std::invalid_argument("quantile: total weight must be > 0");
        for (const auto& s : sorted) {
            if (s.weight == 0.0) continue;
            if (!values_.empty() && values_.back() == s.value)
                weights_.back() += s.weight / total; // merge tied support points
            else {
                values_.push_back(s.value);
                weights_.push_back(s.weight / total);
            }
        }
        cum_.resize(weights_.size());
        double c = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            c += weights_[i];
            cum_[i] = c;
        }
        cum_.back() = 1.0;
    }

    // Generalized inverse CDF: smallest support value x with F(x) >= t.
    double operator()(double t) const {
        if (t <= 0.0) return values_.front();
        if (t >= 1.0) return values_.back();
        const auto it = std::lower_bound(cum_.begin(), cum_.end(), t);
        return values_[static_cast<std::size_t>(it - cum_.begin())];
    }

    // Mid-rank CDF position P(X < x) + 0.5 P(X = x); avoids collapsing the
    // top-ranked records onto F = 1.
    double cdf_mid(double x) const {
        const auto it = std::lower_bound(values_.begin(), values_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - values_.begin());
        const double below = i == 0 ? 0.0 : cum_[i - 1];
        if (i < values_.size() && values_[i] == x) return below + 0.5 * weights_[i];
        return below;
    }

    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& cum() const { return cum_; }

  private:
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> cum_;
};

// W_p(p, q) = (integral over t of |F_p^{-1}(t) - F_q^{-1}(t)|^p)^(1/p),
// computed exactly for piecewise-constant quantile functions.
inline double wasserstein_1d(const Weighted1D& p, const Weighted1D& q, double order = 1.0) {
    if (!(order >= 1.0)) throw std::invalid_argument("wasserstein_1d: order must be >= 1");
    const QuantileFunction fp(p), fq(q);
    const auto &xp = fp.values(), &cp = fp.cum();
    const auto &xq = fq.values(), &cq = fq.cum();
    std::size_t i = 0, j = 0;
    double t = 0.0, total = 0.0;
    while (i < xp.size() && j < xq.size()) {
        const double next_t = std::min(cp[i], cq[j]);
        if (next_t > t) total += (next_t - t) * std::pow(std::abs(xp[i] - xq[j]), order);
        t = next_t;
        if (cp[i] <= next_t) ++i;
        if (cq[j] <= next_t) ++j;
    }
    return std::pow(total, 1.0 / order);
}

// Quantile-average barycenter sampled at `grid` midpoint levels; exact for
// order-2 OT on the line. alpha weights the first measure.
inline Weighted1D barycenter_1d(const Weighted1D& p, const Weighted1D& q, double alpha,
                                int grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("barycenter_1d: alpha must be in [0,1]");
    if (grid < 2) throw std::invalid_argument("barycenter_1d: grid must be >= 2");
    const QuantileFunction fp(p), fq(q);
    Weighted1D out;
    out.reserve(static_cast<std::size_t>(grid));
    const double w = 1.0 / grid;
    for (int k = 0; k < grid; ++k) {
        const double t = (k + 0.5) / grid;
        out.push_back({alpha * fp(t) + (1.0 - alpha) * fq(t), w});
    }
    return out;
}

} // namespace otdc
