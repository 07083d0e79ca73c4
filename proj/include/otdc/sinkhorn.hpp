#pragma once
// Entropic optimal transport by diagonal matrix scaling on the Gibbs kernel
// K = exp(-C/eps). Runs in the linear domain while safe and restarts in the
// log domain when the kernel or a scaling vector under/overflows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "otdc/transport.hpp"

namespace otdc {

struct SinkhornConfig {
    double epsilon = 0.01; // entropic regularization weight, > 0
    int max_iter = 10000;
    double tol = 1e-9;      // L1 row+column marginal violation threshold
    bool log_domain = false; // force log-domain scaling from the start

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be > 0");
        if (!(tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be > 0");
        if (max_iter <= 0) throw std::invalid_argument("sinkhorn: max_iter must be > 0");
    }
};

enum class SolveStatus { Converged, MaxIterations };

struct SinkhornResult {
    TransportPlan plan;
    int iterations = 0;
    double residual = 0.0; // L1 row+column marginal violation of the plan
    SolveStatus status = SolveStatus::Converged;
    bool used_log_domain = false;
};

namespace detail {

inline double logsumexp(const std::vector<double>& terms) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double t : terms) mx = std::max(mx, t);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

struct SupportIndex {
    std::vector<std::size_t> rows, cols;
};

inline SupportIndex positive_support(const std::vector<double>& mu,
                                     const std::vector<double>& nu) {
    SupportIndex s;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu[i] > 0.0) s.rows.push_back(i);
    for (std::size_t j = 0; j < nu.size(); ++j)
        if (nu[j] > 0.0) s.cols.push_back(j);
    return s;
}

} // namespace detail

// Standard Sinkhorn iteration: alternating row and column scaling toward the
// fixed marginals (mu, nu). Rows are exact after every row update, so the
// reported residual is the column violation at that point.
inline SinkhornResult sinkhorn(const std::vector<double>& mu, const std::vector<double>& nu,
                               const CostMatrix& cost, const SinkhornConfig& cfg) {
    cfg.validate();
    cost.validate();
    if (cost.rows != mu.size() || cost.cols != nu.size())
        throw std::invalid_argument("sinkhorn: cost dimensions mismatch");
    double su = 0.0, sv = 0.0;
    for (double x : mu) su += x;
    for (double x : nu) sv += x;
    if (std::abs(su - sv) > 1e-9)
        throw std::invalid_argument("sinkhorn: marginal totals differ by more than 1e-9");

    const auto sup = detail::positive_support(mu, nu);
    const std::size_t m = sup.rows.size(), n = sup.cols.size();
    if (m == 0 || n == 0) throw std::invalid_argument("sinkhorn: empty support");

    std::vector<double> C(m * n);
    double cmax = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            C[i * n + j] = cost.at(sup.rows[i], sup.cols[j]);
            cmax = std::max(cmax, C[i * n + j]);
        }
    std::vector<double> a(m), b(n);
    for (std::size_t i = 0; i < m; ++i) a[i] = mu[sup.rows[i]];
    for (std::size_t j = 0; j < n; ++j) b[j] = nu[sup.cols[j]];

    bool log_domain = cfg.log_domain || (std::exp(-cmax / cfg.epsilon) == 0.0);

    SinkhornResult out;
    TransportPlan plan{mu.size(), nu.size(), std::vector<double>(mu.size() * nu.size(), 0.0)};

    for (int attempt = 0; attempt < 2; ++attempt) {
        if (!log_domain) {
            std::vector<double> K(m * n);
            for (std::size_t k = 0; k < K.size(); ++k) K[k] = std::exp(-C[k] / cfg.epsilon);
            std::vector<double> u(m, 1.0), v(n, 1.0), Kv(m), KTu(n);
            bool blew_up = false;
            int it = 0;
            double residual = std::numeric_limits<double>::infinity();
            while (it < cfg.max_iter) {
                ++it;
                for (std::size_t i = 0; i < m; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += K[i * n + j] * v[j];
                    Kv[i] = s;
                    u[i] = a[i] / s;
                    if (!std::isfinite(u[i])) blew_up = true;
                }
                if (blew_up) break;
                residual = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < m; ++i) s += K[i * n + j] * u[i];
                    KTu[j] = s;
                    residual += std::abs(v[j] * s - b[j]);
                }
                if (residual <= cfg.tol) break;
                if (it == cfg.max_iter) break; // leave rows exact on exit
                for (std::size_t j = 0; j < n; ++j) {
                    v[j] = b[j] / KTu[j];
                    if (!std::isfinite(v[j])) blew_up = true;
                }
                if (blew_up) break;
            }
            if (blew_up) {
                log_domain = true; // numeric underflow: switch to log-domain
                continue;
            }
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    plan.at(sup.rows[i], sup.cols[j]) = u[i] * K[i * n + j] * v[j];
            out.iterations = it;
            out.residual = residual;
            out.status = residual <= cfg.tol ? SolveStatus::Converged : SolveStatus::MaxIterations;
            out.used_log_domain = false;
            break;
        } else {
            const double eps = cfg.epsilon;
            std::vector<double> f(m, 0.0), g(n, 0.0), terms;
            int it = 0;
            double residual = std::numeric_limits<double>::infinity();
            while (it < cfg.max_iter) {
                ++it;
                for (std::size_t i = 0; i < m; ++i) {
                    terms.assign(n, 0.0);
                    for (std::size_t j = 0; j < n; ++j)
                        terms[j] = (g[j] - C[i * n + j]) / eps;
                    f[i] = eps * std::log(a[i]) - eps * detail::logsumexp(terms);
                }
                residual = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    terms.assign(m, 0.0);
                    for (std::size_t i = 0; i < m; ++i)
                        terms[i] = (f[i] + g[j] - C[i * n + j]) / eps;
                    double col = 0.0;
                    for (double t : terms) col += std::exp(t);
                    residual += std::abs(col - b[j]);
                }
                if (residual <= cfg.tol) break;
                if (it == cfg.max_iter) break; // leave rows exact on exit
                for (std::size_t j = 0; j < n; ++j) {
                    terms.assign(m, 0.0);
                    for (std::size_t i = 0; i < m; ++i)
                        terms[i] = (f[i] - C[i * n + j]) / eps;
                    g[j] = eps * std::log(b[j]) - eps * detail::logsumexp(terms);
                }
            }
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    plan.at(sup.rows[i], sup.cols[j]) =
                        std::exp((f[i] + g[j] - C[i * n + j]) / eps);
            out.iterations = it;
            out.residual = residual;
            out.status = residual <= cfg.tol ? SolveStatus::Converged : SolveStatus::MaxIterations;
            out.used_log_domain = true;
            break;
        }
    }
    out.plan = std::move(plan);
    return out;
}

inline SinkhornResult sinkhorn(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                               const CostMatrix& cost, const SinkhornConfig& cfg) {
    return sinkhorn(mu.masses(), nu.masses(), cost, cfg);
}

} // namespace otdc
