#pragma once
// Exact discrete optimal transport via the transportation simplex
// (min-cost flow on the bipartite transport graph, basis kept as a
// spanning tree). Deterministic, returns a vertex of the transport
// polytope. Intended for supports up to 512 points per side.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "otdc/transport.hpp"

namespace otdc {

struct ExactOTResult {
    TransportPlan plan;
    double cost = 0.0;
};

namespace detail {

struct BasicCell {
    std::size_t i, j;
    double flow;
};

// Transportation simplex on strictly positive supplies/demands.
class TransportSimplex {
  public:
    TransportSimplex(const std::vector<double>& supply, const std::vector<double>& demand,
                     const CostMatrix& cost, const std::vector<std::size_t>& row_ids,
                     const std::vector<std::size_t>& col_ids)
        : m_(supply.size()), n_(demand.size()), cost_(cost), row_ids_(row_ids),
          col_ids_(col_ids) {
        northwest_corner(supply, demand);
    }

    void solve() {
        double cmax = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) cmax = std::max(cmax, c(i, j));
        const double enter_tol = 1e-12 * (1.0 + cmax);

        const std::size_t max_pivots = 2000 * (m_ + n_) * (m_ + n_) + 10000;
        std::size_t degenerate_streak = 0;
        for (std::size_t it = 0; it < max_pivots; ++it) {
            compute_potentials();
            const bool bland = degenerate_streak > 64;
            std::size_t ei = 0, ej = 0;
            if (!find_entering(enter_tol, bland, ei, ej)) return;
            const double delta = pivot(ei, ej);
            if (delta <= enter_tol)
                ++degenerate_streak;
            else
                degenerate_streak = 0;
        }
        throw std::runtime_error("exact_ot: simplex failed to terminate");
    }

    const std::vector<BasicCell>& basis() const { return basis_; }

  private:
    double c(std::size_t i, std::size_t j) const {
        return cost_.at(row_ids_[i], col_ids_[j]);
    }

    void northwest_corner(std::vector<double> a, std::vector<double> b) {
        std::size_t i = 0, j = 0;
        while (true) {
            const double f = std::max(0.0, std::min(a[i], b[j]));
            basis_.push_back({i, j, f});
            if (i == m_ - 1 && j == n_ - 1) break;
            a[i] -= f;
            b[j] -= f;
            if (i < m_ - 1 && (a[i] <= b[j] || j == n_ - 1))
                ++i;
            else
                ++j;
        }
        // A spanning-tree basis has exactly m + n - 1 cells by construction.
    }

    void compute_potentials() {
        u_.assign(m_, 0.0);
        v_.assign(n_, 0.0);
        adj_.assign(m_ + n_, {});
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            adj_[basis_[k].i].push_back(k);
            adj_[m_ + basis_[k].j].push_back(k);
        }
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        u_[0] = 0.0;
        while (!stack.empty()) {
            const std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t k : adj_[node]) {
                const auto& cell = basis_[k];
                const std::size_t other = (node < m_) ? m_ + cell.j : cell.i;
                if (seen[other]) continue;
                seen[other] = 1;
                if (other >= m_)
                    v_[other - m_] = c(cell.i, cell.j) - u_[cell.i];
                else
                    u_[other] = c(cell.i, cell.j) - v_[cell.j];
                stack.push_back(other);
            }
        }
    }

    bool find_entering(double tol, bool bland, std::size_t& ei, std::size_t& ej) const {
        double best = -tol;
        bool found = false;
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                const double r = c(i, j) - u_[i] - v_[j];
                if (r < -tol) {
                    if (bland) {
                        ei = i;
                        ej = j;
                        return true;
                    }
                    if (r < best) {
                        best = r;
                        ei = i;
                        ej = j;
                        found = true;
                    }
                }
            }
        }
        return found;
    }

    // Adds (ei, ej) to the basis, pushes flow around the unique tree cycle,
    // and drops the limiting cell. Returns the amount of flow moved.
    double pivot(std::size_t ei, std::size_t ej) {
        // Path from row node ei to col node ej through the current tree.
        std::vector<int> parent_edge(m_ + n_, -1);
        std::vector<int> parent_node(m_ + n_, -1);
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> queue{ei};
        seen[ei] = 1;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const std::size_t node = queue[q];
            if (node == m_ + ej) break;
            for (std::size_t k : adj_[node]) {
                const auto& cell = basis_[k];
                const std::size_t other = (node < m_) ? m_ + cell.j : cell.i;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_edge[other] = static_cast<int>(k);
                parent_node[other] = static_cast<int>(node);
                queue.push_back(other);
            }
        }
        std::vector<std::size_t> path; // basis indices from ej-side back to ei
        for (std::size_t node = m_ + ej; node != ei;) {
            path.push_back(static_cast<std::size_t>(parent_edge[node]));
            node = static_cast<std::size_t>(parent_node[node]);
        }
        std::reverse(path.begin(), path.end()); // now ordered from ei to ej

        // Walking ei -> ... -> ej, the first basis edge leaves a row node, so
        // signs alternate -, +, -, ... with the entering cell taking +.
        double delta = std::numeric_limits<double>::infinity();
        std::size_t leave = basis_.size();
        for (std::size_t p = 0; p < path.size(); ++p) {
            if (p % 2 == 0) { // minus edge
                const auto& cell = basis_[path[p]];
                if (cell.flow < delta ||
                    (cell.flow == delta &&
                     (leave == basis_.size() ||
                      std::make_pair(cell.i, cell.j) <
                          std::make_pair(basis_[leave].i, basis_[leave].j)))) {
                    delta = cell.flow;
                    leave = path[p];
                }
            }
        }
        for (std::size_t p = 0; p < path.size(); ++p) {
            basis_[path[p]].flow += (p % 2 == 0) ? -delta : delta;
            if (basis_[path[p]].flow < 0.0) basis_[path[p]].flow = 0.0;
        }
        basis_[leave] = BasicCell{ei, ej, delta};
        return delta;
    }

    std::size_t m_, n_;
    const CostMatrix& cost_;
    const std::vector<std::size_t>& row_ids_;
    const std::vector<std::size_t>& col_ids_;
    std::vector<BasicCell> basis_;
    std::vector<double> u_, v_;
    std::vector<std::vector<std::size_t>> adj_;
};

} // namespace detail

inline constexpr std::size_t kExactOTMaxSupport = 512;

// Minimizes <c, pi> subject to the plan's marginals equalling mu and nu.
inline ExactOTResult exact_ot(const std::vector<double>& mu, const std::vector<double>& nu,
                              const CostMatrix& cost) {
    if (cost.rows != mu.size() || cost.cols != nu.size())
        throw std::invalid_argument("exact_ot: cost dimensions mismatch");
    cost.validate();
    double su = 0.0, sv = 0.0;
    for (double x : mu) {
        if (x < 0.0) throw std::invalid_argument("exact_ot: negative source mass");
        su += x;
    }
    for (double x : nu) {
        if (x < 0.0) throw std::invalid_argument("exact_ot: negative target mass");
        sv += x;
    }
    if (std::abs(su - sv) > 1e-9)
        throw std::invalid_argument("exact_ot: marginal totals differ by more than 1e-9");

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu[i] > 0.0) rows.push_back(i);
    for (std::size_t j = 0; j < nu.size(); ++j)
        if (nu[j] > 0.0) cols.push_back(j);
    if (rows.empty() || cols.empty())
        throw std::invalid_argument("exact_ot: empty support");
    if (rows.size() > kExactOTMaxSupport || cols.size() > kExactOTMaxSupport)
        throw std::invalid_argument("exact_ot: support too large for exact mode");

    std::vector<double> supply(rows.size()), demand(cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) supply[i] = mu[rows[i]];
    for (std::size_t j = 0; j < cols.size(); ++j) demand[j] = nu[cols[j]];
    // Absorb any sub-1e-9 imbalance so the last northwest cell stays feasible.
    const double scale = su / sv;
    for (double& d : demand) d *= scale;

    detail::TransportSimplex simplex(supply, demand, cost, rows, cols);
    simplex.solve();

    TransportPlan plan{mu.size(), nu.size(), std::vector<double>(mu.size() * nu.size(), 0.0)};
    for (const auto& cell : simplex.basis())
        if (cell.flow > 0.0) plan.at(rows[cell.i], cols[cell.j]) += cell.flow;
    ExactOTResult res{std::move(plan), 0.0};
    res.cost = res.plan.cost_against(cost);
    return res;
}

inline ExactOTResult exact_ot(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                              const CostMatrix& cost) {
    return exact_ot(mu.masses(), nu.masses(), cost);
}

} // namespace otdc
