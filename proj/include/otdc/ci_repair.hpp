#pragma once
// CI repair: find a coupling whose source marginal is the empirical
// distribution of the data and whose target marginal satisfies a CI
// constraint at minimum transport cost, then apply the induced row-stochastic
// cleaner to the data by seeded sampling.
//
// The solver alternates entropic scaling toward the current target with the
// closed-form CI factorization of the running column marginal, annealing the
// regularization weight down to the configured epsilon. Unsaturated
// constraints are solved on the marginal of the constrained attributes and
// lifted back to the full domain, which preserves the transport cost.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "otdc/distribution.hpp"
#include "otdc/exact_ot.hpp"
#include "otdc/rng.hpp"
#include "otdc/sinkhorn.hpp"
#include "otdc/transport.hpp"

namespace otdc {

struct RepairProblem {
    std::vector<Tuple> data;
    Schema schema;
    CIConstraint sigma;
    CostKind cost = CostKind::Hamming;
    double ci_tol = 1e-6;
    SinkhornConfig reg{};
    int max_outer = 200;     // alternation sweeps at the final epsilon
    double outer_tol = 1e-7; // L1 movement threshold on the target

    void validate() const {
        if (data.empty()) throw InputError("repair: empty dataset");
        sigma.validate(schema);
        reg.validate();
        if (ci_tol < 0.0) throw std::invalid_argument("repair: ci_tol must be >= 0");
    }
};

struct ProbabilisticCleaner {
    std::size_t target_size = 0;
    std::vector<std::size_t> source_support;   // encoded joint indices, ascending
    std::vector<std::vector<double>> rows;     // row-stochastic, one per support tuple
    std::unordered_map<std::size_t, std::size_t> row_of;

    const std::vector<double>& row_for(std::size_t joint_idx) const {
        auto it = row_of.find(joint_idx);
        if (it == row_of.end())
            throw std::invalid_argument("cleaner: tuple outside source support");
        return rows[it->second];
    }
};

struct RepairResult {
    TransportPlan plan;          // over the full joint domain
    DiscreteDistribution target; // plan's column marginal
    ProbabilisticCleaner cleaner;
    double transport_cost = 0.0;
    double ci_violation_before = 0.0;
    double ci_violation_after = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::Converged;
    bool lifted = false;
};

namespace detail {

// Transport cost of a plan over a joint schema without materializing the
// full cost matrix.
inline double plan_cost_on_schema(const TransportPlan& plan, const Schema& schema,
                                  CostKind kind) {
    const std::size_t d = schema.joint_size();
    if (plan.rows != d || plan.cols != d)
        throw std::invalid_argument("plan_cost_on_schema: dimension mismatch");
    std::vector<Tuple> tuples(d);
    for (std::size_t i = 0; i < d; ++i) tuples[i] = schema.decode(i);
    const auto codes = kind == CostKind::SqEuclidean
                           ? numeric_codes(schema)
                           : std::vector<std::vector<double>>{};
    std::vector<double> terms;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double m = plan.at(i, j);
            if (m == 0.0 || i == j) continue;
            double c = 0.0;
            for (std::size_t k = 0; k < schema.n_attrs(); ++k) {
                if (kind == CostKind::Hamming) {
                    c += (tuples[i][k] != tuples[j][k]) ? 1.0 : 0.0;
                } else {
                    const double dv = codes[k][tuples[i][k]] - codes[k][tuples[j][k]];
                    c += dv * dv;
                }
            }
            terms.push_back(m * c);
        }
    return kahan_sum(terms);
}

struct CISolveOutput {
    TransportPlan plan; // active-domain coupling, source marginal exact
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIterations;
};

// One alternating-scaling run from a given CI-feasible warm-start target.
// Each sweep enforces the source marginal, re-projects the column marginal
// onto the CI set, then scales columns toward the projected target. Epsilon
// is annealed from 1 down to cfg.epsilon so small regularization weights do
// not freeze the iteration at its warm start.
struct CISolveRun {
    TransportPlan plan;
    double cost = 0.0;
    double violation = 0.0;
    int iterations = 0;
    bool moved_under_tol = false;
};

inline CISolveRun run_ci_alternation(const DiscreteDistribution& mu, const CIConstraint& sigma,
                                     const CostMatrix& cost, const SinkhornConfig& cfg,
                                     int max_outer, double outer_tol, double ci_tol,
                                     DiscreteDistribution target) {
    const Schema& schema = mu.schema();
    const std::size_t d = schema.joint_size();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d; ++i)
        if (mu.mass(i) > 0.0) rows.push_back(i);
    const std::size_t m = rows.size();

    std::vector<double> C(m * d);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < d; ++j) C[r * d + j] = cost.at(rows[r], j);
    std::vector<double> log_a(m);
    for (std::size_t r = 0; r < m; ++r) log_a[r] = std::log(mu.mass(rows[r]));

    std::vector<double> stages;
    for (double e = std::max(1.0, cfg.epsilon); e > cfg.epsilon; e *= 0.5)
        stages.push_back(e);
    stages.push_back(cfg.epsilon);

    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> f(m, 0.0), g(d, 0.0), terms, col(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double q = target.mass(j);
        g[j] = q > 0.0 ? stages.front() * std::log(q) : neg_inf;
    }

    CISolveRun out;
    for (std::size_t stage = 0; stage < stages.size(); ++stage) {
        const double eps = stages[stage];
        const bool final_stage = stage + 1 == stages.size();
        const int sweep_cap = final_stage ? max_outer : 60;
        for (int sweep = 0; sweep < sweep_cap; ++sweep) {
            ++out.iterations;
            for (std::size_t r = 0; r < m; ++r) {
                terms.assign(d, 0.0);
                for (std::size_t j = 0; j < d; ++j) terms[j] = (g[j] - C[r * d + j]) / eps;
                f[r] = eps * log_a[r] - eps * logsumexp(terms);
            }
            for (std::size_t j = 0; j < d; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < m; ++r)
                    s += std::exp((f[r] + g[j] - C[r * d + j]) / eps);
                col[j] = s;
            }
            const DiscreteDistribution projected =
                ci_projection(DiscreteDistribution(schema, col), sigma);
            const double movement = l1_distance(projected, target);
            target = projected;
            for (std::size_t j = 0; j < d; ++j) {
                const double q = target.mass(j);
                if (q > 0.0) {
                    terms.assign(m, 0.0);
                    for (std::size_t r = 0; r < m; ++r)
                        terms[r] = (f[r] - C[r * d + j]) / eps;
                    g[j] = eps * std::log(q) - eps * logsumexp(terms);
                } else {
                    g[j] = neg_inf;
                }
            }
            if (movement < outer_tol) {
                out.moved_under_tol = final_stage;
                break;
            }
        }
    }

    // Polish toward the frozen target; the hard source constraint is applied
    // by row rescaling afterwards, so this only needs to tighten columns.
    const double eps = cfg.epsilon;
    const int polish_cap = std::min(cfg.max_iter, 2000);
    int polish = 0;
    while (polish < polish_cap) {
        ++polish;
        for (std::size_t r = 0; r < m; ++r) {
            terms.assign(d, 0.0);
            for (std::size_t j = 0; j < d; ++j) terms[j] = (g[j] - C[r * d + j]) / eps;
            f[r] = eps * log_a[r] - eps * logsumexp(terms);
        }
        double residual = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < m; ++r)
                s += std::exp((f[r] + g[j] - C[r * d + j]) / eps);
            residual += std::abs(s - target.mass(j));
        }
        if (residual <= cfg.tol) break;
        for (std::size_t j = 0; j < d; ++j) {
            const double q = target.mass(j);
            if (q > 0.0) {
                terms.assign(m, 0.0);
                for (std::size_t r = 0; r < m; ++r) terms[r] = (f[r] - C[r * d + j]) / eps;
                g[j] = eps * std::log(q) - eps * logsumexp(terms);
            } else {
                g[j] = neg_inf;
            }
        }
    }
    out.iterations += polish;

    out.plan = TransportPlan{d, d, std::vector<double>(d * d, 0.0)};
    for (std::size_t r = 0; r < m; ++r) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = std::exp((f[r] + g[j] - C[r * d + j]) / eps);
            out.plan.at(rows[r], j) = v;
            row_sum += v;
        }
        // The source marginal is the hard constraint: rescale rows exactly.
        const double fix = mu.mass(rows[r]) / row_sum;
        for (std::size_t j = 0; j < d; ++j) out.plan.at(rows[r], j) *= fix;
    }
    out.cost = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < d; ++j)
            out.cost += out.plan.at(rows[r], j) * C[r * d + j];
    out.violation =
        satisfies_ci(DiscreteDistribution(schema, out.plan.col_marginal()), sigma, ci_tol)
            .violation;
    return out;
}

// Factor parametrization of a CI-feasible target: q_Z plus per-z conditional
// factors for X and Y. Used by the local refinement pass.
struct CIFactors {
    std::size_t dx = 1, dy = 1, dz = 1;
    std::vector<double> qz;          // [dz]
    std::vector<double> qx_given_z;  // [dz * dx]
    std::vector<double> qy_given_z;  // [dz * dy]
};

struct CICellCodes {
    std::size_t dx = 1, dy = 1, dz = 1;
    std::vector<std::size_t> x_of, y_of, z_of; // per joint index
};

inline CICellCodes ci_cell_codes(const Schema& s, const CIConstraint& sigma) {
    auto positions = [&](const std::vector<std::string>& names) {
        std::vector<std::size_t> pos;
        for (const auto& a : s.attrs())
            for (const auto& n : names)
                if (a.name == n) pos.push_back(s.index_of(n));
        return pos;
    };
    const auto xpos = positions(sigma.x_attrs);
    const auto ypos = positions(sigma.y_attrs);
    const auto zpos = positions(sigma.z_attrs);
    auto radix = [&](const std::vector<std::size_t>& pos) {
        std::size_t d = 1;
        for (auto i : pos) d *= s.domain_size(i);
        return d;
    };
    CICellCodes cc;
    cc.dx = radix(xpos);
    cc.dy = radix(ypos);
    cc.dz = radix(zpos);
    cc.x_of.resize(s.joint_size());
    cc.y_of.resize(s.joint_size());
    cc.z_of.resize(s.joint_size());
    auto code = [&](const Tuple& t, const std::vector<std::size_t>& pos) {
        std::size_t c = 0;
        for (auto i : pos) c = c * s.domain_size(i) + t[i];
        return c;
    };
    for (std::size_t idx = 0; idx < s.joint_size(); ++idx) {
        const Tuple t = s.decode(idx);
        cc.x_of[idx] = code(t, xpos);
        cc.y_of[idx] = code(t, ypos);
        cc.z_of[idx] = code(t, zpos);
    }
    return cc;
}

inline CIFactors factors_of(const DiscreteDistribution& q, const CICellCodes& cc) {
    CIFactors f;
    f.dx = cc.dx;
    f.dy = cc.dy;
    f.dz = cc.dz;
    f.qz.assign(cc.dz, 0.0);
    f.qx_given_z.assign(cc.dz * cc.dx, 0.0);
    f.qy_given_z.assign(cc.dz * cc.dy, 0.0);
    for (std::size_t idx = 0; idx < q.size(); ++idx) {
        const double m = q.mass(idx);
        if (m == 0.0) continue;
        f.qz[cc.z_of[idx]] += m;
        f.qx_given_z[cc.z_of[idx] * cc.dx + cc.x_of[idx]] += m;
        f.qy_given_z[cc.z_of[idx] * cc.dy + cc.y_of[idx]] += m;
    }
    for (std::size_t z = 0; z < cc.dz; ++z) {
        if (f.qz[z] > 0.0) {
            for (std::size_t x = 0; x < cc.dx; ++x) f.qx_given_z[z * cc.dx + x] /= f.qz[z];
            for (std::size_t y = 0; y < cc.dy; ++y) f.qy_given_z[z * cc.dy + y] /= f.qz[z];
        } else {
            for (std::size_t x = 0; x < cc.dx; ++x)
                f.qx_given_z[z * cc.dx + x] = 1.0 / static_cast<double>(cc.dx);
            for (std::size_t y = 0; y < cc.dy; ++y)
                f.qy_given_z[z * cc.dy + y] = 1.0 / static_cast<double>(cc.dy);
        }
    }
    return f;
}

inline std::vector<double> assemble_target(const CIFactors& f, const CICellCodes& cc,
                                           std::size_t joint_size) {
    std::vector<double> q(joint_size, 0.0);
    for (std::size_t idx = 0; idx < joint_size; ++idx) {
        const std::size_t z = cc.z_of[idx];
        q[idx] = f.qz[z] * f.qx_given_z[z * cc.dx + cc.x_of[idx]] *
                 f.qy_given_z[z * cc.dy + cc.y_of[idx]];
    }
    return q;
}

// Coordinate pattern search over the factor parametrization, evaluating
// candidate targets with the exact solver. The alternation alone can stall
// at targets that keep the data's factor marginals; this pass walks each
// factor toward cheaper mass placements on a shrinking step grid.
inline bool refine_target_factors(const DiscreteDistribution& mu, const CIConstraint& sigma,
                                  const CostMatrix& cost, DiscreteDistribution& target) {
    std::size_t support = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.mass(i) > 0.0) ++support;
    if (support > kExactOTMaxSupport) return false;

    const Schema& schema = mu.schema();
    const CICellCodes cc = ci_cell_codes(schema, sigma);
    CIFactors f = factors_of(target, cc);

    auto eval = [&](const CIFactors& cand) {
        return exact_ot(mu.masses(), assemble_target(cand, cc, schema.joint_size()), cost)
            .cost;
    };
    double best = eval(f);
    const double original = best;

    // Directed mass shifts within each factor block. Paired moves matter:
    // on symmetric instances every single shift can be cost-neutral while a
    // simultaneous shift of two factors descends.
    struct Move {
        int which; // 0 = qz, 1 = qx|z, 2 = qy|z
        std::size_t base, from, to;
    };
    std::vector<Move> moves;
    auto add_block = [&](int which, std::size_t base, std::size_t size) {
        for (std::size_t from = 0; from < size; ++from)
            for (std::size_t to = 0; to < size; ++to)
                if (from != to) moves.push_back({which, base, from, to});
    };
    add_block(0, 0, cc.dz);
    for (std::size_t z = 0; z < cc.dz; ++z) add_block(1, z * cc.dx, cc.dx);
    for (std::size_t z = 0; z < cc.dz; ++z) add_block(2, z * cc.dy, cc.dy);

    auto vec_of = [&](int which) -> std::vector<double>& {
        return which == 0 ? f.qz : which == 1 ? f.qx_given_z : f.qy_given_z;
    };
    auto apply = [&](const Move& m, double delta) {
        auto& v = vec_of(m.which);
        if (v[m.base + m.from] < delta) return false;
        v[m.base + m.from] -= delta;
        v[m.base + m.to] += delta;
        return true;
    };
    auto revert = [&](const Move& m, double delta) {
        auto& v = vec_of(m.which);
        v[m.base + m.from] += delta;
        v[m.base + m.to] -= delta;
    };

    std::size_t evals = 0;
    const std::size_t eval_budget =
        std::max<std::size_t>(6000, 30 * moves.size() * moves.size());

    for (double delta : {0.25, 0.125, 0.0625, 0.03125, 0.015625}) {
        bool improved = true;
        while (improved && evals < eval_budget) {
            improved = false;
            for (const Move& m : moves) {
                if (evals >= eval_budget) break;
                if (!apply(m, delta)) continue;
                ++evals;
                const double c = eval(f);
                if (c < best - 1e-12) {
                    best = c;
                    improved = true;
                } else {
                    revert(m, delta);
                }
            }
            if (improved || evals >= eval_budget) continue;
            for (std::size_t i = 0; i < moves.size() && !improved; ++i) {
                for (std::size_t j = i + 1; j < moves.size() && !improved; ++j) {
                    if (evals >= eval_budget) break;
                    if (!apply(moves[i], delta)) continue;
                    if (!apply(moves[j], delta)) {
                        revert(moves[i], delta);
                        continue;
                    }
                    ++evals;
                    const double c = eval(f);
                    if (c < best - 1e-12) {
                        best = c;
                        improved = true;
                    } else {
                        revert(moves[j], delta);
                        revert(moves[i], delta);
                    }
                }
            }
        }
    }
    if (best >= original - 1e-12) return false;
    target = DiscreteDistribution(schema, assemble_target(f, cc, schema.joint_size()));
    return true;
}

// The alternation is a fixed-point scheme over a nonconvex feasible set, so
// symmetric inputs can pin it to a symmetric stationary point. A few seeded
// CI-feasible restarts break the symmetry; the cheapest feasible run wins.
inline CISolveOutput solve_ci_target(const DiscreteDistribution& mu, const CIConstraint& sigma,
                                     const CostMatrix& cost, const SinkhornConfig& cfg,
                                     int max_outer, double outer_tol, double ci_tol,
                                     int restarts = 4) {
    const Schema& schema = mu.schema();
    std::vector<DiscreteDistribution> starts;
    starts.push_back(ci_projection(mu, sigma));
    SeededRng rng(0x9E3779B97F4A7C15ull);
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> raw(schema.joint_size());
        double total = 0.0;
        for (double& x : raw) {
            x = -std::log(1.0 - rng.uniform01());
            total += x;
        }
        for (double& x : raw) x /= total;
        starts.push_back(ci_projection(DiscreteDistribution(schema, raw), sigma));
    }

    CISolveRun best;
    bool have_best = false;
    for (const auto& q0 : starts) {
        CISolveRun run = run_ci_alternation(mu, sigma, cost, cfg, max_outer, outer_tol,
                                            ci_tol, q0);
        const bool run_feasible = run.violation <= ci_tol;
        const bool best_feasible = have_best && best.violation <= ci_tol;
        bool take = !have_best;
        if (have_best) {
            if (run_feasible && !best_feasible)
                take = true;
            else if (run_feasible == best_feasible && run.cost < best.cost)
                take = true;
        }
        if (take) {
            best = std::move(run);
            have_best = true;
        }
    }

    // Local refinement: walk candidate targets' factors toward cheaper mass
    // placements, then re-couple with a plain scaling solve toward the best
    // refined target. Both the alternation's converged target and the plain
    // factorization of the source are used as walk origins.
    std::size_t support = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.mass(i) > 0.0) ++support;
    std::vector<DiscreteDistribution> origins;
    if (support <= kExactOTMaxSupport) {
        origins.emplace_back(
            ci_projection(DiscreteDistribution(schema, best.plan.col_marginal()), sigma));
        origins.push_back(starts.front());
    }
    bool any_refined = false;
    DiscreteDistribution refined = origins.front();
    double refined_cost = 0.0;
    for (auto& origin : origins) {
        DiscreteDistribution cand = origin;
        refine_target_factors(mu, sigma, cost, cand);
        const double c = exact_ot(mu.masses(), cand.masses(), cost).cost;
        if (!any_refined || c < refined_cost) {
            refined = std::move(cand);
            refined_cost = c;
            any_refined = true;
        }
    }
    if (any_refined && refined_cost < best.cost) {
        // Couple to the refined target with the exact solver: both marginals
        // hold exactly, so feasibility is not at the mercy of scaling
        // convergence.
        ExactOTResult coupled = exact_ot(mu.masses(), refined.masses(), cost);
        CISolveRun run;
        run.cost = coupled.cost;
        run.violation =
            satisfies_ci(DiscreteDistribution(schema, coupled.plan.col_marginal()), sigma,
                         ci_tol)
                .violation;
        run.plan = std::move(coupled.plan);
        run.iterations = best.iterations;
        run.moved_under_tol = best.moved_under_tol;
        const bool run_feasible = run.violation <= ci_tol;
        const bool best_feasible = best.violation <= ci_tol;
        if ((run_feasible && !best_feasible) ||
            (run_feasible == best_feasible && run.cost < best.cost))
            best = std::move(run);
    }

    CISolveOutput out;
    out.plan = std::move(best.plan);
    out.iterations = best.iterations;
    out.status = (best.moved_under_tol && best.violation <= ci_tol)
                     ? SolveStatus::Converged
                     : SolveStatus::MaxIterations;
    return out;
}

} // namespace detail

// Row-normalized conditional pi(v' | v) of a plan, defined on rows with
// positive mass.
inline ProbabilisticCleaner cleaner_from_plan(const TransportPlan& plan) {
    ProbabilisticCleaner cleaner;
    cleaner.target_size = plan.cols;
    const auto row_mass = plan.row_marginal();
    for (std::size_t i = 0; i < plan.rows; ++i) {
        if (row_mass[i] <= 0.0) continue;
        std::vector<double> row(plan.cols);
        for (std::size_t j = 0; j < plan.cols; ++j) row[j] = plan.at(i, j) / row_mass[i];
        cleaner.row_of.emplace(i, cleaner.rows.size());
        cleaner.source_support.push_back(i);
        cleaner.rows.push_back(std::move(row));
    }
    return cleaner;
}

// Independently resamples every tuple from its cleaner row. Pure function of
// (data, cleaner, seed).
inline std::vector<Tuple> apply_cleaner(const std::vector<Tuple>& data, const Schema& schema,
                                        const ProbabilisticCleaner& cleaner,
                                        std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<Tuple> out;
    out.reserve(data.size());
    for (const auto& t : data) {
        const auto& row = cleaner.row_for(schema.encode(t));
        double r = rng.uniform01();
        std::size_t chosen = 0;
        bool found = false;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] <= 0.0) continue;
            chosen = j;
            found = true;
            r -= row[j];
            if (r < 0.0) break;
        }
        if (!found) throw std::invalid_argument("apply_cleaner: empty cleaner row");
        out.push_back(schema.decode(chosen));
    }
    return out;
}

// pi(v, v') = pi_s(u, u') P(w | u) on w' = w, zero elsewhere. Keeps the
// transport cost of pi_s whenever c(uw -> u'w) = c(u -> u'), which both
// built-in costs satisfy.
inline TransportPlan lift_unsaturated(const TransportPlan& pi_s,
                                      const DiscreteDistribution& p_full,
                                      const std::vector<std::string>& u_attrs,
                                      const std::vector<std::string>& w_attrs) {
    const Schema& schema = p_full.schema();
    std::vector<int> seen(schema.n_attrs(), 0);
    for (const auto& name : u_attrs) seen[schema.index_of(name)] += 1;
    for (const auto& name : w_attrs) seen[schema.index_of(name)] += 1;
    for (int c : seen)
        if (c != 1)
            throw std::invalid_argument("lift: U and W must partition the schema attributes");
    constexpr std::size_t kMaxDenseJoint = 1024;
    if (schema.joint_size() > kMaxDenseJoint)
        throw std::invalid_argument("lift: joint domain too large for a dense lifted plan");

    const DiscreteDistribution p_u = marginal(p_full, u_attrs);
    const Schema& us = p_u.schema();
    if (pi_s.rows != us.joint_size() || pi_s.cols != us.joint_size())
        throw std::invalid_argument("lift: plan dimensions do not match the U-marginal domain");
    if (l1_violation(pi_s.row_marginal(), p_u.masses()) > 1e-9)
        throw std::invalid_argument("lift: plan source marginal != marginal of the data");

    const ConditionalTable w_given_u =
        w_attrs.empty() ? ConditionalTable{} : conditional(p_full, w_attrs, u_attrs);
    if (w_attrs.empty()) {
        TransportPlan same = pi_s; // W empty: the lift is the identity
        return same;
    }

    const std::size_t d = schema.joint_size();
    const std::size_t du = us.joint_size();
    const std::size_t dw = w_given_u.target_schema.joint_size();

    // v = u_contrib[u] + w_contrib[w] in the full mixed-radix code.
    std::vector<std::size_t> upos(us.n_attrs()), wpos(w_given_u.target_schema.n_attrs());
    for (std::size_t i = 0; i < upos.size(); ++i)
        upos[i] = schema.index_of(us.attr(i).name);
    for (std::size_t i = 0; i < wpos.size(); ++i)
        wpos[i] = schema.index_of(w_given_u.target_schema.attr(i).name);
    std::vector<std::size_t> u_contrib(du), w_contrib(dw);
    {
        Tuple full(schema.n_attrs(), 0);
        for (std::size_t u = 0; u < du; ++u) {
            const Tuple ut = us.decode(u);
            std::fill(full.begin(), full.end(), 0);
            for (std::size_t i = 0; i < upos.size(); ++i) full[upos[i]] = ut[i];
            u_contrib[u] = schema.encode(full);
        }
        for (std::size_t w = 0; w < dw; ++w) {
            const Tuple wt = w_given_u.target_schema.decode(w);
            std::fill(full.begin(), full.end(), 0);
            for (std::size_t i = 0; i < wpos.size(); ++i) full[wpos[i]] = wt[i];
            w_contrib[w] = schema.encode(full);
        }
    }

    TransportPlan lifted{d, d, std::vector<double>(d * d, 0.0)};
    for (std::size_t u = 0; u < du; ++u) {
        if (!w_given_u.defined[u]) continue; // zero-mass u: pi_s row is zero too
        for (std::size_t w = 0; w < dw; ++w) {
            const double pw = w_given_u.rows[u][w];
            if (pw == 0.0) continue;
            const std::size_t v = u_contrib[u] + w_contrib[w];
            for (std::size_t u2 = 0; u2 < du; ++u2) {
                const double mass = pi_s.at(u, u2) * pw;
                if (mass == 0.0) continue;
                lifted.at(v, u_contrib[u2] + w_contrib[w]) = mass;
            }
        }
    }
    return lifted;
}

// Solves the probabilistic-cleaner problem end to end.
inline RepairResult solve_probabilistic_cleaner(const RepairProblem& prob) {
    prob.validate();
    const Schema& schema = prob.schema;
    const DiscreteDistribution p_d = empirical_distribution(prob.data, schema);
    const CICheck before = satisfies_ci(p_d, prob.sigma, prob.ci_tol);

    RepairResult res;
    res.ci_violation_before = before.violation;
    res.lifted = !prob.sigma.saturated(schema);

    if (before.satisfied) {
        const std::size_t d = schema.joint_size();
        if (d > 1024)
            throw std::invalid_argument("repair: joint domain too large for a dense plan");
        TransportPlan plan{d, d, std::vector<double>(d * d, 0.0)};
        for (std::size_t i = 0; i < d; ++i) plan.at(i, i) = p_d.mass(i);
        res.plan = std::move(plan);
        res.target = p_d;
        res.cleaner = cleaner_from_plan(res.plan);
        res.transport_cost = 0.0;
        res.ci_violation_after = before.violation;
        res.iterations = 0;
        res.status = SolveStatus::Converged;
        res.lifted = false;
        return res;
    }

    if (res.lifted) {
        const auto u_attrs = prob.sigma.covered_attrs(schema);
        std::vector<std::string> w_attrs;
        for (const auto& a : schema.attrs())
            if (std::find(u_attrs.begin(), u_attrs.end(), a.name) == u_attrs.end())
                w_attrs.push_back(a.name);
        const DiscreteDistribution p_u = marginal(p_d, u_attrs);
        const CostMatrix cost_u = make_cost(p_u.schema(), prob.cost);
        auto solved = detail::solve_ci_target(p_u, prob.sigma, cost_u, prob.reg,
                                              prob.max_outer, prob.outer_tol, prob.ci_tol);
        res.plan = lift_unsaturated(solved.plan, p_d, u_attrs, w_attrs);
        res.iterations = solved.iterations;
        res.status = solved.status;
    } else {
        if (schema.joint_size() > 1024)
            throw std::invalid_argument("repair: joint domain too large for a dense plan");
        const CostMatrix cost = make_cost(schema, prob.cost);
        auto solved = detail::solve_ci_target(p_d, prob.sigma, cost, prob.reg,
                                              prob.max_outer, prob.outer_tol, prob.ci_tol);
        res.plan = std::move(solved.plan);
        res.iterations = solved.iterations;
        res.status = solved.status;
    }

    res.target = DiscreteDistribution(schema, res.plan.col_marginal());
    res.cleaner = cleaner_from_plan(res.plan);
    res.transport_cost = detail::plan_cost_on_schema(res.plan, schema, prob.cost);
    res.ci_violation_after = satisfies_ci(res.target, prob.sigma, prob.ci_tol).violation;
    return res;
}

struct DeterministicMapResult {
    std::vector<std::size_t> support;    // encoded distinct tuples, ascending
    std::vector<std::size_t> mapped_to;  // target joint index per support tuple
    double total_cost = 0.0;             // sum over data rows of c(v_i, T(v_i))
    double per_row_cost = 0.0;           // total_cost / |data|
};

// Globally optimal transport map by exhaustive search with branch-and-bound
// on accumulated cost; feasibility (T(D) satisfies sigma at 1e-9) is checked
// at the leaves. The trivial single-tuple repair seeds the upper bound.
inline DeterministicMapResult solve_deterministic_map(const RepairProblem& prob) {
    prob.validate();
    const Schema& schema = prob.schema;
    const std::size_t d = schema.joint_size();
    if (d > 16)
        throw std::invalid_argument("deterministic map: joint domain too large (limit 16)");

    std::vector<double> counts(d, 0.0);
    for (const auto& t : prob.data) counts[schema.encode(t)] += 1.0;
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < d; ++i)
        if (counts[i] > 0.0) support.push_back(i);
    if (support.size() > 12)
        throw std::invalid_argument("deterministic map: support too large (limit 12)");

    const CostMatrix cost = make_cost(schema, prob.cost);
    const double n = static_cast<double>(prob.data.size());

    // Heavier tuples first for stronger pruning.
    std::vector<std::size_t> order(support.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return counts[support[a]] > counts[support[b]];
    });

    // Candidate targets per support tuple, cheapest first.
    std::vector<std::vector<std::size_t>> candidates(support.size());
    for (std::size_t s = 0; s < support.size(); ++s) {
        auto& cand = candidates[s];
        cand.resize(d);
        for (std::size_t j = 0; j < d; ++j) cand[j] = j;
        std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return cost.at(support[s], a) < cost.at(support[s], b);
        });
    }

    auto feasible = [&](const std::vector<std::size_t>& assignment) {
        std::vector<double> mapped(d, 0.0);
        for (std::size_t s = 0; s < support.size(); ++s)
            mapped[assignment[s]] += counts[support[s]] / n;
        const DiscreteDistribution q(schema, std::move(mapped));
        return satisfies_ci(q, prob.sigma, 1e-9).satisfied;
    };

    // Upper bound: map everything onto the best single tuple (a point mass
    // satisfies any CI constraint).
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_assignment(support.size(), 0);
    for (std::size_t j = 0; j < d; ++j) {
        double total = 0.0;
        for (std::size_t s = 0; s < support.size(); ++s)
            total += counts[support[s]] * cost.at(support[s], j);
        if (total < best) {
            best = total;
            best_assignment.assign(support.size(), j);
        }
    }

    std::vector<std::size_t> assignment(support.size(), 0);
    std::size_t nodes = 0;
    constexpr std::size_t kNodeBudget = 50'000'000;
    auto dfs = [&](auto&& self, std::size_t depth, double acc) -> void {
        if (++nodes > kNodeBudget)
            throw std::runtime_error("deterministic map: search exceeded node budget");
        if (depth == order.size()) {
            if (acc < best && feasible(assignment)) {
                best = acc;
                best_assignment = assignment;
            }
            return;
        }
        const std::size_t s = order[depth];
        for (std::size_t j : candidates[s]) {
            const double step = counts[support[s]] * cost.at(support[s], j);
            if (acc + step >= best) break; // candidates are cost-sorted
            assignment[s] = j;
            self(self, depth + 1, acc + step);
        }
    };
    dfs(dfs, 0, 0.0);

    DeterministicMapResult out;
    out.support = support;
    out.mapped_to = best_assignment;
    out.total_cost = best;
    out.per_row_cost = best / n;
    return out;
}

} // namespace otdc
