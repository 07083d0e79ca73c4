#include <doctest.h>

#include <map>
#include <random>

#include "fixtures.hpp"
#include "otdc/ci_repair.hpp"

using namespace otdc;
using namespace fixtures;

namespace {

RepairProblem d2_problem() {
    RepairProblem prob;
    prob.data = d2();
    prob.schema = xyz();
    prob.sigma = y_indep_z();
    prob.reg.epsilon = 0.01;
    return prob;
}

// Oracle for products over two binary attributes: 17 grid points per factor
// parameter, exact inner solves.
double grid_oracle_2x2(const DiscreteDistribution& mu, const CostMatrix& cost) {
    double best = 1e18;
    for (int ia = 0; ia <= 16; ++ia)
        for (int ib = 0; ib <= 16; ++ib) {
            const double qa = ia / 16.0, qb = ib / 16.0;
            const std::vector<double> q = {(1 - qa) * (1 - qb), (1 - qa) * qb,
                                           qa * (1 - qb), qa * qb};
            best = std::min(best, exact_ot(mu.masses(), q, cost).cost);
        }
    return best;
}

// Oracle for saturated X ci Y | Z over three binary attributes.
double grid_oracle_2x2x2(const Schema& s, const DiscreteDistribution& mu,
                         const CostMatrix& cost, int grid) {
    double best = 1e18;
    const double step = 1.0 / (grid - 1);
    for (int iz = 0; iz < grid; ++iz)
        for (int x0 = 0; x0 < grid; ++x0)
            for (int x1 = 0; x1 < grid; ++x1)
                for (int y0 = 0; y0 < grid; ++y0)
                    for (int y1 = 0; y1 < grid; ++y1) {
                        const double pz = iz * step;
                        const double px[2] = {x0 * step, x1 * step};
                        const double py[2] = {y0 * step, y1 * step};
                        std::vector<double> q(s.joint_size());
                        for (std::size_t i = 0; i < q.size(); ++i) {
                            const Tuple t = s.decode(i);
                            const double qz = t[2] == 1 ? pz : 1 - pz;
                            const double qx = t[0] == 1 ? px[t[2]] : 1 - px[t[2]];
                            const double qy = t[1] == 1 ? py[t[2]] : 1 - py[t[2]];
                            q[i] = qz * qx * qy;
                        }
                        best = std::min(best, exact_ot(mu.masses(), q, cost).cost);
                    }
    return best;
}

} // namespace

TEST_CASE("d2 repair: bounded cost, exact source marginal, feasible target") {
    const auto res = solve_probabilistic_cleaner(d2_problem());
    CHECK(res.transport_cost <= 0.25 + 0.01);
    CHECK(res.lifted); // Y ci Z does not cover X
    CHECK(res.ci_violation_before == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(res.ci_violation_after <= 1e-6);
    CHECK(res.status == SolveStatus::Converged);
    const auto p = empirical_distribution(d2(), xyz());
    CHECK(l1_violation(res.plan.row_marginal(), p.masses()) <= 1e-9);
    CHECK(satisfies_ci(res.target, y_indep_z(), 1e-6).satisfied);
}

TEST_CASE("already-consistent input returns the identity plan at cost zero") {
    RepairProblem prob = d2_problem();
    prob.data = d2_repaired();
    const auto res = solve_probabilistic_cleaner(prob);
    CHECK(res.transport_cost == 0.0);
    CHECK(res.iterations == 0);
    CHECK(res.status == SolveStatus::Converged);
    const auto p = empirical_distribution(prob.data, prob.schema);
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(res.plan.at(i, i) == doctest::Approx(p.mass(i)).epsilon(1e-12));
}

TEST_CASE("single distinct tuple is already consistent") {
    RepairProblem prob = d2_problem();
    prob.data.assign(5, Tuple{1, 1, 1});
    const auto res = solve_probabilistic_cleaner(prob);
    CHECK(res.transport_cost == 0.0);
    CHECK(res.iterations == 0);
}

TEST_CASE("all /8-rational 2x2 instances stay within 0.02 of the grid oracle") {
    const Schema s = binary_schema({"A", "B"});
    const auto cost = hamming_cost(s);
    const CIConstraint sigma{{"A"}, {"B"}, {}};
    int checked = 0;
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; a + b <= 8; ++b)
            for (int c = 0; a + b + c <= 8; ++c) {
                const int e = 8 - a - b - c;
                std::vector<Tuple> data;
                for (int k = 0; k < a; ++k) data.push_back({0, 0});
                for (int k = 0; k < b; ++k) data.push_back({0, 1});
                for (int k = 0; k < c; ++k) data.push_back({1, 0});
                for (int k = 0; k < e; ++k) data.push_back({1, 1});
                if (data.empty()) continue;
                RepairProblem prob;
                prob.data = data;
                prob.schema = s;
                prob.sigma = sigma;
                prob.reg.epsilon = 0.01;
                const auto res = solve_probabilistic_cleaner(prob);
                const double oracle =
                    grid_oracle_2x2(empirical_distribution(data, s), cost);
                CHECK(res.transport_cost <= oracle + 0.02);
                ++checked;
            }
    CHECK(checked == 165); // compositions of 8 into 4 non-negative parts
}

TEST_CASE("sampled 2x2x2 instances stay within 0.02 of the nested grid oracle") {
    const Schema s = binary_schema({"X", "Y", "Z"});
    const auto cost = hamming_cost(s);
    const CIConstraint sigma{{"X"}, {"Y"}, {"Z"}};
    std::mt19937_64 gen(42);
    for (int inst = 0; inst < 8; ++inst) {
        std::vector<Tuple> data;
        for (int k = 0; k < 8; ++k) data.push_back(s.decode(gen() % s.joint_size()));
        RepairProblem prob;
        prob.data = data;
        prob.schema = s;
        prob.sigma = sigma;
        prob.reg.epsilon = 0.01;
        const auto res = solve_probabilistic_cleaner(prob);
        const double oracle =
            grid_oracle_2x2x2(s, empirical_distribution(data, s), cost, 9);
        CHECK(res.transport_cost <= oracle + 0.02);
        CHECK(res.ci_violation_after <= prob.ci_tol);
        CHECK(l1_violation(res.plan.row_marginal(),
                           empirical_distribution(data, s).masses()) <= 1e-9);
    }
}

TEST_CASE("one 2x2x2 instance against the full 17-point grid oracle") {
    const Schema s = binary_schema({"X", "Y", "Z"});
    const auto cost = hamming_cost(s);
    std::vector<Tuple> data = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 0},
                               {1, 1, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
    RepairProblem prob;
    prob.data = data;
    prob.schema = s;
    prob.sigma = {{"X"}, {"Y"}, {"Z"}};
    prob.reg.epsilon = 0.01;
    const auto res = solve_probabilistic_cleaner(prob);
    const double oracle = grid_oracle_2x2x2(s, empirical_distribution(data, s), cost, 17);
    CHECK(res.transport_cost <= oracle + 0.02);
}

TEST_CASE("cleaner rows from the split-edge reference plan") {
    const Schema s = xyz();
    TransportPlan plan{s.joint_size(), s.joint_size(),
                       std::vector<double>(s.joint_size() * s.joint_size(), 0.0)};
    plan.at(s.encode({1, 0, 0}), s.encode({1, 0, 0})) = 0.25;
    plan.at(s.encode({1, 0, 1}), s.encode({1, 0, 1})) = 0.25;
    plan.at(s.encode({1, 1, 0}), s.encode({1, 1, 0})) = 0.25;
    plan.at(s.encode({1, 1, 0}), s.encode({1, 1, 1})) = 0.25;
    const auto cleaner = cleaner_from_plan(plan);
    const auto& row = cleaner.row_for(s.encode({1, 1, 0}));
    CHECK(row[s.encode({1, 1, 0})] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(row[s.encode({1, 1, 1})] == doctest::Approx(0.5).epsilon(1e-12));
    const auto& fixed = cleaner.row_for(s.encode({1, 0, 0}));
    CHECK(fixed[s.encode({1, 0, 0})] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(cleaner.row_for(s.encode({0, 0, 0})), std::invalid_argument);
}

TEST_CASE("cleaner rows always sum to one") {
    std::mt19937_64 gen(91);
    TransportPlan plan{6, 6, std::vector<double>(36)};
    for (double& m : plan.mass)
        m = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const auto cleaner = cleaner_from_plan(plan);
    for (const auto& row : cleaner.rows) {
        double sum = 0.0;
        for (double v : row) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("apply_cleaner: identity cleaner echoes input; seeds are reproducible") {
    const Schema s = xyz();
    TransportPlan plan{s.joint_size(), s.joint_size(),
                       std::vector<double>(s.joint_size() * s.joint_size(), 0.0)};
    const auto p = empirical_distribution(d2(), s);
    for (std::size_t i = 0; i < s.joint_size(); ++i) plan.at(i, i) = p.mass(i);
    const auto cleaner = cleaner_from_plan(plan);
    CHECK(apply_cleaner(d2(), s, cleaner, 123) == d2());

    // the split-row cleaner: deterministic per seed
    TransportPlan split = plan;
    split.at(s.encode({1, 1, 0}), s.encode({1, 1, 0})) = 0.25;
    split.at(s.encode({1, 1, 0}), s.encode({1, 1, 1})) = 0.25;
    const auto split_cleaner = cleaner_from_plan(split);
    const auto out1 = apply_cleaner(d2(), s, split_cleaner, 7);
    const auto out2 = apply_cleaner(d2(), s, split_cleaner, 7);
    CHECK(out1 == out2);
    const auto out3 = apply_cleaner(d2(), s, split_cleaner, 8);
    CHECK(out1.size() == out3.size());
}

TEST_CASE("applying the split cleaner to d3 concentrates near the binomial mean") {
    const Schema s = xyz();
    std::vector<Tuple> d3;
    for (int rep = 0; rep < 5000; ++rep)
        for (const auto& t : d2()) d3.push_back(t);
    TransportPlan plan{s.joint_size(), s.joint_size(),
                       std::vector<double>(s.joint_size() * s.joint_size(), 0.0)};
    const auto p = empirical_distribution(d2(), s);
    for (std::size_t i = 0; i < s.joint_size(); ++i) plan.at(i, i) = p.mass(i);
    plan.at(s.encode({1, 1, 0}), s.encode({1, 1, 0})) = 0.25;
    plan.at(s.encode({1, 1, 0}), s.encode({1, 1, 1})) = 0.25;
    const auto cleaner = cleaner_from_plan(plan);

    const auto repaired = apply_cleaner(d3, s, cleaner, 2024);
    REQUIRE(repaired.size() == d3.size());
    std::size_t count = 0;
    for (const auto& t : repaired)
        if (t == Tuple{1, 1, 1}) ++count;
    // 10,000 Bernoulli(1/2) trials: 3 sigma = 150
    CHECK(count >= 5000 - 150);
    CHECK(count <= 5000 + 150);
    const auto emp = empirical_distribution(repaired, s);
    CHECK(satisfies_ci(emp, y_indep_z(), 0.02).satisfied);
}

TEST_CASE("deterministic map on d1 finds the cost-1 single-attribute repair") {
    RepairProblem prob;
    prob.data = d1();
    prob.schema = xyz();
    prob.sigma = y_indep_z();
    const auto res = solve_deterministic_map(prob);
    CHECK(res.total_cost == doctest::Approx(1.0).epsilon(1e-12));
    // verify feasibility of the returned map by applying it
    std::map<std::size_t, std::size_t> mapping;
    for (std::size_t i = 0; i < res.support.size(); ++i)
        mapping[res.support[i]] = res.mapped_to[i];
    std::vector<Tuple> mapped;
    for (const auto& t : d1()) mapped.push_back(prob.schema.decode(mapping[prob.schema.encode(t)]));
    CHECK(satisfies_ci(empirical_distribution(mapped, prob.schema), prob.sigma, 1e-9)
              .satisfied);
}

TEST_CASE("deterministic map on consistent input is the identity at cost zero") {
    RepairProblem prob;
    prob.data = d2_repaired();
    prob.schema = xyz();
    prob.sigma = y_indep_z();
    const auto res = solve_deterministic_map(prob);
    CHECK(res.total_cost == 0.0);
    for (std::size_t i = 0; i < res.support.size(); ++i)
        CHECK(res.mapped_to[i] == res.support[i]);
}

TEST_CASE("no transport map sends d2 onto the four-tuple repair multiset") {
    // the worked counterexample: (1,1,0) cannot map to two targets at once
    const Schema s = xyz();
    const std::vector<std::size_t> support = {s.encode({1, 0, 0}), s.encode({1, 0, 1}),
                                              s.encode({1, 1, 0})};
    std::map<std::size_t, int> want;
    for (const auto& t : d2_repaired()) want[s.encode(t)] += 1;
    const std::size_t d = s.joint_size();
    bool found = false;
    for (std::size_t t0 = 0; t0 < d && !found; ++t0)
        for (std::size_t t1 = 0; t1 < d && !found; ++t1)
            for (std::size_t t2 = 0; t2 < d && !found; ++t2) {
                std::map<std::size_t, int> got;
                got[t0] += 1;
                got[t1] += 1;
                got[t2] += 2; // (1,1,0) appears twice in the bag
                found = got == want;
            }
    CHECK_FALSE(found);
}

TEST_CASE("deterministic optimum dominates the probabilistic optimum per row") {
    std::mt19937_64 gen(99);
    const Schema s = binary_schema({"A", "B"});
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Tuple> data;
        for (int k = 0; k < 8; ++k) data.push_back(s.decode(gen() % s.joint_size()));
        RepairProblem prob;
        prob.data = data;
        prob.schema = s;
        prob.sigma = {{"A"}, {"B"}, {}};
        prob.reg.epsilon = 0.01;
        const auto det = solve_deterministic_map(prob);
        const auto prb = solve_probabilistic_cleaner(prob);
        CHECK(det.per_row_cost >= prb.transport_cost - 1e-6);
    }
}

TEST_CASE("lift: empty W is the identity; random lifts preserve cost") {
    std::mt19937_64 gen(101);
    const Schema s = binary_schema({"U1", "U2", "W"});
    for (int rep = 0; rep < 20; ++rep) {
        // random full distribution and a random coupling on the U-marginal
        const auto p_full = random_distribution(gen, s);
        const auto p_u = marginal(p_full, {"U1", "U2"});
        const Schema& us = p_u.schema();
        const auto cost_u = hamming_cost(us);

        std::vector<double> target(us.joint_size());
        double total = 0.0;
        for (double& x : target)
            total += x = -std::log(std::uniform_real_distribution<double>(1e-9, 1.0)(gen));
        for (double& x : target) x /= total;
        const auto pi_s = exact_ot(p_u.masses(), target, cost_u).plan;

        const auto lifted = lift_unsaturated(pi_s, p_full, {"U1", "U2"}, {"W"});
        CHECK(l1_violation(lifted.row_marginal(), p_full.masses()) <= 1e-9);

        const auto cost_v = hamming_cost(s);
        const double lifted_cost = lifted.cost_against(cost_v);
        const double base_cost = pi_s.cost_against(cost_u);
        CHECK(lifted_cost == doctest::Approx(base_cost).epsilon(1e-12));
    }
}

TEST_CASE("lift: target U-marginal of the lifted plan is the plan's target") {
    std::mt19937_64 gen(102);
    const Schema s = binary_schema({"U1", "U2", "W"});
    const auto p_full = random_distribution(gen, s);
    const auto p_u = marginal(p_full, {"U1", "U2"});
    const Schema& us = p_u.schema();

    // CI-feasible product target over (U1, U2)
    std::vector<double> qa = {0.3, 0.7}, qb = {0.8, 0.2};
    std::vector<double> target(us.joint_size());
    for (std::size_t i = 0; i < us.joint_size(); ++i) {
        const Tuple t = us.decode(i);
        target[i] = qa[t[0]] * qb[t[1]];
    }
    const auto pi_s = exact_ot(p_u.masses(), target, hamming_cost(us)).plan;
    const auto lifted = lift_unsaturated(pi_s, p_full, {"U1", "U2"}, {"W"});

    const DiscreteDistribution lifted_target(s, lifted.col_marginal());
    const auto restricted = marginal(lifted_target, {"U1", "U2"});
    CHECK(l1_distance(restricted, DiscreteDistribution(us, target)) <= 1e-9);
    CHECK(satisfies_ci(restricted, {{"U1"}, {"U2"}, {}}, 1e-9).satisfied);
}

TEST_CASE("lift with empty W returns the plan unchanged") {
    std::mt19937_64 gen(104);
    const Schema us = binary_schema({"U1", "U2"});
    const auto p_u = random_distribution(gen, us);
    std::vector<double> target(us.joint_size(), 0.25);
    const auto pi_s = exact_ot(p_u.masses(), target, hamming_cost(us)).plan;
    const auto lifted = lift_unsaturated(pi_s, p_u, {"U1", "U2"}, {});
    CHECK(lifted.mass == pi_s.mass);
}

TEST_CASE("deterministic map enforces its size limits") {
    RepairProblem prob;
    prob.schema = Schema({{"A", {"0", "1", "2", "3", "4", "5"}},
                          {"B", {"0", "1", "2", "3", "4", "5"}}}); // joint 36 > 16
    prob.data = {{0, 0}, {1, 1}};
    prob.sigma = {{"A"}, {"B"}, {}};
    CHECK_THROWS_AS(solve_deterministic_map(prob), std::invalid_argument);

    RepairProblem wide;
    wide.schema = binary_schema({"A", "B", "C", "D"});
    // 13 distinct tuples exceed the support limit
    for (std::uint32_t i = 0; i < 13; ++i) wide.data.push_back(wide.schema.decode(i));
    wide.sigma = {{"A"}, {"B"}, {"C", "D"}};
    CHECK_THROWS_AS(solve_deterministic_map(wide), std::invalid_argument);
}

TEST_CASE("lift rejects marginal mismatches") {
    std::mt19937_64 gen(103);
    const Schema s = binary_schema({"U1", "U2", "W"});
    const auto p_full = random_distribution(gen, s);
    TransportPlan bogus{4, 4, std::vector<double>(16, 1.0 / 16)};
    CHECK_THROWS_AS(lift_unsaturated(bogus, p_full, {"U1", "U2"}, {"W"}),
                    std::invalid_argument);
}
