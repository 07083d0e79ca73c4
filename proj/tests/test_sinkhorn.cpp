#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "otdc/exact_ot.hpp"
#include "otdc/sinkhorn.hpp"

using namespace otdc;
using namespace fixtures;

namespace {

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v)
        total += x = -std::log(std::uniform_real_distribution<double>(1e-12, 1.0)(gen));
    for (double& x : v) x /= total;
    return v;
}

CostMatrix random_cost(std::mt19937_64& gen, std::size_t m, std::size_t n) {
    CostMatrix c{m, n, std::vector<double>(m * n)};
    for (double& x : c.entries) x = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    return c;
}

} // namespace

TEST_CASE("identical point masses converge in one iteration") {
    std::vector<double> mu = {0.0, 1.0, 0.0};
    CostMatrix c{3, 3, std::vector<double>(9, 1.0)};
    for (std::size_t i = 0; i < 3; ++i) c.at(i, i) = 0.0;
    SinkhornConfig cfg;
    const auto res = sinkhorn(mu, mu, c, cfg);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.iterations == 1);
    CHECK(res.plan.at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.residual <= cfg.tol);
}

TEST_CASE("d2 instance at eps=0.01 lands within 5e-3 of the exact cost") {
    const Schema s = xyz();
    const auto mu = empirical_distribution(d2(), s);
    std::vector<double> nu(s.joint_size(), 0.0);
    for (const auto& t : d2_repaired()) nu[s.encode(t)] += 0.25;
    const auto cost = hamming_cost(s);
    SinkhornConfig cfg;
    cfg.epsilon = 0.01;
    const auto res = sinkhorn(mu.masses(), nu, cost, cfg);
    const double exact = exact_ot(mu.masses(), nu, cost).cost;
    CHECK(exact == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(res.plan.cost_against(cost) - exact) <= 5e-3);
}

TEST_CASE("marginal violations obey the configured tolerance") {
    std::mt19937_64 gen(71);
    const auto mu = random_simplex(gen, 5);
    const auto nu = random_simplex(gen, 5);
    const auto cost = random_cost(gen, 5, 5);
    SinkhornConfig cfg;
    cfg.epsilon = 0.1;
    const auto res = sinkhorn(mu, nu, cost, cfg);
    REQUIRE(res.status == SolveStatus::Converged);
    CHECK(l1_violation(res.plan.row_marginal(), mu) +
              l1_violation(res.plan.col_marginal(), nu) <=
          10 * cfg.tol);
}

TEST_CASE("regularized cost approaches the exact cost monotonically in eps") {
    std::mt19937_64 gen(72);
    for (int rep = 0; rep < 5; ++rep) {
        const auto mu = random_simplex(gen, 5);
        const auto nu = random_simplex(gen, 5);
        const auto cost = random_cost(gen, 5, 5);
        const double exact = exact_ot(mu, nu, cost).cost;
        double prev_gap = 1e18;
        for (double eps : {1.0, 0.1, 0.01}) {
            SinkhornConfig cfg;
            cfg.epsilon = eps;
            const auto res = sinkhorn(mu, nu, cost, cfg);
            const double gap = std::abs(res.plan.cost_against(cost) - exact);
            CHECK(gap <= prev_gap + 1e-9);
            prev_gap = gap;
            if (eps == 0.01) CHECK(gap <= 5e-3);
        }
    }
}

TEST_CASE("forced log domain agrees with the linear domain") {
    std::mt19937_64 gen(73);
    const auto mu = random_simplex(gen, 4);
    const auto nu = random_simplex(gen, 4);
    const auto cost = random_cost(gen, 4, 4);
    SinkhornConfig lin;
    lin.epsilon = 0.05;
    SinkhornConfig logd = lin;
    logd.log_domain = true;
    const auto a = sinkhorn(mu, nu, cost, lin);
    const auto b = sinkhorn(mu, nu, cost, logd);
    CHECK_FALSE(a.used_log_domain);
    CHECK(b.used_log_domain);
    for (std::size_t k = 0; k < a.plan.mass.size(); ++k)
        CHECK(a.plan.mass[k] == doctest::Approx(b.plan.mass[k]).epsilon(1e-6));
}

TEST_CASE("tiny eps auto-engages the log domain instead of underflowing") {
    const Schema s = binary_schema({"A", "B", "C", "D", "E"});
    std::mt19937_64 gen(74);
    const auto mu = random_simplex(gen, s.joint_size());
    const auto nu = random_simplex(gen, s.joint_size());
    const auto cost = hamming_cost(s); // max cost 5, eps 1e-3 -> exp(-5000) = 0
    SinkhornConfig cfg;
    cfg.epsilon = 1e-3;
    const auto res = sinkhorn(mu, nu, cost, cfg);
    CHECK(res.used_log_domain);
    for (double m : res.plan.mass) CHECK(std::isfinite(m));
    CHECK(l1_violation(res.plan.row_marginal(), mu) <= 1e-6);
}

TEST_CASE("hitting max_iter reports status instead of crashing") {
    std::mt19937_64 gen(75);
    const auto mu = random_simplex(gen, 6);
    const auto nu = random_simplex(gen, 6);
    const auto cost = random_cost(gen, 6, 6);
    SinkhornConfig cfg;
    cfg.epsilon = 0.01;
    cfg.max_iter = 2;
    const auto res = sinkhorn(mu, nu, cost, cfg);
    CHECK(res.status == SolveStatus::MaxIterations);
    CHECK(res.iterations == 2);
    CHECK(res.residual > cfg.tol);
}
