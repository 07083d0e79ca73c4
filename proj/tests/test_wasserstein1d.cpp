#include <doctest.h>

#include <cmath>
#include <random>

#include "otdc/exact_ot.hpp"
#include "otdc/wasserstein1d.hpp"

using namespace otdc;

namespace {

Weighted1D random_points(std::mt19937_64& gen, std::size_t n) {
    Weighted1D out;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
        const double w = -std::log(std::uniform_real_distribution<double>(1e-12, 1.0)(gen));
        out.push_back({v, w});
        total += w;
    }
    for (auto& s : out) s.weight /= total;
    return out;
}

} // namespace

TEST_CASE("distance to itself is zero; translation of point masses is exact") {
    std::mt19937_64 gen(81);
    const auto p = random_points(gen, 8);
    CHECK(wasserstein_1d(p, p, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(wasserstein_1d(p, p, 2.0) == doctest::Approx(0.0).epsilon(1e-12));

    const Weighted1D zero = {{0.0, 1.0}};
    const Weighted1D one = {{1.0, 1.0}};
    CHECK(wasserstein_1d(zero, one, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(wasserstein_1d({}, one, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein_1d(zero, one, 0.5), std::invalid_argument);
}

TEST_CASE("order-2 distance matches the exact OT solver on discrete supports") {
    std::mt19937_64 gen(82);
    for (int rep = 0; rep < 8; ++rep) {
        const auto p = random_points(gen, 10);
        const auto q = random_points(gen, 10);
        const double w2 = wasserstein_1d(p, q, 2.0);

        CostMatrix cost{p.size(), q.size(), std::vector<double>(p.size() * q.size())};
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < q.size(); ++j) {
                const double d = p[i].value - q[j].value;
                cost.at(i, j) = d * d;
            }
        std::vector<double> mu, nu;
        for (const auto& s : p) mu.push_back(s.weight);
        for (const auto& s : q) nu.push_back(s.weight);
        const double exact = std::sqrt(exact_ot(mu, nu, cost).cost);
        CHECK(w2 == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("wasserstein_1d is a metric on random triples") {
    std::mt19937_64 gen(83);
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = random_points(gen, 6);
        const auto q = random_points(gen, 7);
        const auto r = random_points(gen, 5);
        for (double order : {1.0, 2.0}) {
            const double pq = wasserstein_1d(p, q, order);
            const double qp = wasserstein_1d(q, p, order);
            CHECK(pq == qp); // symmetry, bitwise
            CHECK(pq <= wasserstein_1d(p, r, order) + wasserstein_1d(r, q, order) + 1e-9);
        }
    }
}

TEST_CASE("ties in support are merged before inversion") {
    const Weighted1D tied = {{0.5, 0.25}, {0.5, 0.25}, {0.0, 0.5}};
    const Weighted1D merged = {{0.5, 0.5}, {0.0, 0.5}};
    CHECK(wasserstein_1d(tied, merged, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("barycenter endpoints reproduce the inputs up to grid resampling") {
    std::mt19937_64 gen(84);
    const auto p = random_points(gen, 9);
    const auto q = random_points(gen, 4);
    const int grid = 512;
    const double range = 1.0;
    const auto at_p = barycenter_1d(p, q, 1.0, grid);
    const auto at_q = barycenter_1d(p, q, 0.0, grid);
    CHECK(wasserstein_1d(at_p, p, 1.0) <= range / grid);
    CHECK(wasserstein_1d(at_q, q, 1.0) <= range / grid);
}

TEST_CASE("midpoint barycenter of point masses is the midpoint") {
    const Weighted1D zero = {{0.0, 1.0}};
    const Weighted1D one = {{1.0, 1.0}};
    const auto mid = barycenter_1d(zero, one, 0.5, 16);
    for (const auto& s : mid) CHECK(s.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(barycenter_1d(zero, one, 1.5, 16), std::invalid_argument);
    CHECK_THROWS_AS(barycenter_1d(zero, one, 0.5, 1), std::invalid_argument);
}

TEST_CASE("half-weight barycenter is W2-equidistant within grid resolution") {
    std::mt19937_64 gen(85);
    const auto p = random_points(gen, 7);
    const auto q = random_points(gen, 6);
    const int grid = 2048;
    const auto b = barycenter_1d(p, q, 0.5, grid);
    const double dp = wasserstein_1d(p, b, 2.0);
    const double dq = wasserstein_1d(q, b, 2.0);
    CHECK(std::abs(dp - dq) <= 4.0 / grid + 1e-6);
}
