#pragma once
// Shared test fixtures: small binary datasets used across suites.

#include <random>
#include <string>
#include <vector>

#include "otdc/distribution.hpp"
#include "otdc/schema.hpp"

namespace fixtures {

inline otdc::Schema binary_schema(const std::vector<std::string>& names) {
    std::vector<otdc::Attribute> attrs;
    for (const auto& n : names) attrs.push_back({n, {"0", "1"}});
    return otdc::Schema(std::move(attrs));
}

inline otdc::Schema xyz() { return binary_schema({"X", "Y", "Z"}); }

// d1 violates Y ci Z with the (1,0) cell at 1/4 against a 1/8 product.
inline std::vector<otdc::Tuple> d1() {
    return {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {0, 1, 0}};
}

// d2 is a bag: (1,1,0) appears twice.
inline std::vector<otdc::Tuple> d2() {
    return {{1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 0}};
}

// The consistent four-tuple repair of d2.
inline std::vector<otdc::Tuple> d2_repaired() {
    return {{1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}};
}

inline otdc::CIConstraint y_indep_z() { return {{"Y"}, {"Z"}, {}}; }

inline std::vector<otdc::Tuple> random_binary_rows(std::mt19937_64& gen, std::size_t n,
                                                   std::size_t n_attrs) {
    std::vector<otdc::Tuple> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        otdc::Tuple t(n_attrs);
        for (auto& v : t) v = static_cast<std::uint32_t>(gen() & 1);
        rows.push_back(std::move(t));
    }
    return rows;
}

// Random distribution with Dirichlet(1) masses.
inline otdc::DiscreteDistribution random_distribution(std::mt19937_64& gen,
                                                      const otdc::Schema& schema) {
    std::vector<double> mass(schema.joint_size());
    double total = 0.0;
    for (double& m : mass) {
        const double u = std::uniform_real_distribution<double>(1e-12, 1.0)(gen);
        m = -std::log(u);
        total += m;
    }
    for (double& m : mass) m /= total;
    return otdc::DiscreteDistribution(schema, std::move(mass));
}

} // namespace fixtures
