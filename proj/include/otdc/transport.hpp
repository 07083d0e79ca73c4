#pragma once
// Shared optimal-transport types: cost matrices over joint domains and
// dense transport plans (couplings).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "otdc/distribution.hpp"
#include "otdc/schema.hpp"

namespace otdc {

struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries; // row-major, all >= 0 and finite

    double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }

    void validate() const {
        if (entries.size() != rows * cols)
            throw std::invalid_argument("cost: entry count != rows*cols");
        for (double c : entries)
            if (!(c >= 0.0) || !std::isfinite(c))
                throw std::invalid_argument("cost: entries must be finite and >= 0");
    }
};

enum class CostKind { Hamming, SqEuclidean };

inline CostKind parse_cost_kind(const std::string& name) {
    if (name == "hamming") return CostKind::Hamming;
    if (name == "sqeuclid") return CostKind::SqEuclidean;
    throw InputError("unknown cost '" + name + "' (expected hamming or sqeuclid)");
}

// Count of differing attribute values between joint tuples i and j.
inline CostMatrix hamming_cost(const Schema& schema) {
    const std::size_t d = schema.joint_size();
    CostMatrix c{d, d, std::vector<double>(d * d, 0.0)};
    std::vector<Tuple> tuples(d);
    for (std::size_t i = 0; i < d; ++i) tuples[i] = schema.decode(i);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            int diff = 0;
            for (std::size_t k = 0; k < schema.n_attrs(); ++k)
                diff += (tuples[i][k] != tuples[j][k]) ? 1 : 0;
            c.at(i, j) = static_cast<double>(diff);
        }
    return c;
}

namespace detail {

// Per-attribute numeric coordinates: parsed values when the whole domain is
// numeric, domain indices otherwise.
inline std::vector<std::vector<double>> numeric_codes(const Schema& schema) {
    std::vector<std::vector<double>> codes(schema.n_attrs());
    for (std::size_t k = 0; k < schema.n_attrs(); ++k) {
        const auto& dom = schema.attr(k).domain;
        std::vector<double> parsed(dom.size());
        bool all_numeric = true;
        for (std::size_t v = 0; v < dom.size(); ++v) {
            try {
                std::size_t pos = 0;
                parsed[v] = std::stod(dom[v], &pos);
                if (pos != dom[v].size()) all_numeric = false;
            } catch (const std::exception&) {
                all_numeric = false;
            }
            if (!all_numeric) break;
        }
        if (!all_numeric)
            for (std::size_t v = 0; v < dom.size(); ++v) parsed[v] = static_cast<double>(v);
        codes[k] = std::move(parsed);
    }
    return codes;
}

} // namespace detail

inline CostMatrix sqeuclid_cost(const Schema& schema) {
    const std::size_t d = schema.joint_size();
    const auto codes = detail::numeric_codes(schema);
    CostMatrix c{d, d, std::vector<double>(d * d, 0.0)};
    std::vector<Tuple> tuples(d);
    for (std::size_t i = 0; i < d; ++i) tuples[i] = schema.decode(i);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < schema.n_attrs(); ++k) {
                const double dv = codes[k][tuples[i][k]] - codes[k][tuples[j][k]];
                s += dv * dv;
            }
            c.at(i, j) = s;
        }
    return c;
}

inline CostMatrix make_cost(const Schema& schema, CostKind kind) {
    return kind == CostKind::Hamming ? hamming_cost(schema) : sqeuclid_cost(schema);
}

struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> mass; // row-major joint masses pi(v_i, v'_j)

    double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return mass[i * cols + j]; }

    std::vector<double> row_marginal() const {
        std::vector<double> r(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) r[i] += mass[i * cols + j];
        return r;
    }
    std::vector<double> col_marginal() const {
        std::vector<double> c(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) c[j] += mass[i * cols + j];
        return c;
    }
    double cost_against(const CostMatrix& c) const {
        if (c.rows != rows || c.cols != cols)
            throw std::invalid_argument("plan: cost dimensions mismatch");
        std::vector<double> terms;
        terms.reserve(mass.size());
        for (std::size_t k = 0; k < mass.size(); ++k)
            if (mass[k] != 0.0) terms.push_back(mass[k] * c.entries[k]);
        return detail::kahan_sum(terms);
    }
};

inline double l1_violation(const std::vector<double>& got, const std::vector<double>& want) {
    if (got.size() != want.size()) throw std::invalid_argument("l1_violation: size mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) v += std::abs(got[i] - want[i]);
    return v;
}

} // namespace otdc
