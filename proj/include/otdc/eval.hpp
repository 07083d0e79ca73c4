#pragma once
// Repair evaluation: statistical distortion between original and repaired
// bags (exact OT under the repair cost), synthetic corruption generators
// (attribute noise, MAR/MNAR missingness), and the corrupt-repair-measure
// experiment loop.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "otdc/ci_repair.hpp"
#include "otdc/csv.hpp"
#include "otdc/distribution.hpp"
#include "otdc/exact_ot.hpp"
#include "otdc/rng.hpp"

namespace otdc {

inline const std::string kMissingToken = "MISSING";

struct DistortionReport {
    double emd = 0.0;         // OT distance between the two empirical distributions
    double repair_cost = 0.0; // filled by the experiment pipeline
    double ci_violation_before = 0.0;
    double ci_violation_after = 0.0;
    std::size_t rows_changed = 0;
};

// Exact OT distance between the empirical distributions of two bags over the
// same schema. rows_changed counts original tuples with no counterpart in
// the repaired bag, so row order never matters.
inline DistortionReport statistical_distortion(const std::vector<Tuple>& original,
                                               const std::vector<Tuple>& repaired,
                                               const Schema& schema, CostKind cost_kind) {
    if (original.empty() || repaired.empty())
        throw InputError("distortion: datasets must be non-empty");
    const DiscreteDistribution po = empirical_distribution(original, schema);
    const DiscreteDistribution pr = empirical_distribution(repaired, schema);
    const CostMatrix cost = make_cost(schema, cost_kind);
    DistortionReport report;
    report.emd = exact_ot(po, pr, cost).cost;
    std::vector<long long> counts(schema.joint_size(), 0);
    for (const auto& t : original) counts[schema.encode(t)] += 1;
    for (const auto& t : repaired) counts[schema.encode(t)] -= 1;
    long long changed = 0;
    for (long long c : counts)
        if (c > 0) changed += c;
    report.rows_changed = static_cast<std::size_t>(changed);
    return report;
}

enum class CorruptionKind { AttributeNoise, MAR, MNAR };

inline CorruptionKind parse_corruption_kind(const std::string& s) {
    if (s == "noise") return CorruptionKind::AttributeNoise;
    if (s == "mar") return CorruptionKind::MAR;
    if (s == "mnar") return CorruptionKind::MNAR;
    throw InputError("unknown corruption kind '" + s + "' (expected noise, mar or mnar)");
}

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::AttributeNoise;
    std::string target_attr;
    std::vector<std::string> driver_attrs;
    double rate = 0.0;
    std::uint64_t seed = 0;

    void validate(const Schema& schema) const {
        if (!(rate >= 0.0 && rate <= 1.0))
            throw InputError("corruption: rate must be in [0,1]");
        (void)schema.index_of(target_attr);
        if (driver_attrs.empty()) throw InputError("corruption: driver attributes required");
        for (const auto& d : driver_attrs) {
            (void)schema.index_of(d);
            if (d == target_attr)
                throw InputError("corruption: target must not be one of the drivers");
        }
    }
};

struct CorruptionResult {
    Schema schema; // extended with MISSING for the masking kinds
    std::vector<Tuple> rows;
};

namespace detail {

// Per-driver-combination rate multiplier: 1 for combination 0, 2 otherwise.
inline double g_multiplier(std::size_t combo) { return combo == 0 ? 1.0 : 2.0; }

} // namespace detail

// Seeded deterministic corruption. Attribute noise flips the target to a
// different domain value with probability rate * g(drivers); MAR masks the
// target with probability driven by the drivers; MNAR additionally keys the
// multiplier on the target's own value.
inline CorruptionResult inject_corruption(const std::vector<Tuple>& data,
                                          const CorruptionSpec& spec, const Schema& schema) {
    spec.validate(schema);
    const std::size_t target = schema.index_of(spec.target_attr);
    std::vector<std::size_t> drivers;
    for (const auto& d : spec.driver_attrs) drivers.push_back(schema.index_of(d));

    CorruptionResult out;
    const bool masking = spec.kind != CorruptionKind::AttributeNoise;
    if (masking) {
        std::vector<Attribute> attrs = schema.attrs();
        for (const auto& v : attrs[target].domain)
            if (v == kMissingToken)
                throw InputError("corruption: target domain already contains '" +
                                 kMissingToken + "'");
        attrs[target].domain.push_back(kMissingToken);
        out.schema = Schema(std::move(attrs));
    } else {
        out.schema = schema;
    }
    const std::uint32_t missing_index =
        static_cast<std::uint32_t>(out.schema.attr(target).domain.size() - 1);

    auto driver_combo = [&](const Tuple& t) {
        std::size_t c = 0;
        for (std::size_t d : drivers) c = c * schema.domain_size(d) + t[d];
        return c;
    };
    std::size_t n_driver_combos = 1;
    for (std::size_t d : drivers) n_driver_combos *= schema.domain_size(d);

    SeededRng rng(spec.seed);
    out.rows.reserve(data.size());
    const std::size_t k = schema.domain_size(target);
    for (const auto& row : data) {
        Tuple t = row;
        std::size_t combo = driver_combo(t);
        if (spec.kind == CorruptionKind::MNAR)
            combo = t[target] * n_driver_combos + combo; // keyed on own value and drivers
        const double p = std::min(1.0, spec.rate * detail::g_multiplier(combo));
        if (spec.rate > 0.0 && rng.bernoulli(p)) {
            if (spec.kind == CorruptionKind::AttributeNoise) {
                if (k > 1) {
                    const auto shift =
                        1 + static_cast<std::uint32_t>(rng.uniform01() * (k - 1));
                    t[target] = (t[target] + shift) % static_cast<std::uint32_t>(k);
                }
            } else {
                t[target] = missing_index;
            }
        }
        out.rows.push_back(std::move(t));
    }
    return out;
}

struct ExperimentReport {
    double ci_violation_clean = 0.0;
    double ci_violation_corrupted = 0.0;
    double ci_violation_repaired_dist = 0.0;    // of the solver's target distribution
    double ci_violation_repaired_sampled = 0.0; // of the resampled dataset
    double repair_cost = 0.0;
    double distortion = 0.0; // corrupted vs repaired rows, exact OT
    double repaired_to_clean = 0.0;
    double corrupted_to_clean = 0.0;
    std::size_t rows_changed = 0;
    SolveStatus status = SolveStatus::Converged;
};

// corrupt -> repair -> measure. The clean data is re-expressed over the
// corrupted (possibly MISSING-extended) schema so all distances share one
// joint domain.
inline ExperimentReport run_experiment(const std::vector<Tuple>& clean,
                                       const CorruptionSpec& spec,
                                       const RepairProblem& prob_template) {
    const Schema& base = prob_template.schema;
    CorruptionResult corrupted = inject_corruption(clean, spec, base);
    const Schema& schema = corrupted.schema;

    RepairProblem prob = prob_template;
    prob.schema = schema;
    prob.data = corrupted.rows;
    const RepairResult repair = solve_probabilistic_cleaner(prob);

    const std::vector<Tuple> repaired =
        apply_cleaner(corrupted.rows, schema, repair.cleaner, spec.seed ^ 0x5DEECE66Dull);

    ExperimentReport report;
    report.ci_violation_clean =
        satisfies_ci(empirical_distribution(clean, schema), prob.sigma, 0.0).violation;
    report.ci_violation_corrupted = repair.ci_violation_before;
    report.ci_violation_repaired_dist = repair.ci_violation_after;
    report.ci_violation_repaired_sampled =
        satisfies_ci(empirical_distribution(repaired, schema), prob.sigma, 0.0).violation;
    report.repair_cost = repair.transport_cost;
    report.status = repair.status;

    const DistortionReport dist =
        statistical_distortion(corrupted.rows, repaired, schema, prob.cost);
    report.distortion = dist.emd;
    report.rows_changed = dist.rows_changed;
    report.repaired_to_clean =
        statistical_distortion(repaired, clean, schema, prob.cost).emd;
    report.corrupted_to_clean =
        statistical_distortion(corrupted.rows, clean, schema, prob.cost).emd;
    return report;
}

} // namespace otdc
