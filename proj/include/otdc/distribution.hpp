#pragma once
// Discrete joint distributions over finite schemas: empirical estimation,
// marginalization, conditioning, CI checks, and the closed-form factorization
// onto a saturated CI constraint.
//
// All types are immutable after construction and every operation is a pure
// function, so concurrent use needs no synchronization.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "otdc/constraint.hpp"
#include "otdc/schema.hpp"

namespace otdc {

namespace detail {

// Compensated summation; keeps the error independent of vector length.
inline double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

} // namespace detail

class DiscreteDistribution {
  public:
    DiscreteDistribution() = default;

    // Validates non-negativity and mass ~1 (1e-9 slack for user input), then
    // renormalizes so the stored vector sums to 1 within 1e-12.
    DiscreteDistribution(Schema schema, std::vector<double> mass)
        : schema_(std::move(schema)), mass_(std::move(mass)) {
        if (mass_.size() != schema_.joint_size())
            throw std::invalid_argument("distribution: mass vector size != joint domain size");
        for (double m : mass_) {
            if (!(m >= 0.0) || !std::isfinite(m))
                throw InputError("distribution: negative or non-finite mass entry");
        }
        const double total = detail::kahan_sum(mass_);
        if (std::abs(total - 1.0) > 1e-9)
            throw InputError("distribution: mass sums to " + std::to_string(total) +
                             ", expected 1");
        if (total != 1.0)
            for (double& m : mass_) m /= total;
    }

    const Schema& schema() const { return schema_; }
    std::size_t size() const { return mass_.size(); }
    double mass(std::size_t joint_idx) const { return mass_.at(joint_idx); }
    double mass_of(const Tuple& t) const { return mass_[schema_.encode(t)]; }
    const std::vector<double>& masses() const { return mass_; }

  private:
    Schema schema_;
    std::vector<double> mass_;
};

// Empirical distribution of a bag of tuples: mass(v) = count(v)/n.
inline DiscreteDistribution empirical_distribution(const std::vector<Tuple>& dataset,
                                                   const Schema& schema) {
    if (dataset.empty()) throw InputError("empirical_distribution: empty dataset");
    std::vector<double> counts(schema.joint_size(), 0.0);
    for (const auto& t : dataset) counts[schema.encode(t)] += 1.0;
    const double n = static_cast<double>(dataset.size());
    for (double& c : counts) c /= n;
    return DiscreteDistribution(schema, std::move(counts));
}

// Sums mass over dropped attributes; output schema keeps the original
// attribute order restricted to `attrs`.
inline DiscreteDistribution marginal(const DiscreteDistribution& p,
                                     const std::vector<std::string>& attrs) {
    const Schema& s = p.schema();
    const Schema out_schema = s.restrict_to(attrs);
    std::vector<std::size_t> kept_pos(out_schema.n_attrs());
    for (std::size_t i = 0; i < out_schema.n_attrs(); ++i)
        kept_pos[i] = s.index_of(out_schema.attr(i).name);

    std::vector<double> out(out_schema.joint_size(), 0.0);
    Tuple sub(out_schema.n_attrs());
    for (std::size_t idx = 0; idx < s.joint_size(); ++idx) {
        const double m = p.mass(idx);
        if (m == 0.0) continue;
        const Tuple full = s.decode(idx);
        for (std::size_t i = 0; i < kept_pos.size(); ++i) sub[i] = full[kept_pos[i]];
        out[out_schema.encode(sub)] += m;
    }
    return DiscreteDistribution(out_schema, std::move(out));
}

// Conditional P(target | given). One row per given-combo; rows with zero
// marginal mass are flagged undefined and carry no values.
struct ConditionalTable {
    Schema given_schema;  // empty given set -> single unconditional row
    Schema target_schema;
    std::vector<std::vector<double>> rows; // [given combo][target combo]
    std::vector<bool> defined;

    std::size_t n_rows() const { return rows.size(); }
    double value(std::size_t given_idx, std::size_t target_idx) const {
        if (!defined.at(given_idx))
            throw std::invalid_argument("conditional: row undefined (zero-mass condition)");
        return rows[given_idx].at(target_idx);
    }
};

inline ConditionalTable conditional(const DiscreteDistribution& p,
                                    const std::vector<std::string>& target,
                                    const std::vector<std::string>& given) {
    for (const auto& t : target)
        for (const auto& g : given)
            if (t == g)
                throw std::invalid_argument("conditional: target and given overlap on '" + t + "'");

    std::vector<std::string> both = target;
    both.insert(both.end(), given.begin(), given.end());
    const DiscreteDistribution joint = marginal(p, both);
    const Schema& js = joint.schema();

    ConditionalTable table;
    table.target_schema = p.schema().restrict_to(target);
    if (given.empty()) {
        table.given_schema = Schema();
    } else {
        table.given_schema = p.schema().restrict_to(given);
    }
    const std::size_t n_rows = given.empty() ? 1 : table.given_schema.joint_size();
    const std::size_t n_cols = table.target_schema.joint_size();
    table.rows.assign(n_rows, std::vector<double>(n_cols, 0.0));

    std::vector<std::size_t> tpos(table.target_schema.n_attrs());
    for (std::size_t i = 0; i < tpos.size(); ++i)
        tpos[i] = js.index_of(table.target_schema.attr(i).name);
    std::vector<std::size_t> gpos(given.empty() ? 0 : table.given_schema.n_attrs());
    for (std::size_t i = 0; i < gpos.size(); ++i)
        gpos[i] = js.index_of(table.given_schema.attr(i).name);

    std::vector<double> row_mass(n_rows, 0.0);
    Tuple tt(tpos.size()), gt(gpos.size());
    for (std::size_t idx = 0; idx < js.joint_size(); ++idx) {
        const Tuple full = js.decode(idx);
        for (std::size_t i = 0; i < tpos.size(); ++i) tt[i] = full[tpos[i]];
        std::size_t g = 0;
        if (!gpos.empty()) {
            for (std::size_t i = 0; i < gpos.size(); ++i) gt[i] = full[gpos[i]];
            g = table.given_schema.encode(gt);
        }
        const double m = joint.mass(idx);
        table.rows[g][table.target_schema.encode(tt)] += m;
        row_mass[g] += m;
    }
    table.defined.assign(n_rows, false);
    for (std::size_t g = 0; g < n_rows; ++g) {
        if (row_mass[g] > 0.0) {
            table.defined[g] = true;
            for (double& v : table.rows[g]) v /= row_mass[g];
        } else {
            table.rows[g].assign(n_cols, 0.0);
        }
    }
    return table;
}

struct CICheck {
    bool satisfied = false;
    double violation = 0.0; // max_{x,y,z: P(z)>0} |P(x,y|z) - P(x|z) P(y|z)|
};

namespace detail {

// Flattened block view of a distribution along the (X, Y, Z) split of a
// constraint: pz[z], pxz[z*dx+x], pyz[z*dy+y], pxyz[z*dx*dy + x*dy + y].
struct CIBlocks {
    std::size_t dx = 1, dy = 1, dz = 1;
    std::vector<double> pz, pxz, pyz, pxyz;
};

inline CIBlocks ci_blocks(const DiscreteDistribution& p, const CIConstraint& sigma) {
    const Schema& s = p.schema();
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

    auto radix_size = [&](const std::vector<std::size_t>& pos) {
        std::size_t d = 1;
        for (auto i : pos) d *= s.domain_size(i);
        return d;
    };
    CIBlocks b;
    b.dx = radix_size(xpos);
    b.dy = radix_size(ypos);
    b.dz = radix_size(zpos);
    b.pz.assign(b.dz, 0.0);
    b.pxz.assign(b.dz * b.dx, 0.0);
    b.pyz.assign(b.dz * b.dy, 0.0);
    b.pxyz.assign(b.dz * b.dx * b.dy, 0.0);

    auto code = [&](const Tuple& t, const std::vector<std::size_t>& pos) {
        std::size_t c = 0;
        for (auto i : pos) c = c * s.domain_size(i) + t[i];
        return c;
    };
    for (std::size_t idx = 0; idx < s.joint_size(); ++idx) {
        const double m = p.mass(idx);
        if (m == 0.0) continue;
        const Tuple t = s.decode(idx);
        const std::size_t x = code(t, xpos), y = code(t, ypos), z = code(t, zpos);
        b.pz[z] += m;
        b.pxz[z * b.dx + x] += m;
        b.pyz[z * b.dy + y] += m;
        b.pxyz[(z * b.dx + x) * b.dy + y] += m;
    }
    return b;
}

} // namespace detail

// CI violation as the max total-variation-style gap over conditional cells.
inline CICheck satisfies_ci(const DiscreteDistribution& p, const CIConstraint& sigma,
                            double tol) {
    sigma.validate(p.schema());
    const auto b = detail::ci_blocks(p, sigma);
    double worst = 0.0;
    for (std::size_t z = 0; z < b.dz; ++z) {
        const double pz = b.pz[z];
        if (pz <= 0.0) continue;
        for (std::size_t x = 0; x < b.dx; ++x) {
            const double px = b.pxz[z * b.dx + x] / pz;
            for (std::size_t y = 0; y < b.dy; ++y) {
                const double py = b.pyz[z * b.dy + y] / pz;
                const double pxy = b.pxyz[(z * b.dx + x) * b.dy + y] / pz;
                const double gap = std::abs(pxy - px * py);
                if (gap > worst) worst = gap;
            }
        }
    }
    return CICheck{worst <= tol, worst};
}

// Conditional mutual information I(X;Y|Z) in nats, an optional second
// violation statistic (0 iff the constraint holds exactly).
inline double conditional_mutual_information(const DiscreteDistribution& p,
                                             const CIConstraint& sigma) {
    sigma.validate(p.schema());
    const auto b = detail::ci_blocks(p, sigma);
    double cmi = 0.0;
    for (std::size_t z = 0; z < b.dz; ++z) {
        const double pz = b.pz[z];
        if (pz <= 0.0) continue;
        for (std::size_t x = 0; x < b.dx; ++x) {
            const double pxz = b.pxz[z * b.dx + x];
            if (pxz <= 0.0) continue;
            for (std::size_t y = 0; y < b.dy; ++y) {
                const double pyz = b.pyz[z * b.dy + y];
                const double pxyz = b.pxyz[(z * b.dx + x) * b.dy + y];
                if (pxyz <= 0.0 || pyz <= 0.0) continue;
                cmi += pxyz * std::log(pxyz * pz / (pxz * pyz));
            }
        }
    }
    return cmi < 0.0 ? 0.0 : cmi;
}

// Closed-form factorization Q(x,y,z) = P(z) P(x|z) P(y|z) for a constraint
// saturated over p's schema. Q satisfies sigma exactly and Q = P when P does.
inline DiscreteDistribution ci_projection(const DiscreteDistribution& p,
                                          const CIConstraint& sigma) {
    sigma.validate(p.schema());
    if (!sigma.saturated(p.schema()))
        throw std::invalid_argument(
            "ci_projection: constraint must be saturated (route unsaturated "
            "constraints through the lift path)");
    const Schema& s = p.schema();
    const auto b = detail::ci_blocks(p, sigma);

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
    auto code = [&](const Tuple& t, const std::vector<std::size_t>& pos) {
        std::size_t c = 0;
        for (auto i : pos) c = c * s.domain_size(i) + t[i];
        return c;
    };

    std::vector<double> q(s.joint_size(), 0.0);
    for (std::size_t idx = 0; idx < s.joint_size(); ++idx) {
        const Tuple t = s.decode(idx);
        const std::size_t x = code(t, xpos), y = code(t, ypos), z = code(t, zpos);
        const double pz = b.pz[z];
        if (pz <= 0.0) continue; // zero-mass z slices contribute zero mass
        q[idx] = b.pxz[z * b.dx + x] * b.pyz[z * b.dy + y] / pz;
    }
    return DiscreteDistribution(s, std::move(q));
}

inline double l1_distance(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (a.schema() != b.schema())
        throw std::invalid_argument("l1_distance: schema mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a.mass(i) - b.mass(i));
    return d;
}

} // namespace otdc
