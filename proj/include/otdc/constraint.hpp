#pragma once
// Conditional-independence constraints sigma: X ci Y | Z over schema attributes.

#include <algorithm>
#include <string>
#include <vector>

#include "otdc/schema.hpp"

namespace otdc {

struct CIConstraint {
    std::vector<std::string> x_attrs;
    std::vector<std::string> y_attrs;
    std::vector<std::string> z_attrs; // may be empty (marginal independence)

    // Throws InputError unless all names exist in the schema and the three
    // sets are non-empty (X, Y) and pairwise disjoint.
    void validate(const Schema& schema) const {
        if (x_attrs.empty() || y_attrs.empty())
            throw InputError("constraint: X and Y sets must be non-empty");
        auto check_set = [&](const std::vector<std::string>& v) {
            for (const auto& n : v) (void)schema.index_of(n);
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t j = i + 1; j < v.size(); ++j)
                    if (v[i] == v[j])
                        throw InputError("constraint: attribute '" + v[i] + "' repeated");
        };
        check_set(x_attrs);
        check_set(y_attrs);
        check_set(z_attrs);
        auto overlap = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
            for (const auto& n : a)
                if (std::find(b.begin(), b.end(), n) != b.end()) return true;
            return false;
        };
        if (overlap(x_attrs, y_attrs) || overlap(x_attrs, z_attrs) || overlap(y_attrs, z_attrs))
            throw InputError("constraint: X, Y, Z must be pairwise disjoint");
    }

    // All attributes named by the constraint, in schema order.
    std::vector<std::string> covered_attrs(const Schema& schema) const {
        std::vector<std::string> out;
        for (const auto& a : schema.attrs()) {
            const auto& n = a.name;
            auto in = [&](const std::vector<std::string>& v) {
                return std::find(v.begin(), v.end(), n) != v.end();
            };
            if (in(x_attrs) || in(y_attrs) || in(z_attrs)) out.push_back(n);
        }
        return out;
    }

    bool saturated(const Schema& schema) const {
        return covered_attrs(schema).size() == schema.n_attrs();
    }

    CIConstraint swapped_xy() const { return CIConstraint{y_attrs, x_attrs, z_attrs}; }
};

// Parses "X ; Y | Z" where each part is a comma-separated attribute list and
// "| Z" is optional. A single comma may stand in for ';' when X and Y are both
// singletons, so "Y,Z|" reads as X={Y}, Y={Z}, Z={}.
inline CIConstraint parse_constraint(const std::string& text) {
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        parts.push_back(cur);
        return parts;
    };
    auto names = [&](const std::string& s) {
        std::vector<std::string> out;
        for (auto& p : split(s, ',')) {
            auto t = detail::trim(p);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    };

    const auto bar = split(text, '|');
    if (bar.size() > 2) throw InputError("constraint: more than one '|' in '" + text + "'");
    const std::string xy = bar[0];
    CIConstraint sigma;
    if (bar.size() == 2) sigma.z_attrs = names(bar[1]);

    const auto semi = split(xy, ';');
    if (semi.size() == 2) {
        sigma.x_attrs = names(semi[0]);
        sigma.y_attrs = names(semi[1]);
    } else if (semi.size() == 1) {
        const auto parts = names(xy);
        if (parts.size() != 2)
            throw InputError("constraint: write multi-attribute sets as 'X1,X2;Y1|Z', got '" +
                             text + "'");
        sigma.x_attrs = {parts[0]};
        sigma.y_attrs = {parts[1]};
    } else {
        throw InputError("constraint: more than one ';' in '" + text + "'");
    }
    if (sigma.x_attrs.empty() || sigma.y_attrs.empty())
        throw InputError("constraint: X and Y sets must be non-empty in '" + text + "'");
    return sigma;
}

} // namespace otdc
