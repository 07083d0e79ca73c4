#pragma once
// Finite attribute domains, joint-domain indexing, and tuple validation.
//
// A Schema is an ordered list of named attributes, each with a finite ordered
// value domain. Joint tuples are addressed by a row-major mixed-radix code
// with the first attribute most significant.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace otdc {

// Raised for malformed user input (bad values, bad files, bad constraint
// strings). Internal misuse of the API throws std::invalid_argument instead.
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A tuple holds one domain index per schema attribute, in schema order.
using Tuple = std::vector<std::uint32_t>;

namespace detail {

inline std::string trim(const std::string& s) {
    const char* ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

} // namespace detail

struct Attribute {
    std::string name;
    std::vector<std::string> domain;
};

class Schema {
  public:
    Schema() = default;

    explicit Schema(std::vector<Attribute> attrs) : attrs_(std::move(attrs)) {
        if (attrs_.empty()) throw InputError("schema: needs at least one attribute");
        for (std::size_t i = 0; i < attrs_.size(); ++i) {
            const auto& a = attrs_[i];
            if (a.name.empty()) throw InputError("schema: empty attribute name");
            if (!by_name_.emplace(a.name, i).second)
                throw InputError("schema: duplicate attribute name '" + a.name + "'");
            if (a.domain.empty())
                throw InputError("schema: attribute '" + a.name + "' has empty domain");
            std::unordered_map<std::string, std::uint32_t> seen;
            for (std::uint32_t v = 0; v < a.domain.size(); ++v) {
                if (!seen.emplace(a.domain[v], v).second)
                    throw InputError("schema: attribute '" + a.name +
                                     "' has duplicate domain value '" + a.domain[v] + "'");
            }
            value_index_.push_back(std::move(seen));
        }
        strides_.assign(attrs_.size(), 1);
        joint_size_ = 1;
        for (std::size_t i = attrs_.size(); i-- > 0;) {
            strides_[i] = joint_size_;
            const std::size_t ds = attrs_[i].domain.size();
            if (joint_size_ > kMaxJointSize / ds)
                throw InputError("schema: joint domain too large (limit " +
                                 std::to_string(kMaxJointSize) + ")");
            joint_size_ *= ds;
        }
    }

    std::size_t n_attrs() const { return attrs_.size(); }
    const Attribute& attr(std::size_t i) const { return attrs_.at(i); }
    const std::vector<Attribute>& attrs() const { return attrs_; }
    std::size_t joint_size() const { return joint_size_; }

    bool has_attr(const std::string& name) const { return by_name_.count(name) != 0; }

    std::size_t index_of(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw InputError("schema: unknown attribute '" + name + "'");
        return it->second;
    }

    std::size_t domain_size(std::size_t attr_idx) const {
        return attrs_.at(attr_idx).domain.size();
    }

    // Row-major mixed-radix code; first attribute most significant.
    std::size_t encode(const Tuple& t) const {
        if (t.size() != attrs_.size())
            throw std::invalid_argument("schema: tuple arity mismatch");
        std::size_t idx = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] >= attrs_[i].domain.size())
                throw std::invalid_argument("schema: tuple value index out of range");
            idx += t[i] * strides_[i];
        }
        return idx;
    }

    Tuple decode(std::size_t idx) const {
        if (idx >= joint_size_) throw std::invalid_argument("schema: joint index out of range");
        Tuple t(attrs_.size());
        for (std::size_t i = 0; i < attrs_.size(); ++i) {
            t[i] = static_cast<std::uint32_t>(idx / strides_[i]);
            idx %= strides_[i];
        }
        return t;
    }

    // Maps raw string values (trimmed, matched exactly) onto domain indices.
    Tuple tuple_from_strings(const std::vector<std::string>& values) const {
        if (values.size() != attrs_.size())
            throw InputError("tuple: expected " + std::to_string(attrs_.size()) +
                             " values, got " + std::to_string(values.size()));
        Tuple t(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::string v = detail::trim(values[i]);
            auto it = value_index_[i].find(v);
            if (it == value_index_[i].end())
                throw InputError("tuple: value '" + v + "' not in domain of attribute '" +
                                 attrs_[i].name + "'");
            t[i] = it->second;
        }
        return t;
    }

    std::vector<std::string> strings_of(const Tuple& t) const {
        if (t.size() != attrs_.size())
            throw std::invalid_argument("schema: tuple arity mismatch");
        std::vector<std::string> out(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) out[i] = attrs_[i].domain.at(t[i]);
        return out;
    }

    // Restriction to a subset of attributes, keeping this schema's order.
    Schema restrict_to(const std::vector<std::string>& names) const {
        std::vector<Attribute> kept;
        for (const auto& a : attrs_) {
            for (const auto& n : names) {
                if (a.name == n) {
                    kept.push_back(a);
                    break;
                }
            }
        }
        for (const auto& n : names) (void)index_of(n);
        return Schema(std::move(kept));
    }

    bool operator==(const Schema& other) const {
        if (attrs_.size() != other.attrs_.size()) return false;
        for (std::size_t i = 0; i < attrs_.size(); ++i) {
            if (attrs_[i].name != other.attrs_[i].name) return false;
            if (attrs_[i].domain != other.attrs_[i].domain) return false;
        }
        return true;
    }
    bool operator!=(const Schema& other) const { return !(*this == other); }

  private:
    static constexpr std::size_t kMaxJointSize = 50'000'000;

    std::vector<Attribute> attrs_;
    std::vector<std::size_t> strides_;
    std::size_t joint_size_ = 0;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::vector<std::unordered_map<std::string, std::uint32_t>> value_index_;
};

} // namespace otdc
