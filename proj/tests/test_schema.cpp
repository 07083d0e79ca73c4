#include <doctest.h>

#include <random>

#include "otdc/schema.hpp"

using namespace otdc;

namespace {

Schema abc() {
    return Schema({{"A", {"0", "1"}}, {"B", {"x", "y", "z"}}, {"C", {"0", "1", "2", "3"}}});
}

} // namespace

TEST_CASE("schema validates names and domains") {
    CHECK_THROWS_AS(Schema({{"A", {"0", "1"}}, {"A", {"0"}}}), InputError);
    CHECK_THROWS_AS(Schema(std::vector<Attribute>{{"A", {}}}), InputError);
    CHECK_THROWS_AS(Schema({{"A", {"0", "0"}}}), InputError);
    CHECK_THROWS_AS(Schema(std::vector<Attribute>{}), InputError);
    CHECK(abc().joint_size() == 2 * 3 * 4);
}

TEST_CASE("mixed-radix encode/decode round-trips every index") {
    const Schema s = abc();
    for (std::size_t idx = 0; idx < s.joint_size(); ++idx) {
        CHECK(s.encode(s.decode(idx)) == idx);
    }
    // first attribute most significant
    CHECK(s.encode({1, 0, 0}) == 12);
    CHECK(s.encode({0, 1, 0}) == 4);
    CHECK(s.encode({0, 0, 1}) == 1);
}

TEST_CASE("tuples from strings trim whitespace and reject unknown values") {
    const Schema s = abc();
    const Tuple t = s.tuple_from_strings({" 1 ", "y", "3"});
    CHECK(t == Tuple{1, 1, 3});
    CHECK(s.strings_of(t) == std::vector<std::string>{"1", "y", "3"});
    CHECK_THROWS_AS(s.tuple_from_strings({"2", "y", "3"}), InputError);
    CHECK_THROWS_AS(s.tuple_from_strings({"1", "y"}), InputError);
}

TEST_CASE("restriction preserves schema order") {
    const Schema s = abc();
    const Schema r = s.restrict_to({"C", "A"});
    REQUIRE(r.n_attrs() == 2);
    CHECK(r.attr(0).name == "A");
    CHECK(r.attr(1).name == "C");
    CHECK_THROWS_AS(s.restrict_to({"D"}), InputError);
}
