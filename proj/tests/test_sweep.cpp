#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <tuple>

#include "mcldp/sweep.hpp"

using namespace mcldp;
using namespace mcldp::sweep;

namespace {

SweepSpec tiny_spec() {
    std::istringstream in(
        "axis = epsilon\n"
        "values = 1\n"
        "k = 4\n"
        "N = 40\n"
        "R = 2\n"
        "pilot_users = 10\n"
        "M = 200\n"
        "threads = 1\n");
    return parse_config(in);
}

}  // namespace

TEST_CASE("an empty config yields the full-scale defaults") {
    std::istringstream in("");
    auto spec = parse_config(in);
    CHECK(spec.base.channel.diffusion_coefficient == 79.4);
    CHECK(spec.base.channel.receiver_radius == 5.0);
    CHECK(spec.base.channel.distance == 10.0);
    CHECK(spec.base.channel.memory == 200);
    CHECK(spec.base.channel.noise_variance == 0.0);
    CHECK(spec.base.num_users == 10000);
    CHECK(spec.base.num_dists == 100);
    CHECK(spec.base.mechanisms.size() == 6);
    CHECK(spec.values.size() == 1);  // single point at the template epsilon
    CHECK(spec.values[0] == 1.0);
    CHECK(spec.coded == CodedMode::kUncoded);
}

TEST_CASE("range syntax expands to an inclusive grid") {
    std::istringstream in("axis = t_s\nvalues = 0.1:1.0:0.1\n");
    auto spec = parse_config(in);
    REQUIRE(spec.values.size() == 10);
    CHECK(spec.values.front() == doctest::Approx(0.1));
    CHECK(spec.values.back() == doctest::Approx(1.0));
}

TEST_CASE("config errors carry the line and field") {
    SUBCASE("unknown mechanism") {
        std::istringstream in("mechanisms = krr,banana\n");
        CHECK_THROWS_WITH_AS(parse_config(in), doctest::Contains("banana"), std::invalid_argument);
    }
    SUBCASE("unknown key") {
        std::istringstream in("\n\nfrobnicate = 3\n");
        CHECK_THROWS_WITH_AS(parse_config(in), doctest::Contains("line 3"), std::invalid_argument);
    }
    SUBCASE("bad number") {
        std::istringstream in("epsilon = fast\n");
        CHECK_THROWS_AS(parse_config(in), std::invalid_argument);
    }
    SUBCASE("non-increasing values") {
        std::istringstream in("axis = epsilon\nvalues = 2,1\n");
        CHECK_THROWS_AS(parse_config(in), std::invalid_argument);
    }
    SUBCASE("integer axes reject fractional values") {
        std::istringstream in("axis = N\nvalues = 10.5\n");
        CHECK_THROWS_AS(parse_config(in), std::invalid_argument);
    }
}

TEST_CASE("mechanism subsets are canonicalized") {
    std::istringstream in("mechanisms = olh, krr\n");
    auto spec = parse_config(in);
    REQUIRE(spec.base.mechanisms.size() == 2);
    CHECK(spec.base.mechanisms[0] == ldp::Mechanism::kKrr);
    CHECK(spec.base.mechanisms[1] == ldp::Mechanism::kOlh);
}

TEST_CASE("csv writing round trips exactly") {
    ResultTable table;
    ResultRow row;
    row.axis_value = 0.1;
    row.mechanism = "krr";
    row.coded = "uncoded";
    row.seed = 3;
    row.l1_mean = 1.0 / 3.0;
    row.tau_star = 17;
    row.t_s_m = 0.2857142857142857;
    row.M_m = 218;
    row.l_m = 4;
    row.W_m = 12345;
    row.invalid_count = 0;
    table.push_back(row);
    row.mechanism = "olh";
    row.l1_mean = 6.02e-3;
    table.push_back(row);

    std::ostringstream out;
    write_csv(out, table);
    std::istringstream in(out.str());
    auto parsed = read_csv(in);
    CHECK(parsed == table);
}

TEST_CASE("json writing round trips exactly") {
    ResultTable table;
    ResultRow row;
    row.axis_value = 2.0;
    row.mechanism = "hr";
    row.coded = "rlim";
    row.seed = 11;
    row.l1_mean = 0.1 + 0.2;  // not exactly 0.3
    row.tau_star = 2;
    row.t_s_m = 1e-3;
    row.M_m = 1;
    row.l_m = 5;
    row.W_m = 9;
    row.invalid_count = 4;
    table.push_back(row);

    std::ostringstream out;
    write_json(out, table);
    std::istringstream in(out.str());
    CHECK(read_json(in) == table);
}

TEST_CASE("empty tables emit a bare header and a bare array") {
    std::ostringstream csv;
    write_csv(csv, {});
    CHECK(csv.str() == "axis_value,mechanism,coded,seed,l1_mean,tau_star,t_s_m,M_m,l_m,W_m,invalid_count\n");
    std::istringstream csv_in(csv.str());
    CHECK(read_csv(csv_in).empty());

    std::ostringstream json;
    write_json(json, {});
    std::istringstream json_in(json.str());
    CHECK(read_json(json_in).empty());
}

TEST_CASE("sweeps emit one row per mechanism, point, mode and seed") {
    auto spec = tiny_spec();
    auto table = run_sweep(spec, 1, 1);
    CHECK(table.size() == 6);

    spec.coded = CodedMode::kBoth;
    auto doubled = run_sweep(spec, 1, 1);
    CHECK(doubled.size() == 12);

    auto two_seeds = run_sweep(spec, 1, 2);
    CHECK(two_seeds.size() == 24);
}

TEST_CASE("sweep output is byte-for-byte reproducible") {
    auto spec = tiny_spec();
    spec.coded = CodedMode::kBoth;
    std::ostringstream a, b;
    write_csv(a, run_sweep(spec, 5, 2));
    write_csv(b, run_sweep(spec, 5, 2));
    CHECK(a.str() == b.str());
    CHECK(!a.str().empty());
}

TEST_CASE("rows arrive at the sink in sorted order") {
    auto spec = tiny_spec();
    spec.coded = CodedMode::kBoth;
    ResultTable streamed;
    auto table = run_sweep(spec, 1, 2, {}, [&](const ResultRow& r) { streamed.push_back(r); });
    CHECK(streamed == table);

    auto rank = [](const std::string& name) {
        for (uint32_t i = 0; i < std::size(ldp::kAllMechanisms); ++i)
            if (ldp::mechanism_name(ldp::kAllMechanisms[i]) == name) return i;
        return UINT32_MAX;
    };
    auto sorted = table;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const ResultRow& a, const ResultRow& b) {
        return std::make_tuple(a.axis_value, rank(a.mechanism), a.coded, a.seed) <
               std::make_tuple(b.axis_value, rank(b.mechanism), b.coded, b.seed);
    });
    CHECK(sorted == table);
}
