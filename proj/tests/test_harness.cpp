#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcldp/harness.hpp"

using namespace mcldp;
using namespace mcldp::harness;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.channel = channel::ChannelParams{};
    cfg.domain_size = 4;
    cfg.epsilon = 1.0;
    cfg.num_users = 60;
    cfg.num_dists = 3;
    cfg.pilot_users = 20;
    cfg.master_seed = 7;
    return cfg;
}

bool outcomes_equal(const ExperimentResult& a, const ExperimentResult& b, bool compare_channel) {
    if (a.outcomes.size() != b.outcomes.size()) return false;
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        const auto& x = a.outcomes[i];
        const auto& y = b.outcomes[i];
        if (x.mechanism != y.mechanism || x.l1_mean != y.l1_mean || x.one_bits != y.one_bits ||
            x.invalid_reports != y.invalid_reports)
            return false;
        if (compare_channel && (x.threshold != y.threshold || x.molecules != y.molecules ||
                                x.slot_duration != y.slot_duration))
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("simplex sampling") {
    Rng rng(1);
    SUBCASE("every draw sums to one") {
        for (int i = 0; i < 200; ++i) {
            auto p = sample_simplex(5, rng);
            CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
            CHECK(std::all_of(p.begin(), p.end(), [](double x) { return x >= 0.0; }));
        }
    }
    SUBCASE("k = 2 first coordinate is uniform (Kolmogorov-Smirnov)") {
        const int n = 10000;
        std::vector<double> xs(n);
        for (auto& x : xs) x = sample_simplex(2, rng)[0];
        std::sort(xs.begin(), xs.end());
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            d = std::max(d, std::abs(xs[i] - (i + 1.0) / n));
            d = std::max(d, std::abs(xs[i] - double(i) / n));
        }
        CHECK(d < 1.63 / std::sqrt(double(n)));  // 1% critical value
    }
    SUBCASE("k = 3 coordinates are exchangeable") {
        const int n = 10000;
        double mean[3] = {0, 0, 0};
        for (int i = 0; i < n; ++i) {
            auto p = sample_simplex(3, rng);
            for (int j = 0; j < 3; ++j) mean[j] += p[j];
        }
        // Var of a flat Dirichlet coordinate with k = 3 is 1/18.
        double se = std::sqrt(1.0 / 18 / n);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(mean[j] / n - 1.0 / 3) < 3 * se);
    }
}

TEST_CASE("categorical sampling respects the probability vector") {
    Rng rng(2);
    std::vector<double> p{0.5, 0.25, 0.25};
    const int n = 40000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) counts[sample_categorical(p, rng) - 1]++;
    for (int j = 0; j < 3; ++j) {
        double se = std::sqrt(p[j] * (1 - p[j]) / n);
        CHECK(std::abs(counts[j] / double(n) - p[j]) < 3 * se);
    }
}

TEST_CASE("baseline statistics") {
    SUBCASE("binary domain with all-ones values has zero weight") {
        auto stats = baseline_stats({{1, 1}, {1}}, 2);
        CHECK(stats.bits_per_value == 1);
        CHECK(stats.one_bits == 0);
    }
    SUBCASE("two-bit encodings count their ones") {
        auto stats = baseline_stats({{1, 2, 3, 4}}, 4);
        CHECK(stats.bits_per_value == 2);
        CHECK(stats.one_bits == 4);  // 00 01 10 11
    }
    SUBCASE("uniform values are bit-balanced") {
        Rng rng(3);
        std::vector<std::vector<uint16_t>> values(100);
        const int per_user = 100;
        for (auto& row : values)
            for (int i = 0; i < per_user; ++i)
                row.push_back(static_cast<uint16_t>(rng.below(16) + 1));
        auto stats = baseline_stats(values, 16);
        double total_bits = 100.0 * per_user * 4;
        double se = std::sqrt(0.25 * total_bits);
        CHECK(std::abs(double(stats.one_bits) - total_bits / 2) < 3 * se);
    }
    SUBCASE("values outside the domain are rejected") {
        CHECK_THROWS_AS(baseline_stats({{5}}, 4), std::invalid_argument);
    }
}

TEST_CASE("count_ones") {
    CHECK(count_ones(std::vector<uint8_t>{}) == 0);
    CHECK(count_ones(std::vector<uint8_t>{0, 0, 0}) == 0);
    CHECK(count_ones(std::vector<uint8_t>{1, 0, 1, 1}) == 3);
}

TEST_CASE("resource normalization") {
    SUBCASE("identity when the method matches the baseline") {
        auto n = normalize_resources(4, 1.0, 1000, 500, 4, 500);
        CHECK(n.slot_duration == 1.0);
        CHECK(n.molecules == 1000);
    }
    SUBCASE("air time is conserved exactly") {
        auto n = normalize_resources(4, 1.0, 1000, 500, 16, 900);
        CHECK(n.slot_duration == 0.25);
        CHECK(16 * n.slot_duration == 4.0);
    }
    SUBCASE("molecule budget scales inversely with emitted ones") {
        CHECK(normalize_resources(4, 1.0, 1000, 500, 8, 1000).molecules == 500);
    }
    SUBCASE("round half to even") {
        CHECK(normalize_resources(1, 1.0, 5, 1, 1, 2).molecules == 2);   // 2.5 -> 2
        CHECK(normalize_resources(1, 1.0, 7, 1, 1, 2).molecules == 4);   // 3.5 -> 4
    }
    SUBCASE("molecules never drop below one") {
        CHECK(normalize_resources(1, 1.0, 1, 1, 1, 10).molecules == 1);
    }
    SUBCASE("a method with no ones keeps the baseline budget") {
        CHECK(normalize_resources(4, 1.0, 1000, 500, 4, 0).molecules == 1000);
    }
}

TEST_CASE("l1 error") {
    CHECK(l1_error(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}) == 0.0);
    CHECK(l1_error(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 2.0);
    CHECK(l1_error(std::vector<double>{0.5, 0.5}, std::vector<double>{-0.25, 1.25}) == 1.5);
    CHECK_THROWS_AS(l1_error(std::vector<double>{1}, std::vector<double>{1, 0}),
                    std::invalid_argument);
}

TEST_CASE("runs are deterministic under reseeding and thread counts") {
    auto cfg = small_config();
    cfg.threads = 1;
    auto a = run_ideal(cfg);
    cfg.threads = 4;
    auto b = run_ideal(cfg);
    CHECK(outcomes_equal(a, b, false));

    cfg.threads = 1;
    auto c = run_uncoded(cfg);
    cfg.threads = 3;
    auto d = run_uncoded(cfg);
    CHECK(outcomes_equal(c, d, true));

    cfg.master_seed = 8;
    auto e = run_uncoded(cfg);
    CHECK(!outcomes_equal(c, e, true));  // different seed, different world
}

TEST_CASE("error-free channel collapses to the channel-free pipeline") {
    auto cfg = small_config();
    cfg.channel.molecules_per_one = 100000;
    cfg.channel.slot_duration = 10.0;
    auto ideal = run_ideal(cfg);
    auto uncoded = run_uncoded(cfg);
    auto coded = run_rlim(cfg);
    REQUIRE(ideal.outcomes.size() == uncoded.outcomes.size());
    REQUIRE(ideal.outcomes.size() == coded.outcomes.size());
    for (std::size_t i = 0; i < ideal.outcomes.size(); ++i) {
        CAPTURE(ldp::mechanism_name(ideal.outcomes[i].mechanism));
        CHECK(uncoded.outcomes[i].l1_mean == ideal.outcomes[i].l1_mean);
        CHECK(coded.outcomes[i].l1_mean == ideal.outcomes[i].l1_mean);
        CHECK(uncoded.outcomes[i].invalid_reports == 0);
        CHECK(coded.outcomes[i].invalid_reports == 0);
    }
}

TEST_CASE("with a huge privacy budget the krr error is the histogram sampling error") {
    ExperimentConfig cfg = small_config();
    cfg.mechanisms = {ldp::Mechanism::kKrr};
    cfg.epsilon = 20.0;
    cfg.num_users = 500;
    auto result = run_ideal(cfg);

    // Reproduce the ground truths and user values from the same streams and
    // compare against the plain empirical histogram.
    Rng gt_rng = stream_rng(cfg.master_seed, Stage::kGroundTruth, 0, 0);
    std::vector<std::vector<double>> truths;
    for (uint32_t i = 0; i < cfg.num_dists; ++i)
        truths.push_back(sample_simplex(cfg.domain_size, gt_rng));
    double l1_sum = 0.0;
    std::vector<std::vector<double>> hist(cfg.num_dists,
                                          std::vector<double>(cfg.domain_size, 0.0));
    for (uint32_t u = 0; u < cfg.num_users; ++u) {
        Rng rng = stream_rng(cfg.master_seed, Stage::kValues, 0, u);
        for (uint32_t i = 0; i < cfg.num_dists; ++i)
            hist[i][sample_categorical(truths[i], rng) - 1] += 1.0;
    }
    for (uint32_t i = 0; i < cfg.num_dists; ++i) {
        for (auto& h : hist[i]) h /= cfg.num_users;
        l1_sum += l1_error(truths[i], hist[i]);
    }
    CHECK(result.outcomes[0].l1_mean ==
          doctest::Approx(l1_sum / cfg.num_dists).epsilon(1e-6));
}

TEST_CASE("config validation") {
    auto cfg = small_config();
    cfg.num_users = 10;
    cfg.pilot_users = 20;
    CHECK_THROWS_AS(run_rlim(cfg), std::invalid_argument);
    CHECK_NOTHROW(run_uncoded(cfg));
    cfg = small_config();
    cfg.mechanisms.clear();
    CHECK_THROWS_AS(run_ideal(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.num_dists = 0;
    CHECK_THROWS_AS(run_ideal(cfg), std::invalid_argument);
}

TEST_CASE("coded runs report codeword lengths and calibrated thresholds") {
    auto cfg = small_config();
    cfg.domain_size = 16;
    cfg.channel.molecules_per_one = 2000;
    auto result = run_rlim(cfg);
    for (const auto& out : result.outcomes) {
        if (out.mechanism == ldp::Mechanism::kKrr) CHECK(out.wire_bits == 9);
        if (out.mechanism == ldp::Mechanism::kOlh) CHECK(out.wire_bits == 13);
        CHECK(out.threshold >= 1);
        CHECK(out.l1_mean >= 0.0);
    }
}
