#include "catch_amalgamated.hpp"

#include <algorithm>
#include <random>

#include "gridagent/metrics.hpp"

using namespace gridagent;

namespace {

// Exhaustive oracle: fraction of k-subsets of n attempts containing at least
// one of the c successes, as an exact rational.
double pass_at_k_enumeration(int n, int c, int k) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<bool> pick(n, false);
    std::fill(pick.end() - k, pick.end(), true);
    long long total = 0, hit = 0;
    do {
        ++total;
        bool any = false;
        for (int i = 0; i < n; ++i)
            if (pick[i] && i < c) any = true; // successes are attempts 0..c-1
        if (any) ++hit;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return static_cast<double>(hit) / static_cast<double>(total);
}

std::vector<RunRecord> synthetic_records(int n, int c, long long tokens, long long calls) {
    std::vector<RunRecord> records;
    for (int i = 0; i < n; ++i) {
        RunRecord r;
        r.query_id = "q";
        r.attempt = i;
        r.success = i < c;
        r.precise = false;
        r.tokens = tokens;
        r.function_calls = calls;
        records.push_back(r);
    }
    return records;
}

} // namespace

TEST_CASE("pass_at_k matches the stated examples") {
    CHECK(pass_at_k(5, 5, 1) == 1.0);
    CHECK(pass_at_k(5, 2, 5) == 1.0); // C(3,5) = 0
    CHECK(pass_at_k(10, 3, 3) == Catch::Approx(pass_at_k_enumeration(10, 3, 3)).epsilon(1e-12));
    CHECK(pass_at_k(10, 3, 3) == Catch::Approx(0.7083333333333333).epsilon(1e-12));
}

TEST_CASE("pass_at_k equals exhaustive enumeration for all n <= 10") {
    for (int n = 1; n <= 10; ++n)
        for (int c = 0; c <= n; ++c)
            for (int k = 1; k <= n; ++k)
                CHECK(pass_at_k(n, c, k) ==
                      Catch::Approx(pass_at_k_enumeration(n, c, k)).margin(1e-12));
}

TEST_CASE("pass_at_k rejects out-of-domain arguments") {
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), MetricsDomainError);
    CHECK_THROWS_AS(pass_at_k(5, -1, 1), MetricsDomainError);
    CHECK_THROWS_AS(pass_at_k(5, 3, 0), MetricsDomainError);
    CHECK_THROWS_AS(pass_at_k(5, 3, 6), MetricsDomainError);
    CHECK_THROWS_AS(pass_at_k(0, 0, 1), MetricsDomainError);
}

TEST_CASE("the worked metrics example lands on the stated values") {
    // five attempts, three successes, 10k tokens and 4 calls each
    auto records = synthetic_records(5, 3, 10000, 4);
    MetricsRow row = compute_metrics_row(records);
    CHECK(row.su == Catch::Approx(0.6).epsilon(1e-12));
    REQUIRE(row.tokens_per_success.has_value());
    REQUIRE(row.calls_per_success.has_value());
    // sums include failed attempts: 50000 / 3 and 20 / 3
    CHECK(*row.tokens_per_success == Catch::Approx(16666.6666666667).epsilon(1e-6));
    CHECK(*row.calls_per_success == Catch::Approx(6.6666666667).epsilon(1e-6));
}

TEST_CASE("zero successes leave the per-success ratios undefined") {
    auto records = synthetic_records(5, 0, 10000, 4);
    MetricsRow row = compute_metrics_row(records);
    CHECK(row.su == 0.0);
    CHECK_FALSE(row.tokens_per_success.has_value());
    CHECK_FALSE(row.calls_per_success.has_value());
    CHECK(row.p_at_1 == 0.0);
    REQUIRE(row.p_at_5.has_value());
    CHECK(*row.p_at_5 == 0.0);
}

TEST_CASE("all successes saturate every correctness metric") {
    auto records = synthetic_records(5, 5, 10000, 4);
    for (auto& r : records) r.precise = true;
    MetricsRow row = compute_metrics_row(records);
    CHECK(row.su == 1.0);
    CHECK(row.pr == 1.0);
    CHECK(row.p_at_1 == 1.0);
    CHECK(*row.p_at_5 == 1.0);
}

TEST_CASE("metric identities hold on randomized record sets") {
    std::mt19937 rng(123);
    std::uniform_int_distribution<int> n_dist(5, 12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<long long> tok(100, 50000);
    for (int round = 0; round < 300; ++round) {
        const int n = n_dist(rng);
        std::vector<RunRecord> records;
        for (int i = 0; i < n; ++i) {
            RunRecord r;
            r.attempt = i;
            r.success = unit(rng) < 0.5;
            r.precise = r.success && unit(rng) < 0.5; // Pr=1 implies Su=1
            r.tokens = tok(rng);
            r.function_calls = tok(rng) % 30;
            records.push_back(r);
        }
        MetricsRow row = compute_metrics_row(records);
        CHECK(row.p_at_1 == Catch::Approx(row.su).margin(1e-12)); // P@1 = Su
        CHECK(row.pr <= row.su + 1e-12);                          // Pr <= Su
        REQUIRE(row.p_at_5.has_value());
        CHECK(*row.p_at_5 >= row.p_at_1 - 1e-12);                 // P@5 >= P@1

        // permutation invariance
        std::vector<RunRecord> shuffled = records;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        MetricsRow again = compute_metrics_row(shuffled);
        CHECK(again.su == row.su);
        CHECK(again.pr == row.pr);
        CHECK(again.p_at_1 == row.p_at_1);
        CHECK(*again.p_at_5 == *row.p_at_5);
        CHECK(again.total_tokens == row.total_tokens);
    }
}

TEST_CASE("run records round-trip through JSON lines") {
    RunRecord r;
    r.query_id = "q7";
    r.mode = "topk-5";
    r.model = "mock";
    r.attempt = 3;
    r.success = true;
    r.precise = false;
    r.tokens = 12345;
    r.function_calls = 6;
    r.transcript_path = "transcripts/x.json";
    RunRecord back = run_record_from_json(run_record_to_json(r));
    CHECK(back.query_id == r.query_id);
    CHECK(back.mode == r.mode);
    CHECK(back.attempt == r.attempt);
    CHECK(back.success == r.success);
    CHECK(back.precise == r.precise);
    CHECK(back.tokens == r.tokens);
    CHECK(back.transcript_path == r.transcript_path);
}
