#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridagent/util.hpp"

namespace gridagent {

using Json = nlohmann::json;

struct MetricsDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unbiased pass@k estimator: 1 - C(n-c, k) / C(n, k), in the multiplicative
// form that stays exact in double precision for n <= 64.
inline double pass_at_k(long long n, long long c, long long k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n)
        throw MetricsDomainError("pass_at_k requires 0 <= c <= n and 1 <= k <= n");
    if (n - c < k) return 1.0;
    double prod = 1.0;
    for (long long i = 0; i < k; ++i)
        prod *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    return 1.0 - prod;
}

// One benchmark attempt of one (query, mode, model) cell.
struct RunRecord {
    std::string query_id;
    std::string mode;
    std::string model;
    int attempt = 0;
    bool success = false;   // Su_i: result digest matched the expert run
    bool precise = false;   // Pr_i: exact workflow match
    long long tokens = 0;   // T_i, prompt + completion over all calls
    long long function_calls = 0; // FC_i
    std::string transcript_path;
};

inline Json run_record_to_json(const RunRecord& r) {
    return {{"query", r.query_id}, {"mode", r.mode},     {"model", r.model},
            {"attempt", r.attempt}, {"su", r.success ? 1 : 0}, {"pr", r.precise ? 1 : 0},
            {"tokens", r.tokens},   {"fc", r.function_calls},  {"transcript", r.transcript_path}};
}

inline RunRecord run_record_from_json(const Json& j) {
    RunRecord r;
    r.query_id = j.at("query").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.attempt = j.at("attempt").get<int>();
    r.success = j.at("su").get<int>() != 0;
    r.precise = j.at("pr").get<int>() != 0;
    r.tokens = j.at("tokens").get<long long>();
    r.function_calls = j.at("fc").get<long long>();
    r.transcript_path = j.value("transcript", "");
    return r;
}

// Aggregate metrics for one set of attempts. The per-success ratios carry an
// explicit undefined state (rendered "--") when nothing succeeded; token and
// call sums include failed attempts.
struct MetricsRow {
    double su = 0.0;
    double pr = 0.0;
    double p_at_1 = 0.0;
    std::optional<double> p_at_5;
    std::optional<double> tokens_per_success;
    std::optional<double> calls_per_success;
    long long attempts = 0;
    long long successes = 0;
    long long total_tokens = 0;
    long long total_calls = 0;
};

inline MetricsRow compute_metrics_row(const std::vector<RunRecord>& records) {
    if (records.empty()) throw MetricsDomainError("compute_metrics_row requires >= 1 record");
    MetricsRow row;
    row.attempts = static_cast<long long>(records.size());
    long long precise = 0;
    for (const auto& r : records) {
        if (r.success) ++row.successes;
        if (r.precise) ++precise;
        row.total_tokens += r.tokens;
        row.total_calls += r.function_calls;
    }
    const double n = static_cast<double>(row.attempts);
    row.su = static_cast<double>(row.successes) / n;
    row.pr = static_cast<double>(precise) / n;
    row.p_at_1 = pass_at_k(row.attempts, row.successes, 1);
    if (row.attempts >= 5) row.p_at_5 = pass_at_k(row.attempts, row.successes, 5);
    if (row.successes > 0) {
        row.tokens_per_success = static_cast<double>(row.total_tokens) /
                                 static_cast<double>(row.successes);
        row.calls_per_success = static_cast<double>(row.total_calls) /
                                static_cast<double>(row.successes);
    }
    return row;
}

} // namespace gridagent
