#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridagent/bench.hpp"
#include "gridagent/gridtools.hpp"
#include "replay.hpp"

using namespace gridagent;

namespace {

Registry& registry() {
    static Registry reg = gridtools::build_registry();
    return reg;
}

BenchmarkSpec shipped_spec() {
    return BenchmarkSpec::from_file(std::string(GA_DATA_DIR) + "/benchmark.json");
}

BenchOptions make_options(const std::string& out_name) {
    BenchOptions opts;
    opts.registry = &registry();
    opts.store = DataStore(GA_DATA_DIR);
    opts.out_dir = std::filesystem::temp_directory_path() / out_name;
    std::filesystem::remove_all(opts.out_dir);
    opts.factory = replay::expert_replay_factory();
    return opts;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

TEST_CASE("the shipped expert workflows have the documented call counts") {
    BenchmarkSpec spec = shipped_spec();
    REQUIRE(spec.queries.size() == 10);
    const std::vector<int> expected = {2, 2, 2, 4, 4, 5, 4, 4, 4, 6};
    for (size_t i = 0; i < spec.queries.size(); ++i) {
        CHECK(spec.queries[i].expected_calls == expected[i]);
        CHECK(static_cast<int>(spec.queries[i].expert_workflow.size()) == expected[i]);
        CHECK(validate_workflow(spec.queries[i].expert_workflow,
                                registry().export_descriptors(true))
                  .valid());
    }
}

TEST_CASE("the shipped exemplar corpus validates and avoids the unseen answers") {
    ExemplarCorpus corpus = ExemplarCorpus::load_file(std::string(GA_DATA_DIR) + "/exemplars.json");
    BenchmarkSpec spec = shipped_spec();
    REQUIRE(corpus.size() >= 10);
    const DescriptorSet pool = registry().export_descriptors(true);
    for (const auto& pair : corpus.pairs()) {
        CHECK_FALSE(pair.query.empty());
        CHECK(validate_workflow(pair.workflow, pool).valid());
        for (const auto& q : spec.queries)
            CHECK_FALSE(workflow_equal(pair.workflow, q.expert_workflow));
    }
}

TEST_CASE("an expert-replay benchmark scores perfect correctness") {
    BenchmarkSpec spec = shipped_spec();
    spec.modes = {{Mode::Full, 5}};
    BenchOptions opts = make_options("ga_bench_replay");
    ExemplarCorpus corpus = ExemplarCorpus::load_file(std::string(GA_DATA_DIR) + "/exemplars.json");
    HashedBowEmbedder embedder;
    opts.corpus = &corpus;
    opts.embedder = &embedder;

    BenchOutcome outcome = run_benchmark(spec, opts);
    REQUIRE(outcome.complete());
    CHECK(outcome.records.size() == 50); // 10 queries x 5 attempts
    for (const auto& r : outcome.records) {
        CHECK(r.success);
        CHECK(r.precise);
        CHECK(r.tokens > 0);
    }
    // transcripts were written where the records say
    for (const auto& r : outcome.records)
        CHECK(std::filesystem::exists(opts.out_dir / r.transcript_path));
    std::filesystem::remove_all(opts.out_dir);
}

TEST_CASE("a query scripted to fail leaves the other cells untouched") {
    BenchmarkSpec spec = shipped_spec();
    spec.modes = {{Mode::Mini, 5}};
    spec.attempts = 2;
    spec.queries.resize(3); // q1..q3 for speed
    BenchOptions opts = make_options("ga_bench_fail");
    opts.factory = [](const BenchmarkQuery& q, const ModeConfig&, const std::string&, int)
        -> std::unique_ptr<LlmClient> {
        if (q.id == "q2") {
            // always an unknown function; the session exhausts
            CompletionResponse bad;
            bad.tool_calls = {{"divide_by_zero", "{}"}};
            bad.usage = {100, 10};
            return std::make_unique<ScriptedMock>(
                std::vector<CompletionResponse>(8, bad));
        }
        const long long m = static_cast<long long>(q.expert_workflow.size());
        return std::make_unique<ScriptedMock>(std::vector<CompletionResponse>{
            replay::workflow_turn(q.expert_workflow, 9000, 60 * m), replay::sentinel_turn()});
    };

    BenchOutcome outcome = run_benchmark(spec, opts);
    REQUIRE(outcome.complete());
    for (const auto& r : outcome.records) {
        if (r.query_id == "q2") CHECK_FALSE(r.success);
        else CHECK(r.success);
    }
    std::filesystem::remove_all(opts.out_dir);
}

TEST_CASE("interrupted runs resume without duplicate records") {
    BenchmarkSpec spec = shipped_spec();
    spec.modes = {{Mode::Mini, 5}};
    spec.attempts = 2;
    spec.queries.resize(2);
    BenchOptions opts = make_options("ga_bench_resume");

    BenchOutcome first = run_benchmark(spec, opts);
    CHECK(first.records.size() == 4);
    const std::string records_before = slurp(opts.out_dir / "records.jsonl");

    // a second run over the same output directory re-reads and adds nothing
    BenchOutcome second = run_benchmark(spec, opts);
    CHECK(second.records.size() == 4);
    CHECK(slurp(opts.out_dir / "records.jsonl") == records_before);
    std::filesystem::remove_all(opts.out_dir);
}

TEST_CASE("parallel cells complete with the same results as sequential ones") {
    BenchmarkSpec spec = shipped_spec();
    spec.modes = {{Mode::Mini, 5}};
    spec.attempts = 2;
    BenchOptions opts = make_options("ga_bench_jobs");
    opts.jobs = 3;
    BenchOutcome outcome = run_benchmark(spec, opts);
    REQUIRE(outcome.complete());
    CHECK(outcome.records.size() == 20);
    for (const auto& r : outcome.records) CHECK(r.success);
    std::filesystem::remove_all(opts.out_dir);
}

TEST_CASE("two fresh runs produce byte-identical records") {
    BenchmarkSpec spec = shipped_spec();
    spec.modes = {{Mode::Mini, 5}};
    spec.attempts = 2;
    BenchOptions a = make_options("ga_bench_det_a");
    BenchOptions b = make_options("ga_bench_det_b");
    run_benchmark(spec, a);
    run_benchmark(spec, b);
    CHECK(slurp(a.out_dir / "records.jsonl") == slurp(b.out_dir / "records.jsonl"));
    std::filesystem::remove_all(a.out_dir);
    std::filesystem::remove_all(b.out_dir);
}

TEST_CASE("tables carry the column groups and the undefined-ratio convention") {
    // synthetic records shaped like a Table-1 row pair: one strong cell, one
    // all-failure cell
    std::vector<RunRecord> records;
    for (int i = 0; i < 5; ++i) {
        RunRecord good;
        good.query_id = "q1";
        good.mode = "full";
        good.model = "model-a";
        good.attempt = i;
        good.success = i < 4; // Su residual 0.80... adjust below
        good.precise = i < 3;
        good.tokens = 18400;
        good.function_calls = 4;
        records.push_back(good);

        RunRecord bad = good;
        bad.mode = "zeroctx";
        bad.success = false;
        bad.precise = false;
        records.push_back(bad);
    }
    BenchmarkSpec spec;
    BenchmarkQuery q;
    q.id = "q1";
    q.text = "t";
    spec.queries = {q};
    spec.attempts = 5;
    spec.modes = {{Mode::ZeroCtx, 5}, {Mode::Full, 5}};
    spec.models = {"model-a"};

    const std::string md = emit_table(records, spec, "markdown");
    CHECK(md.find("zeroctx Su") != std::string::npos);
    CHECK(md.find("full Su") != std::string::npos);
    CHECK(md.find("P@1, P@5") != std::string::npos);
    CHECK(md.find("Tk/Su") != std::string::npos);
    CHECK(md.find("FC/Su") != std::string::npos);
    CHECK(md.find("--") != std::string::npos);     // zeroctx ratios undefined
    CHECK(md.find("0.80") != std::string::npos);   // Su = 4/5
    CHECK(md.find("1.00") != std::string::npos);   // P@5 saturates
    CHECK(md.find("23.0k") != std::string::npos);  // 5*18400/4 tokens per success

    // markdown and csv carry the same rendered numbers
    const std::string csv = emit_table(records, spec, "csv");
    CHECK(csv.find("\"0.80\"") != std::string::npos);
    CHECK(csv.find("\"23.0k\"") != std::string::npos);
    CHECK(csv.find("\"--\"") != std::string::npos);

    // empty input renders a header-only table
    const std::string empty_md = emit_table({}, spec, "markdown");
    CHECK(std::count(empty_md.begin(), empty_md.end(), '\n') >= 2);
    const std::string empty_csv = emit_table({}, spec, "csv");
    CHECK(std::count(empty_csv.begin(), empty_csv.end(), '\n') == 1);
}

TEST_CASE("per-query tables emit one section per query") {
    BenchmarkSpec spec = shipped_spec();
    const std::string text = emit_per_query_tables({}, spec);
    for (const auto& q : spec.queries)
        CHECK(text.find("### " + q.id + ":") != std::string::npos);
}
