#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gridagent/executor.hpp"
#include "gridagent/metrics.hpp"
#include "gridagent/orchestrator.hpp"

namespace gridagent {

struct BenchmarkQuery {
    std::string id;
    std::string text;
    Workflow expert_workflow;
    int expected_calls = 0;
};

struct BenchmarkSpec {
    std::vector<BenchmarkQuery> queries;
    int attempts = 5;
    std::vector<ModeConfig> modes;
    std::vector<std::string> models;

    static BenchmarkSpec from_json(const Json& j) {
        BenchmarkSpec spec;
        spec.attempts = j.value("attempts", 5);
        if (spec.attempts < 1) throw std::invalid_argument("benchmark attempts must be >= 1");
        for (const auto& mj : j.at("modes")) {
            ModeConfig mc;
            auto mode = mode_from_string(mj.at("mode").get<std::string>());
            if (!mode) throw std::invalid_argument("unknown mode: " + mj.at("mode").get<std::string>());
            mc.mode = *mode;
            if (mj.contains("k")) mc.k = mj["k"].get<size_t>();
            spec.modes.push_back(mc);
        }
        spec.models = j.at("models").get<std::vector<std::string>>();
        for (const auto& qj : j.at("queries")) {
            BenchmarkQuery q;
            q.id = qj.at("id").get<std::string>();
            q.text = qj.at("text").get<std::string>();
            q.expected_calls = qj.value("expected_calls", 0);
            auto parsed = workflow_from_json(qj.at("expert_workflow"));
            if (!parsed.ok())
                throw std::invalid_argument("expert workflow for " + q.id + ": " +
                                            parsed.error().to_string());
            q.expert_workflow = parsed.value();
            spec.queries.push_back(std::move(q));
        }
        if (spec.queries.empty()) throw std::invalid_argument("benchmark spec has no queries");
        return spec;
    }

    static BenchmarkSpec from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open benchmark spec: " + path.string());
        return from_json(Json::parse(in));
    }
};

inline std::string mode_label(const ModeConfig& mc) {
    if (mc.mode == Mode::TopK) return "topk-" + std::to_string(mc.k);
    return mode_name(mc.mode);
}

// Builds one client per attempt, so scripted mocks replay independent scripts
// while live profiles just hand out fresh transports.
using ClientFactory = std::function<std::unique_ptr<LlmClient>(
    const BenchmarkQuery&, const ModeConfig&, const std::string& model, int attempt)>;

struct BenchOptions {
    const Registry* registry = nullptr;
    ExemplarCorpus* corpus = nullptr;
    Embedder* embedder = nullptr;
    DataStore store;
    std::filesystem::path out_dir = "bench-out";
    std::filesystem::path embedding_cache_dir;
    int max_iterations = 8;
    int jobs = 1;
    ClientFactory factory;
};

struct BenchOutcome {
    std::vector<RunRecord> records;
    std::vector<std::string> incomplete_cells; // transport-aborted cells
    bool complete() const { return incomplete_cells.empty(); }
};

namespace detail {

// Expert digests anchor Su: each expert workflow runs once on a fresh context.
inline std::map<std::string, std::string> expert_digests(const BenchmarkSpec& spec,
                                                         const BenchOptions& opts) {
    std::map<std::string, std::string> digests;
    for (const auto& q : spec.queries) {
        ExecutionContext ctx;
        ctx.store = opts.store;
        ctx.run_id = "expert_" + q.id;
        ctx.artifact_root = opts.out_dir / "artifacts";
        ValidationReport report =
            validate_workflow(q.expert_workflow, opts.registry->export_descriptors(true));
        if (!report.valid())
            throw std::runtime_error("expert workflow for " + q.id +
                                     " fails validation: " + report.to_string());
        ExecutionOutcome outcome = execute_workflow(q.expert_workflow, ctx, *opts.registry);
        if (!outcome.clean())
            throw std::runtime_error("expert workflow for " + q.id +
                                     " failed: " + outcome.error_context(q.expert_workflow));
        digests[q.id] = outcome.digest;
    }
    return digests;
}

struct Cell {
    const BenchmarkQuery* query;
    ModeConfig mode;
    std::string model;
};

} // namespace detail

// Runs every (query x mode x model) cell for n attempts each, appending
// records to records.jsonl as cells finish. Existing records are honored so
// an interrupted run resumes by cell without duplicates. A transport failure
// abandons the cell (not the run) and marks it incomplete.
inline BenchOutcome run_benchmark(const BenchmarkSpec& spec, BenchOptions& opts) {
    if (!opts.registry) throw std::invalid_argument("bench options without registry");
    if (!opts.factory) throw std::invalid_argument("bench options without client factory");
    std::filesystem::create_directories(opts.out_dir);
    std::filesystem::create_directories(opts.out_dir / "transcripts");

    const auto digests = detail::expert_digests(spec, opts);
    if (opts.corpus && opts.embedder)
        opts.corpus->ensure_embeddings(*opts.embedder, opts.embedding_cache_dir);

    BenchOutcome outcome;
    const auto records_path = opts.out_dir / "records.jsonl";
    std::set<std::string> done;
    if (std::filesystem::exists(records_path)) {
        std::ifstream in(records_path);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            RunRecord r = run_record_from_json(Json::parse(line));
            done.insert(r.query_id + "|" + r.mode + "|" + r.model + "|" + std::to_string(r.attempt));
            outcome.records.push_back(std::move(r));
        }
    }

    std::vector<detail::Cell> cells;
    for (const auto& model : spec.models)
        for (const auto& mode : spec.modes)
            for (const auto& q : spec.queries) cells.push_back({&q, mode, model});

    std::mutex io_mutex;
    auto run_cell = [&](const detail::Cell& cell) {
        const std::string label = mode_label(cell.mode);
        std::vector<RunRecord> fresh;
        bool aborted = false;
        std::string abort_reason;
        for (int attempt = 0; attempt < spec.attempts; ++attempt) {
            const std::string key =
                cell.query->id + "|" + label + "|" + cell.model + "|" + std::to_string(attempt);
            {
                std::lock_guard<std::mutex> lock(io_mutex);
                if (done.count(key)) continue;
            }
            SessionConfig scfg;
            scfg.mode = cell.mode;
            scfg.max_iterations = opts.max_iterations;
            scfg.model = cell.model;
            scfg.registry = opts.registry;
            scfg.corpus = opts.corpus;
            scfg.embedder = opts.embedder;
            scfg.embedding_cache_dir = opts.embedding_cache_dir;

            ExecutionContext ctx;
            ctx.store = opts.store;
            ctx.run_id = cell.query->id + "_" + cell.model + "_" + label + "_a" +
                         std::to_string(attempt);
            ctx.artifact_root = opts.out_dir / "artifacts";

            SessionResult result;
            try {
                auto client = opts.factory(*cell.query, cell.mode, cell.model, attempt);
                result = run_session(cell.query->text, scfg, *client, ctx);
            } catch (const std::exception& e) {
                // misconfigured cell (missing script, absent corpus): park it
                // as incomplete rather than taking the run down
                aborted = true;
                abort_reason = e.what();
                break;
            }
            if (result.transport_failure) {
                aborted = true;
                abort_reason = result.last_error;
                break;
            }

            RunRecord record;
            record.query_id = cell.query->id;
            record.mode = label;
            record.model = cell.model;
            record.attempt = attempt;
            record.success = result.completed() && result.digest == digests.at(cell.query->id);
            record.precise = result.completed() &&
                             workflow_equal(result.final_workflow, cell.query->expert_workflow);
            record.tokens = result.total_tokens;
            record.function_calls = result.function_calls;
            record.transcript_path = "transcripts/" + ctx.run_id + ".json";

            {
                std::ofstream out(opts.out_dir / record.transcript_path, std::ios::trunc);
                out << session_transcript(cell.query->text, scfg, result).dump(2) << "\n";
            }
            fresh.push_back(std::move(record));
        }
        std::lock_guard<std::mutex> lock(io_mutex);
        std::ofstream out(records_path, std::ios::app);
        for (auto& r : fresh) {
            out << run_record_to_json(r).dump() << "\n";
            done.insert(r.query_id + "|" + r.mode + "|" + r.model + "|" + std::to_string(r.attempt));
            outcome.records.push_back(std::move(r));
        }
        if (aborted)
            outcome.incomplete_cells.push_back(cell.query->id + "/" + label + "/" + cell.model +
                                               ": " + abort_reason);
    };

    if (opts.jobs <= 1) {
        for (const auto& cell : cells) run_cell(cell);
    } else {
        std::vector<std::thread> workers;
        std::mutex next_mutex;
        size_t next = 0;
        for (int t = 0; t < opts.jobs; ++t) {
            workers.emplace_back([&]() {
                for (;;) {
                    size_t mine;
                    {
                        std::lock_guard<std::mutex> lock(next_mutex);
                        if (next >= cells.size()) return;
                        mine = next++;
                    }
                    run_cell(cells[mine]);
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    return outcome;
}

// ---- table emission ---------------------------------------------------------

namespace detail {

inline std::string fmt_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tokens(const std::optional<double>& v) {
    if (!v) return "--";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1fk", *v / 1000.0);
    return buf;
}

inline std::string fmt_calls(const std::optional<double>& v) {
    if (!v) return "--";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

struct AggregatedCell {
    double su = 0.0, pr = 0.0, p1 = 0.0;
    std::optional<double> p5;
    std::optional<double> tk_su, fc_su;
    bool present = false;
};

// Per-(model, mode): rates averaged across queries, per-success ratios as
// global sums over every attempt divided by total successes.
inline AggregatedCell aggregate(const std::vector<RunRecord>& records, const std::string& model,
                                const std::string& mode,
                                const std::vector<std::string>& query_ids) {
    AggregatedCell cell;
    double su = 0, pr = 0, p1 = 0, p5 = 0;
    bool p5_defined = true;
    long long tokens = 0, calls = 0, successes = 0;
    size_t queries_seen = 0;
    for (const auto& qid : query_ids) {
        std::vector<RunRecord> subset;
        for (const auto& r : records)
            if (r.model == model && r.mode == mode && r.query_id == qid) subset.push_back(r);
        if (subset.empty()) continue;
        ++queries_seen;
        MetricsRow row = compute_metrics_row(subset);
        su += row.su;
        pr += row.pr;
        p1 += row.p_at_1;
        if (row.p_at_5) p5 += *row.p_at_5;
        else p5_defined = false;
        tokens += row.total_tokens;
        calls += row.total_calls;
        successes += row.successes;
    }
    if (queries_seen == 0) return cell;
    cell.present = true;
    const double nq = static_cast<double>(queries_seen);
    cell.su = su / nq;
    cell.pr = pr / nq;
    cell.p1 = p1 / nq;
    if (p5_defined) cell.p5 = p5 / nq;
    if (successes > 0) {
        cell.tk_su = static_cast<double>(tokens) / static_cast<double>(successes);
        cell.fc_su = static_cast<double>(calls) / static_cast<double>(successes);
    }
    return cell;
}

inline std::vector<std::string> cell_values(const AggregatedCell& c) {
    if (!c.present) return {"--", "--", "--, --", "--", "--"};
    std::string pk = fmt_rate(c.p1) + ", " + (c.p5 ? fmt_rate(*c.p5) : std::string("--"));
    return {fmt_rate(c.su), fmt_rate(c.pr), pk, fmt_tokens(c.tk_su), fmt_calls(c.fc_su)};
}

} // namespace detail

// One row per model, one five-column group per mode: Su, Pr, "P@1, P@5",
// Tk/Su, FC/Su, with "--" for ratios undefined at zero successes. The same
// rendered values go to markdown and CSV.
inline std::string emit_table(const std::vector<RunRecord>& records, const BenchmarkSpec& spec,
                              const std::string& format) {
    std::vector<std::string> query_ids;
    for (const auto& q : spec.queries) query_ids.push_back(q.id);
    std::vector<std::string> mode_labels;
    for (const auto& m : spec.modes) mode_labels.push_back(mode_label(m));
    const std::vector<std::string> metric_names = {"Su", "Pr", "P@1, P@5", "Tk/Su", "FC/Su"};

    std::ostringstream out;
    const std::vector<std::string> models = records.empty() ? std::vector<std::string>{}
                                                            : spec.models;
    if (format == "markdown") {
        out << "| Model |";
        for (const auto& m : mode_labels)
            for (const auto& name : metric_names) out << " " << m << " " << name << " |";
        out << "\n|---|";
        for (size_t i = 0; i < mode_labels.size() * metric_names.size(); ++i) out << "---|";
        out << "\n";
        for (const auto& model : models) {
            out << "| " << model << " |";
            for (const auto& m : mode_labels)
                for (const auto& v : detail::cell_values(detail::aggregate(records, model, m, query_ids)))
                    out << " " << v << " |";
            out << "\n";
        }
    } else if (format == "csv") {
        out << "model";
        for (const auto& m : mode_labels)
            for (const auto& name : metric_names) out << "," << m << " " << name;
        out << "\n";
        for (const auto& model : models) {
            out << model;
            for (const auto& m : mode_labels)
                for (const auto& v : detail::cell_values(detail::aggregate(records, model, m, query_ids)))
                    out << ",\"" << v << "\"";
            out << "\n";
        }
    } else {
        throw std::invalid_argument("unknown table format: " + format);
    }
    return out.str();
}

// Appendix-style per-query breakdown: one table per query, same columns.
inline std::string emit_per_query_tables(const std::vector<RunRecord>& records,
                                         const BenchmarkSpec& spec) {
    std::ostringstream out;
    for (const auto& q : spec.queries) {
        out << "### " << q.id << ": " << q.text << "\n\n";
        std::vector<RunRecord> subset;
        for (const auto& r : records)
            if (r.query_id == q.id) subset.push_back(r);
        BenchmarkSpec one = spec;
        one.queries = {q};
        out << emit_table(subset, one, "markdown") << "\n";
    }
    return out.str();
}

} // namespace gridagent
