#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "gridagent/bench.hpp"
#include "gridagent/config.hpp"
#include "gridagent/gridtools.hpp"
#include "gridagent/orchestrator.hpp"

namespace ga = gridagent;

namespace {

struct CliState {
    std::string config_path;
    std::string mode_override;
    int k_override = 0;
    std::string model_override;
    std::string out_override;
    bool trace = false;
    bool json_output = false;
    int jobs = 1;

    ga::AppConfig config;
    ga::Registry registry = ga::gridtools::build_registry();
    ga::ExemplarCorpus corpus;
    std::unique_ptr<ga::Embedder> embedder;

    void finalize() {
        if (!config_path.empty()) {
            config = ga::AppConfig::load(config_path);
        }
        if (!mode_override.empty()) {
            auto m = ga::mode_from_string(mode_override);
            if (!m) throw ga::ConfigError("unknown mode: " + mode_override);
            config.mode.mode = *m;
        }
        if (k_override > 0) config.mode.k = static_cast<size_t>(k_override);
        if (!model_override.empty()) config.llm.model = model_override;
        if (!out_override.empty()) config.out_dir = out_override;
        embedder = config.make_embedder();
        if (std::filesystem::exists(config.exemplars))
            corpus = ga::ExemplarCorpus::load_file(config.exemplars);
    }

    // exemplar-dependent commands fail here; `tools` and `validate` never do
    void require_corpus_for_mode() const {
        if (corpus.empty() &&
            (config.mode.mode == ga::Mode::Full || config.mode.mode == ga::Mode::TopK))
            throw ga::ConfigError("exemplar file not found: " + config.exemplars.string() +
                                  " (required by mode " + ga::mode_name(config.mode.mode) + ")");
    }

    ga::SessionConfig session_config() {
        ga::SessionConfig scfg;
        scfg.mode = config.mode;
        scfg.max_iterations = config.max_iterations;
        scfg.model = config.llm.model;
        scfg.registry = &registry;
        scfg.corpus = corpus.empty() ? nullptr : &corpus;
        scfg.embedder = embedder.get();
        scfg.embedding_cache_dir = config.embedding_cache_dir;
        return scfg;
    }
};

int run_one_query(CliState& state, const std::string& text, const std::string& run_id) {
    state.require_corpus_for_mode();
    ga::SessionConfig scfg = state.session_config();
    ga::ExecutionContext ctx;
    ctx.store = ga::DataStore(state.config.data_root);
    ctx.run_id = run_id;
    ctx.artifact_root = state.config.out_dir / "artifacts";

    auto client = state.config.make_client();
    ga::SessionResult result = ga::run_session(text, scfg, *client, ctx);

    if (state.trace) {
        std::filesystem::create_directories(state.config.out_dir);
        const auto path = state.config.out_dir / (run_id + "_trace.json");
        std::ofstream out(path, std::ios::trunc);
        out << ga::session_transcript(text, scfg, result).dump(2) << "\n";
        std::cerr << "trace: " << path.string() << "\n";
    }

    if (state.json_output) {
        ga::Json j = {{"status", result.completed() ? "completed" : "exhausted"},
                      {"iterations", result.iterations},
                      {"tokens", result.total_tokens},
                      {"function_calls", result.function_calls},
                      {"digest", result.digest},
                      {"workflow", ga::workflow_to_json(result.final_workflow)},
                      {"exit_strings", result.final_exit_strings},
                      {"last_error", result.last_error}};
        std::cout << j.dump(2) << "\n";
    } else if (result.completed()) {
        for (size_t i = 0; i < result.final_exit_strings.size(); ++i)
            std::cout << (i + 1) << ". " << result.final_exit_strings[i] << "\n";
        std::cout << "(completed in " << result.iterations << " iteration"
                  << (result.iterations == 1 ? "" : "s") << ", " << result.total_tokens
                  << " tokens, " << result.function_calls << " calls)\n";
        for (const auto& art : ctx.pending_artifacts)
            std::cout << "artifact: " << (ctx.run_dir() / art.filename).string() << "\n";
    } else {
        std::cout << "no accepted workflow after " << result.iterations
                  << " iterations: " << result.last_error << "\n";
    }
    return result.completed() ? 0 : 2;
}

int cmd_query(CliState& state, const std::string& text) {
    return run_one_query(state, text, "query");
}

int cmd_repl(CliState& state) {
    std::cout << "interactive mode; empty line or \"exit\" quits\n";
    std::string line;
    int n = 0;
    while (true) {
        std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        const std::string text = ga::trim(line);
        if (text.empty() || text == "exit" || text == "quit") break;
        // fresh session per query: no history leaks between questions
        run_one_query(state, text, "repl_" + std::to_string(n++));
    }
    return 0;
}

int cmd_bench(CliState& state, const std::string& spec_path) {
    ga::BenchmarkSpec spec;
    try {
        spec = ga::BenchmarkSpec::from_file(spec_path);
    } catch (const std::exception& e) {
        std::cerr << "benchmark spec error: " << e.what() << "\n";
        return 1;
    }
    if (!state.model_override.empty()) spec.models = {state.model_override};
    for (const auto& mode : spec.modes)
        if ((mode.mode == ga::Mode::Full || mode.mode == ga::Mode::TopK) && state.corpus.empty())
            throw ga::ConfigError("benchmark spec uses mode " + ga::mode_label(mode) +
                                  " but no exemplar file was found at " +
                                  state.config.exemplars.string());

    ga::BenchOptions opts;
    opts.registry = &state.registry;
    opts.corpus = state.corpus.empty() ? nullptr : &state.corpus;
    opts.embedder = state.embedder.get();
    opts.store = ga::DataStore(state.config.data_root);
    opts.out_dir = state.config.out_dir;
    opts.embedding_cache_dir = state.config.embedding_cache_dir;
    opts.max_iterations = state.config.max_iterations;
    opts.jobs = state.jobs;

    std::shared_ptr<ga::ScriptBook> book;
    if (state.config.llm.type == "mock") {
        if (state.config.llm.scripts.empty()) {
            std::cerr << "mock llm profile requires a \"scripts\" file for bench\n";
            return 1;
        }
        book = std::make_shared<ga::ScriptBook>(ga::ScriptBook::from_file(state.config.llm.scripts));
    }
    const ga::AppConfig& cfg = state.config;
    opts.factory = [book, &cfg](const ga::BenchmarkQuery& q, const ga::ModeConfig&,
                                const std::string&, int) -> std::unique_ptr<ga::LlmClient> {
        if (book) return book->make_client(q.id);
        return cfg.make_client();
    };

    ga::BenchOutcome outcome = ga::run_benchmark(spec, opts);

    std::filesystem::create_directories(opts.out_dir);
    {
        std::ofstream md(opts.out_dir / "table.md", std::ios::trunc);
        md << ga::emit_table(outcome.records, spec, "markdown");
        std::ofstream csv(opts.out_dir / "table.csv", std::ios::trunc);
        csv << ga::emit_table(outcome.records, spec, "csv");
        std::ofstream per(opts.out_dir / "per_query.md", std::ios::trunc);
        per << ga::emit_per_query_tables(outcome.records, spec);
    }
    std::cout << ga::emit_table(outcome.records, spec, "markdown");
    std::cout << "records: " << (opts.out_dir / "records.jsonl").string() << " ("
              << outcome.records.size() << " rows)\n";
    if (!outcome.complete()) {
        std::cerr << "incomplete cells (transport failures):\n";
        for (const auto& c : outcome.incomplete_cells) std::cerr << "  " << c << "\n";
        return 2;
    }
    return 0;
}

int cmd_validate(CliState& state, const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        std::cerr << "cannot open workflow file: " << file << "\n";
        return 1;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto parsed = ga::parse_workflow(text);
    if (!parsed.ok()) {
        std::cerr << "parse error: " << parsed.error().to_string() << "\n";
        return 1;
    }
    ga::ValidationReport report =
        ga::validate_workflow(parsed.value(), state.registry.export_descriptors(true));
    if (state.json_output) {
        ga::Json violations = ga::Json::array();
        for (const auto& v : report.violations)
            violations.push_back({{"step", v.step}, {"detail", v.detail}});
        std::cout << ga::Json({{"valid", report.valid()}, {"violations", violations}}).dump(2)
                  << "\n";
    } else {
        std::cout << report.to_string() << "\n";
    }
    return report.valid() ? 0 : 2;
}

int cmd_tools(CliState& state) {
    const ga::DescriptorSet set = state.registry.export_descriptors(true);
    if (state.json_output) {
        std::cout << ga::descriptor_set_to_json(set).dump(2) << "\n";
        return 0;
    }
    for (const auto& d : set.items()) {
        std::cout << d.name << "(";
        for (size_t i = 0; i < d.params.size(); ++i) {
            if (i) std::cout << ", ";
            std::cout << d.params[i].name << ": " << ga::param_type_name(d.params[i].type);
        }
        std::cout << ")\n";
        if (!d.description.empty()) std::cout << "    " << d.description << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridagent: LLM-orchestrated distribution-grid analysis"};
    app.require_subcommand(1);

    CliState state;
    app.add_option("--config", state.config_path, "JSON config file");
    app.add_option("--mode", state.mode_override, "prompting mode: zeroctx|mini|full|topk");
    app.add_option("--k", state.k_override, "exemplar count for topk mode");
    app.add_option("--model", state.model_override, "model name override");
    app.add_option("--out", state.out_override, "output directory override");
    app.add_flag("--trace", state.trace, "write the session transcript");
    app.add_flag("--json", state.json_output, "machine-readable output");
    app.add_option("--jobs", state.jobs, "parallel benchmark cells");

    std::string query_text, bench_spec, validate_file;
    auto* query = app.add_subcommand("query", "answer one natural-language query");
    query->add_option("text", query_text, "the query")->required();
    auto* repl = app.add_subcommand("repl", "interactive query loop");
    auto* bench = app.add_subcommand("bench", "run a benchmark spec");
    bench->add_option("spec", bench_spec, "benchmark spec JSON")->required();
    auto* validate = app.add_subcommand("validate", "validate a workflow file against the pool");
    validate->add_option("file", validate_file, "workflow JSON file")->required();
    auto* tools = app.add_subcommand("tools", "list the function pool");

    CLI11_PARSE(app, argc, argv);

    try {
        state.finalize();
        if (query->parsed()) return cmd_query(state, query_text);
        if (repl->parsed()) return cmd_repl(state);
        if (bench->parsed()) return cmd_bench(state, bench_spec);
        if (validate->parsed()) return cmd_validate(state, validate_file);
        if (tools->parsed()) return cmd_tools(state);
    } catch (const ga::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
