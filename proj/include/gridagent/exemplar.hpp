#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridagent/descriptor.hpp"
#include "gridagent/embedding.hpp"
#include "gridagent/util.hpp"
#include "gridagent/workflow.hpp"

namespace gridagent {

// One expert-authored (query, workflow) demonstration.
struct ExpertPair {
    std::string query;
    Workflow workflow;
};

inline Json expert_pair_to_json(const ExpertPair& p) {
    return {{"query", p.query}, {"workflow", workflow_to_json(p.workflow)}};
}

inline ExpertPair expert_pair_from_json(const Json& j) {
    ExpertPair p;
    p.query = j.at("query").get<std::string>();
    if (p.query.empty()) throw std::invalid_argument("expert pair with empty query");
    auto parsed = workflow_from_json(j.at("workflow"));
    if (!parsed.ok())
        throw std::invalid_argument("expert pair workflow: " + parsed.error().to_string());
    p.workflow = parsed.value();
    return p;
}

struct SelectionConfig {
    size_t k = 5;
    std::string embedder_id = "hashed-bow-256";
};

struct RankedExemplar {
    size_t index = 0; // position in the corpus
    double score = 0.0;
};

// The expert corpus plus cached query embeddings. Read-only once loaded;
// embeddings are computed once (optionally persisted keyed by embedder id and
// corpus digest) and shared by every selection.
class ExemplarCorpus {
public:
    ExemplarCorpus() = default;
    explicit ExemplarCorpus(std::vector<ExpertPair> pairs) : pairs_(std::move(pairs)) {}

    static ExemplarCorpus load_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open exemplar file: " + path.string());
        Json doc = Json::parse(in);
        std::vector<ExpertPair> pairs;
        for (const auto& j : doc) pairs.push_back(expert_pair_from_json(j));
        return ExemplarCorpus(std::move(pairs));
    }

    const std::vector<ExpertPair>& pairs() const { return pairs_; }
    size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    std::string digest() const {
        std::string all;
        for (const auto& p : pairs_) all += p.query + "\x1f";
        return to_hex(fnv1a64(all));
    }

    // Computes (or restores) the per-query embeddings. `cache_dir` empty means
    // in-memory only.
    void ensure_embeddings(Embedder& embedder, const std::filesystem::path& cache_dir = {}) {
        if (!embeddings_.empty() && embedder_id_ == embedder.id()) return;
        embedder_id_ = embedder.id();

        std::filesystem::path cache_file;
        if (!cache_dir.empty()) {
            std::string tag = embedder.id();
            for (char& c : tag)
                if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
            cache_file = cache_dir / (tag + "_" + digest() + ".json");
            if (std::filesystem::exists(cache_file)) {
                std::ifstream in(cache_file);
                Json doc = Json::parse(in, nullptr, false);
                if (!doc.is_discarded() && doc.value("embedder", "") == embedder.id() &&
                    doc.value("corpus", "") == digest()) {
                    std::vector<EmbeddingVector> restored;
                    for (const auto& p : pairs_) {
                        const std::string key = to_hex(fnv1a64(p.query));
                        if (!doc["vectors"].contains(key)) { restored.clear(); break; }
                        restored.push_back(doc["vectors"][key].get<EmbeddingVector>());
                    }
                    if (restored.size() == pairs_.size()) {
                        embeddings_ = std::move(restored);
                        return;
                    }
                }
            }
        }

        std::vector<std::string> queries;
        for (const auto& p : pairs_) queries.push_back(p.query);
        embeddings_ = embedder.embed_batch(queries);

        if (!cache_file.empty()) {
            Json vectors = Json::object();
            for (size_t i = 0; i < pairs_.size(); ++i)
                vectors[to_hex(fnv1a64(pairs_[i].query))] = embeddings_[i];
            Json doc = {{"embedder", embedder.id()}, {"corpus", digest()}, {"vectors", vectors}};
            std::filesystem::create_directories(cache_dir);
            std::ofstream out(cache_file, std::ios::trunc);
            out << doc.dump();
        }
    }

    const std::vector<EmbeddingVector>& embeddings() const {
        if (embeddings_.empty() && !pairs_.empty())
            throw std::logic_error("ensure_embeddings was not called");
        return embeddings_;
    }

private:
    std::vector<ExpertPair> pairs_;
    std::vector<EmbeddingVector> embeddings_;
    std::string embedder_id_;
};

// Top-k by descending cosine similarity to the query; ties keep corpus order.
// Vectors with zero norm score 0 rather than erroring, so punctuation-only
// inputs degrade gracefully.
inline std::vector<RankedExemplar> select_top_k(const std::string& query, ExemplarCorpus& corpus,
                                                Embedder& embedder, size_t k,
                                                const std::filesystem::path& cache_dir = {}) {
    if (corpus.empty()) throw std::invalid_argument("select_top_k requires a nonempty corpus");
    if (k == 0) throw std::invalid_argument("select_top_k requires k >= 1");
    corpus.ensure_embeddings(embedder, cache_dir);

    const EmbeddingVector qv = embedder.embed(query);
    double qnorm = 0.0;
    for (double x : qv) qnorm += x * x;

    std::vector<RankedExemplar> ranked;
    ranked.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        const EmbeddingVector& ev = corpus.embeddings()[i];
        double enorm = 0.0;
        for (double x : ev) enorm += x * x;
        double score = 0.0;
        if (qnorm > 0.0 && enorm > 0.0) score = cosine_similarity(qv, ev);
        ranked.push_back({i, score});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedExemplar& a, const RankedExemplar& b) {
        return a.score > b.score; // stable: equal scores keep ascending index
    });
    ranked.resize(std::min(k, ranked.size()));
    return ranked;
}

} // namespace gridagent
