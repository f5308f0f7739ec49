#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "gridagent/util.hpp"

namespace gridagent {

using Json = nlohmann::json;
using EmbeddingVector = std::vector<double>;

struct DimensionMismatch : std::invalid_argument {
    DimensionMismatch(size_t a, size_t b)
        : std::invalid_argument("embedding dimensions differ: " + std::to_string(a) + " vs " +
                                std::to_string(b)) {}
};

struct ZeroNormError : std::invalid_argument {
    ZeroNormError() : std::invalid_argument("cosine similarity undefined for zero-norm vector") {}
};

struct RemoteEmbedderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ZeroNormError();
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual size_t dimension() const = 0;
    virtual EmbeddingVector embed(const std::string& text) = 0;

    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
};

// Deterministic local fallback: hashed bag-of-words with term-frequency
// weights over lowercase word tokens, L2-normalized, fixed dimension 256.
// Token-disjoint texts land in disjoint buckets (hash collisions aside), so
// their cosine similarity is zero.
class HashedBowEmbedder : public Embedder {
public:
    static constexpr size_t kDimension = 256;

    std::string id() const override { return "hashed-bow-256"; }
    size_t dimension() const override { return kDimension; }

    EmbeddingVector embed(const std::string& text) override {
        if (trim(text).empty())
            throw std::invalid_argument("embed requires nonempty text");
        EmbeddingVector v(kDimension, 0.0);
        for (const auto& token : word_tokens(text))
            v[fnv1a64(token) % kDimension] += 1.0;
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (double& x : v) x /= norm;
        return v;
    }
};

// Client for the common embeddings HTTP shape: POST a list of strings, get a
// list of float arrays back.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(std::string base_url, std::string model, std::string api_key = "",
                   std::string path = "/v1/embeddings", int timeout_seconds = 30)
        : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)),
          path_(std::move(path)), timeout_(timeout_seconds) {}

    std::string id() const override { return "remote:" + model_; }

    size_t dimension() const override {
        if (dimension_ == 0)
            throw RemoteEmbedderError("remote embedder dimension unknown before first call");
        return dimension_;
    }

    EmbeddingVector embed(const std::string& text) override {
        return embed_batch({text}).front();
    }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        for (const auto& t : texts)
            if (trim(t).empty()) throw std::invalid_argument("embed requires nonempty text");
        httplib::Client client(base_url_);
        client.set_read_timeout(timeout_, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.insert({"Authorization", "Bearer " + api_key_});
        Json body = {{"model", model_}, {"input", texts}};
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res)
            throw RemoteEmbedderError("embedding request failed: " +
                                      httplib::to_string(res.error()));
        if (res->status != 200)
            throw RemoteEmbedderError("embedding request returned HTTP " +
                                      std::to_string(res->status));
        Json doc = Json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("data"))
            throw RemoteEmbedderError("embedding response is not the expected JSON shape");
        std::vector<EmbeddingVector> out;
        for (const auto& item : doc["data"])
            out.push_back(item.at("embedding").get<EmbeddingVector>());
        if (out.size() != texts.size())
            throw RemoteEmbedderError("embedding response count mismatch");
        if (!out.empty()) dimension_ = out.front().size();
        return out;
    }

private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    std::string path_;
    int timeout_;
    size_t dimension_ = 0;
};

} // namespace gridagent
