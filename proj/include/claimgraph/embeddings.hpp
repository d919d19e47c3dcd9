#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "claimgraph/core.hpp"

namespace claimgraph {

struct TokenizerConfig {
    bool lowercase = true;
    std::size_t min_token_length = 2;

    bool operator==(const TokenizerConfig&) const = default;
};

/// Splits on runs of non-alphanumeric ASCII bytes. Bytes >= 0x80 are kept as
/// word characters so UTF-8 words are not torn apart.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg = {});

/// Stable 64-bit FNV-1a; the projection must not depend on std::hash.
std::uint64_t fnv1a64(std::string_view s) noexcept;

struct VocabEntry {
    std::size_t index = 0;  // hashed bucket in [0, hash_dim)
    double idf = 1.0;
    std::size_t document_frequency = 0;

    bool operator==(const VocabEntry&) const = default;
};

/// Fitted TF-IDF weights projected into a fixed dense dimension with signed
/// feature hashing. Immutable once built.
class TfidfModel {
public:
    TfidfModel(std::map<std::string, VocabEntry, std::less<>> vocabulary, std::size_t num_documents,
               std::size_t hash_dim, TokenizerConfig tokenizer);

    const std::map<std::string, VocabEntry, std::less<>>& vocabulary() const noexcept { return vocabulary_; }
    std::size_t num_documents() const noexcept { return num_documents_; }
    std::size_t hash_dim() const noexcept { return hash_dim_; }
    const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }

    /// Fitted idf, or ln(1 + N) + 1 for an out-of-vocabulary token.
    double idf(std::string_view token) const;
    double oov_idf() const noexcept;

    std::size_t bucket(std::string_view token) const noexcept;
    /// +1 or -1, derived from bits of the token hash independent of bucket().
    float sign(std::string_view token) const noexcept;

    std::string to_json() const;
    static TfidfModel from_json(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static TfidfModel load(const std::filesystem::path& path);

    bool operator==(const TfidfModel&) const = default;

private:
    std::map<std::string, VocabEntry, std::less<>> vocabulary_;
    std::size_t num_documents_;
    std::size_t hash_dim_;
    TokenizerConfig tokenizer_;
};

/// idf(t) = ln((1 + N) / (1 + df(t))) + 1. Throws EmptyCorpusError.
TfidfModel fit_tfidf(std::span<const std::string> corpus, std::size_t hash_dim, const TokenizerConfig& cfg = {});

/// Raw term counts times idf, hashed into model.hash_dim() buckets and
/// L2-normalised. Text without tokens yields the zero vector; callers detect
/// that with is_zero() since it cannot be normalised.
EmbeddingVector embed_tfidf(const TfidfModel& model, std::string_view text);

/// Exact-text -> vector map backed by the JSON Lines vector file format.
class VectorStore {
public:
    explicit VectorStore(std::size_t dim, std::string provider = "");

    void insert(std::string text, EmbeddingVector v);
    /// Throws MissingVectorError when the key is absent.
    const EmbeddingVector& lookup(const std::string& text) const;
    bool contains(const std::string& text) const { return entries_.contains(text); }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return order_.size(); }
    const std::string& provider() const noexcept { return provider_; }
    const std::vector<std::string>& keys() const noexcept { return order_; }

    static VectorStore read(std::istream& in);
    void write(std::ostream& out) const;
    static VectorStore load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::size_t dim_;
    std::string provider_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
    std::vector<std::string> order_;
};

const EmbeddingVector& store_lookup(const VectorStore& store, const std::string& text);

struct RemoteEmbedderConfig {
    std::string endpoint_url;
    int timeout_ms = 10000;
    std::size_t batch_size = 32;
    std::size_t expected_dim = 512;
};

/// POSTs {"texts": [...]} to {endpoint_url}/embed in ceil(n / batch_size)
/// requests and returns one vector per text in input order.
std::vector<EmbeddingVector> embed_remote(const RemoteEmbedderConfig& cfg, std::span<const std::string> texts);

class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Metric preferred_metric() const = 0;
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;

    EmbeddingVector embed_one(const std::string& text) const;
};

class TfidfEmbedder final : public Embedder {
public:
    explicit TfidfEmbedder(TfidfModel model) : model_(std::move(model)) {}

    std::string name() const override { return "tfidf"; }
    std::size_t dim() const override { return model_.hash_dim(); }
    Metric preferred_metric() const override { return Metric::cosine; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

    const TfidfModel& model() const noexcept { return model_; }

private:
    TfidfModel model_;
};

/// Serves precomputed vectors. Misses go to `fallback` when one is given,
/// otherwise MissingVectorError propagates.
class StoreEmbedder final : public Embedder {
public:
    StoreEmbedder(std::shared_ptr<const VectorStore> store, bool normalize = false,
                  std::shared_ptr<const Embedder> fallback = nullptr);

    std::string name() const override;
    std::size_t dim() const override { return store_->dim(); }
    Metric preferred_metric() const override { return Metric::euclidean; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

private:
    std::shared_ptr<const VectorStore> store_;
    bool normalize_;
    std::shared_ptr<const Embedder> fallback_;
};

class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig cfg, bool normalize = false, std::string label = "remote")
        : cfg_(std::move(cfg)), normalize_(normalize), label_(std::move(label)) {}

    std::string name() const override { return label_; }
    std::size_t dim() const override { return cfg_.expected_dim; }
    Metric preferred_metric() const override { return Metric::euclidean; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

private:
    RemoteEmbedderConfig cfg_;
    bool normalize_;
    std::string label_;
};

/// Provider selection as it appears in configuration files.
struct ProviderConfig {
    std::string provider = "tfidf";  // tfidf | store | remote
    std::filesystem::path model_path;    // tfidf
    std::filesystem::path vectors_path;  // store
    RemoteEmbedderConfig remote;         // remote
    bool normalize = false;              // store / remote
    bool tfidf_fallback = false;         // store: fall back to model_path on misses
};

std::shared_ptr<const Embedder> make_embedder(const ProviderConfig& cfg);

}  // namespace claimgraph
