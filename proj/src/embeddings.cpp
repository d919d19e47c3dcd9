#include "claimgraph/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"

using json = nlohmann::json;

namespace claimgraph {

namespace {

bool is_word_byte(unsigned char c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<float> json_to_floats(const json& arr) {
    std::vector<float> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw ParseError("vector entries must be numbers");
        out.push_back(static_cast<float>(v.get<double>()));
    }
    return out;
}

json floats_to_json(std::span<const float> values) {
    json arr = json::array();
    for (float f : values) arr.push_back(static_cast<double>(f));
    return arr;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= cfg.min_token_length && !current.empty()) tokens.push_back(current);
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(cfg.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

TfidfModel::TfidfModel(std::map<std::string, VocabEntry, std::less<>> vocabulary, std::size_t num_documents,
                       std::size_t hash_dim, TokenizerConfig tokenizer)
    : vocabulary_(std::move(vocabulary)),
      num_documents_(num_documents),
      hash_dim_(hash_dim),
      tokenizer_(tokenizer) {
    if (num_documents_ == 0) throw EmptyCorpusError("tf-idf model needs at least one document");
    if (hash_dim_ == 0) throw InvalidArgumentError("hash_dim must be >= 1");
}

double TfidfModel::oov_idf() const noexcept {
    return std::log(1.0 + static_cast<double>(num_documents_)) + 1.0;
}

double TfidfModel::idf(std::string_view token) const {
    const auto it = vocabulary_.find(token);
    return it == vocabulary_.end() ? oov_idf() : it->second.idf;
}

std::size_t TfidfModel::bucket(std::string_view token) const noexcept {
    return static_cast<std::size_t>(fnv1a64(token) % hash_dim_);
}

float TfidfModel::sign(std::string_view token) const noexcept {
    return (splitmix64(fnv1a64(token)) >> 63) ? -1.0f : 1.0f;
}

std::string TfidfModel::to_json() const {
    json vocab = json::object();
    for (const auto& [tok, e] : vocabulary_) {
        vocab[tok] = {{"index", e.index}, {"idf", e.idf}, {"df", e.document_frequency}};
    }
    json j = {{"kind", "tfidf"},
              {"num_documents", num_documents_},
              {"hash_dim", hash_dim_},
              {"tokenizer", {{"lowercase", tokenizer_.lowercase}, {"min_token_length", tokenizer_.min_token_length}}},
              {"vocabulary", std::move(vocab)}};
    return j.dump();
}

TfidfModel TfidfModel::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        TokenizerConfig tok;
        tok.lowercase = j.at("tokenizer").at("lowercase").get<bool>();
        tok.min_token_length = j.at("tokenizer").at("min_token_length").get<std::size_t>();
        std::map<std::string, VocabEntry, std::less<>> vocab;
        for (const auto& [key, e] : j.at("vocabulary").items()) {
            vocab.emplace(key, VocabEntry{e.at("index").get<std::size_t>(), e.at("idf").get<double>(),
                                          e.at("df").get<std::size_t>()});
        }
        return TfidfModel(std::move(vocab), j.at("num_documents").get<std::size_t>(),
                          j.at("hash_dim").get<std::size_t>(), tok);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid tf-idf model: ") + e.what());
    }
}

void TfidfModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot write " + path.string());
    out << to_json() << '\n';
}

TfidfModel TfidfModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

TfidfModel fit_tfidf(std::span<const std::string> corpus, std::size_t hash_dim, const TokenizerConfig& cfg) {
    if (corpus.empty()) throw EmptyCorpusError("cannot fit tf-idf on an empty corpus");
    if (hash_dim == 0) throw InvalidArgumentError("hash_dim must be >= 1");

    std::map<std::string, std::size_t, std::less<>> df;
    for (const auto& doc : corpus) {
        auto tokens = tokenize(doc, cfg);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) ++df[std::move(t)];
    }

    const double n = static_cast<double>(corpus.size());
    std::map<std::string, VocabEntry, std::less<>> vocab;
    for (const auto& [tok, count] : df) {
        const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
        vocab.emplace(tok, VocabEntry{static_cast<std::size_t>(fnv1a64(tok) % hash_dim), idf, count});
    }
    return TfidfModel(std::move(vocab), corpus.size(), hash_dim, cfg);
}

EmbeddingVector embed_tfidf(const TfidfModel& model, std::string_view text) {
    std::map<std::string, std::size_t, std::less<>> tf;
    for (auto& t : tokenize(text, model.tokenizer())) ++tf[std::move(t)];

    std::vector<double> acc(model.hash_dim(), 0.0);
    for (const auto& [tok, count] : tf) {
        acc[model.bucket(tok)] += model.sign(tok) * static_cast<double>(count) * model.idf(tok);
    }
    double norm2 = 0.0;
    for (double v : acc) norm2 += v * v;

    std::vector<float> out(acc.size(), 0.0f);
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] * inv);
    }
    return EmbeddingVector(std::move(out));
}

VectorStore::VectorStore(std::size_t dim, std::string provider) : dim_(dim), provider_(std::move(provider)) {
    if (dim_ == 0) throw InvalidArgumentError("vector store dim must be >= 1");
}

void VectorStore::insert(std::string text, EmbeddingVector v) {
    if (v.dim() != dim_) {
        throw DimensionError("vector for '" + text + "' has dim " + std::to_string(v.dim()) + ", store dim is " +
                             std::to_string(dim_));
    }
    auto it = entries_.find(text);
    if (it != entries_.end()) {
        it->second = std::move(v);
        return;
    }
    order_.push_back(text);
    entries_.emplace(std::move(text), std::move(v));
}

const EmbeddingVector& VectorStore::lookup(const std::string& text) const {
    const auto it = entries_.find(text);
    if (it == entries_.end()) throw MissingVectorError("no stored vector for text: " + text);
    return it->second;
}

const EmbeddingVector& store_lookup(const VectorStore& store, const std::string& text) {
    return store.lookup(text);
}

VectorStore VectorStore::read(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };
    if (!next_line()) throw ParseError("vector file is empty (missing manifest line)");
    try {
        const json manifest = json::parse(line);
        VectorStore store(manifest.at("dim").get<std::size_t>(), manifest.value("provider", std::string{}));
        while (next_line()) {
            const json entry = json::parse(line);
            auto values = json_to_floats(entry.at("vector"));
            if (values.size() != store.dim()) {
                throw DimensionError("line " + std::to_string(lineno) + ": vector length " +
                                     std::to_string(values.size()) + " != manifest dim " +
                                     std::to_string(store.dim()));
            }
            store.insert(entry.at("text").get<std::string>(), EmbeddingVector(std::move(values)));
        }
        return store;
    } catch (const json::exception& e) {
        throw ParseError("vector file line " + std::to_string(lineno) + ": " + e.what());
    }
}

void VectorStore::write(std::ostream& out) const {
    out << json{{"dim", dim_}, {"provider", provider_}}.dump() << '\n';
    for (const auto& key : order_) {
        out << json{{"text", key}, {"vector", floats_to_json(entries_.at(key).values())}}.dump() << '\n';
    }
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    return read(in);
}

void VectorStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot write " + path.string());
    write(out);
}

namespace {

struct Endpoint {
    std::string scheme_host_port;
    std::string base_path;
};

Endpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
        throw InvalidArgumentError("remote embedder endpoint must be an http:// URL: " + url);
    }
    const auto path = url.find('/', scheme + 3);
    Endpoint ep;
    ep.scheme_host_port = url.substr(0, path);
    ep.base_path = path == std::string::npos ? "" : url.substr(path);
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
    return ep;
}

}  // namespace

std::vector<EmbeddingVector> embed_remote(const RemoteEmbedderConfig& cfg, std::span<const std::string> texts) {
    if (texts.empty()) throw InvalidArgumentError("embed_remote needs at least one text");
    if (cfg.batch_size == 0) throw InvalidArgumentError("batch_size must be >= 1");
    if (cfg.timeout_ms <= 0) throw InvalidArgumentError("timeout_ms must be positive");

    const Endpoint ep = parse_endpoint(cfg.endpoint_url);
    httplib::Client client(ep.scheme_host_port);
    const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += cfg.batch_size) {
        const std::size_t end = std::min(texts.size(), begin + cfg.batch_size);
        json body = {{"texts", json::array()}};
        for (std::size_t i = begin; i < end; ++i) body["texts"].push_back(texts[i]);

        auto res = client.Post(ep.base_path + "/embed", body.dump(), "application/json");
        if (!res) {
            const auto err = res.error();
            const std::string msg = "remote embedder: " + httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                throw RemoteTimeoutError(msg);
            }
            throw RemoteProtocolError(msg);
        }
        if (res->status < 200 || res->status >= 300) {
            throw RemoteProtocolError("remote embedder returned HTTP " + std::to_string(res->status));
        }
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            throw RemoteProtocolError(std::string("remote embedder returned invalid JSON: ") + e.what());
        }
        if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
            throw RemoteProtocolError("remote embedder response lacks a \"vectors\" array");
        }
        const auto& vectors = reply["vectors"];
        if (vectors.size() != end - begin) {
            throw RemoteProtocolError("remote embedder returned " + std::to_string(vectors.size()) +
                                      " vectors for " + std::to_string(end - begin) + " texts");
        }
        for (const auto& v : vectors) {
            auto values = json_to_floats(v);
            if (values.size() != cfg.expected_dim) {
                throw DimensionError("remote embedder returned dim " + std::to_string(values.size()) +
                                     ", expected " + std::to_string(cfg.expected_dim));
            }
            out.emplace_back(std::move(values));
        }
    }
    return out;
}

EmbeddingVector Embedder::embed_one(const std::string& text) const {
    auto v = embed(std::span<const std::string>(&text, 1));
    return std::move(v.front());
}

std::vector<EmbeddingVector> TfidfEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_tfidf(model_, t));
    return out;
}

StoreEmbedder::StoreEmbedder(std::shared_ptr<const VectorStore> store, bool normalize,
                             std::shared_ptr<const Embedder> fallback)
    : store_(std::move(store)), normalize_(normalize), fallback_(std::move(fallback)) {
    if (!store_) throw InvalidArgumentError("StoreEmbedder needs a vector store");
    if (fallback_ && fallback_->dim() != store_->dim()) {
        throw DimensionError("fallback embedder dim does not match the vector store");
    }
}

std::string StoreEmbedder::name() const {
    return store_->provider().empty() ? std::string("store") : store_->provider();
}

std::vector<EmbeddingVector> StoreEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (!store_->contains(t) && fallback_) {
            out.push_back(fallback_->embed_one(t));
            continue;
        }
        const auto& v = store_->lookup(t);
        out.push_back(normalize_ && !v.is_zero() ? v.normalized() : v);
    }
    return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) const {
    auto out = embed_remote(cfg_, texts);
    if (normalize_) {
        for (auto& v : out) {
            if (!v.is_zero()) v = v.normalized();
        }
    }
    return out;
}

std::shared_ptr<const Embedder> make_embedder(const ProviderConfig& cfg) {
    if (cfg.provider == "tfidf") {
        return std::make_shared<TfidfEmbedder>(TfidfModel::load(cfg.model_path));
    }
    if (cfg.provider == "store") {
        auto store = std::make_shared<const VectorStore>(VectorStore::load(cfg.vectors_path));
        std::shared_ptr<const Embedder> fallback;
        if (cfg.tfidf_fallback) fallback = std::make_shared<TfidfEmbedder>(TfidfModel::load(cfg.model_path));
        return std::make_shared<StoreEmbedder>(std::move(store), cfg.normalize, std::move(fallback));
    }
    if (cfg.provider == "remote") {
        return std::make_shared<RemoteEmbedder>(cfg.remote, cfg.normalize);
    }
    throw InvalidArgumentError("unknown embedding provider: " + cfg.provider);
}

}  // namespace claimgraph
