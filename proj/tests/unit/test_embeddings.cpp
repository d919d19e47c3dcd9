#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "claimgraph/embeddings.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "mock_embedder.hpp"

using namespace claimgraph;

namespace {

// Plain sparse TF-IDF (raw counts, smoothed idf, no hashing) and its cosine.
std::map<std::string, double> sparse_tfidf(const std::string& text, const std::vector<std::string>& corpus) {
    auto toks = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s + " ") {
            if (std::isalnum(static_cast<unsigned char>(ch))) {
                cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            } else {
                if (cur.size() >= 2) out.push_back(cur);
                cur.clear();
            }
        }
        return out;
    };
    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus) {
        auto t = toks(doc);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        for (const auto& w : t) ++df[w];
    }
    std::map<std::string, double> v;
    for (const auto& w : toks(text)) v[w] += 1.0;
    const double n = static_cast<double>(corpus.size());
    for (auto& [w, x] : v) x *= std::log((1.0 + n) / (1.0 + static_cast<double>(df[w]))) + 1.0;
    return v;
}

double sparse_cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (const auto& [w, x] : a) {
        aa += x * x;
        if (auto it = b.find(w); it != b.end()) ab += x * it->second;
    }
    for (const auto& [w, x] : b) bb += x * x;
    return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_CASE("tokenizer lowercases, splits on punctuation and drops short tokens") {
    CHECK(tokenize("The GDP, in 2020: a x-ray!") == std::vector<std::string>{"the", "gdp", "in", "2020", "ray"});
    CHECK(tokenize("").empty());
}

TEST_CASE("idf follows the smoothed formula") {
    const std::vector<std::string> corpus{"a b", "a c"};
    // Single-character tokens are dropped by default, so use a permissive tokenizer.
    const auto model = fit_tfidf(corpus, 16, TokenizerConfig{true, 1});
    CHECK(model.vocabulary().at("a").document_frequency == 2);
    CHECK(model.vocabulary().at("b").document_frequency == 1);
    CHECK(model.idf("a") == doctest::Approx(1.0));
    CHECK(model.idf("b") == doctest::Approx(std::log(3.0 / 2.0) + 1.0));
    CHECK(model.oov_idf() == doctest::Approx(std::log(3.0) + 1.0));

    const auto single = fit_tfidf(std::vector<std::string>{"x"}, 8, TokenizerConfig{true, 1});
    CHECK(single.vocabulary().size() == 1);
    CHECK(single.idf("x") == doctest::Approx(1.0));
}

TEST_CASE("fit_tfidf is deterministic and rejects an empty corpus") {
    const std::vector<std::string> corpus{"rates rose sharply", "rates fell", "the vote passed"};
    CHECK(fit_tfidf(corpus, 64) == fit_tfidf(corpus, 64));
    CHECK_THROWS_AS(fit_tfidf(std::vector<std::string>{}, 64), EmptyCorpusError);
    CHECK_THROWS_AS(fit_tfidf(corpus, 0), InvalidArgumentError);
}

TEST_CASE("embed_tfidf: unit norm, zero for tokenless text, order independence") {
    const std::vector<std::string> corpus{"rates rose sharply", "rates fell", "the vote passed"};
    const auto model = fit_tfidf(corpus, 64);
    CHECK(embed_tfidf(model, "rates rose").norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(embed_tfidf(model, "unseen words here").norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(embed_tfidf(model, "").is_zero());
    CHECK(embed_tfidf(model, "a ! ?").is_zero());
    CHECK(embed_tfidf(model, "rates rose") == embed_tfidf(model, "rose, rates"));
    CHECK(embed_tfidf(model, "rates rose") == embed_tfidf(model, "rates rose"));
}

TEST_CASE("hashed TF-IDF cosine tracks exact sparse TF-IDF at dim 2^16") {
    std::mt19937_64 rng(5);
    const std::vector<std::string> words{"tax",  "rate", "vote", "bank",  "court", "crime", "fuel",  "wage",
                                         "debt", "rail", "farm", "coal",  "trade", "price", "house", "school"};
    std::vector<std::string> corpus;
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(3, 8);
    for (int i = 0; i < 50; ++i) {
        std::string t;
        for (std::size_t k = len(rng); k > 0; --k) t += words[pick(rng)] + " ";
        corpus.push_back(t);
    }
    const auto model = fit_tfidf(corpus, 1u << 16);
    double worst = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto vi = embed_tfidf(model, corpus[i]);
        CHECK(1.0 - distance(vi, vi, Metric::cosine) == doctest::Approx(1.0));
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            const double hashed = 1.0 - distance(vi, embed_tfidf(model, corpus[j]), Metric::cosine);
            const double exact = sparse_cosine(sparse_tfidf(corpus[i], corpus), sparse_tfidf(corpus[j], corpus));
            worst = std::max(worst, std::abs(hashed - exact));
        }
    }
    CHECK(worst < 0.05);
}

TEST_CASE("TF-IDF model JSON round-trip") {
    const auto model = fit_tfidf(std::vector<std::string>{"alpha beta", "beta gamma"}, 32);
    CHECK(TfidfModel::from_json(model.to_json()) == model);
    fixtures::TempDir dir;
    model.save(dir / "m.json");
    CHECK(TfidfModel::load(dir / "m.json") == model);
}

TEST_CASE("vector store: lookup, missing key, round-trip of 1000 random vectors") {
    std::mt19937_64 rng(9);
    VectorStore store(512, "synthetic");
    const auto pts = fixtures::random_points(rng, 1000, 512);
    for (std::size_t i = 0; i < pts.size(); ++i) store.insert("text " + std::to_string(i), EmbeddingVector(pts[i]));
    fixtures::TempDir dir;
    store.save(dir / "v.jsonl");
    const auto back = VectorStore::load(dir / "v.jsonl");
    CHECK(back.dim() == 512);
    CHECK(back.provider() == "synthetic");
    REQUIRE(back.size() == 1000);
    bool all_equal = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        all_equal = all_equal && store_lookup(back, "text " + std::to_string(i)) == EmbeddingVector(pts[i]);
    }
    CHECK(all_equal);
    CHECK_THROWS_AS(store_lookup(back, "absent"), MissingVectorError);
    CHECK_THROWS_AS(store.insert("short", EmbeddingVector({1.0f})), DimensionError);
}

TEST_CASE("vector store file format is validated") {
    std::istringstream ok("{\"dim\": 2, \"provider\": \"p\"}\n{\"text\": \"a\", \"vector\": [1, 2]}\n");
    CHECK(VectorStore::read(ok).lookup("a") == EmbeddingVector({1, 2}));
    std::istringstream bad("{\"dim\": 2, \"provider\": \"p\"}\n{\"text\": \"a\", \"vector\": [1, 2, 3]}\n");
    CHECK_THROWS_AS(VectorStore::read(bad), DimensionError);
    std::istringstream garbage("not json\n");
    CHECK_THROWS_AS(VectorStore::read(garbage), ParseError);
}

TEST_CASE("store embedder falls back to TF-IDF only when asked") {
    auto store = std::make_shared<VectorStore>(4, "p");
    store->insert("known", EmbeddingVector({3, 4, 0, 0}));
    StoreEmbedder plain(store, true, nullptr);
    CHECK(plain.embed_one("known") == EmbeddingVector({0.6f, 0.8f, 0, 0}));
    CHECK_THROWS_AS(plain.embed_one("unknown"), MissingVectorError);
    auto tfidf = std::make_shared<TfidfEmbedder>(fit_tfidf(std::vector<std::string>{"unknown text"}, 4));
    StoreEmbedder with_fallback(store, false, tfidf);
    CHECK(with_fallback.embed_one("unknown text").dim() == 4);
}

TEST_CASE("remote embedder batches requests and returns vectors in order") {
    fixtures::MockEmbedder mock([](const std::string& t) {
        return std::vector<float>{static_cast<float>(t.size()), 1.0f, 2.0f};
    });
    RemoteEmbedderConfig cfg{mock.url(), 2000, 2, 3};
    const std::vector<std::string> texts{"a", "bb", "ccc"};
    const auto out = embed_remote(cfg, texts);
    CHECK(mock.requests() == 2);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == EmbeddingVector({1, 1, 2}));
    CHECK(out[2] == EmbeddingVector({3, 1, 2}));
}

TEST_CASE("remote embedder error mapping") {
    const std::vector<std::string> texts{"x"};
    SUBCASE("wrong dimension") {
        fixtures::MockEmbedder mock([](const std::string&) { return std::vector<float>(10, 0.5f); });
        CHECK_THROWS_AS(embed_remote(RemoteEmbedderConfig{mock.url(), 2000, 32, 512}, texts), DimensionError);
    }
    SUBCASE("server error") {
        fixtures::MockEmbedder mock([](const std::string&) { return std::vector<float>{1}; }, 0, 500);
        CHECK_THROWS_AS(embed_remote(RemoteEmbedderConfig{mock.url(), 2000, 32, 1}, texts), RemoteProtocolError);
    }
    SUBCASE("timeout") {
        fixtures::MockEmbedder mock([](const std::string&) { return std::vector<float>{1}; }, 600);
        CHECK_THROWS_AS(embed_remote(RemoteEmbedderConfig{mock.url(), 100, 32, 1}, texts), RemoteTimeoutError);
    }
    SUBCASE("nothing listening") {
        CHECK_THROWS_AS(embed_remote(RemoteEmbedderConfig{"http://127.0.0.1:1", 500, 32, 1}, texts),
                        RemoteProtocolError);
    }
}
