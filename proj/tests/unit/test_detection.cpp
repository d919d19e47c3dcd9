#include <cmath>
#include <random>

#include "claimgraph/detection.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace claimgraph;

namespace {

std::vector<LabeledVector> random_training_data(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<LabeledVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> x(dim);
        for (auto& v : x) v = g(rng);
        out.push_back({EmbeddingVector(x), i % 2 == 0});
    }
    return out;
}

}  // namespace

TEST_CASE("sentence splitting examples") {
    CHECK(split_sentences("").empty());
    const auto two = split_sentences("A b. C d.");
    REQUIRE(two.size() == 2);
    CHECK(two[0].char_start == 0);
    CHECK(two[0].char_end == 4);
    CHECK(two[1].char_start == 5);
    CHECK(two[1].char_end == 9);
    CHECK(split_sentences("Dr. Smith spoke.").size() == 1);
    CHECK(split_sentences("Mr. J. R. Hartley met Mrs. Brown.").size() == 1);
    CHECK(split_sentences("Really?! Yes. \"Quoted.\" Then more.").size() == 4);
    CHECK(split_sentences("Prices rose 3.5 percent. Wages fell.").size() == 2);
    CHECK(split_sentences("lower case. continues here").size() == 1);
}

TEST_CASE("sentence offsets slice the original text and cover all non-space text") {
    const std::string text =
        "  The bridge opened in 1932. It carries 60,000 cars!  Does it? \"Yes.\" Dr. Jones agreed.\nNew line here.";
    const auto sentences = split_sentences(text, "a1");
    std::string covered(text.size(), ' ');
    std::size_t prev_end = 0;
    for (const auto& s : sentences) {
        CHECK(s.article_id == "a1");
        CHECK(text.substr(s.char_start, s.char_end - s.char_start) == s.text);
        CHECK(s.char_start >= prev_end);
        prev_end = s.char_end;
        for (std::size_t i = s.char_start; i < s.char_end; ++i) covered[i] = text[i];
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isspace(static_cast<unsigned char>(text[i]))) CHECK(covered[i] == text[i]);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(42);
    const auto data = random_training_data(rng, 30, 5);
    std::normal_distribution<double> g(0.0, 1.0);
    const double h = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(5);
        for (auto& x : w) x = g(rng);
        const double b = g(rng);
        const double lambda = 0.1;
        const auto grad = logistic_gradient(w, b, data, lambda);
        for (std::size_t i = 0; i <= w.size(); ++i) {
            auto wp = w, wm = w;
            double bp = b, bm = b;
            if (i < w.size()) {
                wp[i] += h;
                wm[i] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            const double fd = (logistic_loss(wp, bp, data, lambda) - logistic_loss(wm, bm, data, lambda)) / (2 * h);
            const double an = i < w.size() ? grad.weights[i] : grad.bias;
            worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8}));
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("separable 1-D data is fit perfectly") {
    std::vector<LabeledVector> data;
    for (int i = 0; i < 10; ++i) {
        data.push_back({EmbeddingVector({1.0f}), true});
        data.push_back({EmbeddingVector({-1.0f}), false});
    }
    const auto model = train_classifier(data, TrainOptions{});
    for (const auto& ex : data) CHECK(predict(model, ex.features).is_claim == ex.label);
}

TEST_CASE("huge lambda drives weights to zero and scores to the base rate") {
    std::mt19937_64 rng(3);
    auto data = random_training_data(rng, 40, 4);
    for (std::size_t i = 0; i < data.size(); ++i) data[i].label = i % 4 == 0;  // base rate 0.25
    const auto model = train_classifier(data, TrainOptions{1e6, 0.5, 2000, 1});
    for (double w : model.weights) CHECK(std::abs(w) < 1e-6);
    CHECK(predict(model, data[1].features).score == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("loss is non-increasing for a small learning rate and training is seeded") {
    std::mt19937_64 rng(8);
    const auto data = random_training_data(rng, 50, 6);
    const auto r = fit_logistic(data, TrainOptions{1e-3, 0.1, 200, 5});
    for (std::size_t i = 1; i < r.loss_per_epoch.size(); ++i) CHECK(r.loss_per_epoch[i] <= r.loss_per_epoch[i - 1]);
    CHECK(fit_logistic(data, TrainOptions{1e-3, 0.1, 200, 5}).classifier.weights == r.classifier.weights);
}

TEST_CASE("degenerate training inputs") {
    std::vector<LabeledVector> one_class{{EmbeddingVector({1.0f}), true}, {EmbeddingVector({2.0f}), true}};
    CHECK_THROWS_AS(train_classifier(one_class, TrainOptions{}), DegenerateLabelsError);
    std::vector<LabeledVector> mixed_dims{{EmbeddingVector({1.0f}), true}, {EmbeddingVector({2.0f, 1.0f}), false}};
    CHECK_THROWS_AS(train_classifier(mixed_dims, TrainOptions{}), DimensionError);
}

TEST_CASE("predict: zero model, sigmoid limits, recomputation oracle, threshold monotonicity") {
    ClaimClassifier zero{{0.0, 0.0}, 0.0, 0.5, 0.0};
    CHECK(predict(zero, EmbeddingVector({5, -3})).score == 0.5);
    ClaimClassifier unit{{1.0}, 0.0, 0.5, 0.0};
    CHECK(predict(unit, EmbeddingVector({0.0f})).score == 0.5);
    CHECK(predict(unit, EmbeddingVector({1e6f})).score == doctest::Approx(1.0));
    CHECK(predict(unit, EmbeddingVector({-1e6f})).score == doctest::Approx(0.0));
    CHECK_THROWS_AS(predict(unit, EmbeddingVector({1, 2})), DimensionError);

    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 1.0);
    ClaimClassifier c{{g(rng), g(rng), g(rng)}, g(rng), 0.5, 0.0};
    const auto pts = fixtures::random_points(rng, 50, 3);
    std::size_t prev_positive = pts.size() + 1;
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        c.threshold = t;
        std::size_t positive = 0;
        for (const auto& p : pts) {
            const double z = c.weights[0] * p[0] + c.weights[1] * p[1] + c.weights[2] * p[2] + c.bias;
            const auto pr = predict(c, EmbeddingVector(p));
            CHECK(pr.score == doctest::Approx(oracle::sigmoid(z)).epsilon(1e-9));
            positive += pr.is_claim;
        }
        CHECK(positive <= prev_positive);
        prev_positive = positive;
    }
}

TEST_CASE("classifier JSON round-trip") {
    ClaimClassifier c{{0.25, -1.5}, 0.125, 0.6, 0.01};
    const auto back = ClaimClassifier::from_json(c.to_json());
    CHECK(back.weights == c.weights);
    CHECK(back.bias == c.bias);
    CHECK(back.threshold == c.threshold);
    CHECK_THROWS_AS(ClaimClassifier::from_json("{\"dim\": 3, \"weights\": [1], \"bias\": 0, \"threshold\": 0.5}"),
                    DimensionError);
    CHECK_THROWS_AS(ClaimClassifier::from_json("{\"dim\": 1, \"weights\": [1], \"bias\": 0, \"threshold\": 1.5}"),
                    ParseError);
}

TEST_CASE("category rules") {
    CHECK(categorize("The GDP will shrink next year.") == Category::prediction);
    CHECK(categorize("Officials are going to resign.") == Category::prediction);
    CHECK(categorize("I saw the smoke rising.") == Category::personal_experience);
    CHECK(categorize("We really felt it.") == Category::personal_experience);
    CHECK(categorize(
              "In its 2015 order, the NGT had banned the plying of petrol vehicles older than 15 years and diesel "
              "vehicles older than 10 years in the National Capital Region (NCR).") == Category::checkable);
    CHECK(categorize("Willow trees grew by 4 percent.") == Category::checkable);

    auto claim = [](const std::string& t) {
        return Claim{t, Sentence{t, "", 0, t.size()}, EmbeddingVector({1.0f}), 1.0, Category::checkable, std::nullopt};
    };
    const auto kept = filter_categories({claim("The GDP will shrink next year."), claim("Exports rose 5 percent."),
                                         claim("I saw it happen.")});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].id == "Exports rose 5 percent.");
    CHECK(filter_categories({}).empty());
}

TEST_CASE("precision, recall, F1") {
    CHECK(evaluate_prf({true, false, true}, {true, false, true}).f1 == 1.0);
    const auto s = evaluate_prf({true, true, true, true, false}, {true, true, true, false, true});
    CHECK(s.precision == 0.75);
    CHECK(s.recall == 0.75);
    CHECK(s.f1 == 0.75);
    const auto none = evaluate_prf({false, false}, {true, false});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);
    CHECK_THROWS_AS(evaluate_prf({true}, {true, false}), AlignmentError);
    CHECK_THROWS_AS(evaluate_prf({}, {}), AlignmentError);

    // Permuting both lists consistently changes nothing.
    std::vector<bool> p{true, false, true, true, false, false}, g{true, true, false, true, false, true};
    const auto base = evaluate_prf(p, g);
    std::swap(p[0], p[5]);
    std::swap(g[0], g[5]);
    std::vector<bool> pp = p, gg = g;
    CHECK(evaluate_prf(pp, gg).f1 == base.f1);
}

TEST_CASE("labelled corpus loads and the detector keeps the vehicle-ban claim") {
    const auto corpus = read_labeled_corpus(std::filesystem::path(CLAIMGRAPH_DATA_DIR) / "detection_corpus.jsonl");
    CHECK(corpus.size() == 60);
    std::vector<std::string> texts;
    for (const auto& s : corpus) texts.push_back(s.sentence.text);
    auto embedder = std::make_shared<TfidfEmbedder>(fit_tfidf(texts, 512));
    ClaimDetector rules_only(embedder, std::nullopt);
    const auto out = rules_only.detect(
        "a", "In its 2015 order, the NGT had banned the plying of petrol vehicles older than 15 years. The GDP will "
             "shrink next year. I saw the smoke.");
    REQUIRE(out.size() == 3);
    CHECK(out[0].is_claim);
    CHECK(out[1].category == Category::prediction);
    CHECK_FALSE(out[1].is_claim);
    CHECK(out[2].category == Category::personal_experience);
    CHECK(rules_only.detect("a", "").empty());
}
