#include "claimgraph/detection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

using json = nlohmann::json;

namespace claimgraph {

namespace {

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }
bool is_terminator(char c) noexcept { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) noexcept { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) noexcept { return c == '"' || c == '\'' || c == '(' || c == '['; }

// The word that ends right before the period at `dot`, minus leading
// punctuation such as an opening quote or bracket.
std::string_view word_before(std::string_view text, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0 && !is_space(text[b - 1])) --b;
    std::string_view w = text.substr(b, dot - b);
    while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.front()))) w.remove_prefix(1);
    return w;
}

bool is_abbreviation(std::string_view word) {
    if (word.empty()) return false;
    if (word.size() == 1 && is_upper(word[0])) return true;  // initial: "J. Smith"
    if (word.find('.') != std::string_view::npos) return true;  // "U.S", "e.g"
    const auto& abbrevs = default_abbreviations();
    return std::find(abbrevs.begin(), abbrevs.end(), word) != abbrevs.end();
}

std::vector<std::string> rule_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '\'' || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

bool contains_phrase(const std::vector<std::string>& words, const std::string& phrase) {
    const auto needle = rule_words(phrase);
    if (needle.empty() || needle.size() > words.size()) return false;
    return std::search(words.begin(), words.end(), needle.begin(), needle.end()) != words.end();
}

bool contains_word(const std::vector<std::string>& list, const std::string& w) {
    return std::find(list.begin(), list.end(), w) != list.end();
}

}  // namespace

const std::vector<std::string>& default_abbreviations() {
    static const std::vector<std::string> kAbbrevs{
        "Mr",  "Mrs", "Ms",  "Dr",   "Prof", "Sr",  "Jr",  "St",   "Mt",  "Gen", "Gov", "Sen", "Rep",
        "Lt",  "Col", "Capt", "Sgt", "Cpl",  "Rev", "Hon", "Pres", "Inc", "Ltd", "Co",  "Corp", "No",
        "vs",  "Jan", "Feb", "Mar",  "Apr",  "Jun", "Jul", "Aug",  "Sep", "Sept", "Oct", "Nov", "Dec",
        "Fig", "approx", "Ave", "Blvd", "Dept", "Univ", "est"};
    return kAbbrevs;
}

std::vector<Sentence> split_sentences(std::string_view text, std::string_view article_id) {
    std::vector<Sentence> out;
    const std::size_t n = text.size();
    std::size_t start = 0;
    while (start < n && is_space(text[start])) ++start;

    auto emit = [&](std::size_t end) {
        while (end > start && is_space(text[end - 1])) --end;
        if (end > start) {
            out.push_back(Sentence{std::string(text.substr(start, end - start)), std::string(article_id), start, end});
        }
    };

    std::size_t i = start;
    while (i < n) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < n && is_terminator(text[end])) ++end;
        const bool single_period = (end == i + 1 && text[i] == '.');
        while (end < n && is_closer(text[end])) ++end;

        std::size_t next = end;
        while (next < n && is_space(text[next])) ++next;
        const bool gap = next > end;
        const bool capital_follows =
            next < n && (is_upper(text[next]) || (is_opener(text[next]) && next + 1 < n && is_upper(text[next + 1])));

        if (gap && capital_follows && !(single_period && is_abbreviation(word_before(text, i)))) {
            emit(end);
            start = next;
            i = next;
        } else {
            i = end;
        }
    }
    if (start < n) emit(n);
    return out;
}

std::vector<LabeledSentence> read_labeled_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    std::vector<LabeledSentence> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            auto text = j.at("text").get<std::string>();
            const auto len = text.size();
            out.push_back({Sentence{std::move(text), "", 0, len}, parse_category(j.at("label").get<std::string>())});
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string ClaimClassifier::to_json() const {
    return json{{"dim", weights.size()}, {"weights", weights}, {"bias", bias}, {"threshold", threshold}}.dump();
}

ClaimClassifier ClaimClassifier::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        ClaimClassifier c;
        c.weights = j.at("weights").get<std::vector<double>>();
        c.bias = j.at("bias").get<double>();
        c.threshold = j.value("threshold", 0.5);
        if (j.at("dim").get<std::size_t>() != c.weights.size()) {
            throw DimensionError("classifier dim does not match its weight count");
        }
        if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ParseError("classifier threshold must lie in (0, 1)");
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid classifier file: ") + e.what());
    }
}

void ClaimClassifier::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot write " + path.string());
    out << to_json() << '\n';
}

ClaimClassifier ClaimClassifier::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

double margin(std::span<const double> w, double b, const EmbeddingVector& x) noexcept {
    double z = b;
    const auto xv = x.values();
    for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * static_cast<double>(xv[i]);
    return z;
}

// log(1 + e^z) without overflow.
double softplus(double z) noexcept { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_training_data(std::span<const LabeledVector> data, std::size_t dim) {
    if (data.empty()) throw EmptyDatasetError("no training data");
    for (const auto& ex : data) {
        if (ex.features.dim() != dim) throw DimensionError("training vectors have inconsistent dimensions");
    }
}

}  // namespace

double logistic_loss(std::span<const double> weights, double bias, std::span<const LabeledVector> data,
                     double l2_lambda) {
    check_training_data(data, weights.size());
    double loss = 0.0;
    for (const auto& ex : data) {
        const double z = margin(weights, bias, ex.features);
        loss += softplus(z) - (ex.label ? z : 0.0);
    }
    loss /= static_cast<double>(data.size());
    double w2 = 0.0;
    for (double w : weights) w2 += w * w;
    return loss + 0.5 * l2_lambda * w2;
}

LogisticGradient logistic_gradient(std::span<const double> weights, double bias, std::span<const LabeledVector> data,
                                   double l2_lambda) {
    check_training_data(data, weights.size());
    LogisticGradient g{std::vector<double>(weights.size(), 0.0), 0.0};
    for (const auto& ex : data) {
        const double r = sigmoid(margin(weights, bias, ex.features)) - (ex.label ? 1.0 : 0.0);
        const auto xv = ex.features.values();
        for (std::size_t i = 0; i < weights.size(); ++i) g.weights[i] += r * static_cast<double>(xv[i]);
        g.bias += r;
    }
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (std::size_t i = 0; i < weights.size(); ++i) g.weights[i] = g.weights[i] * inv_n + l2_lambda * weights[i];
    g.bias *= inv_n;
    return g;
}

TrainResult fit_logistic(std::span<const LabeledVector> data, const TrainOptions& opts) {
    if (data.empty()) throw EmptyDatasetError("no training data");
    if (opts.l2_lambda < 0.0) throw InvalidArgumentError("l2_lambda must be non-negative");
    if (!(opts.learning_rate > 0.0)) throw InvalidArgumentError("learning_rate must be positive");
    if (opts.epochs < 0) throw InvalidArgumentError("epochs must be non-negative");

    const std::size_t dim = data.front().features.dim();
    check_training_data(data, dim);
    const auto positives = std::count_if(data.begin(), data.end(), [](const auto& ex) { return ex.label; });
    if (positives == 0 || static_cast<std::size_t>(positives) == data.size()) {
        throw DegenerateLabelsError("training data must contain both labels");
    }

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    TrainResult result;
    auto& model = result.classifier;
    model.weights.resize(dim);
    for (auto& w : model.weights) w = init(rng);
    model.l2_lambda = opts.l2_lambda;

    const double shrink = 1.0 / (1.0 + opts.learning_rate * opts.l2_lambda);
    result.loss_per_epoch.push_back(logistic_loss(model.weights, model.bias, data, opts.l2_lambda));
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        // Data-term gradient only; the L2 term is applied by the shrink.
        const auto g = logistic_gradient(model.weights, model.bias, data, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            model.weights[i] = (model.weights[i] - opts.learning_rate * g.weights[i]) * shrink;
        }
        model.bias -= opts.learning_rate * g.bias;
        result.loss_per_epoch.push_back(logistic_loss(model.weights, model.bias, data, opts.l2_lambda));
    }
    return result;
}

Prediction predict(const ClaimClassifier& classifier, const EmbeddingVector& v) {
    if (v.dim() != classifier.dim()) {
        throw DimensionError("classifier expects dim " + std::to_string(classifier.dim()) + ", got " +
                             std::to_string(v.dim()));
    }
    const double score = sigmoid(margin(classifier.weights, classifier.bias, v));
    return {score, score >= classifier.threshold};
}

Category categorize(std::string_view text, const CategoryRules& rules) {
    const auto words = rule_words(text);
    for (const auto& marker : rules.prediction_markers) {
        if (contains_phrase(words, marker)) return Category::prediction;
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!contains_word(rules.experience_subjects, words[i])) continue;
        const std::size_t last = std::min(words.size(), i + 1 + rules.experience_window);
        for (std::size_t j = i + 1; j < last; ++j) {
            if (contains_word(rules.experience_verbs, words[j])) return Category::personal_experience;
        }
    }
    return Category::checkable;
}

std::vector<Claim> filter_categories(std::vector<Claim> claims, const CategoryRules& rules) {
    for (auto& c : claims) {
        const Category ruled = categorize(c.sentence.text, rules);
        if (ruled != Category::checkable) c.category = ruled;
    }
    std::erase_if(claims, [](const Claim& c) {
        return c.category == Category::prediction || c.category == Category::personal_experience;
    });
    return claims;
}

PrfScores prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
    PrfScores s;
    s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

PrfScores evaluate_prf(const std::vector<bool>& predicted, const std::vector<bool>& gold) {
    if (predicted.size() != gold.size()) {
        throw AlignmentError("predicted has " + std::to_string(predicted.size()) + " labels, gold has " +
                             std::to_string(gold.size()));
    }
    if (predicted.empty()) throw AlignmentError("cannot score empty label lists");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (predicted[i] && gold[i]) ++tp;
        else if (predicted[i]) ++fp;
        else if (gold[i]) ++fn;
    }
    return prf_from_counts(tp, fp, fn);
}

ClaimDetector::ClaimDetector(std::shared_ptr<const Embedder> embedder, std::optional<ClaimClassifier> classifier,
                             CategoryRules rules)
    : embedder_(std::move(embedder)), classifier_(std::move(classifier)), rules_(std::move(rules)) {
    if (!embedder_) throw InvalidArgumentError("ClaimDetector needs an embedder");
    if (classifier_ && classifier_->dim() != embedder_->dim()) {
        throw DimensionError("classifier dim " + std::to_string(classifier_->dim()) + " != embedder dim " +
                             std::to_string(embedder_->dim()));
    }
}

Prediction ClaimDetector::score(const EmbeddingVector& v) const {
    if (!classifier_) return {1.0, true};
    return predict(*classifier_, v);
}

std::vector<DetectedSentence> ClaimDetector::detect(std::string_view article_id, std::string_view body) const {
    auto sentences = split_sentences(body, article_id);
    std::vector<std::string> texts;
    texts.reserve(sentences.size());
    for (const auto& s : sentences) texts.push_back(s.text);
    auto vectors = texts.empty() ? std::vector<EmbeddingVector>{} : embedder_->embed(texts);

    std::vector<DetectedSentence> out;
    out.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto p = score(vectors[i]);
        Category cat = p.is_claim ? categorize(sentences[i].text, rules_) : Category::not_claim;
        out.push_back({std::move(sentences[i]), std::move(vectors[i]), p.score, cat, cat == Category::checkable});
    }
    return out;
}

}  // namespace claimgraph
