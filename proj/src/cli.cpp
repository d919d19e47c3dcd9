#include "claimgraph/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "claimgraph/bench.hpp"
#include "claimgraph/detection.hpp"
#include "claimgraph/embeddings.hpp"
#include "claimgraph/engine.hpp"
#include "claimgraph/evaluation.hpp"
#include "claimgraph/json_io.hpp"
#include "claimgraph/service.hpp"

namespace claimgraph::cli {

using io::json;

namespace {

// Machine-readable log line on stderr.
void log(const std::string& event, json fields = json::object()) {
    fields["ts"] = now_iso8601();
    fields["event"] = event;
    std::cerr << fields.dump() << '\n';
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot write " + path.string());
    out << content;
    if (!out) throw InvalidArgumentError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Embedding-provider flags shared by every subcommand that embeds text. A
// --config file supplies defaults; explicit flags win.
struct ProviderFlags {
    std::string config;
    std::string provider;
    std::string tfidf_model;
    std::string vectors;
    std::string remote_url;
    int remote_timeout_ms = 10000;
    std::size_t remote_batch = 32;
    std::size_t dim = 512;
    bool normalize = false;
    bool fallback = false;
    std::string metric;

    CLI::Option* provider_opt = nullptr;
    CLI::Option* timeout_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
    CLI::Option* dim_opt = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "Service config JSON (defaults for provider/metric/epsilon)");
        provider_opt = app->add_option("--provider", provider, "tfidf | store | remote")
                           ->check(CLI::IsMember({"tfidf", "store", "remote"}));
        app->add_option("--tfidf-model", tfidf_model, "Fitted TF-IDF model JSON");
        app->add_option("--vectors", vectors, "Precomputed vector store (JSON Lines)");
        app->add_option("--remote-url", remote_url, "Remote embedding service base URL");
        timeout_opt = app->add_option("--remote-timeout-ms", remote_timeout_ms, "Remote request timeout")
                          ->check(CLI::PositiveNumber);
        batch_opt = app->add_option("--remote-batch", remote_batch, "Texts per remote request")
                        ->check(CLI::PositiveNumber);
        dim_opt = app->add_option("--remote-dim", dim, "Expected remote vector dimension")->check(CLI::PositiveNumber);
        app->add_flag("--normalize", normalize, "L2-normalise store/remote vectors");
        app->add_flag("--tfidf-fallback", fallback, "Store misses fall back to --tfidf-model");
        app->add_option("--metric", metric, "euclidean | cosine (default: provider's choice)");
    }

    std::optional<ServiceConfig> service_config() const {
        if (config.empty()) return std::nullopt;
        return ServiceConfig::load(config);
    }

    ProviderConfig resolve() const {
        ProviderConfig p;
        if (auto cfg = service_config()) p = cfg->embedding;
        if (provider_opt->count()) {
            p.provider = provider;
        } else if (config.empty()) {
            p.provider = !vectors.empty() ? "store" : !remote_url.empty() ? "remote" : "tfidf";
        }
        if (!tfidf_model.empty()) p.model_path = tfidf_model;
        if (!vectors.empty()) p.vectors_path = vectors;
        if (!remote_url.empty()) p.remote.endpoint_url = remote_url;
        if (timeout_opt->count()) p.remote.timeout_ms = remote_timeout_ms;
        if (batch_opt->count()) p.remote.batch_size = remote_batch;
        if (dim_opt->count()) p.remote.expected_dim = dim;
        if (normalize) p.normalize = true;
        if (fallback) p.tfidf_fallback = true;
        return p;
    }

    std::shared_ptr<const Embedder> embedder() const { return make_embedder(resolve()); }

    Metric resolve_metric(const Embedder& e) const {
        if (!metric.empty()) return parse_metric(metric);
        if (auto cfg = service_config(); cfg && cfg->metric) return *cfg->metric;
        return e.preferred_metric();
    }
};

std::vector<std::string> texts_of(const std::vector<LabeledSentence>& corpus) {
    std::vector<std::string> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back(s.sentence.text);
    return out;
}

json prf_json(const PrfScores& s) { return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}}; }

json histogram_json(const Histogram& h) {
    return {{"edges", h.edges}, {"duplicate", h.duplicate}, {"non_duplicate", h.non_duplicate}};
}

json sweep_json(const SweepResult& s) {
    json curve = json::array();
    for (const auto& p : s.curve) {
        curve.push_back({{"threshold", p.threshold},
                         {"precision", p.scores.precision},
                         {"recall", p.scores.recall},
                         {"f1", p.scores.f1}});
    }
    return {{"best_threshold", s.best_threshold}, {"best_f1", s.best_f1}, {"curve", std::move(curve)}};
}

PairColumns parse_columns(const std::string& spec) {
    if (spec.empty()) return {};
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("--columns expects text_a,text_b,label");
    return {parts[0], parts[1], parts[2]};
}

// ---- subcommands -----------------------------------------------------------------

struct DetectTrain {
    std::string corpus, out, tfidf_out;
    std::size_t tfidf_dim = 512;
    TrainOptions train;
    ProviderFlags provider;

    void attach(CLI::App& root, std::uint64_t& seed) {
        auto* app = root.add_subcommand("detect-train", "Train the claim classifier on a labelled corpus");
        app->add_option("--corpus", corpus, "Labelled JSON Lines corpus")->required();
        app->add_option("--out", out, "Classifier JSON output")->required();
        app->add_option("--tfidf-out", tfidf_out, "Where to write the fitted TF-IDF model (default <out>.tfidf.json)");
        app->add_option("--tfidf-dim", tfidf_dim, "Hash dimension when fitting TF-IDF")->check(CLI::PositiveNumber);
        app->add_option("--lambda", train.l2_lambda, "L2 strength")->check(CLI::NonNegativeNumber);
        app->add_option("--learning-rate", train.learning_rate, "Gradient step")->check(CLI::PositiveNumber);
        app->add_option("--epochs", train.epochs, "Full-batch epochs")->check(CLI::NonNegativeNumber);
        provider.attach(app);
        app->callback([this, &seed] { exec(seed); });
    }

    void exec(std::uint64_t seed) {
        const auto data = read_labeled_corpus(corpus);
        const auto texts = texts_of(data);
        ProviderConfig pc = provider.resolve();
        std::shared_ptr<const Embedder> embedder;
        if (pc.provider == "tfidf" && pc.model_path.empty()) {
            auto model = fit_tfidf(texts, tfidf_dim);
            const std::filesystem::path model_out = tfidf_out.empty() ? out + ".tfidf.json" : tfidf_out;
            write_text(model_out, model.to_json());
            log("tfidf.fitted", {{"path", model_out.string()}, {"vocabulary", model.vocabulary().size()}});
            embedder = std::make_shared<TfidfEmbedder>(std::move(model));
        } else {
            embedder = make_embedder(pc);
        }
        const auto vectors = embedder->embed(texts);
        std::vector<LabeledVector> lv;
        for (std::size_t i = 0; i < data.size(); ++i) lv.push_back({vectors[i], data[i].label == Category::checkable});
        train.seed = seed;
        const auto result = fit_logistic(lv, train);
        write_text(out, result.classifier.to_json());

        std::vector<bool> pred, gold;
        for (const auto& x : lv) {
            pred.push_back(predict(result.classifier, x.features).is_claim);
            gold.push_back(x.label);
        }
        log("classifier.trained", {{"path", out},
                                   {"examples", lv.size()},
                                   {"final_loss", result.loss_per_epoch.back()},
                                   {"train", prf_json(evaluate_prf(pred, gold))}});
    }
};

struct DetectEval {
    std::string corpus, model, out;
    bool rules = false;
    ProviderFlags provider;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("detect-eval", "Precision/recall/F1 of the classifier on a labelled corpus");
        app->add_option("--corpus", corpus, "Labelled JSON Lines corpus")->required();
        app->add_option("--model", model, "Classifier JSON")->required();
        app->add_option("--out", out, "Metrics JSON output")->required();
        app->add_flag("--with-rules", rules, "Also drop sentences the category rules reject");
        provider.attach(app);
        app->callback([this] { exec(); });
    }

    void exec() {
        const auto data = read_labeled_corpus(corpus);
        const auto classifier = ClaimClassifier::load(model);
        const auto embedder = provider.embedder();
        const auto vectors = embedder->embed(texts_of(data));
        std::vector<bool> pred, gold, all_positive(data.size(), true);
        for (std::size_t i = 0; i < data.size(); ++i) {
            bool is_claim = predict(classifier, vectors[i]).is_claim;
            if (rules && categorize(data[i].sentence.text) != Category::checkable) is_claim = false;
            pred.push_back(is_claim);
            gold.push_back(data[i].label == Category::checkable);
        }
        const auto scores = evaluate_prf(pred, gold);
        const json result{{"examples", data.size()},
                          {"positives", std::count(gold.begin(), gold.end(), true)},
                          {"with_rules", rules},
                          {"scores", prf_json(scores)},
                          {"all_positive_baseline", prf_json(evaluate_prf(all_positive, gold))}};
        write_text(out, result.dump(2) + "\n");
        log("detect.evaluated", {{"path", out}, {"f1", scores.f1}});
    }
};

struct DetectRun {
    std::string input, model, out, article_id;
    double threshold = -1.0;
    ProviderFlags provider;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("detect-run", "Split an article and label every sentence");
        app->add_option("--input", input, "Article body (plain text)")->required();
        app->add_option("--model", model, "Classifier JSON (omit for rules only)");
        app->add_option("--out", out, "Sentences JSON Lines output")->required();
        app->add_option("--article-id", article_id, "Article id (default: input file stem)");
        app->add_option("--threshold", threshold, "Override the classifier threshold")
            ->check(CLI::Range(0.0, 1.0).description("(0,1)"));
        provider.attach(app);
        app->callback([this] { exec(); });
    }

    void exec() {
        const std::string body = read_text(input);
        std::optional<ClaimClassifier> classifier;
        if (!model.empty()) {
            classifier = ClaimClassifier::load(model);
            if (threshold > 0.0) classifier->threshold = threshold;
        }
        const std::string id = article_id.empty() ? std::filesystem::path(input).stem().string() : article_id;
        ClaimDetector detector(provider.embedder(), std::move(classifier));
        std::string lines;
        std::size_t claims = 0;
        for (const auto& d : detector.detect(id, body)) {
            claims += d.is_claim ? 1 : 0;
            lines += json{{"text", d.sentence.text},
                          {"article_id", d.sentence.article_id},
                          {"char_start", d.sentence.char_start},
                          {"char_end", d.sentence.char_end},
                          {"score", d.score},
                          {"category", to_string(d.category)},
                          {"is_claim", d.is_claim}}
                         .dump() +
                     "\n";
        }
        write_text(out, lines);
        log("detect.ran", {{"path", out}, {"claims", claims}});
    }
};

struct ClusterBatch {
    std::string claims, out, snapshot;
    double epsilon = 0.0;
    bool weighted = false;
    ProviderFlags provider;
    CLI::Option* eps_opt = nullptr;

    void attach(CLI::App& root, std::uint64_t& seed) {
        auto* app = root.add_subcommand("cluster-batch", "Insert claims one by one and write their communities");
        app->add_option("--claims", claims, "JSON Lines with \"text\" (and optional \"id\")")->required();
        app->add_option("--out", out, "Assignments JSON output")->required();
        app->add_option("--snapshot", snapshot, "Also write the engine snapshot here");
        eps_opt = app->add_option("--epsilon", epsilon, "Edge threshold")->check(CLI::PositiveNumber);
        app->add_flag("--weighted", weighted, "Louvain on edge weights 1 - d/epsilon");
        provider.attach(app);
        app->callback([this, &seed] { exec(seed); });
    }

    void exec(std::uint64_t seed) {
        double eps = epsilon;
        if (!eps_opt->count()) {
            const auto cfg = provider.service_config();
            if (!cfg) throw UsageError("--epsilon is required without --config");
            eps = cfg->epsilon;
        }
        std::vector<std::string> texts, ids;
        std::ifstream in(claims);
        if (!in) throw InvalidArgumentError("cannot read " + claims);
        std::size_t line_no = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const json j = json::parse(line);
            texts.push_back(j.at("text").get<std::string>());
            ids.push_back(j.contains("id") ? j.at("id").get<std::string>() : "c" + std::to_string(line_no));
        }
        const auto embedder = provider.embedder();
        const auto vectors = embedder->embed(texts);
        ClaimGraph graph(EngineConfig{eps, provider.resolve_metric(*embedder), embedder->dim(), weighted, seed});
        double total_ms = 0.0;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            const auto r = graph.insert_claim(
                Claim{ids[i], Sentence{texts[i], "", 0, texts[i].size()}, vectors[i], 1.0, Category::checkable, std::nullopt});
            total_ms += r.elapsed_ms;
        }
        json assignments = json::array();
        for (std::size_t u = 0; u < graph.size(); ++u) {
            assignments.push_back(
                {{"id", graph.claim(u).id}, {"text", graph.claim(u).sentence.text}, {"community_id", graph.community_of(u)}});
        }
        json result{{"epsilon", eps},
                    {"metric", to_string(graph.config().metric)},
                    {"claims", graph.size()},
                    {"edges", graph.edge_count()},
                    {"communities", graph.community_count()},
                    {"assignments", std::move(assignments)}};
        if (graph.edge_count() > 0) result["modularity"] = modularity(graph.as_graph(weighted), graph.partition());
        write_text(out, result.dump(2) + "\n");
        if (!snapshot.empty()) graph.save(snapshot);
        log("cluster.batch", {{"path", out}, {"claims", graph.size()}, {"communities", graph.community_count()},
                              {"insert_ms_total", total_ms}});
    }
};

struct GridSearch {
    std::string claims, grid, out, curve_out;
    std::size_t min_size = 2;
    double a = 1.0, b = 1.0, c = 0.0;
    ProviderFlags provider;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("grid-search", "DBSCAN epsilon grid search scored against story labels");
        app->add_option("--claims", claims, "Story-labelled JSON Lines")->required();
        app->add_option("--grid", grid, "start:stop:step or comma list")->required();
        app->add_option("--out", out, "Report CSV output")->required();
        app->add_option("--curve-out", curve_out, "Per-epsilon JSON (default <out>.json)");
        app->add_option("--min-size", min_size, "DBSCAN minimum cluster size")->check(CLI::PositiveNumber);
        app->add_option("--param-a", a, "Weight of P_os")->check(CLI::PositiveNumber);
        app->add_option("--param-b", b, "Weight of P_cc")->check(CLI::PositiveNumber);
        app->add_option("--param-c", c, "Weight of N_c (default 1/total claims)")->check(CLI::PositiveNumber);
        provider.attach(app);
        app->callback([this] { exec(); });
    }

    void exec() {
        const auto data = read_story_corpus(claims);
        const auto eps = parse_grid(grid);
        const auto embedder = provider.embedder();
        std::optional<QualityParams> params;
        if (c > 0.0) {
            params = QualityParams{a, b, c};
        } else if (a != 1.0 || b != 1.0) {
            auto p = QualityParams::normalized_for(data.size());
            p.a = a;
            p.b = b;
            params = p;
        }
        const auto result = grid_search_epsilon(data, *embedder, eps, min_size, params, provider.resolve_metric(*embedder));
        std::ostringstream csv;
        write_report_csv(csv, std::span(&result.report, 1));
        write_text(out, csv.str());

        json curve = json::array();
        for (const auto& p : result.curve) {
            curve.push_back({{"epsilon", p.epsilon},
                             {"score", p.quality.score},
                             {"p_os", p.quality.p_os},
                             {"p_cc", p.quality.p_cc},
                             {"n_c", p.quality.n_c},
                             {"cluster_count", p.cluster_count}});
        }
        const json doc{{"best_epsilon", result.best_epsilon},
                       {"embedding", result.report.embedding_name},
                       {"min_size", min_size},
                       {"curve", std::move(curve)},
                       {"cluster_of", result.best_clustering.cluster_of}};
        const std::string curve_path = curve_out.empty() ? out + ".json" : curve_out;
        write_text(curve_path, doc.dump(2) + "\n");
        log("grid.searched", {{"path", out}, {"curve", curve_path}, {"best_epsilon", result.best_epsilon}});
    }
};

struct PairCommand {
    std::string pairs, out, columns, html;
    std::size_t bins = 20;
    ProviderFlags provider;

    std::vector<LabeledDistance> distances() const {
        const auto data = read_pair_csv(std::filesystem::path(pairs), parse_columns(columns));
        const auto embedder = provider.embedder();
        return pair_distances(data, *embedder, provider.resolve_metric(*embedder));
    }

    void attach_common(CLI::App* app) {
        app->add_option("--pairs", pairs, "Pair CSV")->required();
        app->add_option("--out", out, "JSON output")->required();
        app->add_option("--columns", columns, "Column mapping text_a,text_b,label (e.g. question1,question2,is_duplicate)");
        app->add_option("--bins", bins, "Histogram bins")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
        app->add_option("--html", html, "Also render the histogram as an HTML page");
        provider.attach(app);
    }

    void maybe_html(const json& hist) const {
        if (html.empty()) return;
        write_text(html, render_histogram_html(hist.dump(), std::filesystem::path(pairs).filename().string()));
    }
};

struct EvalDuplicates : PairCommand {
    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("eval-duplicates", "Distance threshold sweep and histogram on labelled pairs");
        attach_common(app);
        app->callback([this] { exec(); });
    }

    void exec() {
        const auto d = distances();
        const json hist = histogram_json(distance_histogram(d, bins));
        json result = sweep_json(threshold_sweep(d));
        result["histogram"] = hist;
        write_text(out, result.dump(2) + "\n");
        maybe_html(hist);
        log("duplicates.evaluated", {{"path", out}, {"best_f1", result["best_f1"]}, {"best_threshold", result["best_threshold"]}});
    }
};

struct HistogramCmd : PairCommand {
    std::string from;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("histogram", "Per-class distance histogram (JSON bins + optional HTML plot)");
        app->add_option("--pairs", pairs, "Pair CSV");
        app->add_option("--from", from, "Render an existing histogram JSON instead of computing one");
        app->add_option("--out", out, "JSON output (HTML when --from is given)")->required();
        app->add_option("--columns", columns, "Column mapping text_a,text_b,label");
        app->add_option("--bins", bins, "Histogram bins")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
        app->add_option("--html", html, "Also render the histogram as an HTML page");
        provider.attach(app);
        app->callback([this] { exec(); });
    }

    void exec() {
        if (!from.empty()) {
            json doc = json::parse(read_text(from));
            if (doc.contains("histogram")) doc = doc["histogram"];
            write_text(out, render_histogram_html(doc.dump(), std::filesystem::path(from).filename().string()));
            log("histogram.rendered", {{"path", out}});
            return;
        }
        if (pairs.empty()) throw UsageError("histogram needs --pairs or --from");
        const json hist = histogram_json(distance_histogram(distances(), bins));
        write_text(out, hist.dump(2) + "\n");
        maybe_html(hist);
        log("histogram.written", {{"path", out}});
    }
};

struct Serve {
    std::string config, listen;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("serve", "Run the HTTP service");
        app->add_option("--config", config, "Service config JSON (or $CLAIMGRAPH_CONFIG)");
        app->add_option("--listen", listen, "host:port override");
        app->callback([this] { exec(); });
    }

    void exec() {
        auto cfg = resolve_service_config(config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config));
        if (!listen.empty()) cfg.listen = listen;
        ClaimService service(cfg);
        const auto h = service.health();
        log("serve.listening", {{"listen", cfg.listen}, {"claims", h.claims}, {"clusters", h.clusters}});
        serve(service, cfg.listen);
    }
};

struct Replay {
    std::string config, out;
    bool compact = false;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("replay", "Rebuild the engine from snapshot + event log");
        app->add_option("--config", config, "Service config JSON (or $CLAIMGRAPH_CONFIG)");
        app->add_option("--out", out, "State document output")->required();
        app->add_flag("--compact", compact, "Write a fresh snapshot and truncate the log");
        app->callback([this] { exec(); });
    }

    void exec() {
        const auto cfg =
            resolve_service_config(config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config));
        if (cfg.persistence_path.empty()) throw InvalidArgumentError("config has no persistence_path to replay");
        const auto embedder = make_embedder(cfg.embedding);
        ServiceState state(EngineConfig{cfg.epsilon, cfg.metric.value_or(embedder->preferred_metric()), embedder->dim(),
                                        cfg.weighted_edges, cfg.louvain_seed},
                           cfg.persistence_path, cfg.snapshot_every);
        if (compact) state.compact();
        write_text(out, state.state_document());
        if (const auto broken = state.graph().check_invariants()) throw Error("replayed graph is inconsistent: " + *broken);
        log("replay.done", {{"path", out},
                            {"claims", state.graph().size()},
                            {"edges", state.graph().edge_count()},
                            {"communities", state.graph().community_count()},
                            {"last_seq", state.last_seq()}});
    }
};

struct BenchInsert {
    BenchOptions opts;
    std::string out, sizes = "1000,5000,10000", metric = "euclidean";

    void attach(CLI::App& root, std::uint64_t& seed) {
        auto* app = root.add_subcommand("bench-insert", "insert_claim latency vs graph size on synthetic vectors");
        app->add_option("--out", out, "Latency curve JSON output")->required();
        app->add_option("--dim", opts.dim, "Vector dimension")->check(CLI::PositiveNumber);
        app->add_option("--sizes", sizes, "Comma-separated graph sizes");
        app->add_option("--samples", opts.samples, "Timed insertions per size")->check(CLI::PositiveNumber);
        app->add_option("--topics", opts.topics, "Synthetic topic centres")->check(CLI::PositiveNumber);
        app->add_option("--noise", opts.noise, "Per-coordinate noise")->check(CLI::NonNegativeNumber);
        app->add_option("--epsilon", opts.epsilon, "Edge threshold")->check(CLI::PositiveNumber);
        app->add_option("--metric", metric, "euclidean | cosine");
        app->callback([this, &seed] { exec(seed); });
    }

    void exec(std::uint64_t seed) {
        opts.seed = seed;
        opts.metric = parse_metric(metric);
        opts.sizes.clear();
        for (double s : parse_grid(sizes)) {
            if (s < 1 || s != std::floor(s)) throw UsageError("--sizes must be positive integers");
            opts.sizes.push_back(static_cast<std::size_t>(s));
        }
        const auto result = run_insert_bench(opts, [](const BenchPoint& p) {
            log("bench.point", {{"size", p.size}, {"median_ms", p.median_ms}, {"p95_ms", p.p95_ms}});
        });
        write_text(out, bench_to_json(opts, result) + "\n");
        log("bench.done", {{"path", out}, {"at_most_linear", result.at_most_linear}});
    }
};

int run_app(const std::vector<std::string>& args) {
    CLI::App app{"Claim detection, clustering and factcheck propagation", "claimgraph"};
    app.require_subcommand(1, 1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    app.fallthrough();

    DetectTrain detect_train;
    DetectEval detect_eval;
    DetectRun detect_run;
    ClusterBatch cluster_batch;
    GridSearch grid_search;
    EvalDuplicates eval_duplicates;
    HistogramCmd histogram;
    Serve serve_cmd;
    Replay replay;
    BenchInsert bench;
    detect_train.attach(app, seed);
    detect_eval.attach(app);
    detect_run.attach(app);
    cluster_batch.attach(app, seed);
    grid_search.attach(app);
    eval_duplicates.attach(app);
    histogram.attach(app);
    serve_cmd.attach(app);
    replay.attach(app);
    bench.attach(app, seed);

    // Accept --seed after the subcommand name as well.
    for (auto* sub : app.get_subcommands({})) sub->add_option("--seed", seed, "Seed for every random choice");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    } catch (const UsageError& e) {
        log("error", {{"kind", "usage"}, {"message", e.what()}});
        std::cerr << app.help();
        return exit_usage;
    } catch (const std::exception& e) {
        log("error", {{"kind", "data"}, {"message", e.what()}});
        return exit_data;
    }
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args) { return run_app(args); }

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_app(args);
}

std::string render_histogram_html(const std::string& histogram_json, const std::string& title) {
    const json h = json::parse(histogram_json);
    const auto edges = h.at("edges").get<std::vector<double>>();
    const auto dup = h.at("duplicate").get<std::vector<std::size_t>>();
    const auto non = h.at("non_duplicate").get<std::vector<std::size_t>>();
    if (dup.size() != non.size() || edges.size() != dup.size() + 1) {
        throw ParseError("histogram JSON has inconsistent bin arrays");
    }
    const std::size_t peak = std::max<std::size_t>(
        1, std::max(*std::max_element(dup.begin(), dup.end()), *std::max_element(non.begin(), non.end())));

    constexpr double width = 720, height = 320, left = 50, bottom = 40, top = 20;
    const double plot_w = width - left - 20, plot_h = height - top - bottom;
    const double bin_w = plot_w / static_cast<double>(dup.size());
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"#333\"/>";
    char label[64];
    for (std::size_t i = 0; i < dup.size(); ++i) {
        const double x = left + bin_w * static_cast<double>(i);
        const double hd = plot_h * static_cast<double>(dup[i]) / static_cast<double>(peak);
        const double hn = plot_h * static_cast<double>(non[i]) / static_cast<double>(peak);
        svg << "<rect x=\"" << x << "\" y=\"" << top + plot_h - hn << "\" width=\"" << bin_w * 0.5 << "\" height=\"" << hn
            << "\" fill=\"#d95f02\"><title>non-duplicate " << non[i] << "</title></rect>";
        svg << "<rect x=\"" << x + bin_w * 0.5 << "\" y=\"" << top + plot_h - hd << "\" width=\"" << bin_w * 0.5
            << "\" height=\"" << hd << "\" fill=\"#1b9e77\"><title>duplicate " << dup[i] << "</title></rect>";
    }
    for (std::size_t i = 0; i < edges.size(); i += std::max<std::size_t>(1, edges.size() / 6)) {
        std::snprintf(label, sizeof label, "%.3g", edges[i]);
        svg << "<text x=\"" << left + bin_w * static_cast<double>(i) << "\" y=\"" << height - 15
            << "\" font-size=\"11\" text-anchor=\"middle\">" << label << "</text>";
    }
    svg << "<text x=\"10\" y=\"" << top + 10 << "\" font-size=\"11\">" << peak << "</text></svg>";

    std::string safe;
    for (char ch : title) {
        switch (ch) {
            case '<': safe += "&lt;"; break;
            case '>': safe += "&gt;"; break;
            case '&': safe += "&amp;"; break;
            default: safe += ch;
        }
    }
    return "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>Distance histogram: " + safe +
           "</title></head>\n<body style=\"font-family:sans-serif\">\n<h1>Distance histogram: " + safe +
           "</h1>\n<p><span style=\"color:#1b9e77\">&#9632; duplicate</span> &nbsp; "
           "<span style=\"color:#d95f02\">&#9632; non-duplicate</span></p>\n" +
           svg.str() + "\n<script type=\"application/json\" id=\"bins\">" + histogram_json +
           "</script>\n</body></html>\n";
}

}  // namespace claimgraph::cli
