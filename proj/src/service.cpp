#include "claimgraph/service.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unistd.h>

#include "claimgraph/json_io.hpp"
#include "httplib.h"

namespace claimgraph {

using io::json;

// ---- configuration -----------------------------------------------------------

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ServiceConfig ServiceConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
    try {
        const json j = json::parse(text);
        ServiceConfig cfg;
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        if (j.contains("metric")) cfg.metric = parse_metric(j.at("metric").get<std::string>());
        if (j.contains("embedding")) {
            const json& e = j.at("embedding");
            cfg.embedding.provider = e.value("provider", cfg.embedding.provider);
            cfg.embedding.model_path = resolve(base_dir, e.value("model_path", std::string{}));
            cfg.embedding.vectors_path = resolve(base_dir, e.value("vectors_path", std::string{}));
            cfg.embedding.normalize = e.value("normalize", false);
            cfg.embedding.tfidf_fallback = e.value("tfidf_fallback", false);
            if (e.contains("remote")) {
                const json& r = e.at("remote");
                cfg.embedding.remote.endpoint_url = r.value("endpoint_url", std::string{});
                cfg.embedding.remote.timeout_ms = r.value("timeout_ms", cfg.embedding.remote.timeout_ms);
                cfg.embedding.remote.batch_size = r.value("batch_size", cfg.embedding.remote.batch_size);
                cfg.embedding.remote.expected_dim = r.value("expected_dim", cfg.embedding.remote.expected_dim);
            }
        }
        cfg.classifier_path = resolve(base_dir, j.value("classifier_path", std::string{}));
        if (j.contains("detection_threshold")) cfg.detection_threshold = j.at("detection_threshold").get<double>();
        cfg.persistence_path = resolve(base_dir, j.value("persistence_path", std::string{}));
        cfg.listen = j.value("listen", cfg.listen);
        cfg.latency_budget_ms = j.value("latency_budget_ms", cfg.latency_budget_ms);
        cfg.similar_k = j.value("similar_k", cfg.similar_k);
        cfg.weighted_edges = j.value("weighted_edges", cfg.weighted_edges);
        cfg.louvain_seed = j.value("louvain_seed", cfg.louvain_seed);
        cfg.snapshot_every = j.value("snapshot_every", cfg.snapshot_every);

        if (!(cfg.epsilon > 0.0)) throw InvalidArgumentError("config: epsilon must be positive");
        if (!(cfg.latency_budget_ms > 0.0)) throw InvalidArgumentError("config: latency_budget_ms must be positive");
        if (cfg.similar_k == 0) throw InvalidArgumentError("config: similar_k must be >= 1");
        if (cfg.detection_threshold && !(*cfg.detection_threshold > 0.0 && *cfg.detection_threshold < 1.0)) {
            throw InvalidArgumentError("config: detection_threshold must lie in (0, 1)");
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid service config: ") + e.what());
    }
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str(), path.parent_path());
}

ServiceConfig resolve_service_config(const std::optional<std::filesystem::path>& flag) {
    if (flag && !flag->empty()) return ServiceConfig::load(*flag);
    if (const char* env = std::getenv("CLAIMGRAPH_CONFIG"); env && *env) return ServiceConfig::load(env);
    throw InvalidArgumentError("no service config: pass --config or set CLAIMGRAPH_CONFIG");
}

// ---- event log -----------------------------------------------------------------

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) { open("ab"); }

EventLog::~EventLog() {
    if (file_) std::fclose(file_);
}

void EventLog::open(const char* mode) {
    if (file_) std::fclose(file_);
    file_ = std::fopen(path_.c_str(), mode);
    if (!file_) throw InvalidArgumentError("cannot open event log " + path_.string());
}

void EventLog::append(const std::string& line) {
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fputc('\n', file_) == EOF ||
        std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
        throw Error("failed to append to event log " + path_.string());
    }
}

void EventLog::truncate() {
    open("wb");
    ::fsync(::fileno(file_));
}

// ---- persistent state ----------------------------------------------------------

namespace {

json article_to_json(const Article& a) {
    return {{"id", a.id}, {"title", a.title}, {"body", a.body}, {"source_url", a.source_url},
            {"published_at", a.published_at}};
}

Article article_from_json(const json& j) {
    return Article{j.at("id").get<std::string>(), j.value("title", std::string{}), j.at("body").get<std::string>(),
                   j.value("source_url", std::string{}), j.value("published_at", std::string{})};
}

void write_file_durably(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw Error("cannot write " + tmp);
    const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size() && std::fflush(f) == 0 &&
                    ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw Error("failed writing " + tmp);
    std::filesystem::rename(tmp, path);
}

}  // namespace

ServiceState::ServiceState(EngineConfig engine, std::filesystem::path dir, std::size_t snapshot_every)
    : dir_(std::move(dir)), snapshot_every_(snapshot_every), graph_(engine) {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    recover();
    log_ = std::make_unique<EventLog>(dir_ / "events.log");
}

void ServiceState::recover() {
    const auto snapshot_path = dir_ / "snapshot.json";
    if (std::filesystem::exists(snapshot_path)) {
        std::ifstream in(snapshot_path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        const json doc = json::parse(ss.str());
        const json& state = doc.at("state");
        ClaimGraph restored = ClaimGraph::from_snapshot(state.at("graph").dump());
        const auto& want = graph_.config();
        const auto& got = restored.config();
        if (got.epsilon != want.epsilon || got.metric != want.metric || got.dim != want.dim ||
            got.weighted_edges != want.weighted_edges) {
            throw InvalidArgumentError("persisted graph in " + dir_.string() +
                                       " was built with a different epsilon/metric/dim/weighting");
        }
        graph_ = std::move(restored);
        for (const auto& a : state.at("articles")) {
            auto art = article_from_json(a);
            articles_.emplace(art.id, std::move(art));
        }
        for (const auto& u : state.at("community_updated")) {
            updated_[u.at(0).get<CommunityId>()] = u.at(1).get<std::string>();
        }
        next_claim_number_ = state.at("next_claim_number").get<std::uint64_t>();
        seq_ = doc.at("last_seq").get<std::uint64_t>();
    }

    const auto log_path = dir_ / "events.log";
    if (!std::filesystem::exists(log_path)) return;
    std::ifstream in(log_path, std::ios::binary);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) lines.push_back(std::move(line));
    }
    bool torn = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!json::accept(lines[i])) {
            if (i + 1 == lines.size()) {
                // A crash mid-append leaves at most one partial record at the end.
                torn = true;
                lines.pop_back();
                break;
            }
            throw ParseError("event log " + log_path.string() + " is corrupt at record " + std::to_string(i + 1));
        }
        replay_event(lines[i]);
    }
    if (torn) {
        std::string content;
        for (const auto& l : lines) content += l + "\n";
        write_file_durably(log_path, content);
    }
}

void ServiceState::replay_event(const std::string& line) {
    const json ev = json::parse(line);
    const auto seq = ev.at("seq").get<std::uint64_t>();
    if (seq <= seq_) return;
    const auto type = ev.at("type").get<std::string>();
    if (type == "article") {
        auto art = article_from_json(ev.at("article"));
        const auto at = ev.at("at").get<std::string>();
        for (const auto& cj : ev.at("claims")) {
            const auto node_report = graph_.insert_claim(io::claim_from_json(cj));
            touch_component(*graph_.find(node_report.claim_id), at);
        }
        articles_.emplace(art.id, std::move(art));
    } else if (type == "claim") {
        const auto report = graph_.insert_claim(io::claim_from_json(ev.at("claim")));
        touch_component(*graph_.find(report.claim_id), ev.at("at").get<std::string>());
        next_claim_number_ = std::max(next_claim_number_, ev.at("number").get<std::uint64_t>() + 1);
    } else if (type == "factcheck") {
        const auto fc = io::factcheck_from_json(ev.at("factcheck"));
        const auto node = graph_.find(ev.at("claim_id").get<std::string>());
        if (!node) throw ParseError("event log factcheck references an unknown claim");
        graph_.set_factcheck(*node, fc);
        updated_[graph_.community_of(*node)] = fc.checked_at;
    } else {
        throw ParseError("unknown event type in log: " + type);
    }
    seq_ = seq;
}

void ServiceState::log_event(const std::string& line) {
    if (log_) log_->append(line);
}

void ServiceState::touch_component(std::size_t node, const std::string& at) {
    for (std::size_t u : graph_.component_of(node)) updated_[graph_.community_of(u)] = at;
    // Ids that no longer label any claim were merged away.
    if (updated_.size() > graph_.size()) {
        const auto live = graph_.communities();
        std::erase_if(updated_, [&](const auto& kv) { return !live.contains(kv.first); });
    }
}

namespace {

void validate_new_claim(const ClaimGraph& g, const Claim& c) {
    if (g.find(c.id)) throw DuplicateClaimError("claim id already stored: " + c.id);
    if (c.embedding.dim() != g.config().dim) throw DimensionError("claim " + c.id + " has the wrong dimension");
    if (g.config().metric == Metric::cosine && c.embedding.is_zero()) {
        throw DegenerateVectorError("claim " + c.id + " has a zero vector under cosine distance");
    }
}

}  // namespace

std::vector<InsertionReport> ServiceState::apply_article(const Article& a, std::vector<Claim> claims,
                                                         const std::string& at) {
    if (articles_.contains(a.id)) throw DuplicateArticleError("article already ingested: " + a.id);
    std::vector<std::string> ids;
    for (const auto& c : claims) {
        validate_new_claim(graph_, c);
        ids.push_back(c.id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw DuplicateClaimError("article " + a.id + " produced duplicate claim ids");
    }

    json cj = json::array();
    for (const auto& c : claims) cj.push_back(io::to_json(c));
    log_event(json{{"seq", seq_ + 1}, {"type", "article"}, {"at", at}, {"article", article_to_json(a)}, {"claims", cj}}
                  .dump());

    std::vector<InsertionReport> reports;
    for (auto& c : claims) {
        reports.push_back(graph_.insert_claim(std::move(c)));
        touch_component(*graph_.find(reports.back().claim_id), at);
    }
    articles_.emplace(a.id, a);
    ++seq_;
    if (log_ && ++events_since_snapshot_ >= snapshot_every_) compact();
    return reports;
}

InsertionReport ServiceState::apply_claim(Claim c, const std::string& at) {
    validate_new_claim(graph_, c);
    const std::uint64_t number = next_claim_number_;
    log_event(json{{"seq", seq_ + 1}, {"type", "claim"}, {"at", at}, {"number", number}, {"claim", io::to_json(c)}}
                  .dump());
    auto report = graph_.insert_claim(std::move(c));
    touch_component(*graph_.find(report.claim_id), at);
    next_claim_number_ = number + 1;
    ++seq_;
    if (log_ && ++events_since_snapshot_ >= snapshot_every_) compact();
    return report;
}

std::size_t ServiceState::apply_factcheck(const std::string& claim_id, Factcheck fc) {
    const auto node = graph_.find(claim_id);
    if (!node) throw UnknownClaimError("unknown claim: " + claim_id);
    fc.source_claim_id = claim_id;
    log_event(json{{"seq", seq_ + 1}, {"type", "factcheck"}, {"claim_id", claim_id}, {"factcheck", io::to_json(fc)}}
                  .dump());
    const CommunityId community = graph_.community_of(*node);
    updated_[community] = fc.checked_at;
    graph_.set_factcheck(*node, std::move(fc));
    ++seq_;
    if (log_ && ++events_since_snapshot_ >= snapshot_every_) compact();

    std::size_t covered = 0;
    for (std::size_t u = 0; u < graph_.size(); ++u) covered += graph_.community_of(u) == community ? 1 : 0;
    return covered;
}

std::optional<std::string> ServiceState::last_updated(CommunityId id) const {
    const auto it = updated_.find(id);
    if (it == updated_.end()) return std::nullopt;
    return it->second;
}

namespace {

json state_json(const ClaimGraph& g, const std::map<std::string, Article>& articles,
                const std::map<CommunityId, std::string>& updated, std::uint64_t next_claim_number) {
    json arts = json::array();
    for (const auto& [id, a] : articles) arts.push_back(article_to_json(a));
    json upd = json::array();
    for (const auto& [id, at] : updated) upd.push_back({id, at});
    return {{"graph", json::parse(g.to_snapshot())},
            {"articles", std::move(arts)},
            {"community_updated", std::move(upd)},
            {"next_claim_number", next_claim_number}};
}

}  // namespace

std::string ServiceState::state_document() const {
    return state_json(graph_, articles_, updated_, next_claim_number_).dump();
}

std::string ServiceState::snapshot_document() const {
    return json{{"format", "claimgraph-service"},
                {"last_seq", seq_},
                {"state", state_json(graph_, articles_, updated_, next_claim_number_)}}
        .dump();
}

void ServiceState::compact() {
    if (dir_.empty()) return;
    write_file_durably(dir_ / "snapshot.json", snapshot_document());
    if (log_) log_->truncate();
    events_since_snapshot_ = 0;
}

// ---- service -------------------------------------------------------------------

namespace {

EngineConfig engine_config_for(const ServiceConfig& cfg, const Embedder& embedder) {
    EngineConfig e;
    e.epsilon = cfg.epsilon;
    e.metric = cfg.metric.value_or(embedder.preferred_metric());
    e.dim = embedder.dim();
    e.weighted_edges = cfg.weighted_edges;
    e.louvain_seed = cfg.louvain_seed;
    return e;
}

std::shared_ptr<const Embedder> require(std::shared_ptr<const Embedder> e) {
    if (!e) throw InvalidArgumentError("service needs an embedder");
    return e;
}

std::optional<ClaimClassifier> load_classifier(const ServiceConfig& cfg) {
    if (cfg.classifier_path.empty()) return std::nullopt;
    return ClaimClassifier::load(cfg.classifier_path);
}

}  // namespace

ClaimService::ClaimService(const ServiceConfig& cfg)
    : ClaimService(cfg, make_embedder(cfg.embedding), load_classifier(cfg)) {}

ClaimService::ClaimService(const ServiceConfig& cfg, std::shared_ptr<const Embedder> embedder,
                           std::optional<ClaimClassifier> classifier)
    : cfg_(cfg),
      embedder_(require(std::move(embedder))),
      state_(engine_config_for(cfg_, *embedder_), cfg_.persistence_path, cfg_.snapshot_every) {
    if (classifier && cfg_.detection_threshold) classifier->threshold = *cfg_.detection_threshold;
    detector_ = std::make_unique<ClaimDetector>(embedder_, std::move(classifier));
}

BudgetedReport ClaimService::budgeted(InsertionReport r) const {
    const bool over = r.elapsed_ms > cfg_.latency_budget_ms;
    return {std::move(r), over};
}

std::vector<BudgetedReport> ClaimService::ingest_article(const Article& a) {
    if (a.id.empty()) throw InvalidArgumentError("article id must not be empty");
    if (a.body.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw InvalidArgumentError("article body must not be empty");
    }
    {
        std::shared_lock lock(mutex_);
        if (state_.has_article(a.id)) throw DuplicateArticleError("article already ingested: " + a.id);
    }

    const auto detected = detector_->detect(a.id, a.body);
    const bool cosine = state_.graph().config().metric == Metric::cosine;
    std::vector<Claim> claims;
    for (std::size_t i = 0; i < detected.size(); ++i) {
        const auto& d = detected[i];
        if (!d.is_claim || (cosine && d.embedding.is_zero())) continue;
        claims.push_back(Claim{a.id + ":s" + std::to_string(i), d.sentence, d.embedding, d.score, d.category,
                               std::nullopt});
    }

    std::unique_lock lock(mutex_);
    auto reports = state_.apply_article(a, std::move(claims), now_iso8601());
    std::vector<BudgetedReport> out;
    out.reserve(reports.size());
    for (auto& r : reports) out.push_back(budgeted(std::move(r)));
    return out;
}

SubmitResult ClaimService::submit_claim(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw InvalidArgumentError("claim text is empty");
    auto v = embedder_->embed_one(text);
    if (state_.graph().config().metric == Metric::cosine && v.is_zero()) {
        throw InvalidArgumentError("claim text has no usable tokens");
    }
    const double score = detector_->score(v).score;

    std::unique_lock lock(mutex_);
    const std::string id = "claim-" + std::to_string(state_.next_claim_number());
    SubmitResult result;
    result.insertion = budgeted(state_.apply_claim(
        Claim{id, Sentence{text, "", 0, text.size()}, v, score, Category::checkable, std::nullopt}, now_iso8601()));

    const auto& g = state_.graph();
    const std::size_t self = *g.find(id);
    const auto hits = g.query_similar(v, cfg_.similar_k, [&](std::size_t node) {
        return node != self && g.claim(node).factcheck.has_value();
    });
    for (const auto& h : hits) {
        const auto& c = g.claim(h.node);
        result.similar.push_back({c.id, c.sentence.text, h.distance, g.community_of(h.node), c.factcheck});
    }
    return result;
}

std::size_t ClaimService::attach_factcheck(const std::string& claim_id, Verdict verdict, const std::string& note) {
    std::unique_lock lock(mutex_);
    return state_.apply_factcheck(claim_id, Factcheck{verdict, note, now_iso8601(), claim_id});
}

std::vector<SimilarEntry> ClaimService::similar_to(const std::string& claim_id, std::size_t k) const {
    std::shared_lock lock(mutex_);
    const auto& g = state_.graph();
    const auto node = g.find(claim_id);
    if (!node) throw UnknownClaimError("unknown claim: " + claim_id);
    std::vector<SimilarEntry> out;
    for (const auto& h : g.query_similar(g.claim(*node).embedding, k, [&](std::size_t n) { return n != *node; })) {
        const auto& c = g.claim(h.node);
        out.push_back({c.id, c.sentence.text, h.distance, g.community_of(h.node), c.factcheck});
    }
    return out;
}

ClusterView ClaimService::view_locked(CommunityId id, const std::vector<std::size_t>& members) const {
    const auto& g = state_.graph();
    ClusterView view;
    view.community_id = id;
    view.last_updated = state_.last_updated(id).value_or("");
    for (std::size_t u : members) {
        if (const auto& fc = g.claim(u).factcheck) view.factchecks.push_back(*fc);
    }
    for (std::size_t u : members) {
        const auto& c = g.claim(u);
        ClaimSummary s{c.id, c.sentence.text, c.sentence.article_id, c.detection_score, c.factcheck, {}};
        for (const auto& fc : view.factchecks) {
            if (fc.source_claim_id != c.id) s.inherited.push_back(fc);
        }
        view.claims.push_back(std::move(s));
    }
    return view;
}

std::vector<ClusterView> ClaimService::clusters(std::size_t offset, std::size_t limit, std::size_t* total) const {
    std::shared_lock lock(mutex_);
    const auto all = state_.graph().communities();
    if (total) *total = all.size();
    std::vector<ClusterView> out;
    std::size_t i = 0;
    for (const auto& [id, members] : all) {
        if (i++ < offset) continue;
        if (out.size() >= limit) break;
        out.push_back(view_locked(id, members));
    }
    return out;
}

std::optional<ClusterView> ClaimService::cluster(CommunityId id) const {
    std::shared_lock lock(mutex_);
    const auto all = state_.graph().communities();
    const auto it = all.find(id);
    if (it == all.end()) return std::nullopt;
    return view_locked(id, it->second);
}

ClaimSummary ClaimService::claim_view(const std::string& claim_id) const {
    std::shared_lock lock(mutex_);
    const auto& g = state_.graph();
    const auto node = g.find(claim_id);
    if (!node) throw UnknownClaimError("unknown claim: " + claim_id);
    const CommunityId id = g.community_of(*node);
    std::vector<std::size_t> members;
    for (std::size_t u = 0; u < g.size(); ++u) {
        if (g.community_of(u) == id) members.push_back(u);
    }
    auto view = view_locked(id, members);
    for (auto& s : view.claims) {
        if (s.id == claim_id) return s;
    }
    throw UnknownClaimError("unknown claim: " + claim_id);
}

Health ClaimService::health() const {
    std::shared_lock lock(mutex_);
    return {state_.graph().size(), state_.graph().community_count()};
}

std::string ClaimService::state_document() const {
    std::shared_lock lock(mutex_);
    return state_.state_document();
}

// ---- HTTP ----------------------------------------------------------------------

namespace {

json to_json(const BudgetedReport& r) {
    json j = io::to_json(r.report);
    j["budget_exceeded"] = r.budget_exceeded;
    return j;
}

json to_json(const SimilarEntry& s) {
    return {{"claim_id", s.claim_id},
            {"text", s.text},
            {"distance", s.distance},
            {"community_id", s.community_id},
            {"factcheck", s.factcheck ? io::to_json(*s.factcheck) : json(nullptr)}};
}

json to_json(const ClusterView& v) {
    json claims = json::array();
    for (const auto& c : v.claims) {
        json inherited = json::array();
        for (const auto& fc : c.inherited) inherited.push_back(io::to_json(fc));
        claims.push_back({{"id", c.id},
                          {"text", c.text},
                          {"article_id", c.article_id},
                          {"detection_score", c.detection_score},
                          {"factcheck", c.factcheck ? io::to_json(*c.factcheck) : json(nullptr)},
                          {"inherited_factchecks", std::move(inherited)}});
    }
    json fcs = json::array();
    for (const auto& fc : v.factchecks) fcs.push_back(io::to_json(fc));
    return {{"community_id", v.community_id},
            {"size", v.claims.size()},
            {"claims", std::move(claims)},
            {"factchecks", std::move(fcs)},
            {"last_updated", v.last_updated}};
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const auto v = req.get_param_value(key);
    try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used != v.size() || n < 0) throw InvalidArgumentError("");
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw InvalidArgumentError(std::string("query parameter ") + key + " must be a non-negative integer");
    }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const json::exception& e) {
            reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
        } catch (const UnknownClaimError& e) {
            reply(res, 404, {{"error", e.what()}});
        } catch (const DuplicateArticleError& e) {
            reply(res, 409, {{"error", e.what()}});
        } catch (const DuplicateClaimError& e) {
            reply(res, 409, {{"error", e.what()}});
        } catch (const RemoteTimeoutError& e) {
            reply(res, 502, {{"error", e.what()}});
        } catch (const RemoteProtocolError& e) {
            reply(res, 502, {{"error", e.what()}});
        } catch (const MissingVectorError& e) {
            reply(res, 502, {{"error", e.what()}});
        } catch (const InvalidArgumentError& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const ParseError& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const DegenerateVectorError& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const std::exception& e) {
            reply(res, 500, {{"error", e.what()}});
        }
    };
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(ClaimService& svc) {
    auto server = std::make_unique<httplib::Server>();
    server->set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    server->Post("/articles", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                     const json body = json::parse(req.body);
                     if (!body.contains("id") || !body.contains("body")) {
                         throw InvalidArgumentError("article needs \"id\" and \"body\"");
                     }
                     const auto reports = svc.ingest_article(article_from_json(body));
                     json arr = json::array();
                     for (const auto& r : reports) arr.push_back(to_json(r));
                     reply(res, 201, {{"article_id", body.at("id")}, {"reports", std::move(arr)}});
                 }));

    server->Post("/claims", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                     const json body = json::parse(req.body);
                     if (!body.contains("text") || !body["text"].is_string()) {
                         throw InvalidArgumentError("claim needs a \"text\" string");
                     }
                     const auto result = svc.submit_claim(body["text"].get<std::string>());
                     json similar = json::array();
                     for (const auto& s : result.similar) similar.push_back(to_json(s));
                     reply(res, 201, {{"report", to_json(result.insertion)}, {"similar", std::move(similar)}});
                 }));

    server->Get(R"(/claims/([^/]+)/similar)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    const std::size_t k = query_size(req, "k", svc.config().similar_k);
                    if (k == 0) throw InvalidArgumentError("k must be >= 1");
                    json arr = json::array();
                    for (const auto& s : svc.similar_to(id, k)) arr.push_back(to_json(s));
                    reply(res, 200, {{"claim_id", id}, {"similar", std::move(arr)}});
                }));

    server->Get(R"(/claims/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                    const auto s = svc.claim_view(req.matches[1]);
                    json inherited = json::array();
                    for (const auto& fc : s.inherited) inherited.push_back(io::to_json(fc));
                    reply(res, 200,
                          {{"id", s.id},
                           {"text", s.text},
                           {"article_id", s.article_id},
                           {"detection_score", s.detection_score},
                           {"factcheck", s.factcheck ? io::to_json(*s.factcheck) : json(nullptr)},
                           {"inherited_factchecks", std::move(inherited)}});
                }));

    server->Post(R"(/claims/([^/]+)/factcheck)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                     const std::string id = req.matches[1];
                     const json body = json::parse(req.body);
                     const Verdict v = parse_verdict(body.at("verdict").get<std::string>());
                     const std::size_t covered = svc.attach_factcheck(id, v, body.value("note", std::string{}));
                     reply(res, 200, {{"claim_id", id}, {"covered", covered}});
                 }));

    server->Get("/clusters", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                    const std::size_t offset = query_size(req, "offset", 0);
                    const std::size_t limit = query_size(req, "limit", 50);
                    std::size_t total = 0;
                    json arr = json::array();
                    for (const auto& v : svc.clusters(offset, limit, &total)) arr.push_back(to_json(v));
                    reply(res, 200, {{"total", total}, {"offset", offset}, {"limit", limit}, {"clusters", std::move(arr)}});
                }));

    server->Get(R"(/clusters/(-?\d+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                    const auto view = svc.cluster(std::stoll(req.matches[1]));
                    if (!view) {
                        reply(res, 404, {{"error", "unknown cluster " + std::string(req.matches[1])}});
                        return;
                    }
                    reply(res, 200, to_json(*view));
                }));

    server->Get("/healthz", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                    const auto h = svc.health();
                    reply(res, 200, {{"status", "ok"}, {"claims", h.claims}, {"clusters", h.clusters}});
                }));

    // Full persisted state; used to diff a live service against a replay.
    server->Get("/state", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                    res.status = 200;
                    res.set_content(svc.state_document(), "application/json");
                }));

    return server;
}

int serve(ClaimService& service, const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw InvalidArgumentError("listen address must be host:port");
    const std::string host = listen.substr(0, colon);
    const int port = std::stoi(listen.substr(colon + 1));
    auto server = make_http_server(service);
    if (!server->listen(host, port)) throw Error("cannot listen on " + listen);
    return 0;
}

}  // namespace claimgraph
