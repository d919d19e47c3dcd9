#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "claimgraph/core.hpp"
#include "claimgraph/detection.hpp"
#include "claimgraph/embeddings.hpp"
#include "claimgraph/engine.hpp"

namespace httplib {
class Server;
}

namespace claimgraph {

struct ServiceConfig {
    double epsilon = 1.0;
    std::optional<Metric> metric;  // defaults to the provider's preferred metric
    ProviderConfig embedding;
    std::filesystem::path classifier_path;  // empty: no classifier, rules only
    std::optional<double> detection_threshold;
    std::filesystem::path persistence_path;  // directory; empty keeps state in memory
    std::string listen = "127.0.0.1:8080";
    double latency_budget_ms = 300.0;
    std::size_t similar_k = 5;
    bool weighted_edges = false;
    std::uint64_t louvain_seed = 0;
    std::size_t snapshot_every = 500;

    /// Relative paths are resolved against `base_dir`.
    static ServiceConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
    static ServiceConfig load(const std::filesystem::path& path);
};

/// --config flag if given, else $CLAIMGRAPH_CONFIG. Throws InvalidArgumentError
/// when neither is set.
ServiceConfig resolve_service_config(const std::optional<std::filesystem::path>& flag);

struct Article {
    std::string id;
    std::string title;
    std::string body;
    std::string source_url;
    std::string published_at;
};

/// Append-only JSON Lines file, flushed and fsync'd per record.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    void append(const std::string& line);
    void truncate();
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void open(const char* mode);

    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

/// Engine plus everything the service must persist: articles, per-community
/// update times, and the write-ahead log with periodic snapshots. Recovery is
/// snapshot + log tail. Not synchronised; ClaimService does the locking.
class ServiceState {
public:
    ServiceState(EngineConfig engine, std::filesystem::path dir, std::size_t snapshot_every = 500);

    std::vector<InsertionReport> apply_article(const Article& a, std::vector<Claim> claims, const std::string& at);
    InsertionReport apply_claim(Claim c, const std::string& at);
    std::size_t apply_factcheck(const std::string& claim_id, Factcheck fc);

    const ClaimGraph& graph() const noexcept { return graph_; }
    bool has_article(const std::string& id) const { return articles_.contains(id); }
    std::size_t article_count() const noexcept { return articles_.size(); }
    std::optional<std::string> last_updated(CommunityId id) const;
    std::uint64_t next_claim_number() const noexcept { return next_claim_number_; }
    std::uint64_t last_seq() const noexcept { return seq_; }

    /// Graph snapshot, articles and update times as one JSON document. Two
    /// states with equal documents are indistinguishable to clients.
    std::string state_document() const;
    /// Writes snapshot.json atomically and empties the log.
    void compact();

    bool persistent() const noexcept { return static_cast<bool>(log_); }

private:
    void recover();
    void replay_event(const std::string& line);
    void log_event(const std::string& line);
    void touch_component(std::size_t node, const std::string& at);
    std::string snapshot_document() const;

    std::filesystem::path dir_;
    std::size_t snapshot_every_;
    ClaimGraph graph_;
    std::map<std::string, Article> articles_;
    std::map<CommunityId, std::string> updated_;
    std::uint64_t next_claim_number_ = 1;
    std::uint64_t seq_ = 0;
    std::size_t events_since_snapshot_ = 0;
    std::unique_ptr<EventLog> log_;
};

struct BudgetedReport {
    InsertionReport report;
    bool budget_exceeded = false;
};

struct SimilarEntry {
    std::string claim_id;
    std::string text;
    double distance = 0.0;
    CommunityId community_id = 0;
    std::optional<Factcheck> factcheck;
};

struct SubmitResult {
    BudgetedReport insertion;
    std::vector<SimilarEntry> similar;  // nearest claims carrying their own factcheck
};

struct ClaimSummary {
    std::string id;
    std::string text;
    std::string article_id;
    double detection_score = 0.0;
    std::optional<Factcheck> factcheck;       // recorded on this claim
    std::vector<Factcheck> inherited;         // recorded on other members
};

struct ClusterView {
    CommunityId community_id = 0;
    std::vector<ClaimSummary> claims;
    std::vector<Factcheck> factchecks;
    std::string last_updated;
};

struct Health {
    std::size_t claims = 0;
    std::size_t clusters = 0;
};

/// The live system: detection + embedding in front of a ServiceState, one
/// writer at a time, any number of concurrent readers.
class ClaimService {
public:
    explicit ClaimService(const ServiceConfig& cfg);
    ClaimService(const ServiceConfig& cfg, std::shared_ptr<const Embedder> embedder,
                 std::optional<ClaimClassifier> classifier);

    /// Throws DuplicateArticleError, InvalidArgumentError, or the provider's
    /// error; nothing is persisted on failure.
    std::vector<BudgetedReport> ingest_article(const Article& a);
    SubmitResult submit_claim(const std::string& text);
    /// Returns the size of the claim's community. Throws UnknownClaimError.
    std::size_t attach_factcheck(const std::string& claim_id, Verdict verdict, const std::string& note);

    std::vector<SimilarEntry> similar_to(const std::string& claim_id, std::size_t k) const;
    std::vector<ClusterView> clusters(std::size_t offset, std::size_t limit, std::size_t* total = nullptr) const;
    std::optional<ClusterView> cluster(CommunityId id) const;
    /// The claim with its own and inherited factchecks.
    ClaimSummary claim_view(const std::string& claim_id) const;
    Health health() const;

    std::string state_document() const;
    const ServiceConfig& config() const noexcept { return cfg_; }

private:
    BudgetedReport budgeted(InsertionReport r) const;
    ClusterView view_locked(CommunityId id, const std::vector<std::size_t>& members) const;

    ServiceConfig cfg_;
    std::shared_ptr<const Embedder> embedder_;
    std::unique_ptr<ClaimDetector> detector_;
    ServiceState state_;
    mutable std::shared_mutex mutex_;
};

/// Routes for the HTTP/JSON API, ready for bind/listen.
std::unique_ptr<httplib::Server> make_http_server(ClaimService& service);

/// Blocks serving on cfg.listen ("host:port").
int serve(ClaimService& service, const std::string& listen);

}  // namespace claimgraph
