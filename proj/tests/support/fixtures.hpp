#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include "claimgraph/core.hpp"

namespace fixtures {

inline std::vector<std::vector<float>> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                                     float scale = 1.0f) {
    std::normal_distribution<float> g(0.0f, scale);
    std::vector<std::vector<float>> out(n, std::vector<float>(dim));
    for (auto& p : out)
        for (auto& x : p) x = g(rng);
    return out;
}

// `topics` Gaussian centres with `per_topic` noisy copies each, shuffled.
inline std::vector<std::vector<float>> clustered_points(std::mt19937_64& rng, std::size_t topics, std::size_t per_topic,
                                                        std::size_t dim, float spread, float noise) {
    auto centres = random_points(rng, topics, dim, spread);
    std::normal_distribution<float> g(0.0f, noise);
    std::vector<std::vector<float>> out;
    for (const auto& c : centres) {
        for (std::size_t i = 0; i < per_topic; ++i) {
            auto p = c;
            for (auto& x : p) x += g(rng);
            out.push_back(std::move(p));
        }
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

// Four story blobs of ten claims each. Within a blob the points sit on a
// regular decagon of radius 0.5 (side 2 * 0.5 * sin(pi / 10) ~ 0.309), so a
// blob forms a single DBSCAN cluster once epsilon exceeds the side; blobs
// are 10 apart.
struct BlobFixture {
    std::vector<std::vector<float>> points;
    std::vector<std::string> stories;
};

inline BlobFixture four_blobs() {
    BlobFixture f;
    const double centres[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
    for (int b = 0; b < 4; ++b) {
        for (int i = 0; i < 10; ++i) {
            const double a = 2.0 * std::numbers::pi * i / 10.0;
            f.points.push_back({static_cast<float>(centres[b][0] + 0.5 * std::cos(a)),
                                static_cast<float>(centres[b][1] + 0.5 * std::sin(a))});
            f.stories.push_back("story-" + std::to_string(b));
        }
    }
    return f;
}

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

struct SmallGraph {
    std::string name;
    std::size_t n;
    EdgeList edges;
};

// 25 graphs of at most 7 nodes: named shapes plus seeded random graphs.
inline std::vector<SmallGraph> small_graphs() {
    std::vector<SmallGraph> out{
        {"two triangles", 6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}},
        {"bridged triangles", 6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}},
        {"path 7", 7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}},
        {"star 6", 6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}},
        {"cycle 7", 7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 0}}},
        {"k4", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},
        {"single edge", 2, {{0, 1}}},
        {"k4 plus pendant pair", 7, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}},
        {"two squares", 7, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}, {4, 5}, {5, 6}, {6, 4}}},
        {"isolated nodes", 5, {{0, 1}, {1, 2}}},
    };
    std::mt19937_64 rng(20240601);
    while (out.size() < 25) {
        std::uniform_int_distribution<std::size_t> size(3, 7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const std::size_t n = size(rng);
        const double p = 0.25 + 0.5 * u(rng);
        SmallGraph g{"random " + std::to_string(out.size()), n, {}};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (u(rng) < p) g.edges.emplace_back(i, j);
        if (!g.edges.empty()) out.push_back(std::move(g));
    }
    return out;
}

// Removed with its contents on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("claimgraph-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline claimgraph::Claim make_claim(const std::string& id, const std::vector<float>& v, const std::string& text = "") {
    return claimgraph::Claim{id,  claimgraph::Sentence{text, "", 0, text.size()}, claimgraph::EmbeddingVector(v), 1.0,
                             claimgraph::Category::checkable, std::nullopt};
}

}  // namespace fixtures
