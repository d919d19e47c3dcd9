#pragma once
// Reference implementations used to check the library. Written directly from
// the textbook definitions, sharing no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

inline double euclidean(const std::vector<float>& a, const std::vector<float>& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
        s += d * d;
    }
    return static_cast<double>(std::sqrt(s));
}

inline double cosine_distance(const std::vector<float>& a, const std::vector<float>& b) {
    long double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<long double>(a[i]) * b[i];
        aa += static_cast<long double>(a[i]) * a[i];
        bb += static_cast<long double>(b[i]) * b[i];
    }
    return static_cast<double>(1.0L - ab / std::sqrt(aa * bb));
}

using EdgeSet = std::set<std::pair<std::size_t, std::size_t>>;

// All pairs (i < j) with distance < eps.
inline EdgeSet all_pairs_graph(const std::vector<std::vector<float>>& pts, double eps) {
    EdgeSet out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (euclidean(pts[i], pts[j]) < eps) out.emplace(i, j);
        }
    }
    return out;
}

inline std::vector<std::size_t> components(std::size_t n, const EdgeSet& edges) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (auto [a, b] : edges) parent[find(a)] = find(b);
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = find(i);
    return out;
}

// Two labelings describe the same partition (noise, -1, must match exactly).
template <typename A, typename B>
bool same_partition(const std::vector<A>& x, const std::vector<B>& y) {
    if (x.size() != y.size()) return false;
    std::map<A, B> fwd;
    std::map<B, A> bwd;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if ((x[i] < 0) != (y[i] < 0)) return false;
        if (x[i] < 0) continue;
        auto [f, fnew] = fwd.emplace(x[i], y[i]);
        auto [b, bnew] = bwd.emplace(y[i], x[i]);
        if (f->second != y[i] || b->second != x[i]) return false;
    }
    return true;
}

// DBSCAN from the definitions: core points have >= min_size points (self
// included) at distance < eps; clusters are components of core points; a
// border point belongs to the adjacent cluster whose lowest core index is
// smallest; everything else is noise (-1).
inline std::vector<long> dbscan(const std::vector<std::vector<float>>& pts, double eps, std::size_t min_size) {
    const std::size_t n = pts.size();
    std::vector<std::vector<bool>> near(n, std::vector<bool>(n));
    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            near[i][j] = euclidean(pts[i], pts[j]) < eps;
            count += near[i][j];
        }
        core[i] = count >= min_size;
    }
    EdgeSet core_edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (core[i] && core[j] && near[i][j]) core_edges.emplace(i, j);
    const auto root = components(n, core_edges);
    std::map<std::size_t, std::size_t> lowest;  // root -> lowest core index
    for (std::size_t i = 0; i < n; ++i)
        if (core[i] && !lowest.contains(root[i])) lowest[root[i]] = i;
    std::vector<long> out(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            out[i] = static_cast<long>(lowest[root[i]]);
            continue;
        }
        long best = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (core[j] && near[i][j]) {
                const long c = static_cast<long>(lowest[root[j]]);
                if (best < 0 || c < best) best = c;
            }
        }
        out[i] = best;
    }
    return out;
}

// Q = 1/2m * sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j) on a dense matrix.
inline double modularity(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                         const std::vector<std::size_t>& part) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (auto [u, v] : edges) {
        a[u][v] += 1;
        a[v][u] += 1;
    }
    std::vector<double> k(n, 0.0);
    double two_m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) k[i] += a[i][j];
        two_m += k[i];
    }
    double q = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (part[i] == part[j]) q += a[i][j] - k[i] * k[j] / two_m;
    return q / two_m;
}

// Maximum modularity over every set partition (restricted growth strings).
inline double best_modularity(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::size_t> rgs(n, 0);
    double best = -1.0;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t max_label) {
        if (i == n) {
            best = std::max(best, modularity(n, edges, rgs));
            return;
        }
        for (std::size_t c = 0; c <= max_label + 1; ++c) {
            rgs[i] = c;
            rec(i + 1, std::max(max_label, c));
        }
    };
    if (n == 0) return 0.0;
    rgs[0] = 0;
    rec(1, 0);
    return best;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Threshold oracle: predicting d < t, every distinct prediction set arises
// from t equal to some observed distance or from t above all of them.
template <typename F1Fn>
double best_threshold_f1(const std::vector<double>& d, const std::vector<bool>& dup, F1Fn f1_of) {
    std::vector<double> ts(d.begin(), d.end());
    ts.push_back(std::numeric_limits<double>::infinity());
    double best = -1;
    for (double t : ts) {
        std::vector<bool> pred(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) pred[i] = d[i] < t;
        best = std::max(best, f1_of(pred, dup));
    }
    return best;
}

// k nearest by full sort; ties broken by id.
inline std::vector<std::pair<std::string, double>> knn(const std::vector<std::vector<float>>& pts,
                                                       const std::vector<std::string>& ids,
                                                       const std::vector<float>& q, std::size_t k) {
    std::vector<std::pair<std::string, double>> all;
    for (std::size_t i = 0; i < pts.size(); ++i) all.emplace_back(ids[i], euclidean(pts[i], q));
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        return std::tie(x.second, x.first) < std::tie(y.second, y.first);
    });
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace oracle
