#pragma once

// Independent reference implementations used by the test suites. Everything
// here recomputes its answer from first principles — fresh traversals, plain
// linear scans, a separate random number generator — precisely so that
// agreement with the library is a genuine cross-check rather than the same
// code running twice.

#include <bmlab/quadmap.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <set>
#include <vector>

namespace oracles {

// Plain BFS distances over the quadrangulation's adjacency, written against
// the public CSR fields only.
inline std::vector<std::uint32_t> bfs_distances(const bmlab::QuadMap& q, std::uint32_t source) {
    const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(q.vertices(), unset);
    std::queue<std::uint32_t> bfs;
    dist[source] = 0;
    bfs.push(source);
    while (!bfs.empty()) {
        const std::uint32_t v = bfs.front();
        bfs.pop();
        for (std::uint32_t s = q.out_start[v]; s < q.out_start[v + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (dist[w] == unset) {
                dist[w] = dist[v] + 1;
                bfs.push(w);
            }
        }
    }
    return dist;
}

// Every shortest vertex path from x to y, produced by forward depth-first
// search over distance-decreasing-to-target moves, in ascending neighbour
// order. Paths come out in lexicographic order by construction.
inline std::vector<std::vector<std::uint32_t>> all_geodesics(const bmlab::QuadMap& q,
                                                             std::uint32_t x, std::uint32_t y) {
    const std::vector<std::uint32_t> to_y = bfs_distances(q, y);
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> path{x};
    auto go = [&](auto&& self, std::uint32_t v) -> void {
        if (v == y) {
            out.push_back(path);
            return;
        }
        std::vector<std::uint32_t> nexts;
        for (std::uint32_t s = q.out_start[v]; s < q.out_start[v + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (to_y[w] + 1 == to_y[v]) nexts.push_back(w);
        }
        std::sort(nexts.begin(), nexts.end());
        nexts.erase(std::unique(nexts.begin(), nexts.end()), nexts.end());
        for (const std::uint32_t w : nexts) {
            path.push_back(w);
            self(self, w);
            path.pop_back();
        }
    };
    go(go, x);
    return out;
}

// Cyclic two-arc label distance evaluated the other way around: walk the
// complementary arc forward with explicit wrap-around instead of splitting
// at the endpoints.
inline double cyclic_label_distance(const std::vector<double>& z, std::size_t s, std::size_t t) {
    const std::size_t m = z.size() - 1;  // indices 0..m, 0 and m identified
    auto arc_min = [&](std::size_t from, std::size_t to) {
        double lo = z[from];
        std::size_t u = from;
        while (u != to) {
            u = (u + 1) % m;
            lo = std::min(lo, z[u]);
        }
        return lo;
    };
    const std::size_t a = s % m;
    const std::size_t b = t % m;
    return z[s] + z[t] - 2.0 * std::max(arc_min(a, b), arc_min(b, a));
}

struct MeanWithError {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

// Monte Carlo mean of max - min of a discrete Gaussian bridge on m steps,
// with an independent generator. The re-rooted excursion's maximum equals
// the bridge's range sample by sample, so this is an equal-law reference
// for the excursion sampler's maximum.
inline MeanWithError bridge_range_mean(std::size_t m, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
    double acc = 0.0;
    double acc2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        double w = 0.0;
        double terminal = 0.0;
        std::vector<double> walk(m + 1, 0.0);
        for (std::size_t k = 1; k <= m; ++k) {
            w += normal(gen);
            walk[k] = w;
        }
        terminal = walk[m];
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t k = 0; k <= m; ++k) {
            const double b = walk[k] - terminal * static_cast<double>(k) / static_cast<double>(m);
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        const double range = hi - lo;
        acc += range;
        acc2 += range * range;
    }
    MeanWithError out;
    out.mean = acc / static_cast<double>(samples);
    const double var =
        std::max(0.0, acc2 / static_cast<double>(samples) - out.mean * out.mean);
    out.stderr_mean = std::sqrt(var / static_cast<double>(samples));
    return out;
}

inline MeanWithError mean_with_error(const std::vector<double>& xs) {
    MeanWithError out;
    double acc = 0.0;
    double acc2 = 0.0;
    for (const double x : xs) {
        acc += x;
        acc2 += x * x;
    }
    const auto n = static_cast<double>(xs.size());
    out.mean = acc / n;
    const double var = std::max(0.0, acc2 / n - out.mean * out.mean);
    out.stderr_mean = std::sqrt(var / n);
    return out;
}

}  // namespace oracles
