#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "bmlab/bigint.hpp"
#include "bmlab/errors.hpp"
#include "bmlab/quadmap.hpp"

namespace bmlab {

inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

// Breadth-first layering of a map from one source, with, per vertex, the
// predecessor set (adjacent vertices one layer closer, deduplicated and
// ascending) and the exact number of distinct geodesics from the source.
// Geodesics are vertex paths; parallel edges do not multiply them.
struct GeodesicDag {
    std::uint32_t source = 0;
    std::vector<std::uint32_t> dist;
    std::vector<std::uint32_t> pred_start;  // CSR into preds, size V+1
    std::vector<std::uint32_t> preds;
    std::vector<BigUint> path_counts;

    std::uint32_t vertices() const { return static_cast<std::uint32_t>(dist.size()); }

    // Predecessors of v as a [begin, end) index pair into preds.
    std::pair<std::uint32_t, std::uint32_t> pred_range(std::uint32_t v) const {
        return {pred_start[v], pred_start[v + 1]};
    }
    std::uint32_t pred_count(std::uint32_t v) const {
        return pred_start[v + 1] - pred_start[v];
    }
};

inline GeodesicDag bfs_dag(const QuadMap& q, std::uint32_t source) {
    const std::uint32_t vcount = q.vertices();
    if (source >= vcount) throw ConfigError("geodesic source out of range");

    GeodesicDag dag;
    dag.source = source;
    dag.dist.assign(vcount, kUnreached);
    dag.dist[source] = 0;

    std::vector<std::uint32_t> order;
    order.reserve(vcount);
    order.push_back(source);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::uint32_t v = order[i];
        for (std::uint32_t s = q.out_start[v]; s < q.out_start[v + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (dag.dist[w] == kUnreached) {
                dag.dist[w] = dag.dist[v] + 1;
                order.push_back(w);
            }
        }
    }
    if (order.size() != vcount) throw DataError("geodesics: map not connected");

    dag.pred_start.assign(vcount + 1, 0);
    std::vector<std::uint32_t> scratch;
    std::vector<std::vector<std::uint32_t>> pred_lists(vcount);
    for (std::uint32_t v = 0; v < vcount; ++v) {
        if (v == source) continue;
        scratch.clear();
        for (std::uint32_t s = q.out_start[v]; s < q.out_start[v + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (dag.dist[w] + 1 == dag.dist[v]) scratch.push_back(w);
        }
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        pred_lists[v] = scratch;
        dag.pred_start[v + 1] = static_cast<std::uint32_t>(scratch.size());
    }
    for (std::uint32_t v = 0; v < vcount; ++v) dag.pred_start[v + 1] += dag.pred_start[v];
    dag.preds.resize(dag.pred_start.back());
    for (std::uint32_t v = 0; v < vcount; ++v) {
        std::copy(pred_lists[v].begin(), pred_lists[v].end(),
                  dag.preds.begin() + dag.pred_start[v]);
    }

    dag.path_counts.assign(vcount, BigUint());
    dag.path_counts[source] = BigUint(1);
    for (const std::uint32_t v : order) {
        if (v == source) continue;
        BigUint total;
        const auto [b, e] = dag.pred_range(v);
        for (std::uint32_t s = b; s < e; ++s) total += dag.path_counts[dag.preds[s]];
        dag.path_counts[v] = std::move(total);
    }
    return dag;
}

// All geodesics from the DAG source to target as vertex paths, emitted in
// lexicographic order of the vertex sequence, capped. `truncated` reports a
// hit cap, distinguishing overflow from exhaustion.
struct GeodesicSet {
    std::vector<std::vector<std::uint32_t>> paths;
    bool truncated = false;
};

inline GeodesicSet enumerate_geodesics(const QuadMap& q, const GeodesicDag& dag,
                                       std::uint32_t target, std::size_t cap = 64) {
    if (target >= dag.vertices()) throw ConfigError("geodesic target out of range");
    if (cap == 0) throw ConfigError("geodesic enumeration cap must be positive");

    GeodesicSet out;
    if (target == dag.source) {
        out.paths.push_back({target});
        return out;
    }

    // Mark vertices lying on at least one source->target geodesic by walking
    // predecessor sets back from the target.
    std::vector<char> active(dag.vertices(), 0);
    std::vector<std::uint32_t> stack{target};
    active[target] = 1;
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        const auto [b, e] = dag.pred_range(v);
        for (std::uint32_t s = b; s < e; ++s) {
            const std::uint32_t p = dag.preds[s];
            if (!active[p]) {
                active[p] = 1;
                stack.push_back(p);
            }
        }
    }

    // Depth-first walk from the source, taking eligible successors in
    // ascending vertex order, which yields lexicographic path order.
    const std::uint32_t len = dag.dist[target];
    std::vector<std::uint32_t> path{dag.source};
    std::vector<std::vector<std::uint32_t>> choices(len + 1);
    std::vector<std::uint32_t> pos(len + 1, 0);

    auto successors_of = [&](std::uint32_t v, std::vector<std::uint32_t>& dst) {
        dst.clear();
        for (std::uint32_t s = q.out_start[v]; s < q.out_start[v + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (active[w] && dag.dist[w] == dag.dist[v] + 1) dst.push_back(w);
        }
        std::sort(dst.begin(), dst.end());
        dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    };

    std::uint32_t depth = 0;
    successors_of(dag.source, choices[0]);
    for (;;) {
        if (pos[depth] < choices[depth].size()) {
            const std::uint32_t w = choices[depth][pos[depth]++];
            path.push_back(w);
            if (path.size() == static_cast<std::size_t>(len) + 1) {
                // w == target: it is the only active vertex in the last layer.
                if (out.paths.size() == cap) {
                    out.truncated = true;
                    return out;
                }
                out.paths.push_back(path);
                path.pop_back();
            } else {
                ++depth;
                successors_of(w, choices[depth]);
                pos[depth] = 0;
            }
        } else {
            if (depth == 0) break;
            --depth;
            path.pop_back();
        }
    }
    return out;
}

// Lexicographically first geodesic from the DAG source to target.
inline std::vector<std::uint32_t> first_geodesic(const QuadMap& q, const GeodesicDag& dag,
                                                 std::uint32_t target) {
    if (target >= dag.vertices()) throw ConfigError("geodesic target out of range");
    if (dag.dist[target] == kUnreached) throw DataError("geodesics: unreached target");
    // Walk back from the target always taking the smallest predecessor whose
    // smallest-successor chain is lexicographically forced; equivalently,
    // walk forward greedily among vertices that can still reach the target.
    std::vector<char> active(dag.vertices(), 0);
    std::vector<std::uint32_t> stack{target};
    active[target] = 1;
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        const auto [b, e] = dag.pred_range(v);
        for (std::uint32_t s = b; s < e; ++s) {
            const std::uint32_t p = dag.preds[s];
            if (!active[p]) {
                active[p] = 1;
                stack.push_back(p);
            }
        }
    }
    std::vector<std::uint32_t> path{dag.source};
    std::uint32_t cur = dag.source;
    while (cur != target) {
        std::uint32_t best = kUnreached;
        for (std::uint32_t s = q.out_start[cur]; s < q.out_start[cur + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (active[w] && dag.dist[w] == dag.dist[cur] + 1 && w < best) best = w;
        }
        if (best == kUnreached) throw DataError("geodesics: forward walk lost the target");
        path.push_back(best);
        cur = best;
    }
    return path;
}

// The distance-decreasing successor-chain path from a tree corner to the
// pointed vertex: corner, its successor corner, and so on down to the label
// minimum, then the pointed vertex. Every such chain is a graph geodesic.
inline std::vector<std::uint32_t> simple_geodesic(const QuadMap& q, const CornerTable& ct,
                                                  std::uint32_t corner) {
    if (corner >= ct.corners()) throw ConfigError("corner index out of range");
    if (q.tree_vertex_map.empty()) {
        throw DataError("simple geodesic needs a map built in-session from its tree");
    }
    std::vector<std::uint32_t> path;
    std::uint32_t c = corner;
    for (;;) {
        path.push_back(q.tree_vertex_map[ct.vertex[c]]);
        if (ct.successor[c] == kNoCorner) break;
        c = ct.successor[c];
    }
    path.push_back(q.pointed_vertex);
    return path;
}

inline std::vector<std::uint32_t> simple_geodesic(const QuadMap& q, const LabeledPlaneTree& t,
                                                  std::uint32_t corner) {
    return simple_geodesic(q, build_corner_table(t), corner);
}

// Where two paths sharing an endpoint merge: the first vertex common to both,
// scanning from the far side (the ends opposite the shared endpoint), with
// the matching offsets from those far ends. Identical paths report offsets
// (0, 0); paths sharing only the endpoint report it with the full lengths.
struct Coalescence {
    bool found = false;
    std::uint32_t vertex = 0;
    std::size_t offset_a = 0;
    std::size_t offset_b = 0;
};

inline Coalescence coalescence_point(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b, bool shared_at_end) {
    if (a.empty() || b.empty()) throw ConfigError("coalescence needs nonempty paths");
    auto at = [shared_at_end](const std::vector<std::uint32_t>& p, std::size_t far_offset) {
        return shared_at_end ? p[far_offset] : p[p.size() - 1 - far_offset];
    };
    Coalescence best;
    std::size_t best_b = 0;
    // Map vertex -> smallest far-offset inside b.
    std::vector<std::pair<std::uint32_t, std::size_t>> seen;
    seen.reserve(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) seen.emplace_back(at(b, i), i);
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::uint32_t v = at(a, i);
        auto it = std::lower_bound(seen.begin(), seen.end(), std::make_pair(v, std::size_t{0}));
        if (it != seen.end() && it->first == v) {
            best.found = true;
            best.vertex = v;
            best.offset_a = i;
            best_b = it->second;
            break;
        }
    }
    best.offset_b = best_b;
    return best;
}

}  // namespace bmlab
