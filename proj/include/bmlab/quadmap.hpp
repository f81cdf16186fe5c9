#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "bmlab/errors.hpp"
#include "bmlab/plane_tree.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

inline constexpr std::uint32_t kNoCorner = std::numeric_limits<std::uint32_t>::max();

// Corner bookkeeping of a labeled plane tree: for every contour corner its
// vertex, its label, and its successor corner (the first strictly later
// corner, cyclically, whose label is one less). Minimum-label corners have no
// successor; their arc goes to the adjoined pointed vertex.
struct CornerTable {
    std::vector<std::uint32_t> vertex;     // corner -> tree vertex
    std::vector<std::int32_t> label;       // corner -> label of that vertex
    std::vector<std::uint32_t> successor;  // corner -> corner, or kNoCorner
    std::int32_t min_label = 0;

    std::size_t corners() const { return vertex.size(); }
};

inline CornerTable build_corner_table(const LabeledPlaneTree& t) {
    const std::size_t c = t.corners();
    CornerTable ct;
    ct.vertex.resize(c);
    ct.label.resize(c);
    ct.successor.assign(c, kNoCorner);

    std::int32_t lo = 0;
    std::int32_t hi = 0;
    for (std::size_t i = 0; i < c; ++i) {
        ct.vertex[i] = t.contour[i];
        ct.label[i] = t.label[t.contour[i]];
        lo = std::min(lo, ct.label[i]);
        hi = std::max(hi, ct.label[i]);
    }
    ct.min_label = lo;

    // Two backward passes over the doubled index range resolve the cyclic
    // "first later corner with label one less" queries in linear time:
    // latest[x] always holds the smallest index > i carrying label x.
    std::vector<std::uint32_t> latest(static_cast<std::size_t>(hi - lo + 1), kNoCorner);
    for (std::size_t pass = 0; pass < 2; ++pass) {
        for (std::size_t i = c; i-- > 0;) {
            const std::size_t off = static_cast<std::size_t>(ct.label[i] - lo);
            if (ct.label[i] > lo) {
                const std::uint32_t cand = latest[off - 1];
                if (cand != kNoCorner) ct.successor[i] = cand;
            }
            latest[off] = static_cast<std::uint32_t>(i);
        }
    }
    return ct;
}

// Rooted pointed quadrangulation with n faces as a half-edge structure.
// Arc i (one per tree corner) carries half-edges 2i (tail at corner i) and
// 2i+1 (the twin). next is the counterclockwise next half-edge around the
// origin vertex; faces are the orbits of h -> next[twin[h]]. Vertices are
// canonically numbered by their smallest incident half-edge; labels keep the
// tree labels, the pointed vertex carrying min-1 so that graph distance to it
// equals label[v] - label[pointed] for every vertex.
struct QuadMap {
    std::uint32_t n = 0;
    std::uint64_t seed = 0;
    std::int8_t sign = +1;
    std::uint32_t root_half_edge = 0;
    std::uint32_t pointed_vertex = 0;
    std::vector<std::uint32_t> twin;    // size 4n
    std::vector<std::uint32_t> next;    // size 4n
    std::vector<std::int32_t> labels;   // size n+2, canonical vertex order

    // Derived, rebuilt by finalize(); not serialized.
    std::vector<std::uint32_t> origin;     // size 4n
    std::vector<std::uint32_t> out_start;  // CSR over half-edges by origin, size n+3
    std::vector<std::uint32_t> out_edges;  // size 4n, ascending half-edge ids per vertex
    // Construction-only: tree vertex id -> canonical map vertex id (empty for
    // maps loaded from disk, which carry no tree).
    std::vector<std::uint32_t> tree_vertex_map;

    std::uint32_t vertices() const { return n + 2; }
    std::uint32_t half_edges() const { return 4 * n; }
    std::uint32_t head(std::uint32_t h) const { return origin[twin[h]]; }

    // Edge-length to physical-length conversion for q = 4: (9/8)^(1/4) n^(-1/4).
    double scale() const {
        return std::pow(9.0 / 8.0, 0.25) * std::pow(static_cast<double>(n), -0.25);
    }
};

namespace detail {

// Canonical vertex numbering (by smallest incident half-edge) plus CSR
// adjacency. `raw_origin` uses any provisional vertex numbering; labels and
// special vertices are renumbered in place.
inline void canonicalize_quadmap(QuadMap& q, std::vector<std::uint32_t>& raw_origin,
                                 std::vector<std::int32_t>& raw_labels,
                                 std::uint32_t raw_pointed) {
    const std::uint32_t hcount = q.half_edges();
    const std::uint32_t vcount = q.vertices();
    std::vector<std::uint32_t> remap(vcount, kNoCorner);
    std::uint32_t next_id = 0;
    for (std::uint32_t h = 0; h < hcount; ++h) {
        std::uint32_t& slot = remap[raw_origin[h]];
        if (slot == kNoCorner) slot = next_id++;
    }
    if (next_id != vcount) throw DataError("map: isolated vertex in construction");

    q.origin.resize(hcount);
    for (std::uint32_t h = 0; h < hcount; ++h) q.origin[h] = remap[raw_origin[h]];
    q.labels.assign(vcount, 0);
    for (std::uint32_t v = 0; v < vcount; ++v) q.labels[remap[v]] = raw_labels[v];
    q.pointed_vertex = remap[raw_pointed];

    q.tree_vertex_map.assign(vcount - 1, 0);
    for (std::uint32_t v = 0; v + 1 < vcount; ++v) q.tree_vertex_map[v] = remap[v];

    q.out_start.assign(vcount + 1, 0);
    for (std::uint32_t h = 0; h < hcount; ++h) q.out_start[q.origin[h] + 1]++;
    for (std::uint32_t v = 0; v < vcount; ++v) q.out_start[v + 1] += q.out_start[v];
    q.out_edges.resize(hcount);
    std::vector<std::uint32_t> cursor(q.out_start.begin(), q.out_start.end() - 1);
    for (std::uint32_t h = 0; h < hcount; ++h) q.out_edges[cursor[q.origin[h]]++] = h;
}

}  // namespace detail

// Corner-successor construction: draw one arc from every corner to its
// successor corner (to the pointed vertex for minimum-label corners). The
// rotation system comes from the nesting of the arcs along the contour:
// within the sector of corner j, counterclockwise order is the outgoing arc
// first, then incoming arcs from farthest origin to nearest; around a tree
// vertex the sectors follow in reverse contour order; around the pointed
// vertex the arcs follow contour order of their source corners.
inline QuadMap cvs_bijection(const LabeledPlaneTree& t, std::int8_t sign) {
    if (sign != 1 && sign != -1) throw ConfigError("map sign must be +1 or -1");
    const CornerTable ct = build_corner_table(t);
    const std::uint32_t corners = static_cast<std::uint32_t>(ct.corners());
    const std::uint32_t n = t.n;

    QuadMap q;
    q.n = n;
    q.seed = t.seed;
    q.sign = sign;

    const std::uint32_t hcount = 2 * corners;
    q.twin.resize(hcount);
    q.next.assign(hcount, kNoCorner);
    for (std::uint32_t i = 0; i < corners; ++i) {
        q.twin[2 * i] = 2 * i + 1;
        q.twin[2 * i + 1] = 2 * i;
    }

    const std::uint32_t pointed_raw = n + 1;
    std::vector<std::uint32_t> raw_origin(hcount);
    for (std::uint32_t i = 0; i < corners; ++i) {
        raw_origin[2 * i] = ct.vertex[i];
        raw_origin[2 * i + 1] =
            ct.successor[i] == kNoCorner ? pointed_raw : ct.vertex[ct.successor[i]];
    }

    // Incoming arcs per corner, sorted by decreasing cyclic backward distance
    // of their origin (farthest first), i.e. ascending forward offset from
    // the target corner.
    std::vector<std::uint32_t> in_start(corners + 1, 0);
    for (std::uint32_t i = 0; i < corners; ++i) {
        if (ct.successor[i] != kNoCorner) in_start[ct.successor[i] + 1]++;
    }
    for (std::uint32_t jc = 0; jc < corners; ++jc) in_start[jc + 1] += in_start[jc];
    std::vector<std::uint32_t> in_arcs(in_start.back());
    {
        std::vector<std::uint32_t> cursor(in_start.begin(), in_start.end() - 1);
        for (std::uint32_t i = 0; i < corners; ++i) {
            if (ct.successor[i] != kNoCorner) in_arcs[cursor[ct.successor[i]]++] = i;
        }
        for (std::uint32_t jc = 0; jc < corners; ++jc) {
            std::sort(in_arcs.begin() + in_start[jc], in_arcs.begin() + in_start[jc + 1],
                      [&](std::uint32_t a, std::uint32_t b) {
                          return (a + corners - jc) % corners < (b + corners - jc) % corners;
                      });
        }
    }

    // Corners of each tree vertex in contour order.
    std::vector<std::uint32_t> vc_start(t.vertices() + 1, 0);
    for (std::uint32_t i = 0; i < corners; ++i) vc_start[ct.vertex[i] + 1]++;
    for (std::uint32_t v = 0; v < t.vertices(); ++v) vc_start[v + 1] += vc_start[v];
    std::vector<std::uint32_t> vc(corners);
    {
        std::vector<std::uint32_t> cursor(vc_start.begin(), vc_start.end() - 1);
        for (std::uint32_t i = 0; i < corners; ++i) vc[cursor[ct.vertex[i]]++] = i;
    }

    // Assemble rotations.
    std::vector<std::uint32_t> cycle;
    for (std::uint32_t v = 0; v < t.vertices(); ++v) {
        cycle.clear();
        for (std::uint32_t s = vc_start[v + 1]; s-- > vc_start[v];) {
            const std::uint32_t jc = vc[s];
            cycle.push_back(2 * jc);  // outgoing arc of the sector
            for (std::uint32_t a = in_start[jc]; a < in_start[jc + 1]; ++a) {
                cycle.push_back(2 * in_arcs[a] + 1);  // incoming, farthest first
            }
        }
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            q.next[cycle[i]] = cycle[(i + 1) % cycle.size()];
        }
    }
    {
        cycle.clear();
        for (std::uint32_t i = 0; i < corners; ++i) {
            if (ct.successor[i] == kNoCorner) cycle.push_back(2 * i + 1);
        }
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            q.next[cycle[i]] = cycle[(i + 1) % cycle.size()];
        }
    }

    std::vector<std::int32_t> raw_labels(t.vertices() + 1);
    for (std::uint32_t v = 0; v < t.vertices(); ++v) raw_labels[v] = t.label[v];
    raw_labels[pointed_raw] = ct.min_label - 1;

    detail::canonicalize_quadmap(q, raw_origin, raw_labels, pointed_raw);
    q.root_half_edge = (sign > 0) ? 0 : 1;
    return q;
}

// Uniform rooted pointed quadrangulation with n faces: uniform labeled tree
// plus a uniform root-orientation sign, both drawn from the given seed.
inline QuadMap sample_quadrangulation(std::uint32_t n, std::uint64_t seed) {
    LabeledPlaneTree t = sample_labeled_tree(n, seed);
    Rng sign_rng = Rng::substream(seed, 0x5349474eull);  // sign stream
    const std::int8_t sign = sign_rng.below(2) == 0 ? std::int8_t{1} : std::int8_t{-1};
    return cvs_bijection(t, sign);
}

// ===== Structural checks =====

// Validates the half-edge structure: twin involution without fixed points,
// next a permutation preserving origins, connectivity, every edge joining
// labels that differ by exactly one (bipartite layering), every face of
// degree 4, and Euler's relation via the face count. Throws DataError.
inline void check_quadmap(const QuadMap& q) {
    const std::uint32_t hcount = q.half_edges();
    if (q.n < 1) throw DataError("map: n < 1");
    if (q.twin.size() != hcount || q.next.size() != hcount || q.origin.size() != hcount) {
        throw DataError("map: array sizes inconsistent with n");
    }
    if (q.labels.size() != q.vertices()) throw DataError("map: label array size");
    if (q.pointed_vertex >= q.vertices()) throw DataError("map: pointed vertex out of range");
    if (q.root_half_edge >= hcount) throw DataError("map: root half-edge out of range");

    std::vector<char> seen(hcount, 0);
    for (std::uint32_t h = 0; h < hcount; ++h) {
        if (q.twin[h] >= hcount || q.twin[h] == h || q.twin[q.twin[h]] != h) {
            throw DataError("map: twin is not a fixed-point-free involution");
        }
        if (q.next[h] >= hcount) throw DataError("map: next out of range");
        if (q.origin[q.next[h]] != q.origin[h]) {
            throw DataError("map: next leaves its vertex");
        }
        if (seen[q.next[h]]) throw DataError("map: next is not a permutation");
        seen[q.next[h]] = 1;
    }

    // Rotation orbits must exhaust each vertex's half-edges (next restricted
    // to a vertex is a single cycle).
    std::vector<char> visited(hcount, 0);
    std::uint32_t vertex_cycles = 0;
    for (std::uint32_t h = 0; h < hcount; ++h) {
        if (visited[h]) continue;
        ++vertex_cycles;
        std::uint32_t cur = h;
        do {
            visited[cur] = 1;
            cur = q.next[cur];
        } while (cur != h);
    }
    if (vertex_cycles != q.vertices()) throw DataError("map: rotation orbits != vertex count");

    // Bipartite layering by labels.
    for (std::uint32_t h = 0; h < hcount; ++h) {
        const std::int32_t d = q.labels[q.origin[h]] - q.labels[q.head(h)];
        if (d != 1 && d != -1) throw DataError("map: edge labels must differ by exactly 1");
    }

    // Connectivity over the adjacency structure.
    {
        std::vector<char> reached(q.vertices(), 0);
        std::queue<std::uint32_t> bfs;
        bfs.push(0);
        reached[0] = 1;
        std::uint32_t count = 1;
        while (!bfs.empty()) {
            const std::uint32_t v = bfs.front();
            bfs.pop();
            for (std::uint32_t s = q.out_start[v]; s < q.out_start[v + 1]; ++s) {
                const std::uint32_t w = q.head(q.out_edges[s]);
                if (!reached[w]) {
                    reached[w] = 1;
                    ++count;
                    bfs.push(w);
                }
            }
        }
        if (count != q.vertices()) throw DataError("map: not connected");
    }

    // Faces: orbits of h -> next[twin[h]], all of degree 4, n of them. With
    // V = n+2 and E = 2n this is Euler's relation on the sphere.
    std::fill(visited.begin(), visited.end(), 0);
    std::uint32_t faces = 0;
    for (std::uint32_t h = 0; h < hcount; ++h) {
        if (visited[h]) continue;
        ++faces;
        std::uint32_t len = 0;
        std::uint32_t cur = h;
        do {
            visited[cur] = 1;
            ++len;
            cur = q.next[q.twin[cur]];
        } while (cur != h);
        if (len != 4) throw DataError("map: face of degree " + std::to_string(len));
    }
    if (faces != q.n) throw DataError("map: face count " + std::to_string(faces) +
                                      " != " + std::to_string(q.n));
}

// Graph distance from the pointed vertex to every vertex (plain BFS over the
// adjacency structure; independent of the geodesic machinery).
inline std::vector<std::uint32_t> distances_to_pointed(const QuadMap& q) {
    const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(q.vertices(), unset);
    std::queue<std::uint32_t> bfs;
    dist[q.pointed_vertex] = 0;
    bfs.push(q.pointed_vertex);
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

// Maximum deviation of the exact distance identity
//   dist(v, pointed) = label[v] - label[pointed];
// zero on every correctly constructed map.
inline std::int64_t label_distance_identity(const QuadMap& q) {
    const std::vector<std::uint32_t> dist = distances_to_pointed(q);
    std::int64_t worst = 0;
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        const std::int64_t expected =
            static_cast<std::int64_t>(q.labels[v]) - static_cast<std::int64_t>(q.labels[q.pointed_vertex]);
        const std::int64_t got = static_cast<std::int64_t>(dist[v]);
        worst = std::max(worst, std::abs(got - expected));
    }
    return worst;
}

// Canonical encoding of the rooted pointed map: traverse all half-edges
// deterministically from the root via (next, twin), numbering them in
// discovery order, and record the renumbered permutations plus which origins
// are the pointed vertex. Two maps are isomorphic as rooted pointed maps
// exactly when their codes agree.
inline std::vector<std::uint32_t> canonical_code(const QuadMap& q) {
    const std::uint32_t hcount = q.half_edges();
    std::vector<std::uint32_t> id(hcount, kNoCorner);
    std::vector<std::uint32_t> order;
    order.reserve(hcount);
    id[q.root_half_edge] = 0;
    order.push_back(q.root_half_edge);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::uint32_t h = order[i];
        for (const std::uint32_t nb : {q.next[h], q.twin[h]}) {
            if (id[nb] == kNoCorner) {
                id[nb] = static_cast<std::uint32_t>(order.size());
                order.push_back(nb);
            }
        }
    }
    if (order.size() != hcount) throw DataError("map: half-edge structure not connected");
    std::vector<std::uint32_t> code;
    code.reserve(3 * hcount);
    for (const std::uint32_t h : order) {
        code.push_back(id[q.next[h]]);
        code.push_back(id[q.twin[h]]);
        code.push_back(q.origin[h] == q.pointed_vertex ? 1u : 0u);
    }
    return code;
}

}  // namespace bmlab
