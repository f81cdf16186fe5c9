#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "bmlab/errors.hpp"
#include "bmlab/geodesics.hpp"
#include "bmlab/quadmap.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

// Near-endpoint resolution: geodesics are told apart near an endpoint only if
// they differ within delta = round(beta n^(1/4)) steps of it. This is the
// discrete counterpart of counting geodesic germs rather than vertex paths;
// equal-length micro-detours far smaller than the map scale do not register.
inline std::uint32_t delta_steps(std::uint32_t n, double beta) {
    const double d = beta * std::pow(static_cast<double>(n), 0.25);
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::llround(d)));
}

// Empirical diameter by double sweep: BFS from vertex 0, then BFS from the
// farthest vertex found. A standard lower bound, exact on trees and within a
// small factor generally; used only to set sampling scales.
inline std::uint32_t empirical_diameter(const QuadMap& q) {
    const GeodesicDag d0 = bfs_dag(q, 0);
    std::uint32_t far = 0;
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        if (d0.dist[v] > d0.dist[far]) far = v;
    }
    const GeodesicDag d1 = bfs_dag(q, far);
    std::uint32_t diam = 0;
    for (std::uint32_t v = 0; v < q.vertices(); ++v) diam = std::max(diam, d1.dist[v]);
    return diam;
}

// |B(center, r)| for r = 0..r_max (cumulative vertex counts).
inline std::vector<std::size_t> ball_volume_profile(const QuadMap& q, std::uint32_t center,
                                                    std::uint32_t r_max) {
    const GeodesicDag dag = bfs_dag(q, center);
    std::vector<std::size_t> counts(r_max + 1, 0);
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        if (dag.dist[v] <= r_max) counts[dag.dist[v]]++;
    }
    for (std::uint32_t r = 1; r <= r_max; ++r) counts[r] += counts[r - 1];
    return counts;
}

// Local dimension data for a vertex set: mean of |S intersect B(c, r)| over
// sampled centres c drawn from S itself, for r = 1..r_max. Centres inside
// the set give nonzero counts at every radius, which is what a log-log
// dimension fit needs.
inline std::vector<std::pair<double, double>> set_dimension_profile(
    const QuadMap& q, const std::vector<std::uint32_t>& members, std::size_t centers,
    std::uint32_t r_max, std::uint64_t seed) {
    if (members.empty()) throw DataError("dimension profile of an empty vertex set");
    if (centers == 0) throw ConfigError("dimension profile needs centers >= 1");
    std::vector<char> in_set(q.vertices(), 0);
    for (const std::uint32_t v : members) in_set[v] = 1;

    Rng rng = Rng::substream(seed, 0x53455444ull);  // set-dimension stream
    std::vector<double> acc(r_max + 1, 0.0);
    std::vector<std::uint32_t> dist(q.vertices(), kUnreached);
    std::vector<std::uint32_t> touched;
    for (std::size_t ci = 0; ci < centers; ++ci) {
        const std::uint32_t c = members[rng.below(members.size())];
        // Truncated BFS with per-radius membership tallies.
        std::vector<std::size_t> counts(r_max + 1, 0);
        touched.clear();
        touched.push_back(c);
        dist[c] = 0;
        counts[0] += in_set[c];
        for (std::size_t i = 0; i < touched.size(); ++i) {
            const std::uint32_t g = touched[i];
            const std::uint32_t dg = dist[g];
            if (dg == r_max) continue;
            for (std::uint32_t s = q.out_start[g]; s < q.out_start[g + 1]; ++s) {
                const std::uint32_t w = q.head(q.out_edges[s]);
                if (dist[w] != kUnreached) continue;
                dist[w] = dg + 1;
                touched.push_back(w);
                counts[dg + 1] += in_set[w];
            }
        }
        for (const std::uint32_t g : touched) dist[g] = kUnreached;
        for (std::uint32_t r = 1; r <= r_max; ++r) counts[r] += counts[r - 1];
        for (std::uint32_t r = 0; r <= r_max; ++r) acc[r] += static_cast<double>(counts[r]);
    }
    std::vector<std::pair<double, double>> pts;
    for (std::uint32_t r = 1; r <= r_max; ++r) {
        pts.emplace_back(static_cast<double>(r), acc[r] / static_cast<double>(centers));
    }
    return pts;
}

// ===== Scaling fits =====

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::size_t points = 0;
    double r_lo = 0.0;
    double r_hi = 0.0;
};

// Least squares of log(count) against log(radius) inside [r_lo, r_hi].
// Needs at least four distinct radii with positive counts.
inline ScalingFit dimension_fit(const std::vector<std::pair<double, double>>& radius_count,
                                double r_lo, double r_hi) {
    std::vector<std::pair<double, double>> pts;
    std::set<double> radii;
    for (const auto& [r, c] : radius_count) {
        if (r < r_lo || r > r_hi || !(r > 0.0) || !(c > 0.0)) continue;
        pts.emplace_back(std::log(r), std::log(c));
        radii.insert(r);
    }
    if (radii.size() < 4) {
        throw DataError("dimension fit: degenerate window, need >= 4 distinct radii");
    }
    double sx = 0, sy = 0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / static_cast<double>(pts.size());
    const double my = sy / static_cast<double>(pts.size());
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (const auto& [x, y] : pts) {
        const double e = y - (fit.intercept + fit.slope * x);
        ss_res += e * e;
    }
    if (pts.size() > 2) {
        fit.stderr_slope = std::sqrt(ss_res / (static_cast<double>(pts.size() - 2) * sxx));
    }
    fit.points = pts.size();
    fit.r_lo = r_lo;
    fit.r_hi = r_hi;
    return fit;
}

// ===== Confluence =====

// For far-apart targets, geodesics leaving one point pass through a common
// initial segment. The statistic samples triples (x, y, y') with y, y'
// outside B(x, eps * diam) and compares the canonical (lexicographically
// first) geodesics x->y and x->y': they coalesce when they agree beyond x,
// and the confluence radius is the length of the shared initial segment.
struct ConfluenceStat {
    std::size_t samples = 0;
    double proportion = 0.0;
    double mean_radius = 0.0;           // shared initial steps, coalescing triples
    double mean_radius_fraction = 0.0;  // mean_radius / diameter
    std::uint32_t diameter = 0;
};

inline ConfluenceStat confluence_stat(const QuadMap& q, double eps, std::size_t samples,
                                      std::uint64_t seed) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("confluence eps must lie in (0,1)");
    if (samples == 0) throw ConfigError("confluence needs samples >= 1");
    const std::uint32_t diam = empirical_diameter(q);
    if (diam < 4) {
        throw DataError("confluence: map diameter " + std::to_string(diam) +
                        " too small for a separation scale");
    }
    const double threshold = eps * static_cast<double>(diam);

    Rng rng = Rng::substream(seed, 0x434f4e46ull);  // confluence stream
    ConfluenceStat st;
    st.diameter = diam;
    std::size_t coalesced = 0;
    std::size_t radius_sum = 0;
    std::vector<std::uint32_t> far;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 10 * samples + 100;
    while (st.samples < samples) {
        if (++attempts > max_attempts) {
            throw DataError("confluence: could not find far targets; eps too large for this map");
        }
        const std::uint32_t x = static_cast<std::uint32_t>(rng.below(q.vertices()));
        const GeodesicDag dag = bfs_dag(q, x);
        far.clear();
        for (std::uint32_t v = 0; v < q.vertices(); ++v) {
            if (static_cast<double>(dag.dist[v]) > threshold) far.push_back(v);
        }
        if (far.size() < 2) continue;
        const std::uint32_t y = far[rng.below(far.size())];
        const std::uint32_t yp = far[rng.below(far.size())];
        const std::vector<std::uint32_t> p1 = first_geodesic(q, dag, y);
        const std::vector<std::uint32_t> p2 = first_geodesic(q, dag, yp);
        std::size_t agree = 0;
        const std::size_t lim = std::min(p1.size(), p2.size());
        while (agree < lim && p1[agree] == p2[agree]) ++agree;
        // agree counts matching leading vertices; shared steps beyond x:
        const std::size_t shared = agree > 0 ? agree - 1 : 0;
        ++st.samples;
        if (shared >= 1) {
            ++coalesced;
            radius_sum += shared;
        }
    }
    st.proportion = static_cast<double>(coalesced) / static_cast<double>(st.samples);
    if (coalesced > 0) {
        st.mean_radius = static_cast<double>(radius_sum) / static_cast<double>(coalesced);
        st.mean_radius_fraction = st.mean_radius / static_cast<double>(diam);
    }
    return st;
}

// ===== Geodesic networks =====

// Classification of the geodesic bundle between two vertices, at germ
// granularity: two geodesics count as the same branch near an endpoint when
// they agree over their first delta = round(beta n^(1/4)) steps from it.
// (Vertex-path counts are inflated by equal-length micro-detours; germs are
// the discrete units that converge to continuum geodesics.) j and k are the
// branch multiplicities at x and y, geodesic_classes the number of realized
// (near-x, near-y) germ combinations. The pair is a normal (j,k)-network
// when some interior hub vertex lies on every geodesic, the germs at each
// end are pairwise vertex-disjoint apart from the endpoint, and the class
// count factors as j*k — so the pair carries exactly j*k geodesic branches.
struct NetworkReport {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t distance = 0;
    std::uint64_t path_count = 0;  // total vertex-path geodesics, saturated
    bool truncated = false;        // a germ or path enumeration overflowed its cap
    std::size_t geodesic_classes = 0;
    std::uint32_t j = 0;
    std::uint32_t k = 0;
    bool has_hub = false;
    std::uint32_t hub = 0;
    bool regular_x = false;  // germs at x pairwise disjoint apart from x
    bool regular_y = false;
    bool normal = false;
    std::uint32_t delta = 1;
};

inline NetworkReport classify_network(const QuadMap& q, const GeodesicDag& dag_x,
                                      std::uint32_t y, double delta_beta = 0.1,
                                      std::size_t cap = 64) {
    const std::uint32_t x = dag_x.source;
    if (y >= q.vertices()) throw ConfigError("network target out of range");
    if (y == x) throw ConfigError("network endpoints must differ");
    if (cap < 2) throw ConfigError("network classification needs cap >= 2");

    NetworkReport rep;
    rep.x = x;
    rep.y = y;
    rep.delta = delta_steps(q.n, delta_beta);
    rep.distance = dag_x.dist[y];
    rep.path_count = dag_x.path_counts[y].saturated_u64();
    const std::uint32_t L = rep.distance;

    const GeodesicDag dag_y = bfs_dag(q, y);
    // The on-geodesic subgraph R: vertices lying on some geodesic x -> y.
    // Every directed R-path extends to a full geodesic, so germ counting
    // needs no reachability filtering.
    const auto on_geo = [&](std::uint32_t v) {
        return dag_x.dist[v] != kUnreached && dag_y.dist[v] != kUnreached &&
               dag_x.dist[v] + dag_y.dist[v] == L;
    };
    const std::uint32_t d = std::min<std::uint32_t>(rep.delta, L > 0 ? L - 1 : 0);

    // Distinct germs from one endpoint: directed R-paths of length d leaving
    // it, in deterministic (sorted-successor) order.
    bool overflow = false;
    const auto r_successors = [&](std::uint32_t v, const std::vector<std::uint32_t>& dist_from) {
        std::vector<std::uint32_t> s;
        for (std::uint32_t e = q.out_start[v]; e < q.out_start[v + 1]; ++e) {
            const std::uint32_t w = q.head(q.out_edges[e]);
            if (on_geo(w) && dist_from[w] == dist_from[v] + 1) s.push_back(w);
        }
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        return s;
    };
    const auto collect_germs = [&](std::uint32_t endpoint,
                                   const std::vector<std::uint32_t>& dist_from) {
        std::vector<std::vector<std::uint32_t>> germs;
        std::vector<std::uint32_t> seq;
        auto go = [&](auto&& self, std::uint32_t v) -> void {
            if (overflow) return;
            if (seq.size() == d) {
                if (germs.size() >= cap) {
                    overflow = true;
                    return;
                }
                germs.push_back(seq);
                return;
            }
            for (const std::uint32_t w : r_successors(v, dist_from)) {
                seq.push_back(w);
                self(self, w);
                seq.pop_back();
            }
        };
        go(go, endpoint);
        return germs;
    };
    const std::vector<std::vector<std::uint32_t>> xgerms = collect_germs(x, dag_x.dist);
    const std::vector<std::vector<std::uint32_t>> ygerms = collect_germs(y, dag_y.dist);
    rep.j = static_cast<std::uint32_t>(xgerms.size());
    rep.k = static_cast<std::uint32_t>(ygerms.size());

    const auto pairwise_disjoint = [](const std::vector<std::vector<std::uint32_t>>& germs) {
        std::unordered_map<std::uint32_t, std::uint32_t> uses;
        for (const auto& g : germs) {
            for (const std::uint32_t v : g) uses[v]++;
        }
        for (const auto& [v, c] : uses) {
            if (c > 1) return false;
        }
        return true;
    };
    rep.regular_x = !overflow && pairwise_disjoint(xgerms);
    rep.regular_y = !overflow && pairwise_disjoint(ygerms);

    if (!overflow && 2 * rep.delta >= L) {
        // Germ windows overlap: every vertex-path difference is within delta
        // of an endpoint, so vertex paths and germ classes coincide. Count
        // classes (and the hub) by exact enumeration.
        const GeodesicSet geos = enumerate_geodesics(q, dag_x, y, cap);
        if (geos.truncated) {
            overflow = true;
        } else {
            std::set<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> cls;
            for (const auto& p : geos.paths) {
                cls.insert({std::vector<std::uint32_t>(p.begin() + 1, p.begin() + 1 + d),
                            std::vector<std::uint32_t>(p.rbegin() + 1, p.rbegin() + 1 + d)});
            }
            rep.geodesic_classes = cls.size();
            if (L >= 2) {
                std::vector<std::uint32_t> common(geos.paths[0].begin() + 1,
                                                  geos.paths[0].end() - 1);
                for (std::size_t pi = 1; pi < geos.paths.size() && !common.empty(); ++pi) {
                    const std::set<std::uint32_t> here(geos.paths[pi].begin() + 1,
                                                       geos.paths[pi].end() - 1);
                    std::vector<std::uint32_t> keep;
                    for (const std::uint32_t v : common) {
                        if (here.count(v)) keep.push_back(v);
                    }
                    common.swap(keep);
                }
                if (!common.empty()) {
                    rep.has_hub = true;
                    const auto badness = [&](std::uint32_t v) {
                        return std::abs(2 * static_cast<std::int64_t>(dag_x.dist[v]) -
                                        static_cast<std::int64_t>(L));
                    };
                    std::uint32_t best = common[0];
                    for (const std::uint32_t v : common) {
                        if (badness(v) < badness(best) ||
                            (badness(v) == badness(best) && dag_x.dist[v] < dag_x.dist[best])) {
                            best = v;
                        }
                    }
                    rep.hub = best;
                }
            }
        }
    } else if (!overflow) {
        // Germ windows are separated. A (near-x, near-y) combination is
        // realized iff the x-germ's deep end reaches the y-germ's deep end
        // inside R; classes follow from per-end reachability.
        std::set<std::uint32_t> xends, ystarts;
        for (const auto& g : xgerms) xends.insert(g.back());
        for (const auto& g : ygerms) ystarts.insert(g.back());
        std::unordered_map<std::uint32_t, std::set<std::uint32_t>> reach;
        for (const std::uint32_t u : xends) {
            std::set<std::uint32_t> vis{u};
            std::vector<std::uint32_t> queue{u};
            std::set<std::uint32_t> hit;
            for (std::size_t i = 0; i < queue.size(); ++i) {
                const std::uint32_t g = queue[i];
                if (ystarts.count(g)) hit.insert(g);
                if (dag_x.dist[g] + d >= L) continue;  // past the far germ window
                for (const std::uint32_t w : r_successors(g, dag_x.dist)) {
                    if (vis.insert(w).second) queue.push_back(w);
                }
            }
            reach.emplace(u, std::move(hit));
        }
        std::size_t classes = 0;
        for (const auto& gx : xgerms) {
            const auto& hit = reach.at(gx.back());
            for (const auto& gy : ygerms) classes += hit.count(gy.back());
        }
        rep.geodesic_classes = classes;

        // Hub: a layer of R holding exactly one vertex; that vertex lies on
        // every geodesic. Canonically the most balanced such layer.
        std::vector<std::uint32_t> occupancy(L + 1, 0);
        std::vector<std::uint32_t> only(L + 1, 0);
        for (std::uint32_t v = 0; v < q.vertices(); ++v) {
            if (!on_geo(v)) continue;
            const std::uint32_t layer = dag_x.dist[v];
            if (occupancy[layer] < 2) only[layer] = v;
            if (occupancy[layer] < 2) ++occupancy[layer];
        }
        std::int64_t best_badness = -1;
        for (std::uint32_t layer = 1; layer < L; ++layer) {
            if (occupancy[layer] != 1) continue;
            const std::int64_t badness =
                std::abs(2 * static_cast<std::int64_t>(layer) - static_cast<std::int64_t>(L));
            if (!rep.has_hub || badness < best_badness) {
                rep.has_hub = true;
                best_badness = badness;
                rep.hub = only[layer];
            }
        }
    }

    rep.truncated = overflow;
    rep.normal = !overflow && rep.has_hub && rep.regular_x && rep.regular_y &&
                 rep.geodesic_classes == static_cast<std::size_t>(rep.j) * rep.k && L >= 2;
    return rep;
}

inline NetworkReport classify_network(const QuadMap& q, std::uint32_t x, std::uint32_t y,
                                      double delta_beta = 0.1, std::size_t cap = 64) {
    return classify_network(q, bfs_dag(q, x), y, delta_beta, cap);
}

// ===== Cut loci =====

enum class CutLocusMode { weak, strong };

namespace detail {

// Do two geodesics from v toward the source exist that are vertex-disjoint
// (apart from v itself) over their first min(delta, dist(v)) steps? Exact
// via Menger on the ancestor cone: vertex-split unit-capacity flow, asking
// for 2 units from v to the depth-L frontier. When the cone reaches the
// source, both germs may end there (two geodesics to x share x).
inline bool has_two_disjoint_germs(const GeodesicDag& dag, std::uint32_t v,
                                   std::uint32_t delta) {
    if (v == dag.source || dag.pred_count(v) < 2) return false;
    const std::uint32_t L = std::min(delta, dag.dist[v]);
    // Ancestor cone; a node's depth is dist(v) - dist(node), unique.
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    std::vector<std::uint32_t> verts{v};
    local.emplace(v, 0);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const std::uint32_t g = verts[i];
        const std::uint32_t depth = dag.dist[v] - dag.dist[g];
        if (depth == L) continue;
        const auto [b, e] = dag.pred_range(g);
        for (std::uint32_t s = b; s < e; ++s) {
            const std::uint32_t p = dag.preds[s];
            if (local.emplace(p, static_cast<std::uint32_t>(verts.size())).second) {
                verts.push_back(p);
            }
        }
    }
    const std::uint32_t count = static_cast<std::uint32_t>(verts.size());
    const std::uint32_t sink = 2 * count;
    std::vector<std::vector<std::uint32_t>> adj(2 * count + 1);
    std::vector<std::uint32_t> to;
    std::vector<std::int8_t> cap;
    auto add_edge = [&](std::uint32_t a, std::uint32_t b, std::int8_t c) {
        adj[a].push_back(static_cast<std::uint32_t>(to.size()));
        to.push_back(b);
        cap.push_back(c);
        adj[b].push_back(static_cast<std::uint32_t>(to.size()));
        to.push_back(a);
        cap.push_back(0);
    };
    for (std::uint32_t i = 1; i < count; ++i) {
        const std::uint32_t depth = dag.dist[v] - dag.dist[verts[i]];
        if (depth == L) {
            add_edge(2 * i, 2 * i + 1, verts[i] == dag.source ? 2 : 1);
            add_edge(2 * i + 1, sink, verts[i] == dag.source ? 2 : 1);
        } else {
            add_edge(2 * i, 2 * i + 1, 1);
        }
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t g = verts[i];
        const std::uint32_t depth = dag.dist[v] - dag.dist[g];
        if (depth == L) continue;
        const auto [b, e] = dag.pred_range(g);
        for (std::uint32_t s = b; s < e; ++s) {
            add_edge(2 * i + 1, 2 * local.at(dag.preds[s]), 1);
        }
    }
    int flow = 0;
    std::vector<std::int32_t> via(2 * count + 1);
    for (int round = 0; round < 2; ++round) {
        std::fill(via.begin(), via.end(), -1);
        std::vector<std::uint32_t> queue{1};  // v's out node
        via[1] = -2;
        bool reached = false;
        for (std::size_t qi = 0; qi < queue.size() && !reached; ++qi) {
            const std::uint32_t a = queue[qi];
            for (const std::uint32_t eid : adj[a]) {
                if (cap[eid] <= 0) continue;
                const std::uint32_t b = to[eid];
                if (via[b] != -1) continue;
                via[b] = static_cast<std::int32_t>(eid);
                if (b == sink) {
                    reached = true;
                    break;
                }
                queue.push_back(b);
            }
        }
        if (!reached) break;
        std::uint32_t b = sink;
        while (via[b] != -2) {
            const std::uint32_t eid = static_cast<std::uint32_t>(via[b]);
            cap[eid] -= 1;
            cap[eid ^ 1] += 1;
            b = to[eid ^ 1];
        }
        ++flow;
    }
    return flow >= 2;
}

// Number of distinct initial geodesic segments of length min(delta, dist(v))
// from v toward the source, saturated at `sat`.
inline std::vector<std::uint32_t> delta_class_counts(const GeodesicDag& dag, std::uint32_t delta,
                                                     std::uint32_t sat = 1u << 20) {
    const std::uint32_t vcount = dag.vertices();
    std::vector<std::uint32_t> cur(vcount, 1);
    std::vector<std::uint32_t> nxt(vcount, 1);
    for (std::uint32_t step = 0; step < delta; ++step) {
        for (std::uint32_t v = 0; v < vcount; ++v) {
            if (v == dag.source) {
                nxt[v] = 1;
                continue;
            }
            std::uint64_t total = 0;
            const auto [b, e] = dag.pred_range(v);
            for (std::uint32_t s = b; s < e; ++s) {
                total += cur[dag.preds[s]];
                if (total >= sat) {
                    total = sat;
                    break;
                }
            }
            nxt[v] = static_cast<std::uint32_t>(total);
        }
        cur.swap(nxt);
    }
    return cur;
}

}  // namespace detail

// Vertices with multiple geodesics back to x. Weak membership asks for two
// or more geodesics anywhere along the bundle (exact path counts); strong
// membership asks for two geodesics vertex-disjoint over their first
// delta = round(beta n^(1/4)) steps from the vertex — the scale-aware notion
// whose ball counts grow like an area rather than a volume.
inline std::vector<std::uint32_t> cut_locus(const QuadMap& q, std::uint32_t x, CutLocusMode mode,
                                            double delta_beta = 0.1) {
    const GeodesicDag dag = bfs_dag(q, x);
    std::vector<std::uint32_t> out;
    if (mode == CutLocusMode::weak) {
        const BigUint two(2);
        for (std::uint32_t v = 0; v < q.vertices(); ++v) {
            if (v != x && dag.path_counts[v] >= two) out.push_back(v);
        }
    } else {
        const std::uint32_t delta = delta_steps(q.n, delta_beta);
        for (std::uint32_t v = 0; v < q.vertices(); ++v) {
            if (v != x && detail::has_two_disjoint_germs(dag, v, delta)) out.push_back(v);
        }
    }
    return out;
}

// ===== Epsilon-stars =====

// A vertex is an eps-star centre when two geodesics of length
// ceil(eps * diam) leave it and share no vertex besides the centre. The test
// is exact (Menger on the truncated breadth-first DAG): two vertex-disjoint
// layered paths from the centre to the depth-L frontier exist iff a
// 2-unit flow does.
struct StarParams {
    std::size_t candidates = 256;      // uniformly sampled vertices tested
    std::size_t balls = 48;            // balls probed for emptiness
    std::size_t probes_per_ball = 16;  // tested vertices per ball
    std::uint64_t seed = 0;
};

struct StarCensus {
    std::vector<std::uint32_t> centers;  // confirmed centres among tested candidates
    std::size_t candidates_tested = 0;
    double center_fraction = 0.0;
    double empty_ball_fraction = 0.0;
    std::uint32_t ray_length = 0;
    std::uint32_t ball_radius = 0;
    std::uint32_t diameter = 0;
};

namespace detail {

// Two vertex-disjoint (except v) layered paths from v to depth L?
inline bool two_disjoint_rays(const QuadMap& q, std::uint32_t v, std::uint32_t L) {
    if (L < 1) throw ConfigError("star ray length must be >= 1");
    // Truncated BFS; local ids in discovery order.
    std::unordered_map<std::uint32_t, std::uint32_t> local;  // global -> local
    std::vector<std::uint32_t> verts{v};
    std::vector<std::uint32_t> depth{0};
    local.emplace(v, 0);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        if (depth[i] == L) continue;
        const std::uint32_t g = verts[i];
        for (std::uint32_t s = q.out_start[g]; s < q.out_start[g + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            if (local.emplace(w, static_cast<std::uint32_t>(verts.size())).second) {
                verts.push_back(w);
                depth.push_back(depth[i] + 1);
            }
        }
    }
    const std::uint32_t count = static_cast<std::uint32_t>(verts.size());
    bool any_frontier = false;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (depth[i] == L) {
            any_frontier = true;
            break;
        }
    }
    if (!any_frontier) return false;

    // Vertex-split flow network: node 2i = in, 2i+1 = out; centre has
    // effective capacity 2, internal vertices 1; virtual sink collects the
    // depth-L frontier. Edges alternate with their reverses in `to`.
    const std::uint32_t sink = 2 * count;
    std::vector<std::vector<std::uint32_t>> adj(2 * count + 1);
    std::vector<std::uint32_t> to;
    std::vector<std::int8_t> cap;
    auto add_edge = [&](std::uint32_t a, std::uint32_t b, std::int8_t c) {
        adj[a].push_back(static_cast<std::uint32_t>(to.size()));
        to.push_back(b);
        cap.push_back(c);
        adj[b].push_back(static_cast<std::uint32_t>(to.size()));
        to.push_back(a);
        cap.push_back(0);
    };
    for (std::uint32_t i = 1; i < count; ++i) add_edge(2 * i, 2 * i + 1, 1);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (depth[i] == L) {
            add_edge(2 * i + 1, sink, 1);
            continue;  // frontier nodes need no outgoing layer edges
        }
        const std::uint32_t g = verts[i];
        for (std::uint32_t s = q.out_start[g]; s < q.out_start[g + 1]; ++s) {
            const std::uint32_t w = q.head(q.out_edges[s]);
            const auto it = local.find(w);
            if (it == local.end()) continue;
            const std::uint32_t jj = it->second;
            if (depth[jj] == depth[i] + 1) add_edge(2 * i + 1, 2 * jj, 1);
        }
    }

    // Two rounds of BFS augmentation on the unit-capacity network.
    int flow = 0;
    std::vector<std::int32_t> via(2 * count + 1);
    for (int round = 0; round < 2; ++round) {
        std::fill(via.begin(), via.end(), -1);
        std::vector<std::uint32_t> queue{1};  // centre's out node
        via[1] = -2;
        bool reached = false;
        for (std::size_t qi = 0; qi < queue.size() && !reached; ++qi) {
            const std::uint32_t a = queue[qi];
            for (const std::uint32_t eid : adj[a]) {
                if (cap[eid] <= 0) continue;
                const std::uint32_t b = to[eid];
                if (via[b] != -1) continue;
                via[b] = static_cast<std::int32_t>(eid);
                if (b == sink) {
                    reached = true;
                    break;
                }
                queue.push_back(b);
            }
        }
        if (!reached) break;
        std::uint32_t b = sink;
        while (via[b] != -2) {
            const std::uint32_t eid = static_cast<std::uint32_t>(via[b]);
            cap[eid] -= 1;
            cap[eid ^ 1] += 1;
            b = to[eid ^ 1];
        }
        ++flow;
    }
    return flow >= 2;
}

}  // namespace detail

inline StarCensus star_census(const QuadMap& q, double eps, const StarParams& sp = {}) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("star eps must lie in (0,1)");
    const std::uint32_t diam = empirical_diameter(q);
    const std::uint32_t L =
        std::max<std::uint32_t>(2, static_cast<std::uint32_t>(std::llround(eps * diam)));
    const std::uint32_t rball = std::max<std::uint32_t>(1, L / 2);
    if (diam < 4) throw DataError("star census: map diameter too small");

    Rng rng = Rng::substream(sp.seed, 0x53544152ull);  // star stream
    StarCensus out;
    out.ray_length = L;
    out.ball_radius = rball;
    out.diameter = diam;

    std::unordered_map<std::uint32_t, bool> verdict;
    auto is_center = [&](std::uint32_t v) {
        auto it = verdict.find(v);
        if (it != verdict.end()) return it->second;
        const bool r = detail::two_disjoint_rays(q, v, L);
        verdict.emplace(v, r);
        return r;
    };

    for (std::size_t i = 0; i < sp.candidates; ++i) {
        const std::uint32_t v = static_cast<std::uint32_t>(rng.below(q.vertices()));
        ++out.candidates_tested;
        if (is_center(v)) out.centers.push_back(v);
    }
    out.center_fraction =
        static_cast<double>(out.centers.size()) / static_cast<double>(out.candidates_tested);
    std::sort(out.centers.begin(), out.centers.end());
    out.centers.erase(std::unique(out.centers.begin(), out.centers.end()), out.centers.end());

    std::size_t empty = 0;
    for (std::size_t b = 0; b < sp.balls; ++b) {
        const std::uint32_t c = static_cast<std::uint32_t>(rng.below(q.vertices()));
        // Ball membership via truncated BFS.
        std::unordered_map<std::uint32_t, std::uint32_t> dist;
        std::vector<std::uint32_t> members{c};
        dist.emplace(c, 0);
        for (std::size_t i = 0; i < members.size(); ++i) {
            const std::uint32_t g = members[i];
            const std::uint32_t dg = dist[g];
            if (dg == rball) continue;
            for (std::uint32_t s = q.out_start[g]; s < q.out_start[g + 1]; ++s) {
                const std::uint32_t w = q.head(q.out_edges[s]);
                if (dist.emplace(w, dg + 1).second) members.push_back(w);
            }
        }
        bool found = false;
        for (std::size_t p = 0; p < sp.probes_per_ball && !found; ++p) {
            const std::uint32_t v = members[rng.below(members.size())];
            if (is_center(v)) found = true;
        }
        if (!found) ++empty;
    }
    out.empty_ball_fraction = static_cast<double>(empty) / static_cast<double>(sp.balls);
    return out;
}

// ===== Network search and pair scaling =====

struct NetworkSearchParams {
    std::uint32_t anchors = 8;
    std::uint32_t max_sources = 24;      // classified x candidates per anchor
    std::uint32_t max_targets = 64;     // y candidates per source
    std::size_t classify_budget = 4000;  // classification calls overall
    std::size_t want = 1;                // stop after this many instances
    double delta_beta = 0.1;
    std::size_t cap = 64;
    std::uint32_t min_anchor_distance = 3;
    std::uint32_t max_anchor_distance = 0;  // 0: auto, about n^(1/4)
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint32_t anchor_window_max(const NetworkSearchParams& p, std::size_t n) {
    if (p.max_anchor_distance > 0) return p.max_anchor_distance;
    const auto scale = static_cast<std::uint32_t>(std::lround(std::pow(static_cast<double>(n), 0.25)));
    return std::max<std::uint32_t>(p.min_anchor_distance + 3, scale);
}

// True when the delta-step germs of geodesics from v toward the DAG source
// are pairwise vertex-disjoint apart from v itself. Used to prescreen
// branching candidates: class counts alone admit germs sharing early steps.
inline bool disjoint_delta_germs(const QuadMap& q, const GeodesicDag& dag, std::uint32_t v,
                                 std::uint32_t delta, std::size_t cap = 64) {
    if (dag.dist[v] == kUnreached || dag.dist[v] == 0) return false;
    const std::uint32_t d = std::min<std::uint32_t>(delta, dag.dist[v]);
    std::vector<std::uint32_t> seq;
    std::unordered_map<std::uint32_t, std::uint32_t> uses;
    std::size_t germs = 0;
    bool ok = true;
    auto go = [&](auto&& self, std::uint32_t u) -> void {
        if (!ok) return;
        if (seq.size() == d) {
            if (++germs > cap) {
                ok = false;
                return;
            }
            for (const std::uint32_t w : seq) {
                if (++uses[w] > 1) {
                    ok = false;
                    return;
                }
            }
            return;
        }
        std::vector<std::uint32_t> s;
        for (std::uint32_t e = q.out_start[u]; e < q.out_start[u + 1]; ++e) {
            const std::uint32_t w = q.head(q.out_edges[e]);
            if (dag.dist[w] + 1 == dag.dist[u]) s.push_back(w);
        }
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        for (const std::uint32_t w : s) {
            seq.push_back(w);
            self(self, w);
            seq.pop_back();
        }
    };
    go(go, v);
    return ok;
}

}  // namespace detail

struct NetworkInstance {
    std::uint32_t anchor = 0;
    NetworkReport report;
};

// Searches for normal (j,k)-networks. Anchors are uniform vertices; around
// each anchor z the candidates are vertices with exactly j (resp. k) distinct
// near-germs of geodesics to z, paired across z via exact distance
// additivity, which makes the concatenations through z geodesics.
inline std::vector<NetworkInstance> find_networks(const QuadMap& q, std::uint32_t j,
                                                  std::uint32_t k,
                                                  const NetworkSearchParams& p = {}) {
    if (j < 1 || k < 1) throw ConfigError("network multiplicities must be >= 1");
    Rng rng = Rng::substream(p.seed, 0x4e455453ull);  // network-search stream
    const std::uint32_t delta = delta_steps(q.n, p.delta_beta);
    const std::uint32_t max_dist = detail::anchor_window_max(p, q.n);

    std::vector<NetworkInstance> found;
    std::size_t budget = p.classify_budget;
    for (std::uint32_t a = 0; a < p.anchors && found.size() < p.want && budget > 0; ++a) {
        const std::uint32_t z = static_cast<std::uint32_t>(rng.below(q.vertices()));
        const GeodesicDag dag_z = bfs_dag(q, z);
        const std::vector<std::uint32_t> classes = detail::delta_class_counts(dag_z, delta, 16);

        std::vector<std::uint32_t> xs, ys;
        for (std::uint32_t v = 0; v < q.vertices(); ++v) {
            if (dag_z.dist[v] < p.min_anchor_distance || dag_z.dist[v] > max_dist || v == z) continue;
            const bool want_x = classes[v] == j;
            const bool want_y = classes[v] == k;
            if (!want_x && !want_y) continue;
            if (classes[v] >= 2 && !detail::disjoint_delta_germs(q, dag_z, v, delta)) continue;
            if (want_x) xs.push_back(v);
            if (want_y) ys.push_back(v);
        }
        if (xs.empty() || ys.empty()) continue;
        rng.shuffle(xs);
        rng.shuffle(ys);

        const std::size_t nx = std::min<std::size_t>(xs.size(), p.max_sources);
        for (std::size_t xi = 0; xi < nx && found.size() < p.want && budget > 0; ++xi) {
            const std::uint32_t x = xs[xi];
            const GeodesicDag dag_x = bfs_dag(q, x);
            std::size_t tried = 0;
            for (const std::uint32_t y : ys) {
                if (found.size() >= p.want || budget == 0 || tried >= p.max_targets) break;
                if (y == x || y == z) continue;
                // Opposite sides of z: concatenation through z is geodesic.
                if (dag_x.dist[y] != dag_x.dist[z] + dag_z.dist[y]) continue;
                ++tried;
                --budget;
                NetworkReport rep = classify_network(q, dag_x, y, p.delta_beta, p.cap);
                if (rep.normal && rep.j == j && rep.k == k) {
                    found.push_back({z, std::move(rep)});
                }
            }
        }
    }
    return found;
}

struct PairScaling {
    std::uint32_t j = 0;
    std::uint32_t k = 0;
    std::vector<double> radii;
    std::vector<std::size_t> counts;
    double reference_exponent = 0.0;  // 2 (6 - j - k) in pair-counting units
    bool fit_valid = false;
    ScalingFit fit;
};

// Counts normal (j,k)-pairs whose endpoints fall in shrinking balls around a
// seed instance. Counts over nested windows; the fitted log-log slope is the
// empirical pair-count exponent on the graph-distance scale.
inline PairScaling network_pair_scaling(const QuadMap& q, std::uint32_t j, std::uint32_t k,
                                        const std::vector<double>& radii,
                                        const NetworkSearchParams& p = {}) {
    PairScaling out;
    out.j = j;
    out.k = k;
    out.reference_exponent = 2.0 * (6.0 - static_cast<double>(j) - static_cast<double>(k));
    out.radii = radii;
    if (radii.size() < 2) throw ConfigError("pair scaling needs >= 2 radii");

    NetworkSearchParams seed_params = p;
    seed_params.want = 1;
    const std::vector<NetworkInstance> seeds = find_networks(q, j, k, seed_params);
    if (seeds.empty()) {
        out.counts.assign(radii.size(), 0);
        return out;
    }
    const NetworkInstance& inst = seeds[0];
    const std::uint32_t x0 = inst.report.x;
    const std::uint32_t y0 = inst.report.y;
    const std::uint32_t z = inst.anchor;

    const GeodesicDag dag_x0 = bfs_dag(q, x0);
    const GeodesicDag dag_y0 = bfs_dag(q, y0);
    const GeodesicDag dag_z = bfs_dag(q, z);
    const std::uint32_t delta = delta_steps(q.n, p.delta_beta);
    const std::vector<std::uint32_t> classes = detail::delta_class_counts(dag_z, delta, 16);

    const double r_max = *std::max_element(radii.begin(), radii.end());
    const std::uint32_t max_dist = detail::anchor_window_max(p, q.n);
    std::vector<std::uint32_t> xs, ys;
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        if (v == z || dag_z.dist[v] < p.min_anchor_distance || dag_z.dist[v] > max_dist) continue;
        const bool want_x = classes[v] == j && dag_x0.dist[v] <= r_max;
        const bool want_y = classes[v] == k && dag_y0.dist[v] <= r_max;
        if (!want_x && !want_y) continue;
        if (classes[v] >= 2 && !detail::disjoint_delta_germs(q, dag_z, v, delta)) continue;
        if (want_x) xs.push_back(v);
        if (want_y) ys.push_back(v);
    }

    // Classify each candidate pair once; record the pair radius
    // max(d(x0,x), d(y0,y)) of confirmed instances, then count windows.
    // The seed instance sits at radius 0 by construction.
    std::vector<double> instance_radius{0.0};
    std::size_t budget = p.classify_budget;
    for (const std::uint32_t x : xs) {
        if (budget == 0) break;
        const GeodesicDag dag_x = bfs_dag(q, x);
        for (const std::uint32_t y : ys) {
            if (budget == 0) break;
            if (y == x) continue;
            if (x == x0 && y == y0) continue;
            if (dag_x.dist[y] != dag_x.dist[z] + dag_z.dist[y]) continue;
            --budget;
            const NetworkReport rep = classify_network(q, dag_x, y, p.delta_beta, p.cap);
            if (rep.normal && rep.j == j && rep.k == k) {
                instance_radius.push_back(std::max<double>(dag_x0.dist[x], dag_y0.dist[y]));
            }
        }
    }

    out.counts.assign(radii.size(), 0);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        for (const double r : instance_radius) {
            if (r <= radii[i]) out.counts[i]++;
        }
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        pts.emplace_back(radii[i], static_cast<double>(out.counts[i]));
    }
    try {
        out.fit = dimension_fit(pts, radii.front(), radii.back());
        out.fit_valid = true;
    } catch (const DataError&) {
        out.fit_valid = false;
    }
    return out;
}

// ===== Stability of geodesics under endpoint perturbation =====

struct ConvergenceProbe {
    std::size_t trials = 0;
    double mean_overlap = 0.0;
    double min_overlap = 1.0;
    bool truncated_any = false;
    std::vector<double> overlaps;
};

// Perturbs both endpoints of a reference geodesic within a radius and
// measures which fraction of its interior the geodesic bundle between the
// perturbed endpoints still covers.
inline ConvergenceProbe strong_convergence_probe(const QuadMap& q,
                                                 const std::vector<std::uint32_t>& geodesic,
                                                 std::uint32_t perturb_radius, std::size_t trials,
                                                 std::uint64_t seed, std::size_t cap = 64) {
    if (geodesic.size() < 9) {
        throw DataError("convergence probe needs a geodesic of length >= 8");
    }
    if (trials == 0) throw ConfigError("convergence probe needs trials >= 1");
    const std::uint32_t x = geodesic.front();
    const std::uint32_t y = geodesic.back();

    auto ball_members = [&](std::uint32_t c) {
        std::unordered_map<std::uint32_t, std::uint32_t> dist;
        std::vector<std::uint32_t> members{c};
        dist.emplace(c, 0);
        for (std::size_t i = 0; i < members.size(); ++i) {
            const std::uint32_t g = members[i];
            const std::uint32_t dg = dist[g];
            if (dg == perturb_radius) continue;
            for (std::uint32_t s = q.out_start[g]; s < q.out_start[g + 1]; ++s) {
                const std::uint32_t w = q.head(q.out_edges[s]);
                if (dist.emplace(w, dg + 1).second) members.push_back(w);
            }
        }
        std::sort(members.begin(), members.end());
        return members;
    };
    const std::vector<std::uint32_t> bx = ball_members(x);
    const std::vector<std::uint32_t> by = ball_members(y);

    const std::set<std::uint32_t> interior(geodesic.begin() + 1, geodesic.end() - 1);

    Rng rng = Rng::substream(seed, 0x50455254ull);  // perturbation stream
    ConvergenceProbe out;
    out.overlaps.reserve(trials);
    double sum = 0.0;
    for (std::size_t tr = 0; tr < trials; ++tr) {
        const std::uint32_t xp = bx[rng.below(bx.size())];
        const std::uint32_t yp = by[rng.below(by.size())];
        double overlap = 0.0;
        if (xp != yp) {
            const GeodesicDag dag = bfs_dag(q, xp);
            const GeodesicSet geos = enumerate_geodesics(q, dag, yp, cap);
            out.truncated_any = out.truncated_any || geos.truncated;
            std::set<std::uint32_t> covered;
            for (const auto& path : geos.paths) {
                for (const std::uint32_t v : path) {
                    if (interior.count(v)) covered.insert(v);
                }
            }
            overlap = static_cast<double>(covered.size()) / static_cast<double>(interior.size());
        }
        out.overlaps.push_back(overlap);
        sum += overlap;
        out.min_overlap = std::min(out.min_overlap, overlap);
        ++out.trials;
    }
    out.mean_overlap = sum / static_cast<double>(out.trials);
    return out;
}

}  // namespace bmlab
