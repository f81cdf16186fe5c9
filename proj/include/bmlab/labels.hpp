#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bmlab/errors.hpp"
#include "bmlab/excursion.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

// Brownian-snake head: a Gaussian label per grid point of the excursion with
// E[(Z_s - Z_t)^2] = d_e(s, t) exactly on the grid, i.e. Brownian motion
// indexed by the tree coded by the excursion. Labels are assigned to tree
// points and read back through the contour projection, so grid points at tree
// distance zero carry bitwise-equal labels.
struct LabelField {
    Excursion excursion;
    std::uint64_t label_seed = 0;
    std::vector<double> z;
    std::size_t t_star = 0;  // argmin of z, smallest index on ties
    double z_star = 0.0;

    std::size_t m() const { return excursion.m(); }
};

// Sequential construction along the contour. The stack holds (height, label)
// pins on the root path of the current point, heights strictly increasing.
// Moving up grows a fresh branch (independent Gaussian increment of variance
// equal to the height gain); moving down to height b pops finished branches
// and, when b falls strictly between two pins, fills the label there by a
// Brownian bridge between the pins. Revisiting an exact pin height reuses the
// stored label, which is what makes tree-equal points label-equal exactly.
inline LabelField sample_labels(const Excursion& e, std::uint64_t seed) {
    const std::size_t m = e.m();
    if (m < 2) throw ConfigError("label field needs an excursion with m >= 2");

    LabelField lf;
    lf.excursion = e;
    lf.label_seed = seed;
    lf.z.assign(m + 1, 0.0);

    Rng rng = Rng::substream(seed, 0x4c41424cull);  // label stream

    struct Pin {
        double h;
        double z;
    };
    std::vector<Pin> path;
    path.push_back({0.0, 0.0});

    for (std::size_t j = 1; j <= m; ++j) {
        const double h_new = e.values[j];
        const double h_cur = path.back().h;
        if (h_new > h_cur) {
            const double dz = std::sqrt(h_new - h_cur) * rng.normal();
            path.push_back({h_new, path.back().z + dz});
        } else if (h_new < h_cur) {
            Pin above = path.back();
            while (path.back().h > h_new) {
                above = path.back();
                path.pop_back();
            }
            if (path.back().h < h_new) {
                const Pin below = path.back();
                const double span = above.h - below.h;
                const double frac = (h_new - below.h) / span;
                const double mean = below.z + frac * (above.z - below.z);
                const double var = (h_new - below.h) * (above.h - h_new) / span;
                path.push_back({h_new, mean + std::sqrt(var) * rng.normal()});
            }
            // else: exact revisit of a pin, label reused as-is
        }
        lf.z[j] = path.back().z;
    }

    lf.t_star = 0;
    for (std::size_t j = 1; j <= m; ++j) {
        if (lf.z[j] < lf.z[lf.t_star]) lf.t_star = j;
    }
    lf.z_star = lf.z[lf.t_star];
    return lf;
}

// Cyclic label pseudo-metric:
//   d_Z(s,t) = Z_s + Z_t - 2 max(inf_[s,t] Z, inf_[t,s] Z)
// where [s,t] for s > t wraps through the endpoints, which are identified.
// Linear-scan version; use CyclicLabelMetric for bulk queries.
inline double label_distance(const LabelField& lf, std::size_t s, std::size_t t) {
    if (s > t) std::swap(s, t);
    const std::size_t m = lf.m();
    double inf_in = lf.z[s];
    for (std::size_t u = s; u <= t; ++u) inf_in = std::min(inf_in, lf.z[u]);
    double inf_out = lf.z[t];
    for (std::size_t u = t; u <= m; ++u) inf_out = std::min(inf_out, lf.z[u]);
    for (std::size_t u = 0; u <= s; ++u) inf_out = std::min(inf_out, lf.z[u]);
    return lf.z[s] + lf.z[t] - 2.0 * std::max(inf_in, inf_out);
}

// O(1) d_Z queries backed by a sparse table over the labels.
class CyclicLabelMetric {
public:
    explicit CyclicLabelMetric(const LabelField& lf) : lf_(&lf), table_(lf.z) {}

    double distance(std::size_t s, std::size_t t) const {
        if (s > t) std::swap(s, t);
        const std::size_t m = lf_->m();
        const double inf_in = table_.min_in(s, t);
        const double inf_out = std::min(table_.min_in(t, m), table_.min_in(0, s));
        return lf_->z[s] + lf_->z[t] - 2.0 * std::max(inf_in, inf_out);
    }

private:
    const LabelField* lf_;
    MinTable table_;
};

// Parameters of the chained distance d*. Chains hop between grid points;
// consecutive hops must be bridged by tree-equivalent points (cost zero), and
// every intermediate hop must cost no more than a percentile cutoff of the
// overall d_Z pair distribution. Hops out of the query source are always
// admitted so the single-hop chain (and hence d* <= d_Z) stays available.
struct DStarParams {
    double tol = 0.0;                      // link tolerance; <=0 means dstar_link_tol(m)
    double cutoff_percentile = 5.0;        // in (0, 100]; 100 disables the cutoff
    std::size_t percentile_sample = 1 << 17;  // random pairs used to estimate the cutoff value
    std::uint64_t seed = 0;                // seed of the percentile estimate
};

// Default tolerance for the zero-cost chain links of d*. Chain links stand
// for exact tree identifications (d_e = 0), so their tolerance must sit
// below the typical one-step increment scale mesh^(1/2): anything coarser
// free-links adjacent grid points and the chained metric collapses. The
// coarser tree_equivalent default is fine for classifying points but not
// for building the quotient.
inline double dstar_link_tol(std::size_t m) {
    return 0.05 * std::sqrt(1.0 / static_cast<double>(m));
}

namespace detail {

inline double dstar_cutoff_value(const LabelField& lf, const CyclicLabelMetric& dz,
                                 const DStarParams& p) {
    if (p.cutoff_percentile >= 100.0) return std::numeric_limits<double>::infinity();
    if (!(p.cutoff_percentile > 0.0)) {
        throw ConfigError("d* cutoff percentile must lie in (0, 100]");
    }
    const std::size_t m = lf.m();
    Rng rng = Rng::substream(p.seed, 0x43555446ull);  // cutoff stream
    std::vector<double> sample;
    sample.reserve(p.percentile_sample);
    for (std::size_t i = 0; i < p.percentile_sample; ++i) {
        const std::size_t s = static_cast<std::size_t>(rng.below(m + 1));
        const std::size_t t = static_cast<std::size_t>(rng.below(m + 1));
        if (s == t) continue;
        sample.push_back(dz.distance(s, t));
    }
    if (sample.size() < 16) throw ConfigError("d* cutoff estimate needs more sampled pairs");
    std::size_t k = static_cast<std::size_t>(
        p.cutoff_percentile / 100.0 * static_cast<double>(sample.size() - 1));
    k = std::min(k, sample.size() - 1);
    std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k), sample.end());
    return sample[k];
}

}  // namespace detail

// Single-source chained distance to every grid point. The chain relaxation is
// a nonnegative-weight shortest path on the implicit complete graph whose
// edges cost zero between tree-equivalent points and d_Z otherwise; the dense
// O(m^2) selection loop avoids materialising any edges.
inline std::vector<double> d_star_from(const LabelField& lf, std::size_t source,
                                       const DStarParams& params = {}) {
    const std::size_t m = lf.m();
    if (source > m) throw ConfigError("d* source index out of range");
    const double tol = params.tol > 0.0 ? params.tol : dstar_link_tol(m);

    const TreeMetric de(lf.excursion);
    const CyclicLabelMetric dz(lf);
    const double cutoff = detail::dstar_cutoff_value(lf, dz, params);

    const std::size_t count = m + 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(count, inf);
    std::vector<char> done(count, 0);
    dist[source] = 0.0;

    for (std::size_t round = 0; round < count; ++round) {
        std::size_t u = count;
        double best = inf;
        for (std::size_t v = 0; v < count; ++v) {
            if (!done[v] && dist[v] < best) {
                best = dist[v];
                u = v;
            }
        }
        if (u == count) break;
        done[u] = 1;
        const bool unrestricted = (u == source);
        for (std::size_t v = 0; v < count; ++v) {
            if (done[v]) continue;
            double w;
            if (de.distance(u, v) <= tol) {
                w = 0.0;
            } else {
                w = dz.distance(u, v);
                if (!unrestricted && w > cutoff) continue;
            }
            if (best + w < dist[v]) dist[v] = best + w;
        }
    }
    return dist;
}

inline double d_star(const LabelField& lf, std::size_t s, std::size_t t,
                     const DStarParams& params = {}) {
    if (t > lf.m()) throw ConfigError("d* target index out of range");
    return d_star_from(lf, s, params)[t];
}

// Residual of the root-distance identity d(rho, p(t)) = Z_t - Z_*: the chained
// distance from the label minimiser to t, minus the label gap. Nonpositive up
// to the discretisation error of the chain construction.
// Exact reference for d* at small m: minimize the chain cost
//   sum_i d_Z(s_i, t_i)  over chains s = s_1, t_1, s_2, ..., t_p = t
// with tree-equivalence links d_e(t_i, s_{i+1}) <= tol, for all p <= max_links.
// Dynamic programming over segment counts; O(max_links * m^2) after O(m^2)
// tables, so only suitable for m up to a few hundred.
inline double d_star_chain_reference(const LabelField& lf, std::size_t s, std::size_t t,
                                     std::size_t max_links, double tol = 0.0) {
    const std::size_t m = lf.m();
    if (s > m || t > m) throw ConfigError("d* reference index out of range");
    if (max_links == 0) throw ConfigError("d* reference needs max_links >= 1");
    if (tol <= 0.0) tol = dstar_link_tol(m);
    const std::size_t count = m + 1;
    const CyclicLabelMetric dz(lf);
    const TreeMetric de(lf.excursion);

    // f[b] = min cost of a p-segment chain from s ending at b.
    std::vector<double> f(count);
    for (std::size_t b = 0; b < count; ++b) f[b] = dz.distance(s, b);
    double best = f[t];
    std::vector<double> g(count), nf(count);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t p = 2; p <= max_links; ++p) {
        // g[a'] = min over chain ends a linkable to a' (d_e <= tol) of f[a].
        for (std::size_t ap = 0; ap < count; ++ap) {
            double v = inf;
            for (std::size_t a = 0; a < count; ++a) {
                if (de.distance(a, ap) <= tol) v = std::min(v, f[a]);
            }
            g[ap] = v;
        }
        for (std::size_t b = 0; b < count; ++b) {
            double v = inf;
            for (std::size_t ap = 0; ap < count; ++ap) {
                if (g[ap] < inf) v = std::min(v, g[ap] + dz.distance(ap, b));
            }
            nf[b] = v;
        }
        f.swap(nf);
        best = std::min(best, f[t]);
    }
    return best;
}

inline double root_distance_check(const LabelField& lf, std::size_t t,
                                  const DStarParams& params = {}) {
    return d_star(lf, lf.t_star, t, params) - (lf.z[t] - lf.z_star);
}

// Batch version: one shortest-path sweep from the minimiser serves all t.
inline std::vector<double> root_distance_residuals(const LabelField& lf,
                                                   const std::vector<std::size_t>& ts,
                                                   const DStarParams& params = {}) {
    const std::vector<double> dist = d_star_from(lf, lf.t_star, params);
    std::vector<double> out;
    out.reserve(ts.size());
    for (std::size_t t : ts) {
        if (t > lf.m()) throw ConfigError("d* target index out of range");
        out.push_back(dist[t] - (lf.z[t] - lf.z_star));
    }
    return out;
}

// ===== Serialization =====
//
// A label field is stored alongside its excursion:
//   "lf1" magic, one version byte, u64 label_seed, excursion block, f64 z[m+1].

inline constexpr unsigned char kLabelFieldFormatVersion = 1;

inline std::string label_field_to_bytes(const LabelField& lf) {
    std::string out;
    out += "lf1";
    out.push_back(static_cast<char>(kLabelFieldFormatVersion));
    detail::put_u64(out, lf.label_seed);
    out += excursion_to_bytes(lf.excursion);
    for (double v : lf.z) detail::put_f64(out, v);
    return out;
}

inline LabelField label_field_from_bytes(const std::string& bytes) {
    detail::ByteReader r(bytes, "label field");
    r.expect_magic("lf1", 3);
    const unsigned version = r.byte();
    if (version != kLabelFieldFormatVersion) {
        throw DataError("label field: unsupported format version " + std::to_string(version));
    }
    LabelField lf;
    lf.label_seed = r.u64();

    r.expect_magic("ex1", 3);
    const unsigned ex_version = r.byte();
    if (ex_version != kExcursionFormatVersion) {
        throw DataError("label field: unsupported excursion version " + std::to_string(ex_version));
    }
    const std::uint64_t m = r.u64();
    if (m < 2) throw DataError("label field: m < 2");
    lf.excursion.seed = r.u64();
    lf.excursion.values.resize(m + 1);
    for (auto& v : lf.excursion.values) v = r.f64();

    lf.z.resize(m + 1);
    for (auto& v : lf.z) v = r.f64();
    r.require_exhausted();

    if (lf.excursion.values.front() != 0.0 || lf.excursion.values.back() != 0.0) {
        throw DataError("label field: excursion endpoints must be zero");
    }
    lf.t_star = 0;
    for (std::size_t j = 1; j <= m; ++j) {
        if (lf.z[j] < lf.z[lf.t_star]) lf.t_star = j;
    }
    lf.z_star = lf.z[lf.t_star];
    return lf;
}

inline void save_label_field(const LabelField& lf, const std::string& path) {
    detail::write_file(path, label_field_to_bytes(lf));
}

inline LabelField load_label_field(const std::string& path) {
    return label_field_from_bytes(detail::read_file(path));
}

}  // namespace bmlab
