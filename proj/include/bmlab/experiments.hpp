#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmlab/analysis.hpp"
#include "bmlab/config.hpp"
#include "bmlab/errors.hpp"
#include "bmlab/geodesics.hpp"
#include "bmlab/labels.hpp"
#include "bmlab/plane_tree.hpp"
#include "bmlab/qm_io.hpp"
#include "bmlab/quadmap.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

using json = nlohmann::json;

// ===== Result emission =====
//
// Every statistic becomes one JSON-lines record carrying (experiment, n,
// seed, version, params, results), flushed immediately so long batches are
// resumable. The CSV summary is the plot-ready long-format projection:
// one row per scalar result, keyed by (experiment, n, seed, params).
class ResultWriter {
public:
    explicit ResultWriter(const std::string& dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw DataError("cannot create output directory: " + dir);
        records_path_ = dir + "/records.jsonl";
        summary_path_ = dir + "/summary.csv";
        jsonl_.open(records_path_, std::ios::binary | std::ios::trunc);
        csv_.open(summary_path_, std::ios::binary | std::ios::trunc);
        if (!jsonl_ || !csv_) throw DataError("cannot open result files in: " + dir);
        csv_ << "experiment,n,seed,params,metric,value\n";
        csv_.flush();
    }

    void record(const std::string& experiment, std::uint32_t n, std::uint64_t seed,
                const json& params, const json& results) {
        json rec;
        rec["experiment"] = experiment;
        rec["n"] = n;
        rec["seed"] = seed;
        rec["version"] = kVersion;
        rec["params"] = params;
        rec["results"] = results;
        jsonl_ << rec.dump() << "\n";
        jsonl_.flush();
        if (!jsonl_) throw DataError("write failed: " + records_path_);

        const std::string ps = params_string(params);
        for (const auto& [key, value] : results.items()) {
            if (!value.is_number() && !value.is_boolean()) continue;
            csv_ << experiment << ',' << n << ',' << seed << ',' << ps << ',' << key << ','
                 << scalar_string(value) << "\n";
        }
        csv_.flush();
        if (!csv_) throw DataError("write failed: " + summary_path_);
    }

    const std::string& records_path() const { return records_path_; }
    const std::string& summary_path() const { return summary_path_; }

private:
    static std::string scalar_string(const json& v) {
        if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
        return detail::format_double(v.get<double>());
    }

    // Deterministic single-cell rendering: alphabetical keys, ';'-joined.
    static std::string params_string(const json& params) {
        std::string out;
        for (const auto& [key, value] : params.items()) {
            if (!out.empty()) out += ';';
            out += key;
            out += '=';
            out += value.is_string() ? value.get<std::string>() : scalar_string(value);
        }
        return out;
    }

    std::string records_path_;
    std::string summary_path_;
    std::ofstream jsonl_;
    std::ofstream csv_;
};

// ===== Map persistence =====

inline std::string map_path(const ExperimentConfig& c, std::uint64_t seed) {
    return c.out_dir + "/maps/qm_n" + std::to_string(c.n) + "_s" + std::to_string(seed) + ".qm1";
}

// Load the map for (n, seed) or sample and persist it. Idempotent: an
// existing file is reused, so repeated runs are byte-identical.
inline QuadMap obtain_map(const ExperimentConfig& c, std::uint64_t seed) {
    const std::string path = map_path(c, seed);
    if (std::filesystem::exists(path)) {
        QuadMap q = load_quadmap(path);
        if (q.n != c.n || q.seed != seed) {
            throw DataError("map file does not match its name: " + path);
        }
        return q;
    }
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir + "/maps", ec);
    if (ec) throw DataError("cannot create map directory under: " + c.out_dir);
    QuadMap q = sample_quadrangulation(c.n, seed);
    save_quadmap(q, path);
    return q;
}

// ===== Experiment runners =====

namespace detail {

inline double map_scale(std::uint32_t n) { return std::pow(static_cast<double>(n), 0.25); }

// Automatic fit window: skip the lattice regime (r < 4 and r below a quarter
// of the intrinsic scale n^(1/4)) and the saturation regime (r > diam/2).
inline std::pair<double, double> auto_window(const ExperimentConfig& c, std::uint32_t n,
                                             std::uint32_t diam) {
    double lo = c.fit_lo;
    double hi = c.fit_hi;
    if (lo <= 0.0) lo = std::max(4.0, map_scale(n) / 4.0);
    if (hi <= 0.0) hi = static_cast<double>(diam) / 2.0;
    return {lo, hi};
}

inline std::vector<std::pair<double, double>> count_profile(
    const std::vector<std::uint32_t>& dist_from_x, const std::vector<std::uint32_t>& members,
    std::uint32_t r_max) {
    std::vector<std::size_t> counts(r_max + 1, 0);
    for (const std::uint32_t v : members) {
        if (dist_from_x[v] <= r_max) counts[dist_from_x[v]]++;
    }
    for (std::uint32_t r = 1; r <= r_max; ++r) counts[r] += counts[r - 1];
    std::vector<std::pair<double, double>> pts;
    for (std::uint32_t r = 1; r <= r_max; ++r) {
        pts.emplace_back(static_cast<double>(r), static_cast<double>(counts[r]));
    }
    return pts;
}

inline double median_abs(std::vector<double> v) {
    for (double& x : v) x = std::abs(x);
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    if (k == 0) throw DataError("median of empty sample");
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace detail

inline void run_confluence(const QuadMap& q, const ExperimentConfig& c, std::uint64_t seed,
                           ResultWriter& w) {
    const ConfluenceStat st = confluence_stat(q, c.eps, c.samples, seed);
    const double p = st.proportion;
    const double ci = st.samples > 1
                          ? 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(st.samples))
                          : 1.0;
    w.record("confluence", q.n, seed, json{{"eps", c.eps}, {"samples", c.samples}},
             json{{"proportion", p},
                  {"ci95_halfwidth", ci},
                  {"mean_radius", st.mean_radius},
                  {"mean_radius_fraction", st.mean_radius_fraction},
                  {"diameter", st.diameter},
                  {"triples", st.samples}});
}

inline void run_dimension(const QuadMap* q, const ExperimentConfig& c, std::uint64_t seed,
                          ResultWriter& w) {
    if (c.oracle) {
        // Synthetic exact power law: the fit must recover the exponent.
        std::vector<std::pair<double, double>> pts;
        for (const double r : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.emplace_back(r, std::pow(r, 4.0));
        const ScalingFit fit = dimension_fit(pts, 1.0, 16.0);
        w.record("dimension", c.n, seed, json{{"oracle", true}},
                 json{{"slope", fit.slope},
                      {"stderr", fit.stderr_slope},
                      {"points", fit.points}});
        return;
    }
    Rng rng = Rng::substream(seed, 0x44494d43ull);  // dimension centre stream
    const std::uint32_t center = static_cast<std::uint32_t>(rng.below(q->vertices()));
    const std::uint32_t diam = empirical_diameter(*q);
    const auto [lo, hi] = detail::auto_window(c, q->n, diam);
    const std::uint32_t r_max = static_cast<std::uint32_t>(std::ceil(hi));
    const std::vector<std::size_t> counts = ball_volume_profile(*q, center, r_max);
    std::vector<std::pair<double, double>> pts;
    json jcounts = json::array();
    for (std::uint32_t r = 1; r <= r_max; ++r) {
        pts.emplace_back(static_cast<double>(r), static_cast<double>(counts[r]));
        jcounts.push_back(counts[r]);
    }
    const ScalingFit fit = dimension_fit(pts, lo, hi);
    w.record("dimension", q->n, seed, json{{"fit_lo", lo}, {"fit_hi", hi}},
             json{{"slope", fit.slope},
                  {"stderr", fit.stderr_slope},
                  {"points", fit.points},
                  {"diameter", diam},
                  {"center", center},
                  {"ball_counts", jcounts}});
}

inline void run_cutlocus(const QuadMap& q, const ExperimentConfig& c, std::uint64_t seed,
                         ResultWriter& w) {
    Rng rng = Rng::substream(seed, 0x43544c43ull);  // cut-locus source stream
    const std::uint32_t x = static_cast<std::uint32_t>(rng.below(q.vertices()));
    const GeodesicDag dag = bfs_dag(q, x);
    const std::vector<std::uint32_t> weak = cut_locus(q, x, CutLocusMode::weak, c.beta);
    const std::vector<std::uint32_t> strong = cut_locus(q, x, CutLocusMode::strong, c.beta);
    if (!std::includes(weak.begin(), weak.end(), strong.begin(), strong.end())) {
        throw DataError("cut locus containment violated: strong not within weak");
    }
    const std::uint32_t diam = empirical_diameter(q);
    const auto [lo, hi] = detail::auto_window(c, q.n, diam);
    const std::uint32_t r_max = static_cast<std::uint32_t>(std::ceil(hi));

    json results{{"x", x},
                 {"weak_size", weak.size()},
                 {"strong_size", strong.size()},
                 {"delta", delta_steps(q.n, c.beta)},
                 {"diameter", diam}};
    const auto fit_one = [&](const std::vector<std::uint32_t>& locus, const std::string& tag) {
        const auto pts = detail::count_profile(dag.dist, locus, r_max);
        try {
            const ScalingFit fit = dimension_fit(pts, lo, hi);
            results["slope_" + tag] = fit.slope;
            results["stderr_" + tag] = fit.stderr_slope;
            results["fit_valid_" + tag] = true;
        } catch (const DataError&) {
            results["fit_valid_" + tag] = false;
        }
    };
    fit_one(strong, "strong");
    fit_one(weak, "weak");
    w.record("cutlocus", q.n, seed, json{{"beta", c.beta}, {"fit_lo", lo}, {"fit_hi", hi}},
             results);
}

inline void run_stars(const QuadMap& q, const ExperimentConfig& c, std::uint64_t seed,
                      ResultWriter& w) {
    StarParams sp;
    sp.candidates = c.samples;
    sp.balls = std::max<std::size_t>(8, c.samples / 4);
    sp.probes_per_ball = 16;
    sp.seed = seed;
    const StarCensus census = star_census(q, c.eps, sp);
    w.record("stars", q.n, seed,
             json{{"eps", c.eps}, {"candidates", sp.candidates}, {"balls", sp.balls}},
             json{{"center_fraction", census.center_fraction},
                  {"empty_ball_fraction", census.empty_ball_fraction},
                  {"centers", census.centers.size()},
                  {"ray_length", census.ray_length},
                  {"ball_radius", census.ball_radius},
                  {"diameter", census.diameter}});
}

inline void run_networks(const QuadMap& q, const ExperimentConfig& c, std::uint64_t seed,
                         ResultWriter& w) {
    // Branching candidates are sparse (a few disjoint-germ vertices per
    // anchor window), so the search favors breadth: many anchors, few
    // classifications per anchor. Easy cells stop at the first instance.
    const std::uint32_t base_anchors =
        std::max<std::uint32_t>(256, static_cast<std::uint32_t>(c.samples));
    for (std::uint32_t j = 1; j <= 3; ++j) {
        for (std::uint32_t k = 1; k <= 3; ++k) {
            NetworkSearchParams p;
            p.delta_beta = c.beta;
            p.cap = c.cap;
            p.want = 1;
            p.seed = splitmix64(seed + 0x6e6574u) + 16 * j + k;
            p.max_sources = 8;
            p.max_targets = 16;
            p.classify_budget = 6000;
            p.anchors = base_anchors;
            if (j == 3 || k == 3) p.anchors = 2 * base_anchors;
            const std::vector<NetworkInstance> found = find_networks(q, j, k, p);
            json results{{"found", found.size()}, {"anchors", p.anchors}};
            if (!found.empty()) {
                const NetworkReport& r = found.front().report;
                results["x"] = r.x;
                results["y"] = r.y;
                results["hub"] = r.hub;
                results["distance"] = r.distance;
                results["geodesics"] = r.path_count;
                results["classes"] = r.geodesic_classes;
            }
            if (j == 3 && k == 3) {
                const std::vector<double> radii{2.0, 4.0, 8.0, 16.0};
                const PairScaling ps = network_pair_scaling(q, 3, 3, radii, p);
                results["pair_counts"] = ps.counts;
                results["pair_fit_valid"] = ps.fit_valid;
                if (ps.fit_valid) results["pair_slope"] = ps.fit.slope;
            }
            w.record("networks", q.n, seed,
                     json{{"j", j}, {"k", k}, {"beta", c.beta}, {"cap", c.cap}}, results);
        }
    }
}

inline void run_probe(const QuadMap& q, const ExperimentConfig& c, std::uint64_t seed,
                      ResultWriter& w) {
    // Reference geodesic between a double-sweep far pair.
    const GeodesicDag d0 = bfs_dag(q, 0);
    std::uint32_t u = 0;
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        if (d0.dist[v] > d0.dist[u]) u = v;
    }
    const GeodesicDag du = bfs_dag(q, u);
    std::uint32_t v = 0;
    for (std::uint32_t t = 0; t < q.vertices(); ++t) {
        if (du.dist[t] > du.dist[v]) v = t;
    }
    const std::vector<std::uint32_t> geod = first_geodesic(q, du, v);
    const std::uint32_t radius = std::max<std::uint32_t>(
        1, static_cast<std::uint32_t>(std::llround(detail::map_scale(q.n) / 10.0)));
    const std::size_t trials = std::min<std::size_t>(c.samples, 50);
    const ConvergenceProbe probe =
        strong_convergence_probe(q, geod, radius, trials, seed, c.cap);
    std::vector<double> overlaps = probe.overlaps;
    std::sort(overlaps.begin(), overlaps.end());
    const double median = overlaps.size() % 2 == 1
                              ? overlaps[overlaps.size() / 2]
                              : 0.5 * (overlaps[overlaps.size() / 2 - 1] +
                                       overlaps[overlaps.size() / 2]);
    w.record("probe", q.n, seed, json{{"radius", radius}, {"trials", trials}, {"cap", c.cap}},
             json{{"mean_overlap", probe.mean_overlap},
                  {"median_overlap", median},
                  {"min_overlap", probe.min_overlap},
                  {"geodesic_length", geod.size() - 1},
                  {"truncated_any", probe.truncated_any}});
}

// ===== Subcommands =====

inline std::vector<std::string> cmd_sample(const ExperimentConfig& c) {
    c.validate();
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir + "/maps", ec);
    if (ec) throw DataError("cannot create output directory: " + c.out_dir);
    c.save(c.out_dir + "/config.txt");
    std::vector<std::string> paths;
    for (std::uint32_t i = 0; i < c.seeds; ++i) {
        const std::uint64_t seed = c.seed_base + i;
        obtain_map(c, seed);
        paths.push_back(map_path(c, seed));
    }
    return paths;
}

inline void cmd_run(const ExperimentConfig& c, ResultWriter& w) {
    c.validate();
    c.save(c.out_dir + "/config.txt");
    std::vector<std::string> experiments;
    if (c.experiment == "all") {
        experiments = {"confluence", "dimension", "cutlocus", "stars", "networks", "probe"};
    } else {
        experiments = {c.experiment};
    }
    for (std::uint32_t i = 0; i < c.seeds; ++i) {
        const std::uint64_t seed = c.seed_base + i;
        const bool fixture_only = c.experiment == "dimension" && c.oracle;
        QuadMap q;
        if (!fixture_only) q = obtain_map(c, seed);
        for (const std::string& e : experiments) {
            if (e == "confluence") {
                run_confluence(q, c, seed, w);
            } else if (e == "dimension") {
                run_dimension(fixture_only ? nullptr : &q, c, seed, w);
            } else if (e == "cutlocus") {
                run_cutlocus(q, c, seed, w);
            } else if (e == "stars") {
                run_stars(q, c, seed, w);
            } else if (e == "networks") {
                run_networks(q, c, seed, w);
            } else if (e == "probe") {
                run_probe(q, c, seed, w);
            }
        }
    }
}

inline void cmd_snake(const ExperimentConfig& c, ResultWriter& w) {
    c.validate();
    c.save(c.out_dir + "/config.txt");
    for (std::uint32_t i = 0; i < c.seeds; ++i) {
        const std::uint64_t seed = c.seed_base + i;
        const Excursion ex = sample_excursion(c.m, seed);
        const LabelField lf = sample_labels(ex, seed);

        Rng rng = Rng::substream(seed, 0x534e414bull);  // snake time stream
        std::vector<std::size_t> ts;
        const std::size_t times = std::min<std::size_t>(c.samples, c.m + 1);
        for (std::size_t t = 0; t < times; ++t) {
            ts.push_back(static_cast<std::size_t>(rng.below(c.m + 1)));
        }
        DStarParams dp;
        dp.tol = c.tol;
        dp.seed = seed;
        const std::vector<double> residuals = root_distance_residuals(lf, ts, dp);
        double max_abs = 0.0;
        for (const double r : residuals) max_abs = std::max(max_abs, std::abs(r));
        double z_max = lf.z[0];
        for (const double z : lf.z) z_max = std::max(z_max, z);
        const double diameter = z_max - lf.z_star;  // distance from the root to the far point
        const double med = detail::median_abs(residuals);

        json results{{"median_abs_residual", med},
                     {"max_abs_residual", max_abs},
                     {"diameter", diameter},
                     {"residual_over_diameter", diameter > 0.0 ? med / diameter : 0.0},
                     {"times", times},
                     {"t_star", lf.t_star}};

        if (c.oracle) {
            if (c.m > 64) {
                throw ConfigError("oracle mode is exhaustive; use m <= 64");
            }
            // The chain reference has no edge cutoff, so the comparison runs
            // on the unrestricted graph; at these sizes that is also exact.
            DStarParams up = dp;
            up.cutoff_percentile = 100.0;
            double max_diff = 0.0;
            std::size_t checked = 0;
            for (std::size_t s = 0; s <= c.m; ++s) {
                const std::vector<double> direct = d_star_from(lf, s, up);
                for (std::size_t t = s; t <= c.m; ++t) {
                    const double chain = d_star_chain_reference(lf, s, t, 8, dp.tol);
                    max_diff = std::max(max_diff, std::abs(direct[t] - chain));
                    ++checked;
                }
            }
            results["oracle_pairs"] = checked;
            results["oracle_max_diff"] = max_diff;
            if (max_diff > 1e-9) {
                throw DataError("d* disagrees with the bounded-chain reference by " +
                                std::to_string(max_diff));
            }
        }
        w.record("snake", static_cast<std::uint32_t>(c.m), seed,
                 json{{"m", c.m}, {"tol", c.tol}, {"oracle", c.oracle}}, results);
    }
}

// Exhaustive small-size ground truth: enumerate every signed labelled tree
// for n = 1..3, push each through the bijection, and check counts and
// invariants against closed forms.
inline void cmd_enumerate_small(const ExperimentConfig& c, ResultWriter& w) {
    const std::size_t expected_trees[] = {3, 18, 135};     // Catalan(n) * 3^n
    const std::size_t expected_maps[] = {6, 36, 270};      // (n + 2) * Q_n
    const std::size_t expected_rooted_quads[] = {2, 9, 54};  // Q_n
    for (std::uint32_t n = 1; n <= 3; ++n) {
        const std::vector<LabeledPlaneTree> trees = enumerate_labeled_trees(n);
        if (trees.size() != expected_trees[n - 1]) {
            throw DataError("tree enumeration count mismatch at n = " + std::to_string(n));
        }
        std::set<std::vector<std::uint32_t>> codes;
        std::size_t outputs = 0;
        for (const LabeledPlaneTree& t : trees) {
            check_labeled_tree(t);
            for (const std::int8_t sign : {std::int8_t{1}, std::int8_t{-1}}) {
                const QuadMap q = cvs_bijection(t, sign);
                check_quadmap(q);
                if (label_distance_identity(q) != 0) {
                    throw DataError("distance-label identity violated at n = " +
                                    std::to_string(n));
                }
                codes.insert(canonical_code(q));
                ++outputs;
            }
        }
        if (outputs != expected_maps[n - 1] || codes.size() != expected_maps[n - 1]) {
            throw DataError("bijection output count mismatch at n = " + std::to_string(n));
        }
        const std::size_t q_n = codes.size() / (n + 2);
        if (q_n != expected_rooted_quads[n - 1]) {
            throw DataError("rooted quadrangulation count mismatch at n = " + std::to_string(n));
        }
        w.record("enumerate-small", n, c.seed_base, json::object(),
                 json{{"trees", trees.size()},
                      {"pointed_maps", codes.size()},
                      {"rooted_quadrangulations", q_n},
                      {"injective", true}});
    }
}

}  // namespace bmlab
