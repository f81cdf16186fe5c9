#include <bmlab/labels.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "oracles.hpp"

using bmlab::CyclicLabelMetric;
using bmlab::DStarParams;
using bmlab::Excursion;
using bmlab::LabelField;

namespace {

Excursion make_excursion(std::vector<double> values) {
    Excursion e;
    e.values = std::move(values);
    return e;
}

}  // namespace

TEST_CASE("zero excursion induces identically zero labels") {
    const Excursion e = make_excursion({0.0, 0.0, 0.0, 0.0, 0.0});
    const LabelField lf = bmlab::sample_labels(e, 3);
    for (const double z : lf.z) REQUIRE(z == 0.0);
    CHECK(lf.t_star == 0);
    CHECK(lf.z_star == 0.0);
}

TEST_CASE("tree-equal contour points carry bitwise-equal labels") {
    // Heights 1 and 3 meet at tree distance zero (their arc minimum equals
    // both heights), so the snake must hand back the stored pin label.
    const Excursion tent = make_excursion({0.0, 0.5, 1.0, 0.5, 0.0});
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const LabelField lf = bmlab::sample_labels(tent, seed);
        REQUIRE(lf.z[1] == lf.z[3]);
        REQUIRE(lf.z[0] == 0.0);
        REQUIRE(lf.z[4] == 0.0);
    }

    const Excursion e = bmlab::sample_excursion(512, 4);
    const LabelField lf = bmlab::sample_labels(e, 4);
    const bmlab::TreeMetric metric(e);
    std::size_t checked = 0;
    for (std::size_t s = 0; s < e.m(); s += 7) {
        for (std::size_t t = s + 1; t <= e.m(); t += 11) {
            if (metric.distance(s, t) == 0.0) {
                REQUIRE(lf.z[s] == lf.z[t]);
                ++checked;
            }
        }
    }
    INFO("tree-equal pairs checked: " << checked);
}

TEST_CASE("label moments match the tree covariance") {
    // For the branching construction, Var Z_t = e_t and Cov(Z_s, Z_t) is the
    // height of the common ancestor, the arc minimum of e.
    const Excursion tent = make_excursion({0.0, 0.5, 1.0, 0.5, 0.0});
    const std::size_t samples = 30000;
    std::vector<double> z1s, z2s, prods;
    z1s.reserve(samples);
    z2s.reserve(samples);
    prods.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const LabelField lf = bmlab::sample_labels(tent, 10000 + i);
        z1s.push_back(lf.z[1]);
        z2s.push_back(lf.z[2]);
        prods.push_back(lf.z[1] * lf.z[2]);
    }
    const auto m1 = oracles::mean_with_error(z1s);
    const auto m2 = oracles::mean_with_error(z2s);
    const auto mp = oracles::mean_with_error(prods);
    CHECK(std::abs(m1.mean) <= 3.0 * m1.stderr_mean);
    CHECK(std::abs(m2.mean) <= 3.0 * m2.stderr_mean);
    // Cov(Z_1, Z_2) = min(e_1, e_2) = 0.5; the means are zero so the product
    // mean estimates the covariance directly.
    CHECK(std::abs(mp.mean - 0.5) <= 3.0 * mp.stderr_mean + 3.0e-3);

    std::vector<double> sq1, sq2;
    for (std::size_t i = 0; i < samples; ++i) {
        sq1.push_back(z1s[i] * z1s[i]);
        sq2.push_back(z2s[i] * z2s[i]);
    }
    const auto v1 = oracles::mean_with_error(sq1);
    const auto v2 = oracles::mean_with_error(sq2);
    CHECK(std::abs(v1.mean - 0.5) <= 3.0 * v1.stderr_mean + 3.0e-3);
    CHECK(std::abs(v2.mean - 1.0) <= 3.0 * v2.stderr_mean + 3.0e-3);
}

TEST_CASE("cyclic label distance agrees with the wrap-around oracle") {
    const Excursion e = bmlab::sample_excursion(128, 21);
    const LabelField lf = bmlab::sample_labels(e, 22);
    const CyclicLabelMetric metric(lf);
    bmlab::Rng rng = bmlab::Rng::substream(23, 3);
    for (int i = 0; i < 2000; ++i) {
        const auto s = static_cast<std::size_t>(rng.below(lf.m() + 1));
        const auto t = static_cast<std::size_t>(rng.below(lf.m() + 1));
        const double lib = bmlab::label_distance(lf, s, t);
        const double ora = oracles::cyclic_label_distance(lf.z, s, t);
        REQUIRE(lib == Catch::Approx(ora).margin(1e-12));
        REQUIRE(metric.distance(s, t) == Catch::Approx(ora).margin(1e-12));
    }
}

TEST_CASE("label distance fundamentals") {
    const Excursion e = bmlab::sample_excursion(256, 31);
    const LabelField lf = bmlab::sample_labels(e, 32);
    const std::size_t m = lf.m();
    bmlab::Rng rng = bmlab::Rng::substream(33, 4);
    for (int i = 0; i < 500; ++i) {
        const auto s = static_cast<std::size_t>(rng.below(m + 1));
        const auto t = static_cast<std::size_t>(rng.below(m + 1));
        const double d = bmlab::label_distance(lf, s, t);
        CHECK(d >= -1e-12);
        CHECK(bmlab::label_distance(lf, t, s) == Catch::Approx(d).margin(1e-12));
    }
    for (std::size_t t = 0; t <= m; t += 3) {
        CHECK(bmlab::label_distance(lf, t, t) == 0.0);
        // One arc from the minimizer always bottoms out at z_star.
        CHECK(bmlab::label_distance(lf, lf.t_star, t) ==
              Catch::Approx(lf.z[t] - lf.z_star).margin(1e-12));
    }
}

TEST_CASE("chained distance never exceeds the direct label distance") {
    const Excursion e = bmlab::sample_excursion(512, 41);
    const LabelField lf = bmlab::sample_labels(e, 42);
    DStarParams dp;
    dp.seed = 43;
    const std::vector<double> from0 = bmlab::d_star_from(lf, 100, dp);
    for (std::size_t t = 0; t <= lf.m(); t += 5) {
        REQUIRE(from0[t] <= bmlab::label_distance(lf, 100, t) + 1e-12);
    }
    REQUIRE(from0[100] == 0.0);
}

TEST_CASE("chained distance matches the bounded-chain reference exactly") {
    // The dynamic-programming reference has no intermediate-hop cutoff, so
    // the comparison runs the graph search unrestricted as well.
    for (const std::size_t m : {std::size_t{16}, std::size_t{24}, std::size_t{32}}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const Excursion e = bmlab::sample_excursion(m, seed);
            const LabelField lf = bmlab::sample_labels(e, seed + 100);
            DStarParams dp;
            dp.seed = seed;
            dp.cutoff_percentile = 100.0;
            for (std::size_t s = 0; s <= m; ++s) {
                const std::vector<double> direct = bmlab::d_star_from(lf, s, dp);
                for (std::size_t t = s; t <= m; ++t) {
                    const double chain = bmlab::d_star_chain_reference(lf, s, t, 8, dp.tol);
                    REQUIRE(direct[t] == Catch::Approx(chain).margin(1e-9));
                }
            }
        }
    }
}

TEST_CASE("the percentile restriction is inert in the accepted band") {
    // At fine mesh the cutoff only removes hops that optimal chains never
    // use; the restricted and unrestricted distances coincide.
    const std::size_t m = 2048;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        const Excursion e = bmlab::sample_excursion(m, seed);
        const LabelField lf = bmlab::sample_labels(e, seed + 7);
        DStarParams restricted;
        restricted.seed = seed;
        DStarParams open = restricted;
        open.cutoff_percentile = 100.0;
        for (const std::size_t s : {std::size_t{0}, m / 3, lf.t_star}) {
            const std::vector<double> a = bmlab::d_star_from(lf, s, restricted);
            const std::vector<double> b = bmlab::d_star_from(lf, s, open);
            double worst = 0.0;
            for (std::size_t t = 0; t <= m; ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
            REQUIRE(worst <= 1e-12);
        }
    }
}

TEST_CASE("default link tolerance tracks the sub-increment scale") {
    CHECK(bmlab::dstar_link_tol(1024) == Catch::Approx(0.05 / 32.0).margin(1e-15));
    const Excursion e = bmlab::sample_excursion(256, 51);
    const LabelField lf = bmlab::sample_labels(e, 52);
    DStarParams zero;
    zero.seed = 53;
    DStarParams expl = zero;
    expl.tol = bmlab::dstar_link_tol(256);
    const std::vector<double> a = bmlab::d_star_from(lf, 10, zero);
    const std::vector<double> b = bmlab::d_star_from(lf, 10, expl);
    REQUIRE(a == b);
}

TEST_CASE("root distance residuals are nonpositive undershoots") {
    const Excursion e = bmlab::sample_excursion(1024, 61);
    const LabelField lf = bmlab::sample_labels(e, 62);
    std::vector<std::size_t> ts;
    for (std::size_t t = 0; t <= lf.m(); t += 37) ts.push_back(t);
    DStarParams dp;
    dp.seed = 63;
    const std::vector<double> res = bmlab::root_distance_residuals(lf, ts, dp);
    REQUIRE(res.size() == ts.size());
    for (const double r : res) CHECK(r <= 1e-12);
}

TEST_CASE("label field serialization round trips exactly") {
    namespace fs = std::filesystem;
    const Excursion e = bmlab::sample_excursion(128, 71);
    const LabelField lf = bmlab::sample_labels(e, 72);
    const fs::path path = fs::temp_directory_path() / "bmlab_test_labels.lf1";
    bmlab::save_label_field(lf, path.string());
    const LabelField back = bmlab::load_label_field(path.string());
    REQUIRE(back.z == lf.z);
    REQUIRE(back.excursion.values == lf.excursion.values);
    REQUIRE(back.t_star == lf.t_star);
    REQUIRE(back.z_star == lf.z_star);
    const std::string bytes = bmlab::label_field_to_bytes(lf);
    CHECK_THROWS_AS(bmlab::label_field_from_bytes(bytes.substr(0, 10)), bmlab::DataError);
    fs::remove(path);
}
