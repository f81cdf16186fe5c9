#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmlab/errors.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

// Rooted plane tree with n edges and an integer label per vertex: root label
// zero, labels across each tree edge differing by -1, 0 or +1. Vertices are
// numbered in order of first contour visit (root = 0). contour[i] is the
// vertex seen at the i-th contour corner, i = 0..2n-1; corner 0 is the root
// corner preceding the first child.
struct LabeledPlaneTree {
    std::uint32_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> parent;   // size n+1; parent[0] == 0
    std::vector<std::int32_t> label;     // size n+1; label[0] == 0
    std::vector<std::uint32_t> contour;  // size 2n

    std::uint32_t vertices() const { return n + 1; }
    std::uint32_t corners() const { return 2 * n; }
};

namespace detail {

// Build parent/contour arrays from a Dyck step sequence (+1 descend to a new
// child, -1 return to the parent).
inline LabeledPlaneTree tree_from_dyck(const std::vector<std::int8_t>& steps) {
    const std::uint32_t n = static_cast<std::uint32_t>(steps.size() / 2);
    LabeledPlaneTree t;
    t.n = n;
    t.parent.assign(n + 1, 0);
    t.label.assign(n + 1, 0);
    t.contour.reserve(2 * n);
    std::uint32_t next_vertex = 1;
    std::uint32_t cur = 0;
    for (std::int8_t s : steps) {
        t.contour.push_back(cur);
        if (s > 0) {
            t.parent[next_vertex] = cur;
            cur = next_vertex++;
        } else {
            cur = t.parent[cur];
        }
    }
    if (next_vertex != n + 1 || cur != 0) throw DataError("malformed Dyck step sequence");
    return t;
}

}  // namespace detail

// Uniform rooted plane tree with n edges, labels independent uniform on
// {-1, 0, +1} per edge. The shape comes from a uniform Dyck path: shuffle
// n+1 up-steps and n down-steps and apply the cycle lemma (rotate to just
// after the last minimum of the prefix sums; exactly one rotation stays
// positive), then drop the leading up-step.
inline LabeledPlaneTree sample_labeled_tree(std::uint32_t n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("plane tree needs n >= 1 edges");
    Rng shape_rng = Rng::substream(seed, 0x54524545ull);   // tree-shape stream
    Rng label_rng = Rng::substream(seed, 0x4c424c53ull);   // tree-label stream

    std::vector<std::int8_t> word(2 * n + 1, -1);
    for (std::uint32_t i = 0; i < n + 1; ++i) word[i] = 1;
    shape_rng.shuffle(word);

    std::int64_t sum = 0;
    std::int64_t min_sum = 0;
    std::size_t last_min = 0;  // rotation point: position after the last minimum
    for (std::size_t i = 0; i < word.size(); ++i) {
        sum += word[i];
        if (sum <= min_sum) {
            min_sum = sum;
            last_min = i + 1;
        }
    }

    std::vector<std::int8_t> steps;
    steps.reserve(2 * n);
    for (std::size_t i = 1; i < word.size(); ++i) {  // skip the leading up-step
        steps.push_back(word[(last_min + i) % word.size()]);
    }

    LabeledPlaneTree t = detail::tree_from_dyck(steps);
    t.seed = seed;
    for (std::uint32_t v = 1; v <= n; ++v) {
        t.label[v] = t.label[t.parent[v]] + static_cast<std::int32_t>(label_rng.below(3)) - 1;
    }
    // Vertices are numbered in contour-first-visit order, which is exactly
    // creation order above, so labels are already consistent parent-first.
    return t;
}

// Exhaustive enumeration of every labeled plane tree with n edges, for the
// small-n oracle suites: Catalan(n) shapes times 3^n labelings, in a fixed
// deterministic order.
inline std::vector<LabeledPlaneTree> enumerate_labeled_trees(std::uint32_t n) {
    if (n < 1 || n > 8) throw ConfigError("exhaustive tree enumeration supports 1 <= n <= 8");

    std::vector<std::vector<std::int8_t>> shapes;
    std::vector<std::int8_t> cur;
    // Depth-first generation of Dyck step sequences, +1 branch first.
    auto rec = [&](auto&& self, std::uint32_t ups, std::uint32_t downs) -> void {
        if (cur.size() == 2 * n) {
            shapes.push_back(cur);
            return;
        }
        if (ups < n) {
            cur.push_back(1);
            self(self, ups + 1, downs);
            cur.pop_back();
        }
        if (downs < ups) {
            cur.push_back(-1);
            self(self, ups, downs + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0, 0);

    std::vector<LabeledPlaneTree> out;
    std::uint64_t labelings = 1;
    for (std::uint32_t i = 0; i < n; ++i) labelings *= 3;
    out.reserve(shapes.size() * labelings);
    for (const auto& shape : shapes) {
        const LabeledPlaneTree base = detail::tree_from_dyck(shape);
        for (std::uint64_t code = 0; code < labelings; ++code) {
            LabeledPlaneTree t = base;
            std::uint64_t c = code;
            for (std::uint32_t v = 1; v <= n; ++v) {
                t.label[v] = t.label[t.parent[v]] + static_cast<std::int32_t>(c % 3) - 1;
                c /= 3;
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

// Structural validation; throws DataError with a reason on the first failure.
inline void check_labeled_tree(const LabeledPlaneTree& t) {
    if (t.n < 1) throw DataError("tree: n < 1");
    if (t.parent.size() != t.vertices() || t.label.size() != t.vertices() ||
        t.contour.size() != t.corners()) {
        throw DataError("tree: array sizes inconsistent with n");
    }
    if (t.parent[0] != 0) throw DataError("tree: root parent sentinel broken");
    if (t.label[0] != 0) throw DataError("tree: root label must be 0");
    for (std::uint32_t v = 1; v <= t.n; ++v) {
        if (t.parent[v] >= v) throw DataError("tree: vertices must be numbered parent-first");
        const std::int32_t d = t.label[v] - t.label[t.parent[v]];
        if (d < -1 || d > 1) throw DataError("tree: label increment outside {-1,0,+1}");
    }
    // The contour must be the canonical first-visit walk of the stored tree.
    std::uint32_t cur = 0;
    std::uint32_t next_vertex = 1;
    for (std::size_t i = 0; i < t.contour.size(); ++i) {
        if (t.contour[i] != cur) throw DataError("tree: contour does not match structure");
        if (next_vertex <= t.n && t.parent[next_vertex] == cur) {
            cur = next_vertex++;
        } else {
            cur = t.parent[cur];
        }
    }
    if (next_vertex != t.n + 1 || cur != 0) throw DataError("tree: contour walk incomplete");
}

}  // namespace bmlab
