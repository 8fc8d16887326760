#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "ktri/errors.hpp"
#include "ktri/hull_tree.hpp"
#include "ktri/motion.hpp"
#include "ktri/oracle.hpp"

using namespace ktri;

namespace {

// Hull membership by the direct definition (cubic): a point is off the upper
// hull exactly when some x-straddling pair covers it from above or through it.
std::vector<PointId> exclusion_upper(const std::vector<Point2>& pos) {
    std::vector<PointId> ids(pos.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(),
              [&](PointId a, PointId b) { return pos[a].x < pos[b].x; });
    std::vector<PointId> hull;
    for (PointId p : ids) {
        bool excluded = false;
        for (PointId a : ids) {
            for (PointId b : ids) {
                if (!(pos[a].x < pos[p].x && pos[p].x < pos[b].x)) continue;
                if (orient(pos[a], pos[b], pos[p]) != kPos) excluded = true;
            }
        }
        if (!excluded) hull.push_back(p);
    }
    return hull;
}

GeomContext random_context(unsigned seed, int n) {
    std::mt19937_64 rng(seed);
    GeomContext g;
    for (int i = 0; i < n; ++i) {
        Rat x = make_rat(static_cast<long>(i) * 8 + static_cast<long>(rng() % 7), 4);
        Rat y = make_rat(static_cast<long>(rng() % 4097) - 2048, 16);
        g.pos.push_back(Point2{x, y});
    }
    return g;
}

std::vector<PointId> ids_by_x(const GeomContext& g) {
    std::vector<PointId> xs(g.pos.size());
    std::iota(xs.begin(), xs.end(), 0);
    std::sort(xs.begin(), xs.end(),
              [&](PointId a, PointId b) { return g.at(a).x < g.at(b).x; });
    return xs;
}

// One side of the structure built from a scenario at a fixed time.
struct BuiltSide {
    GeomContext g;
    std::vector<PointId> x_order;
    HullTree tree;
};

BuiltSide build_side(const Scenario& s, const PriorityAssignment& pr, const Rat& t, bool lower) {
    BuiltSide b;
    for (const Trajectory& tr : s.points) {
        Point2 p = eval_at(tr, t);
        if (lower) p.y = -p.y;
        b.g.pos.push_back(p);
    }
    b.x_order = ids_by_x(b.g);
    b.tree = build_static(b.g, b.x_order, pr.rank_of);
    return b;
}

std::vector<std::array<PointId, 3>> canonical_triangles(const HullTree& tree) {
    std::vector<std::array<PointId, 3>> tris = all_triangles(tree);
    for (auto& t : tris) std::sort(t.begin(), t.end());
    std::sort(tris.begin(), tris.end());
    return tris;
}

bool nodes_equal(const HullTreeNode& a, const HullTreeNode& b) {
    return a.parent == b.parent && a.left == b.left && a.right == b.right &&
           a.left_ep == b.left_ep && a.right_ep == b.right_ep && a.hull == b.hull &&
           a.funnel == b.funnel;
}

bool trees_equal(const HullTree& a, const HullTree& b) {
    if (a.root != b.root || a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        if (!nodes_equal(a.nodes[i], b.nodes[i])) return false;
    }
    return a.nu == b.nu && a.funnel_owner == b.funnel_owner && a.owner_side == b.owner_side;
}

}  // namespace

TEST_CASE("upper hull scan matches the pairwise-exclusion definition") {
    for (unsigned seed = 1; seed <= 25; ++seed) {
        const int n = 3 + static_cast<int>(seed % 9);
        GeomContext g = random_context(seed * 7919, n);
        std::vector<PointId> xs = ids_by_x(g);
        CHECK(upper_hull(g, xs) == exclusion_upper(g.pos));
    }
}

TEST_CASE("upper hull drops collinear middles and keeps the ends") {
    GeomContext g;
    for (long i = 0; i < 5; ++i) g.pos.push_back(Point2{Rat(i), Rat(2)});
    std::vector<PointId> xs = {0, 1, 2, 3, 4};
    CHECK(upper_hull(g, xs) == std::vector<PointId>{0, 4});
    CHECK(exclusion_upper(g.pos) == std::vector<PointId>{0, 4});
}

TEST_CASE("bridge walk finds the unique common tangent") {
    int tested = 0;
    for (unsigned seed = 1; seed <= 40; ++seed) {
        const int n = 5 + static_cast<int>(seed % 8);
        GeomContext g = random_context(seed * 104729, n);
        std::vector<PointId> xs = ids_by_x(g);
        for (int m = 1; m + 1 < n; ++m) {
            std::vector<PointId> pre(xs.begin(), xs.begin() + m + 1);
            std::vector<PointId> suf(xs.begin() + m, xs.end());
            std::vector<PointId> left = upper_hull(g, pre);
            std::vector<PointId> right = upper_hull(g, suf);
            if (left.size() < 2 || right.size() < 2) continue;
            if (left.back() != xs[m] || right.front() != xs[m]) continue;
            if (g.orient3(left[left.size() - 2], xs[m], right[1]) != kPos) continue;

            int bi = -1, bj = -1, hits = 0;
            for (std::size_t i = 0; i < left.size(); ++i) {
                for (std::size_t j = 0; j < right.size(); ++j) {
                    bool tangent = true;
                    for (PointId w : left) {
                        if (w == left[i] || w == right[j]) continue;
                        if (g.orient3(left[i], right[j], w) != kNeg) tangent = false;
                    }
                    for (PointId w : right) {
                        if (w == left[i] || w == right[j]) continue;
                        if (g.orient3(left[i], right[j], w) != kNeg) tangent = false;
                    }
                    if (tangent) {
                        bi = static_cast<int>(i);
                        bj = static_cast<int>(j);
                        ++hits;
                    }
                }
            }
            REQUIRE(hits == 1);
            CHECK(compute_bridge(g, left, right) == std::make_pair(bi, bj));
            ++tested;
        }
    }
    CHECK(tested >= 60);
}

TEST_CASE("static build satisfies every structural invariant") {
    for (unsigned seed = 1; seed <= 8; ++seed) {
        const int n = 2 + static_cast<int>(seed * 5);
        Scenario s = gen_random_scenario(n, seed * 37 + 1, MotionModel::kLinear, 0, 1);
        PriorityAssignment pr = draw_priorities(n, seed * 13 + 3);
        const Rat t = make_rat(1, 3);
        if (!general_position_at(s, t)) continue;
        for (bool lower : {false, true}) {
            BuiltSide b = build_side(s, pr, t, lower);
            CHECK_NOTHROW(verify_structure(b.g, b.tree, b.x_order, pr.rank_of));
        }
    }
}

TEST_CASE("static build reproduces the reference snapshot") {
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const int n = 3 + static_cast<int>(seed * 3);
        Scenario s = gen_random_scenario(n, seed * 101 + 17, MotionModel::kLinear, 0, 1);
        PriorityAssignment pr = draw_priorities(n, seed * 7 + 29);
        const Rat t = make_rat(2, 7);
        if (!general_position_at(s, t)) continue;
        StaticSnapshot snap = reference_snapshot(s, pr, t);

        BuiltSide up = build_side(s, pr, t, false);
        BuiltSide lo = build_side(s, pr, t, true);
        CHECK(up.tree.at(up.tree.root).hull == snap.hull_upper);
        CHECK(lo.tree.at(lo.tree.root).hull == snap.hull_lower);

        std::vector<std::array<PointId, 3>> tris = canonical_triangles(up.tree);
        std::vector<std::array<PointId, 3>> lower_tris = canonical_triangles(lo.tree);
        tris.insert(tris.end(), lower_tris.begin(), lower_tris.end());
        std::sort(tris.begin(), tris.end());
        CHECK(tris == snap.triangles);
    }
}

TEST_CASE("tiny trees build and verify") {
    for (int n : {1, 2, 3}) {
        Scenario s = gen_random_scenario(n, 5, MotionModel::kLinear, 0, 1);
        PriorityAssignment pr = draw_priorities(n, 9);
        const Rat t = make_rat(1, 2);
        REQUIRE(general_position_at(s, t));
        BuiltSide b = build_side(s, pr, t, false);
        CHECK_NOTHROW(verify_structure(b.g, b.tree, b.x_order, pr.rank_of));
        if (n < 3) CHECK(all_triangles(b.tree).empty());
    }
}

TEST_CASE("subtree rebuild reproduces the fresh build") {
    Scenario s = gen_random_scenario(18, 271, MotionModel::kLinear, 0, 1);
    PriorityAssignment pr = draw_priorities(18, 54);
    const Rat t = make_rat(3, 5);
    REQUIRE(general_position_at(s, t));
    BuiltSide b = build_side(s, pr, t, false);

    for (PointId v = 0; v < 18; ++v) {
        HullTree scratch = b.tree;
        std::vector<PointId> members;
        collect_inorder(scratch, v, members);
        const PointId attach = scratch.at(v).parent;
        const bool attach_left = attach != kNoPoint && scratch.at(attach).left == v;
        PointId fresh_root = rebuild_subtree(b.g, scratch, pr.rank_of, members, attach,
                                             attach_left);
        CHECK(fresh_root == v);
        CHECK(trees_equal(scratch, b.tree));
        CHECK_NOTHROW(verify_structure(b.g, scratch, b.x_order, pr.rank_of));
    }
}

TEST_CASE("node recomputation is idempotent after a build") {
    Scenario s = gen_random_scenario(14, 88, MotionModel::kLinear, 0, 1);
    PriorityAssignment pr = draw_priorities(14, 21);
    const Rat t = make_rat(1, 4);
    REQUIRE(general_position_at(s, t));
    BuiltSide b = build_side(s, pr, t, false);
    HullTree scratch = b.tree;
    for (PointId v = 0; v < 14; ++v) {
        CHECK_FALSE(recompute_node(b.g, scratch, pr.rank_of, v));
    }
    CHECK(trees_equal(scratch, b.tree));
}

TEST_CASE("census sums funnel contents over the nodes") {
    Scenario s = gen_random_scenario(16, 300, MotionModel::kLinear, 0, 1);
    PriorityAssignment pr = draw_priorities(16, 71);
    const Rat t = make_rat(2, 3);
    REQUIRE(general_position_at(s, t));
    BuiltSide b = build_side(s, pr, t, false);
    TreeCensus c = census(b.tree);
    long long chain = 0, chords = 0;
    for (const HullTreeNode& node : b.tree.nodes) {
        chain += static_cast<long long>(node.funnel.left_interior.size() +
                                        node.funnel.right_interior.size());
        chords += static_cast<long long>(node.funnel.chords.size());
    }
    CHECK(c.nodes == 16);
    CHECK(c.chain_vertices == chain);
    CHECK(c.chords == chords);
}

TEST_CASE("a corrupted tree fails verification") {
    Scenario s = gen_random_scenario(20, 56, MotionModel::kLinear, 0, 1);
    PriorityAssignment pr = draw_priorities(20, 44);
    const Rat t = make_rat(1, 2);
    REQUIRE(general_position_at(s, t));
    BuiltSide b = build_side(s, pr, t, false);

    SUBCASE("mangled root hull") {
        HullTree bad = b.tree;
        std::reverse(bad.at(bad.root).hull.begin(), bad.at(bad.root).hull.end());
        CHECK_THROWS_AS(verify_structure(b.g, bad, b.x_order, pr.rank_of), InternalError);
    }
    SUBCASE("wrong x-order") {
        std::vector<PointId> wrong = b.x_order;
        std::swap(wrong[2], wrong[7]);
        CHECK_THROWS_AS(verify_structure(b.g, b.tree, wrong, pr.rank_of), InternalError);
    }
    SUBCASE("dropped chord") {
        HullTree bad = b.tree;
        bool dropped = false;
        for (HullTreeNode& node : bad.nodes) {
            if (!node.funnel.chords.empty()) {
                node.funnel.chords.pop_back();
                dropped = true;
                break;
            }
        }
        REQUIRE(dropped);
        CHECK_THROWS_AS(verify_structure(b.g, bad, b.x_order, pr.rank_of), InternalError);
    }
}

TEST_CASE("debug dump covers every node") {
    Scenario s = gen_random_scenario(6, 12, MotionModel::kLinear, 0, 1);
    PriorityAssignment pr = draw_priorities(6, 2);
    BuiltSide b = build_side(s, pr, make_rat(1, 2), false);
    std::string dump = debug_dump(b.tree);
    CHECK(dump.find("root=") != std::string::npos);
    for (PointId v = 0; v < 6; ++v) {
        CHECK(dump.find("node " + std::to_string(v) + ":") != std::string::npos);
    }
}
