#include "ktri/hull_tree.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "ktri/errors.hpp"
#include "ktri/kernel.hpp"

namespace ktri {

std::vector<PointId> upper_hull(const GeomContext& g, const std::vector<PointId>& xs) {
    std::vector<PointId> h;
    for (PointId id : xs) {
        while (h.size() >= 2 && g.orient3(h[h.size() - 2], h.back(), id) != Sign::kNeg) {
            h.pop_back();
        }
        h.push_back(id);
    }
    return h;
}

std::pair<int, int> compute_bridge(const GeomContext& g, const std::vector<PointId>& left,
                                   const std::vector<PointId>& right) {
    int i = static_cast<int>(left.size()) - 2;
    int j = 1;
    bool moved = true;
    while (moved) {
        moved = false;
        while (i > 0 && g.orient3(left[static_cast<std::size_t>(i)],
                                  right[static_cast<std::size_t>(j)],
                                  left[static_cast<std::size_t>(i - 1)]) != Sign::kNeg) {
            --i;
            moved = true;
        }
        while (j + 1 < static_cast<int>(right.size()) &&
               g.orient3(left[static_cast<std::size_t>(i)], right[static_cast<std::size_t>(j)],
                         right[static_cast<std::size_t>(j + 1)]) != Sign::kNeg) {
            ++j;
            moved = true;
        }
    }
    return {i, j};
}

std::vector<PointId> child_hull(const HullTree& tree, PointId v, bool left_side) {
    const HullTreeNode& node = tree.at(v);
    PointId c = left_side ? node.left : node.right;
    if (c != kNoPoint) return tree.at(c).hull;
    std::vector<PointId> h;
    if (left_side) {
        if (node.left_ep >= 0) h.push_back(node.left_ep);
        h.push_back(v);
    } else {
        h.push_back(v);
        if (node.right_ep >= 0) h.push_back(node.right_ep);
    }
    return h;
}

bool recompute_node(const GeomContext& g, HullTree& tree,
                    const std::vector<std::int32_t>& rank_of, PointId v) {
    HullTreeNode& node = tree.at(v);
    const std::vector<PointId> hl = child_hull(tree, v, true);
    const std::vector<PointId> hr = child_hull(tree, v, false);

    for (PointId p : node.funnel.left_interior) {
        if (tree.funnel_owner[static_cast<std::size_t>(p)] == v) {
            tree.funnel_owner[static_cast<std::size_t>(p)] = kNoPoint;
            tree.nu[static_cast<std::size_t>(p)] = kNoPoint;
        }
    }
    for (PointId p : node.funnel.right_interior) {
        if (tree.funnel_owner[static_cast<std::size_t>(p)] == v) {
            tree.funnel_owner[static_cast<std::size_t>(p)] = kNoPoint;
            tree.nu[static_cast<std::size_t>(p)] = kNoPoint;
        }
    }

    Funnel nf;
    std::vector<PointId> new_hull;
    const bool open = hl.size() >= 2 && hr.size() >= 2 &&
                      g.orient3(hl[hl.size() - 2], v, hr[1]) == Sign::kPos;
    if (open) {
        auto [i, j] = compute_bridge(g, hl, hr);
        nf.has_bridge = true;
        nf.corner_left = hl[static_cast<std::size_t>(i)];
        nf.corner_right = hr[static_cast<std::size_t>(j)];
        nf.left_interior.assign(hl.begin() + i + 1, hl.end() - 1);
        nf.right_interior.assign(hr.begin() + 1, hr.begin() + j);
        triangulate_funnel(g, rank_of, v, nf, tree.nu);
        for (PointId p : nf.left_interior) {
            tree.funnel_owner[static_cast<std::size_t>(p)] = v;
            tree.owner_side[static_cast<std::size_t>(p)] = 0;
        }
        for (PointId p : nf.right_interior) {
            tree.funnel_owner[static_cast<std::size_t>(p)] = v;
            tree.owner_side[static_cast<std::size_t>(p)] = 1;
        }
        new_hull.assign(hl.begin(), hl.begin() + i + 1);
        new_hull.insert(new_hull.end(), hr.begin() + j, hr.end());
    } else {
        new_hull = hl;
        new_hull.insert(new_hull.end(), hr.begin() + 1, hr.end());
    }

    bool hull_changed = new_hull != node.hull;
    node.funnel = std::move(nf);
    node.hull = std::move(new_hull);
    return hull_changed;
}

namespace {

// Min-rank-at-top treap shape over ids listed in x-order; returns the root.
PointId link_shape(HullTree& tree, const std::vector<std::int32_t>& rank_of,
                   const std::vector<PointId>& xs) {
    for (PointId id : xs) {
        HullTreeNode& node = tree.at(id);
        node.parent = node.left = node.right = kNoPoint;
    }
    std::vector<PointId> spine;
    for (PointId id : xs) {
        PointId last = kNoPoint;
        while (!spine.empty() &&
               rank_of[static_cast<std::size_t>(spine.back())] > rank_of[static_cast<std::size_t>(id)]) {
            last = spine.back();
            spine.pop_back();
        }
        tree.at(id).left = last;
        if (last != kNoPoint) tree.at(last).parent = id;
        if (!spine.empty()) {
            tree.at(spine.back()).right = id;
            tree.at(id).parent = spine.back();
        }
        spine.push_back(id);
    }
    return spine.front();
}

void assign_and_recompute(const GeomContext& g, HullTree& tree,
                          const std::vector<std::int32_t>& rank_of, PointId v, PointId lep,
                          PointId rep) {
    HullTreeNode& node = tree.at(v);
    node.left_ep = lep;
    node.right_ep = rep;
    if (node.left != kNoPoint) assign_and_recompute(g, tree, rank_of, node.left, lep, v);
    if (node.right != kNoPoint) assign_and_recompute(g, tree, rank_of, node.right, v, rep);
    recompute_node(g, tree, rank_of, v);
}

}  // namespace

HullTree build_static(const GeomContext& g, const std::vector<PointId>& x_order,
                      const std::vector<std::int32_t>& rank_of) {
    HullTree tree;
    const std::size_t n = x_order.size();
    tree.nodes.assign(n, HullTreeNode{});
    tree.nu.assign(n, kNoPoint);
    tree.funnel_owner.assign(n, kNoPoint);
    tree.owner_side.assign(n, 0);
    if (n == 0) return tree;
    tree.root = link_shape(tree, rank_of, x_order);
    assign_and_recompute(g, tree, rank_of, tree.root, kSentinelLeft, kSentinelRight);
    return tree;
}

PointId rebuild_subtree(const GeomContext& g, HullTree& tree,
                        const std::vector<std::int32_t>& rank_of,
                        const std::vector<PointId>& members, PointId attach, bool attach_left) {
    PointId r = link_shape(tree, rank_of, members);
    PointId lep, rep;
    if (attach == kNoPoint) {
        tree.root = r;
        lep = kSentinelLeft;
        rep = kSentinelRight;
    } else if (attach_left) {
        tree.at(attach).left = r;
        lep = tree.at(attach).left_ep;
        rep = attach;
    } else {
        tree.at(attach).right = r;
        lep = attach;
        rep = tree.at(attach).right_ep;
    }
    tree.at(r).parent = attach;
    assign_and_recompute(g, tree, rank_of, r, lep, rep);
    return r;
}

void collect_inorder(const HullTree& tree, PointId v, std::vector<PointId>& out) {
    if (v == kNoPoint) return;
    collect_inorder(tree, tree.at(v).left, out);
    out.push_back(v);
    collect_inorder(tree, tree.at(v).right, out);
}

namespace {

void fail(const std::string& what, PointId v) {
    std::ostringstream os;
    os << what << " at node " << v;
    throw InternalError(os.str());
}

}  // namespace

void verify_structure(const GeomContext& g, const HullTree& tree,
                      const std::vector<PointId>& x_order,
                      const std::vector<std::int32_t>& rank_of) {
    const std::size_t n = x_order.size();
    if (tree.nodes.size() != n) throw InternalError("node table size mismatch");
    std::vector<PointId> inorder;
    collect_inorder(tree, tree.root, inorder);
    if (inorder != x_order) throw InternalError("in-order walk disagrees with the x-order");

    std::vector<int> pos(n, 0);
    for (std::size_t i = 0; i < n; ++i) pos[static_cast<std::size_t>(x_order[i])] = static_cast<int>(i);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!g.x_less(x_order[i], x_order[i + 1])) {
            throw InternalError("x-order is not sorted at the probe time");
        }
    }

    std::vector<PointId> owner_check(n, kNoPoint);
    for (PointId v = 0; v < static_cast<PointId>(n); ++v) {
        const HullTreeNode& node = tree.at(v);
        if (node.parent == kNoPoint && tree.root != v) fail("orphan node", v);
        for (PointId c : {node.left, node.right}) {
            if (c == kNoPoint) continue;
            if (tree.at(c).parent != v) fail("broken parent link", v);
            if (rank_of[static_cast<std::size_t>(c)] <= rank_of[static_cast<std::size_t>(v)]) {
                fail("rank heap violation", v);
            }
        }
        if (node.left != kNoPoint && pos[static_cast<std::size_t>(node.left)] >= pos[static_cast<std::size_t>(v)]) {
            fail("left child out of order", v);
        }
        if (node.right != kNoPoint && pos[static_cast<std::size_t>(node.right)] <= pos[static_cast<std::size_t>(v)]) {
            fail("right child out of order", v);
        }

        // Endpoints: nearest ids outside the subtree x-range.
        std::vector<PointId> sub;
        collect_inorder(tree, v, sub);
        int lo = pos[static_cast<std::size_t>(sub.front())];
        int hi = pos[static_cast<std::size_t>(sub.back())];
        if (hi - lo + 1 != static_cast<int>(sub.size())) fail("subtree is not an x-interval", v);
        PointId want_lep = lo == 0 ? kSentinelLeft : x_order[static_cast<std::size_t>(lo - 1)];
        PointId want_rep = hi == static_cast<int>(n) - 1 ? kSentinelRight : x_order[static_cast<std::size_t>(hi + 1)];
        if (node.left_ep != want_lep || node.right_ep != want_rep) fail("stale neighbour endpoints", v);

        // Hull and funnel must match a fresh recomputation.
        const std::vector<PointId> hl = child_hull(tree, v, true);
        const std::vector<PointId> hr = child_hull(tree, v, false);
        if (hl.back() != v || hr.front() != v) fail("child hulls do not meet at the node point", v);
        const bool open = hl.size() >= 2 && hr.size() >= 2 &&
                          g.orient3(hl[hl.size() - 2], v, hr[1]) == Sign::kPos;
        if (open != node.funnel.has_bridge) fail("funnel emptiness disagrees with the child hulls", v);

        std::vector<PointId> want_hull;
        if (open) {
            auto [i, j] = compute_bridge(g, hl, hr);
            const Funnel& f = node.funnel;
            if (f.corner_left != hl[static_cast<std::size_t>(i)] ||
                f.corner_right != hr[static_cast<std::size_t>(j)]) {
                fail("stored bridge feet are not the common tangent", v);
            }
            if (!std::equal(f.left_interior.begin(), f.left_interior.end(), hl.begin() + i + 1,
                            hl.end() - 1) ||
                !std::equal(f.right_interior.begin(), f.right_interior.end(), hr.begin() + 1,
                            hr.begin() + j)) {
                fail("funnel chains are not the hidden hull arcs", v);
            }
            Funnel scratch = f;
            std::vector<PointId> scratch_nu(n, kNoPoint);
            triangulate_funnel(g, rank_of, v, scratch, scratch_nu);
            if (scratch.chords != f.chords) fail("stored chords differ from a fresh run", v);
            for (PointId p : f.left_interior) {
                if (tree.nu[static_cast<std::size_t>(p)] != scratch_nu[static_cast<std::size_t>(p)]) {
                    fail("stale visibility target", v);
                }
            }
            for (PointId p : f.right_interior) {
                if (tree.nu[static_cast<std::size_t>(p)] != scratch_nu[static_cast<std::size_t>(p)]) {
                    fail("stale visibility target", v);
                }
            }

            // Shape: boundary walk x-sorted, chains concave, apex reflex,
            // bridge feet tangent.
            const std::vector<PointId> w = f.walk(v);
            for (std::size_t t = 0; t + 1 < w.size(); ++t) {
                if (!g.x_less(w[t], w[t + 1])) fail("funnel walk is not x-sorted", v);
            }
            const std::size_t apex_idx = 1 + f.left_interior.size();
            for (std::size_t t = 1; t + 1 < w.size(); ++t) {
                Sign s = g.orient3(w[t - 1], w[t], w[t + 1]);
                if (t == apex_idx ? s != Sign::kPos : s != Sign::kNeg) {
                    fail("funnel boundary has a wrong turn", v);
                }
            }
            if (g.orient3(f.corner_left, f.corner_right, w[1]) != Sign::kNeg ||
                g.orient3(f.corner_left, f.corner_right, w[w.size() - 2]) != Sign::kNeg) {
                fail("bridge is not above its funnel", v);
            }
            if (i > 0 && g.orient3(f.corner_left, f.corner_right,
                                   hl[static_cast<std::size_t>(i - 1)]) != Sign::kNeg) {
                fail("bridge not tangent on the left hull", v);
            }
            if (j + 1 < static_cast<int>(hr.size()) &&
                g.orient3(f.corner_left, f.corner_right,
                          hr[static_cast<std::size_t>(j + 1)]) != Sign::kNeg) {
                fail("bridge not tangent on the right hull", v);
            }
            funnel_triangles(f, v);  // validates the chord ladder

            for (PointId p : f.left_interior) {
                if (tree.funnel_owner[static_cast<std::size_t>(p)] != v ||
                    tree.owner_side[static_cast<std::size_t>(p)] != 0) {
                    fail("ownership table wrong for a left chain vertex", v);
                }
                if (owner_check[static_cast<std::size_t>(p)] != kNoPoint) {
                    fail("point sits in two funnels", v);
                }
                owner_check[static_cast<std::size_t>(p)] = v;
            }
            for (PointId p : f.right_interior) {
                if (tree.funnel_owner[static_cast<std::size_t>(p)] != v ||
                    tree.owner_side[static_cast<std::size_t>(p)] != 1) {
                    fail("ownership table wrong for a right chain vertex", v);
                }
                if (owner_check[static_cast<std::size_t>(p)] != kNoPoint) {
                    fail("point sits in two funnels", v);
                }
                owner_check[static_cast<std::size_t>(p)] = v;
            }

            want_hull.assign(hl.begin(), hl.begin() + i + 1);
            want_hull.insert(want_hull.end(), hr.begin() + j, hr.end());
        } else {
            want_hull = hl;
            want_hull.insert(want_hull.end(), hr.begin() + 1, hr.end());
        }
        if (node.hull != want_hull) fail("stored hull differs from reassembly", v);
        for (std::size_t t = 1; t + 1 < node.hull.size(); ++t) {
            if (g.orient3(node.hull[t - 1], node.hull[t], node.hull[t + 1]) != Sign::kNeg) {
                fail("hull chain is not convex", v);
            }
        }
    }

    for (std::size_t p = 0; p < n; ++p) {
        if (tree.funnel_owner[p] != owner_check[p]) {
            throw InternalError("ownership table points at a funnel that does not hold the point");
        }
        if ((tree.funnel_owner[p] == kNoPoint) != (tree.nu[p] == kNoPoint)) {
            throw InternalError("visibility target stored for a point outside all funnels");
        }
    }
}

std::vector<std::array<PointId, 3>> all_triangles(const HullTree& tree) {
    std::vector<std::array<PointId, 3>> tris;
    for (PointId v = 0; v < static_cast<PointId>(tree.nodes.size()); ++v) {
        auto part = funnel_triangles(tree.at(v).funnel, v);
        tris.insert(tris.end(), part.begin(), part.end());
    }
    return tris;
}

TreeCensus census(const HullTree& tree) {
    TreeCensus c;
    c.nodes = static_cast<long long>(tree.nodes.size());
    for (const HullTreeNode& node : tree.nodes) {
        c.chain_vertices += static_cast<long long>(node.funnel.left_interior.size() +
                                                   node.funnel.right_interior.size());
        c.chords += static_cast<long long>(node.funnel.chords.size());
    }
    return c;
}

std::string debug_dump(const HullTree& tree) {
    std::ostringstream os;
    os << "root=" << tree.root << "\n";
    for (PointId v = 0; v < static_cast<PointId>(tree.nodes.size()); ++v) {
        const HullTreeNode& node = tree.at(v);
        os << "node " << v << ": parent=" << node.parent << " left=" << node.left
           << " right=" << node.right << " eps=[" << node.left_ep << "," << node.right_ep
           << "] hull=[";
        for (std::size_t i = 0; i < node.hull.size(); ++i) {
            if (i) os << " ";
            os << node.hull[i];
        }
        os << "]";
        if (node.funnel.has_bridge) {
            const Funnel& f = node.funnel;
            os << " funnel{bl=" << f.corner_left << " br=" << f.corner_right << " L=[";
            for (std::size_t i = 0; i < f.left_interior.size(); ++i) {
                if (i) os << " ";
                os << f.left_interior[i];
            }
            os << "] R=[";
            for (std::size_t i = 0; i < f.right_interior.size(); ++i) {
                if (i) os << " ";
                os << f.right_interior[i];
            }
            os << "] chords=[";
            for (std::size_t i = 0; i < f.chords.size(); ++i) {
                if (i) os << " ";
                os << "(" << f.chords[i].gen << " " << f.chords[i].other << ")";
            }
            os << "]}";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace ktri
