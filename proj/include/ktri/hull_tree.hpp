#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ktri/funnel.hpp"
#include "ktri/motion.hpp"

namespace ktri {

// One tree node per point; the node id is the point id.  `hull` is the upper
// convex chain of the subtree's points together with the nearest real
// neighbour point on each side (absent for sentinel sides), stored
// x-increasing.  The funnel hangs below the bridge that closes the gap
// between the two child hulls above this node's point.
struct HullTreeNode {
    PointId parent = kNoPoint;
    PointId left = kNoPoint;
    PointId right = kNoPoint;
    // Nearest points outside the subtree's x-range, or sentinels at the ends.
    PointId left_ep = kSentinelLeft;
    PointId right_ep = kSentinelRight;
    std::vector<PointId> hull;
    Funnel funnel;
};

struct HullTree {
    PointId root = kNoPoint;
    std::vector<HullTreeNode> nodes;
    // Per point: visibility target along the full funnel boundary, the node
    // whose funnel holds the point as a chain vertex, and which chain.
    std::vector<PointId> nu;
    std::vector<PointId> funnel_owner;
    std::vector<std::int8_t> owner_side;  // 0 = left chain, 1 = right chain

    const HullTreeNode& at(PointId v) const { return nodes[static_cast<std::size_t>(v)]; }
    HullTreeNode& at(PointId v) { return nodes[static_cast<std::size_t>(v)]; }
};

// Upper convex chain of x-sorted point ids (first and last always kept,
// collinear middles dropped).
std::vector<PointId> upper_hull(const GeomContext& g, const std::vector<PointId>& xs);

// Upper common tangent of two upper chains that share their middle point
// (left.back() == right.front()).  Returns indices {i, j} of the tangent feet
// into `left` and `right`.  Requires both chains to have >= 2 points and the
// shared point to lie strictly below the line through its two neighbours.
std::pair<int, int> compute_bridge(const GeomContext& g, const std::vector<PointId>& left,
                                   const std::vector<PointId>& right);

// Child hull of v on the given side; a missing child contributes the virtual
// chain [endpoint, point] with sentinel endpoints dropped.
std::vector<PointId> child_hull(const HullTree& tree, PointId v, bool left_side);

// Recomputes bridge, funnel, chords, visibility targets and the assembled
// hull of v from its children's hulls.  Returns true when the stored hull
// changed (the signal to continue repairing ancestors).
bool recompute_node(const GeomContext& g, HullTree& tree,
                    const std::vector<std::int32_t>& rank_of, PointId v);

// Treap over the given x-order: priorities from rank_of (rank 1 at the root),
// keys from position in x_order.  Hulls and funnels are filled bottom-up.
HullTree build_static(const GeomContext& g, const std::vector<PointId>& x_order,
                      const std::vector<std::int32_t>& rank_of);

// Relinks `members` (given in their new x-order) into a fresh treap hanging
// from `attach` (kNoPoint reroots the whole tree), then recomputes every
// member bottom-up.  Returns the new subtree root.  Changes above `attach`
// are the caller's to propagate.
PointId rebuild_subtree(const GeomContext& g, HullTree& tree,
                        const std::vector<std::int32_t>& rank_of,
                        const std::vector<PointId>& members, PointId attach, bool attach_left);

// In-order walk of the subtree rooted at v, appended to `out`.
void collect_inorder(const HullTree& tree, PointId v, std::vector<PointId>& out);

// Structural and geometric invariants: search-tree order against x_order,
// heap order of ranks, endpoint consistency, hull assembly, funnel shape
// (chain concavity, apex and corner convexity, chord ladder), and ownership
// tables.  Throws InternalError with a description on the first violation.
void verify_structure(const GeomContext& g, const HullTree& tree,
                      const std::vector<PointId>& x_order,
                      const std::vector<std::int32_t>& rank_of);

// All funnel triangles of the tree, in node id order then slab order.
std::vector<std::array<PointId, 3>> all_triangles(const HullTree& tree);

// Chain vertices + chords summed over funnels, for storage accounting.
struct TreeCensus {
    long long chain_vertices = 0;
    long long chords = 0;
    long long nodes = 0;
};
TreeCensus census(const HullTree& tree);

std::string debug_dump(const HullTree& tree);

}  // namespace ktri
