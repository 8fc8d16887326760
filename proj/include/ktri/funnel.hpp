#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ktri/kernel.hpp"
#include "ktri/motion.hpp"

namespace ktri {

inline constexpr PointId kNoPoint = -3;

/// Shared geometric state for one tree side: positions at the current
/// evaluation time, plus predicate counters used by the scaling checks.
struct GeomContext {
    std::vector<Point2> pos;  // indexed by PointId
    mutable long long orient_count = 0;
    mutable long long x_compare_count = 0;

    const Point2& at(PointId p) const { return pos[static_cast<std::size_t>(p)]; }

    Sign orient3(PointId a, PointId b, PointId c) const {
        ++orient_count;
        return orient(at(a), at(b), at(c));
    }

    bool x_less(PointId a, PointId b) const {
        ++x_compare_count;
        return at(a).x < at(b).x;
    }
};

/// A triangulation chord inside one funnel.  `gen` is the chain vertex whose
/// insertion created the chord; `other` is its clipped tangency target on the
/// opposite boundary (a chain vertex or a corner).
struct Chord {
    PointId gen = kNoPoint;
    PointId other = kNoPoint;

    friend bool operator==(const Chord& a, const Chord& b) {
        return a.gen == b.gen && a.other == b.other;
    }
    friend bool operator!=(const Chord& a, const Chord& b) { return !(a == b); }
};

/// The pseudo-triangle between two sibling hulls: apex at the bottom (the
/// owning node's point), two concave chains rising to the corners, and the
/// bridge segment on top.  An empty funnel (apex lying on the merged hull)
/// has has_bridge == false and all sequences empty.
///
/// left_interior lists the chain vertices strictly between corner_left and
/// the apex in x-increasing order; right_interior those strictly between the
/// apex and corner_right.  The full boundary walk is therefore x-sorted:
/// [corner_left, left_interior..., apex, right_interior..., corner_right].
struct Funnel {
    bool has_bridge = false;
    PointId corner_left = kNoPoint;
    PointId corner_right = kNoPoint;
    std::vector<PointId> left_interior;
    std::vector<PointId> right_interior;
    std::vector<Chord> chords;  // bottom to top

    bool empty() const { return !has_bridge; }

    std::vector<PointId> walk(PointId apex) const;

    friend bool operator==(const Funnel& a, const Funnel& b) {
        return a.has_bridge == b.has_bridge && a.corner_left == b.corner_left &&
               a.corner_right == b.corner_right && a.left_interior == b.left_interior &&
               a.right_interior == b.right_interior && a.chords == b.chords;
    }
    friend bool operator!=(const Funnel& a, const Funnel& b) { return !(a == b); }
};

/// Tangency of p over the full opposite boundary of its funnel: the vertex
/// where the sightline from p grazes the opposite chain (possibly the apex
/// or the far corner).  p must be an interior chain vertex of f.
PointId visible_vertex(const GeomContext& g, const Funnel& f, PointId apex, PointId p,
                       bool p_on_left);

/// Builds the chord ladder of f from its chains, corners and the global
/// rank permutation, and records every interior vertex's visibility target
/// in nu.  Deterministic in (geometry, chains, ranks); chords are replaced.
void triangulate_funnel(const GeomContext& g, const std::vector<std::int32_t>& rank_of,
                        PointId apex, Funnel& f, std::vector<PointId>& nu);

/// Chord-index range [first, last) that depends on vertex p0: the maximal
/// run of chords around p0's own chord whose generators all rank below p0.
/// The delimiting chords outside the range survive any local change at p0.
std::pair<int, int> find_tau0(const Funnel& f, const std::vector<std::int32_t>& rank_of,
                              PointId p0);

/// The triangles of a funnel, listed bottom slab first.  Validates the
/// ladder structure (consecutive chords share exactly one endpoint, each
/// slab closes into a triangle) and throws InternalError on violation.
std::vector<std::array<PointId, 3>> funnel_triangles(const Funnel& f, PointId apex);

/// Chords present in `after` but not `before` and vice versa; the discrete
/// change measure for a funnel rebuild.
struct ChordDelta {
    std::vector<Chord> removed;
    std::vector<Chord> added;
    int size() const { return static_cast<int>(removed.size() + added.size()); }
};

ChordDelta diff_chords(const std::vector<Chord>& before, const std::vector<Chord>& after);

}  // namespace ktri
