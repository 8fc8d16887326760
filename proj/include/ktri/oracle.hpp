#pragma once

#include <array>
#include <vector>

#include "ktri/kernel.hpp"
#include "ktri/motion.hpp"

namespace ktri {

// Canonical triangulation at one instant, in comparison-friendly form:
// triangles as ascending id triples, listed in sorted order; hull vertex ids
// in x-order for the upper and lower chains.
struct StaticSnapshot {
    std::vector<std::array<PointId, 3>> triangles;
    std::vector<PointId> hull_upper;
    std::vector<PointId> hull_lower;

    friend bool operator==(const StaticSnapshot& a, const StaticSnapshot& b) {
        return a.triangles == b.triangles && a.hull_upper == b.hull_upper &&
               a.hull_lower == b.hull_lower;
    }
    friend bool operator!=(const StaticSnapshot& a, const StaticSnapshot& b) {
        return !(a == b);
    }
};

// Builds the snapshot from scratch at time t: evaluate positions, then for
// each side run the reference recursion (min-rank splits, brute hull merges,
// linear tangency scans).  Entirely independent of the incremental engine.
StaticSnapshot reference_snapshot(const Scenario& s, const PriorityAssignment& pr, const Rat& t);

// Every time in (t0, t1) at which some pair swaps x-order or some triple of
// points is collinear — the only instants the canonical structure can
// change.  Ascending, deduplicated across predicates.
std::vector<EventTime> candidate_times(const Scenario& s);

// `per_gap` rational sample times inside each maximal open interval between
// consecutive candidate times (window edges included as delimiters).
// Refines the brackets until neighbours are disjoint.
std::vector<Rat> gap_samples(std::vector<EventTime>& times, const Rat& t0, const Rat& t1,
                             int per_gap);

}  // namespace ktri
