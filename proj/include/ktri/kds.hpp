#pragma once

#include <array>
#include <functional>
#include <memory>
#include <set>
#include <vector>

#include "ktri/hull_tree.hpp"
#include "ktri/kernel.hpp"
#include "ktri/motion.hpp"
#include "ktri/oracle.hpp"

namespace ktri {

// Certificate kinds in tie-breaking order: simultaneous failures are
// processed x-swaps first, then bridge events, then visibility events.
enum class EventKind : int {
    kSwap = 0,
    kBridge = 1,
    kVisibility = 2,
};

const char* event_kind_name(EventKind k);

// One sign condition.  A triple (ids[2] real) watches orient(ids[0], ids[1],
// ids[2]); a pair (ids[2] == kNoPoint) watches the sign of x(ids[1]) -
// x(ids[0]).  `want` is the sign that holds strictly between events.
struct SubPred {
    std::array<PointId, 3> ids{kNoPoint, kNoPoint, kNoPoint};
    Sign want = kZero;

    friend bool operator==(const SubPred& a, const SubPred& b) {
        return a.ids == b.ids && a.want == b.want;
    }
    friend bool operator!=(const SubPred& a, const SubPred& b) { return !(a == b); }
};

// A conjunction of sign conditions guarding one locally maintained fact:
//  - kSwap: the x-order of the adjacent pair at `position` (owner = left id);
//  - kBridge: the bridge feet of node `owner`'s funnel (or, for a closed
//    funnel with two real child hulls, that it stays closed);
//  - kVisibility: the stored visibility target of chain vertex `owner`.
// The failure time is the earliest strict sign flip among the conditions.
struct Certificate {
    EventKind kind = EventKind::kSwap;
    int side = 0;       // 0 = upper tree, 1 = lower tree (swaps: always 0)
    PointId owner = kNoPoint;
    PointId node = kNoPoint;  // funnel node repaired on failure (bridge/vis)
    int position = -1;  // swaps only: index of the pair in x_order
    std::vector<SubPred> preds;
    std::vector<PointId> involved;  // sorted unique ids, the tie-break tuple
    bool queued = false;
    EventTime when;
    int fired = -1;  // index into preds of the earliest-failing condition
    // Earliest later root among this certificate's conditions; repair times
    // are kept strictly below it so the flipped sign is still in force.
    EventTime guard;
    bool has_guard = false;
};

using CertPtr = std::shared_ptr<Certificate>;

// Queue order: failure time, then kind, then involved tuple; side and owner
// only disambiguate registry slots.
struct CertOrder {
    bool operator()(const CertPtr& a, const CertPtr& b) const;
};

// One processed event.
struct EventRecord {
    EventTime when;
    EventKind kind = EventKind::kSwap;
    int side = 0;
    std::vector<PointId> ids;
    int chords_removed = 0;
    int chords_added = 0;
    long long wall_ns = 0;
};

struct KineticStats {
    long long swap_events = 0;
    long long bridge_events = 0;
    long long vis_events = 0;
    long long chords_removed = 0;
    long long chords_added = 0;

    long long events_total() const { return swap_events + bridge_events + vis_events; }
    // Event count plus chord churn: the measured stand-in for the number of
    // discrete changes the triangulation undergoes.
    long long discrete_changes() const {
        return events_total() + chords_removed + chords_added;
    }
};

struct KineticState {
    Scenario scenario;
    PriorityAssignment pr;
    Rat now;
    std::vector<PointId> x_order;  // shared by both sides (x is mirrored-invariant)
    std::array<GeomContext, 2> geom;  // positions at `now`; [1] has y negated
    std::array<HullTree, 2> tree;

    // Registries: one stable slot per certificate identity.
    std::vector<CertPtr> swap_certs;                       // by pair position
    std::array<std::vector<CertPtr>, 2> bridge_certs;      // by owner node
    std::array<std::vector<CertPtr>, 2> vis_certs;         // by generating vertex
    std::set<CertPtr, CertOrder> queue;

    std::vector<EventRecord> log;
    KineticStats stats;
    bool verify_each_event = false;  // run full invariant checks after every event
    // Observation hook, called at the rest point after each processed batch
    // (census sampling and the like); never called while repairs are running.
    std::function<void(const KineticState&)> on_batch;
};

// Builds both trees at scenario.t0 and creates the full certificate set.
// Throws DegeneracyError unless the points are in general position at t0.
KineticState kinetic_init(const Scenario& s, const PriorityAssignment& pr);

// Processes every queued event with failure time strictly before t_end (in
// time order, ties by kind then ids), then rests the state at t_end.
// Throws WindowError for t_end outside [now, scenario.t1] and InternalError
// if a popped certificate's condition has not actually flipped (queue
// inconsistency).
void advance_to(KineticState& st, const Rat& t_end);

// Canonical triangle set and both hull chains of the maintained structure.
StaticSnapshot extract_snapshot(const KineticState& st);

// Full invariant sweep at the current time: both trees' structural checks,
// every stored certificate condition, Euler counts, one chord per interior
// vertex per funnel, and pairwise open disjointness of the triangles.
// Throws InternalError on the first violation.
void verify_state(const KineticState& st);

// Certificate and storage accounting.
struct CertCensus {
    std::vector<int> swap_count;          // per point: adjacent-pair certs touching it
    std::array<std::vector<int>, 2> vis_in_own_funnel;  // per point: generator/target roles
    long long swap_total = 0;
    long long bridge_total = 0;
    long long vis_total = 0;
    long long queued = 0;
    // chain vertices + chords + certificates + nodes over both trees
    long long storage_entities = 0;
};
CertCensus certificate_census(const KineticState& st);

}  // namespace ktri
