#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ktri/poly.hpp"
#include "ktri/rat.hpp"

namespace ktri {

using PointId = std::int32_t;

// Sentinel ids used by the coordination structures for the far-left and
// far-right boundary attachments.  They never appear in scenario data.
inline constexpr PointId kSentinelLeft = -2;
inline constexpr PointId kSentinelRight = -1;

struct Point2 {
    Rat x;
    Rat y;

    friend bool operator==(const Point2& a, const Point2& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator!=(const Point2& a, const Point2& b) { return !(a == b); }
};

/// One polynomial piece of a trajectory, valid on [t_begin, t_end].
struct TrajectoryPiece {
    Rat t_begin;
    Rat t_end;
    Poly x;
    Poly y;
};

/// Piecewise-polynomial motion of a single point.  Pieces are contiguous,
/// ordered by time, and agree in value at shared boundaries.
struct Trajectory {
    std::vector<TrajectoryPiece> pieces;
};

/// Maximum coordinate-polynomial degree accepted in scenarios.
inline constexpr int kMaxMotionDegree = 2;

struct Scenario {
    int n = 0;
    Rat t0;
    Rat t1;
    std::uint64_t seed = 0;
    std::string label;
    std::vector<Trajectory> points;  // index == PointId
};

/// Random permutation of ranks 1..n; rank_of[id] gives the point's rank,
/// smaller rank = higher priority in the divide hierarchy.
struct PriorityAssignment {
    std::vector<std::int32_t> rank_of;
};

enum class MotionModel {
    kLinear,
    kQuadratic,
};

enum class DegeneracyPolicy {
    kPerturb,  // retry with seeded rational jitter until general position holds
    kReject,   // throw DegeneracyError instead
};

/// Evaluates position at time t.  Throws WindowError if t lies outside the
/// trajectory's covered range.
Point2 eval_at(const Trajectory& traj, const Rat& t);

/// Exact x/y coordinate polynomials on the piece covering [t, ...); throws
/// WindowError when t is uncovered.
const TrajectoryPiece& piece_at(const Trajectory& traj, const Rat& t);

/// True when every pair has distinct x and no triple is collinear at time t.
/// The triple scan is skipped above kCollinearCheckLimit points.
bool general_position_at(const Scenario& s, const Rat& t, std::string* why = nullptr);

inline constexpr int kCollinearCheckLimit = 512;

Scenario load_scenario(const std::string& text,
                       DegeneracyPolicy policy = DegeneracyPolicy::kReject);
std::string save_scenario(const Scenario& s);

Scenario gen_random_scenario(int n, std::uint64_t seed, MotionModel model,
                             const Rat& t0, const Rat& t1,
                             DegeneracyPolicy policy = DegeneracyPolicy::kPerturb);

PriorityAssignment draw_priorities(int n, std::uint64_t seed);

}  // namespace ktri
