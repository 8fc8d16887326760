#pragma once

#include <vector>

#include "ktri/motion.hpp"
#include "ktri/poly.hpp"
#include "ktri/rat.hpp"

namespace ktri {

enum Sign : int {
    kNeg = -1,
    kZero = 0,
    kPos = 1,
};

inline Sign sign_of_rat(const Rat& r) {
    int s = sgn(r);
    return s < 0 ? kNeg : (s > 0 ? kPos : kZero);
}

/// Orientation of the ordered triple (a, b, c): positive = counterclockwise.
Sign orient(const Point2& a, const Point2& b, const Point2& c);

/// Sign of x(b) - x(a).
Sign x_order(const Point2& a, const Point2& b);

/// An algebraic time value: a simple real root of `factor`, bracketed by the
/// closed interval [lo, hi].  The interval either degenerates to an exact
/// rational (lo == hi) or satisfies sign(factor(lo)) * sign(factor(hi)) < 0
/// and contains no other root of `factor`.  `even` records whether the root
/// had even multiplicity in the polynomial it was isolated from.
struct EventTime {
    Poly factor;
    Rat lo;
    Rat hi;
    bool even = false;

    bool exact() const { return lo == hi; }
    Rat width() const { return hi - lo; }

    static EventTime at(const Rat& t) {
        EventTime e;
        e.factor = Poly::linear_root(t);
        e.lo = t;
        e.hi = t;
        return e;
    }
};

/// One bisection step; an exact midpoint hit collapses the interval.
void refine_once(EventTime& e);

/// Shrinks the bracket until width <= w (no-op for exact times).
void refine_below_width(EventTime& e, const Rat& w);

/// Total order on time values: -1, 0, +1.  Refines both sides as needed
/// (refinement never changes the represented value, only the bracket);
/// equality is decided exactly via the gcd of the defining factors.
int compare_times(EventTime& a, EventTime& b);

/// Position of rational t relative to the time value: -1 if t < e, 0, +1.
int compare_rat_time(const Rat& t, EventTime& e);

/// The rational with the smallest denominator (smallest numerator on ties)
/// strictly inside the open interval (a, b).  Keeps repeatedly chosen
/// in-between times (event probes) from accumulating huge denominators.
Rat simplest_rational_between(const Rat& a, const Rat& b);

/// Isolates all real roots of f in the closed interval [a, b], in ascending
/// order, with multiplicity parity attached.  Throws DegenerateMotionError
/// if f is identically zero and InternalError on lost precision.
std::vector<EventTime> isolate_roots(const Poly& f, const Rat& a, const Rat& b);

/// Polynomial whose sign tracks orient(p, q, r) over time; degree <= 2D.
Poly collinearity_poly(const TrajectoryPiece& p, const TrajectoryPiece& q,
                       const TrajectoryPiece& r);

/// Times in [a, b] where x_i(t) == x_j(t), ascending, deduplicated.
std::vector<EventTime> x_swap_times(const Trajectory& pi, const Trajectory& pj,
                                    const Rat& a, const Rat& b);

/// Times in [a, b] where p, q, r are collinear, ascending, deduplicated.
std::vector<EventTime> collinearity_times(const Trajectory& p, const Trajectory& q,
                                          const Trajectory& r, const Rat& a,
                                          const Rat& b);

/// Subdivision of [a, b] into maximal subintervals on which every listed
/// trajectory is governed by a single piece.  Returns interval endpoints
/// a = c0 < c1 < ... < ck = b.
std::vector<Rat> common_breakpoints(const std::vector<const Trajectory*>& trajs,
                                    const Rat& a, const Rat& b);

/// Roots of a per-subinterval polynomial family over [a, b]: `make(lo, hi)`
/// supplies the polynomial valid on [lo, hi].  Results are merged across
/// subintervals with boundary duplicates removed.
template <typename MakePoly>
std::vector<EventTime> piecewise_roots(const std::vector<const Trajectory*>& trajs,
                                       const Rat& a, const Rat& b, MakePoly make) {
    std::vector<EventTime> out;
    if (!(a < b)) return out;
    std::vector<Rat> cuts = common_breakpoints(trajs, a, b);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        std::vector<EventTime> part = isolate_roots(make(cuts[i], cuts[i + 1]), cuts[i], cuts[i + 1]);
        for (EventTime& e : part) {
            if (!out.empty() && compare_times(out.back(), e) == 0) continue;
            out.push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace ktri
