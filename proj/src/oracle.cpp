#include "ktri/oracle.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>

#include "ktri/errors.hpp"
#include "ktri/funnel.hpp"

namespace ktri {

namespace {

std::array<PointId, 3> canon_tri(PointId a, PointId b, PointId c) {
    std::array<PointId, 3> t{a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

// Rebuilds one side of the structure from scratch by the literal recursive
// definition: the least-rank point of an x-slice splits it, every hull is a
// plain monotone scan over the points involved, and funnel interiors are
// filled by the min-rank region recursion with linear tangency scans.  The
// lower side reuses this with y negated.
struct SideBuilder {
    const std::vector<Point2>& pos;
    const std::vector<std::int32_t>& rank_of;
    std::vector<PointId> xs;  // all ids, ascending x
    std::vector<std::array<PointId, 3>> tris;

    const Point2& at(PointId id) const { return pos[static_cast<std::size_t>(id)]; }

    Sign ori(PointId a, PointId b, PointId c) const { return orient(at(a), at(b), at(c)); }

    std::int32_t rank(PointId id) const { return rank_of[static_cast<std::size_t>(id)]; }

    // Upper hull of the given ids, leftmost to rightmost.
    std::vector<PointId> chain_hull(std::vector<PointId> ids) const {
        std::sort(ids.begin(), ids.end(),
                  [&](PointId a, PointId b) { return at(a).x < at(b).x; });
        std::vector<PointId> h;
        for (PointId id : ids) {
            while (h.size() >= 2 && ori(h[h.size() - 2], h.back(), id) != kNeg) h.pop_back();
            h.push_back(id);
        }
        return h;
    }

    // Index on `seq` (successive vertices of one funnel boundary as seen from
    // p) where the turn stops; clipped to the last vertex.
    std::size_t tangency(PointId p, const std::vector<PointId>& seq, int side) const {
        for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
            if (side * static_cast<int>(ori(p, seq[j], seq[j + 1])) <= 0) return j;
        }
        return seq.size() - 1;
    }

    // Region recursion over a funnel walk `w` (corner, left chain, apex,
    // right chain, corner).  A region is bounded below by the apex or a
    // chord and above by a chord or the bridge; its least-rank free vertex
    // casts the next chord toward the opposite boundary.  A floor attach
    // that has not cast its own chord yet rides along as `pend` until the
    // ceiling moves past it.  Regions with no free vertices are exactly the
    // triangles.
    void regions(const std::vector<PointId>& w, int apex_idx, int ll, int lr, int ul, int ur,
                 int pend) {
        const int len = static_cast<int>(w.size());
        auto widx = [&](int i) { return w[static_cast<std::size_t>(i)]; };
        int k = -1;
        for (int i = ul + 1; i <= ll - 1; ++i) {
            if (k < 0 || rank(widx(i)) < rank(widx(k))) k = i;
        }
        for (int i = lr + 1; i <= ur - 1; ++i) {
            if (k < 0 || rank(widx(i)) < rank(widx(k))) k = i;
        }
        if (pend >= 0 && (k < 0 || rank(widx(pend)) < rank(widx(k)))) k = pend;
        if (k < 0) {
            std::vector<PointId> ids;
            for (int i : {ll, lr, ul, ur}) {
                PointId p = widx(i);
                if (std::find(ids.begin(), ids.end(), p) == ids.end()) ids.push_back(p);
            }
            if (ids.size() != 3) throw InternalError("leaf region is not a triangle");
            tris.push_back(canon_tri(ids[0], ids[1], ids[2]));
            return;
        }
        PointId best = widx(k);
        const bool on_left = k < apex_idx;
        std::vector<PointId> seq;
        if (on_left) {
            for (int i = lr; i <= ur; ++i) seq.push_back(widx(i));
        } else {
            for (int i = ll; i >= ul; --i) seq.push_back(widx(i));
        }
        std::size_t j = tangency(best, seq, on_left ? 1 : -1);
        if (ll == lr && j == 0) {
            throw InternalError("sightline grazes the apex in the reference recursion");
        }
        PointId target = seq[j];
        int tk = -1;
        for (int i = 0; i < len; ++i) {
            if (widx(i) == target) tk = i;
        }
        const int chord_l = on_left ? k : tk;
        const int chord_r = on_left ? tk : k;
        const int below_pend =
            (pend >= 0 && pend != k && pend != chord_l && pend != chord_r) ? pend : -1;
        int above_pend;
        if (tk == ll || tk == lr) {
            above_pend = tk == pend ? tk : -1;
        } else if (tk == ul || tk == ur || tk == 0 || tk == len - 1) {
            above_pend = -1;
        } else {
            above_pend = tk;
        }
        regions(w, apex_idx, ll, lr, chord_l, chord_r, below_pend);
        regions(w, apex_idx, chord_l, chord_r, ul, ur, above_pend);
    }

    // The x-slice xs[lo..hi] with its nearest outside neighbours (kNoPoint
    // when the slice touches the edge of the point set).
    void build(int lo, int hi, PointId lep, PointId rep) {
        if (lo > hi) return;
        int iv = lo;
        for (int i = lo + 1; i <= hi; ++i) {
            if (rank(xs[static_cast<std::size_t>(i)]) < rank(xs[static_cast<std::size_t>(iv)])) {
                iv = i;
            }
        }
        const PointId v = xs[static_cast<std::size_t>(iv)];

        std::vector<PointId> left_ids(xs.begin() + lo, xs.begin() + iv);
        left_ids.push_back(v);
        if (lep >= 0) left_ids.push_back(lep);
        std::vector<PointId> hl = chain_hull(left_ids);

        std::vector<PointId> right_ids(xs.begin() + iv, xs.begin() + hi + 1);
        if (rep >= 0) right_ids.push_back(rep);
        std::vector<PointId> hr = chain_hull(right_ids);

        std::vector<PointId> all_ids(xs.begin() + lo, xs.begin() + hi + 1);
        if (lep >= 0) all_ids.push_back(lep);
        if (rep >= 0) all_ids.push_back(rep);
        std::vector<PointId> merged = chain_hull(all_ids);

        if (std::find(merged.begin(), merged.end(), v) == merged.end()) {
            // v sits below the merged hull, so the bridge over it spans a
            // real funnel.  Its feet are the merged-hull neighbours
            // straddling x(v).
            std::size_t bi = 0;
            while (bi + 1 < merged.size() &&
                   at(merged[bi + 1]).x < at(v).x) {
                ++bi;
            }
            if (bi + 1 >= merged.size()) throw InternalError("shadowed split point has no bridge");
            const PointId bl = merged[bi];
            const PointId br = merged[bi + 1];
            auto ibl = std::find(hl.begin(), hl.end(), bl);
            auto ibr = std::find(hr.begin(), hr.end(), br);
            if (ibl == hl.end() || ibr == hr.end()) {
                throw InternalError("bridge foot missing from its side hull");
            }
            std::vector<PointId> walk(ibl, hl.end());
            const int apex_idx = static_cast<int>(walk.size()) - 1;
            for (auto it = hr.begin() + 1; it != ibr + 1; ++it) walk.push_back(*it);
            regions(walk, apex_idx, apex_idx, apex_idx, 0,
                    static_cast<int>(walk.size()) - 1, -1);
        }
        build(lo, iv - 1, lep, v);
        build(iv + 1, hi, v, rep);
    }
};

}  // namespace

StaticSnapshot reference_snapshot(const Scenario& s, const PriorityAssignment& pr, const Rat& t) {
    std::vector<Point2> pos_up;
    pos_up.reserve(static_cast<std::size_t>(s.n));
    for (const Trajectory& traj : s.points) pos_up.push_back(eval_at(traj, t));

    std::vector<PointId> ids(static_cast<std::size_t>(s.n));
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](PointId a, PointId b) {
        return pos_up[static_cast<std::size_t>(a)].x < pos_up[static_cast<std::size_t>(b)].x;
    });
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        if (pos_up[static_cast<std::size_t>(ids[i])].x ==
            pos_up[static_cast<std::size_t>(ids[i + 1])].x) {
            throw DegeneracyError("coincident x at snapshot time");
        }
    }

    std::vector<Point2> pos_lo = pos_up;
    for (Point2& p : pos_lo) p.y = -p.y;

    SideBuilder up{pos_up, pr.rank_of, ids, {}};
    up.build(0, s.n - 1, kNoPoint, kNoPoint);
    SideBuilder lo{pos_lo, pr.rank_of, ids, {}};
    lo.build(0, s.n - 1, kNoPoint, kNoPoint);

    StaticSnapshot out;
    out.triangles = std::move(up.tris);
    out.triangles.insert(out.triangles.end(), lo.tris.begin(), lo.tris.end());
    std::sort(out.triangles.begin(), out.triangles.end());
    out.hull_upper = up.chain_hull(ids);
    out.hull_lower = lo.chain_hull(ids);
    return out;
}

std::vector<EventTime> candidate_times(const Scenario& s) {
    std::vector<EventTime> out;
    auto take = [&](std::vector<EventTime>&& ts) {
        for (EventTime& e : ts) {
            if (compare_rat_time(s.t0, e) == 0 || compare_rat_time(s.t1, e) == 0) continue;
            out.push_back(std::move(e));
        }
    };
    for (int i = 0; i < s.n; ++i) {
        for (int j = i + 1; j < s.n; ++j) {
            take(x_swap_times(s.points[static_cast<std::size_t>(i)],
                              s.points[static_cast<std::size_t>(j)], s.t0, s.t1));
        }
    }
    for (int i = 0; i < s.n; ++i) {
        for (int j = i + 1; j < s.n; ++j) {
            for (int k = j + 1; k < s.n; ++k) {
                take(collinearity_times(s.points[static_cast<std::size_t>(i)],
                                        s.points[static_cast<std::size_t>(j)],
                                        s.points[static_cast<std::size_t>(k)], s.t0, s.t1));
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](EventTime& a, EventTime& b) { return compare_times(a, b) < 0; });
    std::vector<EventTime> uniq;
    for (EventTime& e : out) {
        if (!uniq.empty() && compare_times(uniq.back(), e) == 0) continue;
        uniq.push_back(std::move(e));
    }
    return uniq;
}

std::vector<Rat> gap_samples(std::vector<EventTime>& times, const Rat& t0, const Rat& t1,
                             int per_gap) {
    // Shrink every bracket strictly inside the window, then separate
    // neighbouring brackets so each gap is a genuine open interval.
    for (EventTime& e : times) {
        if (e.lo == e.hi) continue;
        while (!(t0 < e.lo)) refine_once(e);
        while (!(e.hi < t1)) refine_once(e);
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        EventTime& a = times[i - 1];
        EventTime& b = times[i];
        while (!(a.hi < b.lo)) {
            if (a.lo == a.hi && b.lo == b.hi) throw InternalError("duplicate candidate time");
            if (a.lo != a.hi) refine_once(a);
            if (b.lo != b.hi) refine_once(b);
        }
    }
    std::vector<Rat> out;
    auto emit_gap = [&](const Rat& a, const Rat& b) {
        if (!(a < b)) throw InternalError("empty candidate gap");
        for (int q = 1; q <= per_gap; ++q) {
            out.push_back(a + (b - a) * Rat(q) / Rat(per_gap + 1));
        }
    };
    Rat prev = t0;
    for (EventTime& e : times) {
        emit_gap(prev, e.lo);
        prev = e.hi;
    }
    emit_gap(prev, t1);
    return out;
}

}  // namespace ktri
