#include "ktri/funnel.hpp"

#include <algorithm>
#include <utility>

#include "ktri/errors.hpp"

namespace ktri {

std::vector<PointId> Funnel::walk(PointId apex) const {
    std::vector<PointId> w;
    if (!has_bridge) return w;
    w.reserve(left_interior.size() + right_interior.size() + 3);
    w.push_back(corner_left);
    w.insert(w.end(), left_interior.begin(), left_interior.end());
    w.push_back(apex);
    w.insert(w.end(), right_interior.begin(), right_interior.end());
    w.push_back(corner_right);
    return w;
}

namespace {

// First index j in [0, seq.size()-1) whose edge flips the turn predicate,
// i.e. side * orient(p, seq[j], seq[j+1]) <= 0; seq.size()-1 when none.
// The boundary is concave as seen from p, so the predicate is monotone and
// the flip position is found by binary search.
std::size_t tangency_index(const GeomContext& g, PointId p,
                           const std::vector<PointId>& seq, int side) {
    if (seq.size() <= 1) return 0;
    std::size_t lo = 0;
    std::size_t hi = seq.size() - 1;  // answer when every edge keeps turning
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        int s = side * static_cast<int>(g.orient3(p, seq[mid], seq[mid + 1]));
        if (s <= 0) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

}  // namespace

PointId visible_vertex(const GeomContext& g, const Funnel& f, PointId apex, PointId p,
                       bool p_on_left) {
    std::vector<PointId> seq;
    if (p_on_left) {
        seq.push_back(apex);
        seq.insert(seq.end(), f.right_interior.begin(), f.right_interior.end());
        seq.push_back(f.corner_right);
    } else {
        seq.push_back(apex);
        seq.insert(seq.end(), f.left_interior.rbegin(), f.left_interior.rend());
        seq.push_back(f.corner_left);
    }
    std::size_t j = tangency_index(g, p, seq, p_on_left ? 1 : -1);
    if (j == 0) {
        throw InternalError("sightline grazes the apex: funnel shape is inconsistent");
    }
    return seq[j];
}

void triangulate_funnel(const GeomContext& g, const std::vector<std::int32_t>& rank_of,
                        PointId apex, Funnel& f, std::vector<PointId>& nu) {
    f.chords.clear();
    if (!f.has_bridge) return;

    const std::vector<PointId> w = f.walk(apex);
    const int len = static_cast<int>(w.size());
    const int apex_idx = 1 + static_cast<int>(f.left_interior.size());

    std::vector<int> widx_of(nu.size(), -1);
    for (int i = 0; i < len; ++i) widx_of[static_cast<std::size_t>(w[static_cast<std::size_t>(i)])] = i;

    std::vector<PointId> order;
    order.insert(order.end(), f.left_interior.begin(), f.left_interior.end());
    order.insert(order.end(), f.right_interior.begin(), f.right_interior.end());
    std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
        return rank_of[static_cast<std::size_t>(a)] < rank_of[static_cast<std::size_t>(b)];
    });

    std::vector<std::pair<int, int>> spans;  // parallel to f.chords, nested upward
    for (PointId p : order) {
        const int k = widx_of[static_cast<std::size_t>(p)];
        const bool on_left = k < apex_idx;

        // Lowest chord whose span strictly contains k; containment is
        // monotone along the nested chord list.
        int m = static_cast<int>(spans.size());
        {
            int lo = 0, hi = m;
            while (lo < hi) {
                int mid = (lo + hi) / 2;
                if (spans[static_cast<std::size_t>(mid)].first < k &&
                    k < spans[static_cast<std::size_t>(mid)].second) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            m = lo;
        }

        // Opposite boundary of the slab, bottom to top, attach points included.
        std::vector<PointId> seq;
        if (on_left) {
            int lo_opp = m > 0 ? spans[static_cast<std::size_t>(m - 1)].second : apex_idx;
            int hi_opp = m < static_cast<int>(spans.size())
                             ? spans[static_cast<std::size_t>(m)].second
                             : len - 1;
            for (int i = lo_opp; i <= hi_opp; ++i) seq.push_back(w[static_cast<std::size_t>(i)]);
        } else {
            int lo_opp = m > 0 ? spans[static_cast<std::size_t>(m - 1)].first : apex_idx;
            int hi_opp = m < static_cast<int>(spans.size())
                             ? spans[static_cast<std::size_t>(m)].first
                             : 0;
            for (int i = lo_opp; i >= hi_opp; --i) seq.push_back(w[static_cast<std::size_t>(i)]);
        }

        // Tangency at seq[0] is the bottom clip onto the floor chord's far
        // attach; only the apex itself (floor of the lowest slab) can never
        // be a target.
        std::size_t j = tangency_index(g, p, seq, on_left ? 1 : -1);
        if (j == 0 && m == 0) {
            throw InternalError("sightline grazes the apex: funnel shape is inconsistent");
        }
        PointId target = seq[j];

        int tk = widx_of[static_cast<std::size_t>(target)];
        Chord chord{p, target};
        std::pair<int, int> span{std::min(k, tk), std::max(k, tk)};
        f.chords.insert(f.chords.begin() + m, chord);
        spans.insert(spans.begin() + m, span);
    }

    // Full-boundary visibility targets, independent of the slab clipping.
    for (PointId p : f.left_interior) {
        nu[static_cast<std::size_t>(p)] = visible_vertex(g, f, apex, p, true);
    }
    for (PointId p : f.right_interior) {
        nu[static_cast<std::size_t>(p)] = visible_vertex(g, f, apex, p, false);
    }
}

std::pair<int, int> find_tau0(const Funnel& f, const std::vector<std::int32_t>& rank_of,
                              PointId p0) {
    const int n = static_cast<int>(f.chords.size());
    int own = -1;
    for (int i = 0; i < n; ++i) {
        if (f.chords[static_cast<std::size_t>(i)].gen == p0) {
            own = i;
            break;
        }
    }
    if (own < 0) throw InternalError("vertex owns no chord in this funnel");
    const std::int32_t r0 = rank_of[static_cast<std::size_t>(p0)];
    int first = own;
    while (first > 0 &&
           rank_of[static_cast<std::size_t>(f.chords[static_cast<std::size_t>(first - 1)].gen)] > r0) {
        --first;
    }
    int last = own + 1;
    while (last < n &&
           rank_of[static_cast<std::size_t>(f.chords[static_cast<std::size_t>(last)].gen)] > r0) {
        ++last;
    }
    return {first, last};
}

std::vector<std::array<PointId, 3>> funnel_triangles(const Funnel& f, PointId apex) {
    std::vector<std::array<PointId, 3>> tris;
    if (!f.has_bridge) return tris;

    const std::vector<PointId> w = f.walk(apex);
    const int len = static_cast<int>(w.size());
    std::vector<int> widx(len, 0);
    auto idx_of = [&](PointId p) {
        for (int i = 0; i < len; ++i) {
            if (w[static_cast<std::size_t>(i)] == p) return i;
        }
        throw InternalError("chord endpoint is not on the funnel boundary");
    };
    auto adjacent = [&](PointId a, PointId b) {
        return std::abs(idx_of(a) - idx_of(b)) == 1;
    };

    if (f.chords.empty()) {
        if (len != 3) throw InternalError("chordless funnel with interior vertices");
        tris.push_back({f.corner_left, apex, f.corner_right});
        return tris;
    }

    const Chord& bottom = f.chords.front();
    if (!adjacent(bottom.gen, apex) || !adjacent(bottom.other, apex)) {
        throw InternalError("bottom chord does not close the apex triangle");
    }
    tris.push_back({bottom.gen, apex, bottom.other});

    for (std::size_t i = 1; i < f.chords.size(); ++i) {
        const Chord& lo = f.chords[i - 1];
        const Chord& hi = f.chords[i];
        PointId shared = kNoPoint, a = kNoPoint, b = kNoPoint;
        if (hi.gen == lo.gen || hi.gen == lo.other) {
            shared = hi.gen;
            b = hi.other;
            a = (lo.gen == shared) ? lo.other : lo.gen;
        } else if (hi.other == lo.gen || hi.other == lo.other) {
            shared = hi.other;
            b = hi.gen;
            a = (lo.gen == shared) ? lo.other : lo.gen;
        } else {
            throw InternalError("consecutive chords share no endpoint");
        }
        if (!adjacent(a, b)) {
            throw InternalError("slab between chords is not a triangle");
        }
        tris.push_back({shared, a, b});
    }

    const Chord& top = f.chords.back();
    PointId shared_corner, free_end;
    if (top.gen == f.corner_left || top.gen == f.corner_right) {
        shared_corner = top.gen;
        free_end = top.other;
    } else if (top.other == f.corner_left || top.other == f.corner_right) {
        shared_corner = top.other;
        free_end = top.gen;
    } else {
        throw InternalError("top chord touches neither corner");
    }
    PointId far_corner = shared_corner == f.corner_left ? f.corner_right : f.corner_left;
    if (!adjacent(free_end, far_corner)) {
        throw InternalError("top slab is not a triangle");
    }
    tris.push_back({shared_corner, free_end, far_corner});
    return tris;
}

ChordDelta diff_chords(const std::vector<Chord>& before, const std::vector<Chord>& after) {
    auto key = [](const Chord& c) { return std::pair<PointId, PointId>(c.gen, c.other); };
    std::vector<Chord> b = before, a = after;
    auto less = [&](const Chord& x, const Chord& y) { return key(x) < key(y); };
    std::sort(b.begin(), b.end(), less);
    std::sort(a.begin(), a.end(), less);
    ChordDelta d;
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(d.removed), less);
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d.added), less);
    return d;
}

}  // namespace ktri
