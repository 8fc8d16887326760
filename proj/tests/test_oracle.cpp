#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <vector>

#include "ktri/errors.hpp"
#include "ktri/motion.hpp"
#include "ktri/oracle.hpp"

using namespace ktri;

namespace {

Trajectory constant_traj(const Rat& x, const Rat& y, const Rat& t0, const Rat& t1) {
    Trajectory tr;
    tr.pieces.push_back(TrajectoryPiece{t0, t1, Poly::constant(x), Poly::constant(y)});
    return tr;
}

Trajectory moving_traj(Poly x, Poly y, const Rat& t0, const Rat& t1) {
    Trajectory tr;
    tr.pieces.push_back(TrajectoryPiece{t0, t1, std::move(x), std::move(y)});
    return tr;
}

Scenario pinned_scenario(const std::vector<std::array<long, 2>>& pts) {
    Scenario s;
    s.n = static_cast<int>(pts.size());
    s.t0 = 0;
    s.t1 = 1;
    s.label = "pinned";
    for (const auto& p : pts) {
        s.points.push_back(constant_traj(make_rat(p[0]), make_rat(p[1]), s.t0, s.t1));
    }
    return s;
}

PriorityAssignment ranks(std::vector<std::int32_t> r) { return PriorityAssignment{std::move(r)}; }

// Hull membership by the direct definition: a point is off the upper hull
// exactly when some pair straddling it in x covers it from above (or through
// it).  Cubic, so only used at small n to vouch for the monotone scan.
std::vector<PointId> exclusion_upper(const std::vector<Point2>& pos) {
    std::vector<PointId> ids(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) ids[i] = static_cast<PointId>(i);
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

std::vector<Point2> positions_at(const Scenario& s, const Rat& t) {
    std::vector<Point2> pos;
    for (const Trajectory& tr : s.points) pos.push_back(eval_at(tr, t));
    return pos;
}

Rat doubled_area(const Point2& a, const Point2& b, const Point2& c) {
    Rat d = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return d < 0 ? Rat(-d) : d;
}

// Doubled area of the convex-hull polygon: lower chain left to right, upper
// chain right to left.
Rat doubled_hull_area(const StaticSnapshot& snap, const std::vector<Point2>& pos) {
    std::vector<PointId> ring(snap.hull_lower.begin(), snap.hull_lower.end());
    for (auto it = snap.hull_upper.rbegin(); it != snap.hull_upper.rend(); ++it) {
        if (*it != ring.back() && *it != ring.front()) ring.push_back(*it);
    }
    Rat twice = 0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point2& a = pos[ring[i]];
        const Point2& b = pos[ring[(i + 1) % ring.size()]];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice < 0 ? Rat(-twice) : twice;
}

std::size_t hull_vertex_count(const StaticSnapshot& snap) {
    std::set<PointId> hv(snap.hull_upper.begin(), snap.hull_upper.end());
    hv.insert(snap.hull_lower.begin(), snap.hull_lower.end());
    return hv.size();
}

}  // namespace

TEST_CASE("three points pin down the single triangle") {
    Scenario s = pinned_scenario({{0, 0}, {1, 2}, {2, 0}});
    StaticSnapshot expect;
    expect.triangles = {{0, 1, 2}};
    expect.hull_upper = {0, 1, 2};
    expect.hull_lower = {0, 2};
    for (std::vector<std::int32_t> r :
         {std::vector<std::int32_t>{1, 2, 3}, {2, 1, 3}, {3, 2, 1}}) {
        StaticSnapshot snap = reference_snapshot(s, ranks(r), make_rat(1, 2));
        CHECK(snap == expect);
    }
}

TEST_CASE("four points with a shadowed root split by one chord") {
    Scenario s = pinned_scenario({{0, 8}, {2, 7}, {4, 4}, {6, 10}});
    StaticSnapshot snap = reference_snapshot(s, ranks({3, 2, 1, 4}), make_rat(1, 2));
    std::vector<std::array<PointId, 3>> expect = {{0, 1, 2}, {0, 1, 3}, {1, 2, 3}};
    CHECK(snap.triangles == expect);
    CHECK(snap.hull_upper == std::vector<PointId>{0, 3});
    CHECK(snap.hull_lower == std::vector<PointId>{0, 2, 3});
}

TEST_CASE("snapshot hulls agree with the pairwise-exclusion definition") {
    int checked = 0;
    for (unsigned seed = 1; seed <= 12; ++seed) {
        const int n = 6 + static_cast<int>(seed % 3) * 4;
        Scenario s = gen_random_scenario(n, seed, MotionModel::kLinear, 0, 1);
        PriorityAssignment pr = draw_priorities(n, seed * 31 + 7);
        for (long num : {1L, 2L, 3L}) {
            const Rat t = make_rat(num, 4);
            if (!general_position_at(s, t)) continue;
            std::vector<Point2> pos = positions_at(s, t);
            StaticSnapshot snap = reference_snapshot(s, pr, t);
            CHECK(snap.hull_upper == exclusion_upper(pos));
            std::vector<Point2> mirrored = pos;
            for (Point2& p : mirrored) p.y = -p.y;
            CHECK(snap.hull_lower == exclusion_upper(mirrored));
            ++checked;
        }
    }
    CHECK(checked >= 30);
}

TEST_CASE("snapshot triangles tile the hull exactly") {
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const int n = 5 + static_cast<int>(seed);
        Scenario s = gen_random_scenario(n, seed ^ 0xa5u, MotionModel::kLinear, 0, 1);
        PriorityAssignment pr = draw_priorities(n, seed * 977 + 5);
        const Rat t = make_rat(1, 3);
        if (!general_position_at(s, t)) continue;
        std::vector<Point2> pos = positions_at(s, t);
        StaticSnapshot snap = reference_snapshot(s, pr, t);

        const std::size_t h = hull_vertex_count(snap);
        REQUIRE(snap.triangles.size() == static_cast<std::size_t>(2 * n) - h - 2);

        CHECK(std::is_sorted(snap.triangles.begin(), snap.triangles.end()));
        CHECK(std::adjacent_find(snap.triangles.begin(), snap.triangles.end()) ==
              snap.triangles.end());
        Rat total = 0;
        for (const auto& tri : snap.triangles) {
            REQUIRE(tri[0] < tri[1]);
            REQUIRE(tri[1] < tri[2]);
            Rat a2 = doubled_area(pos[tri[0]], pos[tri[1]], pos[tri[2]]);
            REQUIRE(a2 > 0);
            total += a2;
        }
        CHECK(total == doubled_hull_area(snap, pos));
    }
}

TEST_CASE("snapshots are constant strictly between candidate times") {
    for (unsigned seed = 2; seed <= 7; ++seed) {
        const MotionModel model = seed % 2 == 0 ? MotionModel::kLinear : MotionModel::kQuadratic;
        Scenario s = gen_random_scenario(6, seed * 131, model, 0, 1);
        PriorityAssignment pr = draw_priorities(6, seed);
        std::vector<EventTime> ct = candidate_times(s);
        std::vector<Rat> samples = gap_samples(ct, s.t0, s.t1, 3);
        REQUIRE(samples.size() == (ct.size() + 1) * 3);
        for (std::size_t g = 0; g * 3 < samples.size(); ++g) {
            StaticSnapshot first = reference_snapshot(s, pr, samples[g * 3]);
            for (std::size_t k = 1; k < 3; ++k) {
                CHECK(reference_snapshot(s, pr, samples[g * 3 + k]) == first);
            }
        }
    }
}

TEST_CASE("snapshot construction is deterministic") {
    Scenario s = gen_random_scenario(9, 42, MotionModel::kLinear, 0, 1);
    PriorityAssignment pr = draw_priorities(9, 17);
    const Rat t = make_rat(2, 5);
    REQUIRE(general_position_at(s, t));
    CHECK(reference_snapshot(s, pr, t) == reference_snapshot(s, pr, t));
}

TEST_CASE("candidate times catch a pinned x swap") {
    Scenario s;
    s.n = 2;
    s.t0 = 0;
    s.t1 = 1;
    s.points.push_back(moving_traj(Poly{0, 1}, Poly::constant(0), 0, 1));
    s.points.push_back(moving_traj(Poly{1, -1}, Poly::constant(1), 0, 1));
    std::vector<EventTime> ct = candidate_times(s);
    REQUIRE(ct.size() == 1);
    CHECK(compare_rat_time(make_rat(1, 2), ct[0]) == 0);
}

TEST_CASE("candidate times catch a pinned collinearity and dedupe shared roots") {
    Scenario s;
    s.n = 4;
    s.t0 = 0;
    s.t1 = 1;
    s.points.push_back(constant_traj(0, 0, 0, 1));
    s.points.push_back(constant_traj(2, 0, 0, 1));
    s.points.push_back(moving_traj(Poly::constant(1), Poly{make_rat(-1, 4), 1}, 0, 1));
    s.points.push_back(moving_traj(Poly::constant(3), Poly{make_rat(-1, 4), 1}, 0, 1));
    std::vector<EventTime> ct = candidate_times(s);
    REQUIRE(ct.size() == 1);
    CHECK(compare_rat_time(make_rat(1, 4), ct[0]) == 0);
}

TEST_CASE("candidate times exclude roots on the window edge") {
    Scenario s;
    s.n = 3;
    s.t0 = make_rat(1, 4);
    s.t1 = 1;
    s.points.push_back(constant_traj(0, 0, 0, 1));
    s.points.push_back(constant_traj(2, 0, 0, 1));
    s.points.push_back(moving_traj(Poly::constant(1), Poly{make_rat(-1, 4), 1}, 0, 1));
    CHECK(candidate_times(s).empty());
}

TEST_CASE("gap samples stay inside open gaps") {
    Scenario s = gen_random_scenario(6, 913, MotionModel::kLinear, 0, 1);
    std::vector<EventTime> ct = candidate_times(s);
    REQUIRE(!ct.empty());
    std::vector<Rat> samples = gap_samples(ct, s.t0, s.t1, 2);
    REQUIRE(samples.size() == (ct.size() + 1) * 2);
    CHECK(std::is_sorted(samples.begin(), samples.end()));
    for (std::size_t i = 1; i < ct.size(); ++i) CHECK(ct[i - 1].hi < ct[i].lo);
    for (const Rat& t : samples) {
        CHECK(s.t0 < t);
        CHECK(t < s.t1);
        for (EventTime& e : ct) {
            CHECK((t < e.lo || e.hi < t));
        }
    }
}

TEST_CASE("gap samples with no candidate times split the whole window") {
    std::vector<EventTime> none;
    std::vector<Rat> samples = gap_samples(none, 0, 1, 3);
    std::vector<Rat> expect = {make_rat(1, 4), make_rat(1, 2), make_rat(3, 4)};
    CHECK(samples == expect);
}

TEST_CASE("gap samples refuse duplicate exact candidate times") {
    std::vector<EventTime> twice = {EventTime::at(make_rat(1, 2)), EventTime::at(make_rat(1, 2))};
    CHECK_THROWS_AS(gap_samples(twice, 0, 1, 1), InternalError);
}
