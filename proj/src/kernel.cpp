#include "ktri/kernel.hpp"

#include <algorithm>
#include <cstddef>

#include "ktri/errors.hpp"

namespace ktri {

Sign orient(const Point2& a, const Point2& b, const Point2& c) {
    Rat det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return sign_of_rat(det);
}

Sign x_order(const Point2& a, const Point2& b) { return sign_of_rat(b.x - a.x); }

void refine_once(EventTime& e) {
    if (e.exact()) return;
    Rat m = (e.lo + e.hi) / 2;
    int sm = e.factor.sign_at(m);
    if (sm == 0) {
        e.lo = m;
        e.hi = m;
        return;
    }
    if (sm == e.factor.sign_at(e.lo)) {
        e.lo = m;
    } else {
        e.hi = m;
    }
}

void refine_below_width(EventTime& e, const Rat& w) {
    while (!e.exact() && e.width() > w) refine_once(e);
}

int compare_rat_time(const Rat& t, EventTime& e) {
    for (;;) {
        if (t < e.lo) return -1;
        if (t > e.hi) return 1;
        if (e.exact()) return 0;
        // t sits inside the bracket; it equals the root iff the factor
        // vanishes there (the bracket holds exactly one root).
        if (e.factor.sign_at(t) == 0) return 0;
        refine_once(e);
    }
}

int compare_times(EventTime& a, EventTime& b) {
    if (a.exact() && b.exact()) {
        if (a.lo < b.lo) return -1;
        return a.lo > b.lo ? 1 : 0;
    }
    if (a.exact()) return compare_rat_time(a.lo, b);
    if (b.exact()) return -compare_rat_time(b.lo, a);

    // Both are open brackets: roots lie strictly inside, so touching
    // intervals already separate the values.
    Poly g = poly_gcd(a.factor, b.factor);
    bool maybe_equal = g.degree() >= 1;
    for (;;) {
        if (a.hi <= b.lo) return -1;
        if (b.hi <= a.lo) return 1;
        if (maybe_equal) {
            Rat c = std::max(a.lo, b.lo);
            Rat d = std::min(a.hi, b.hi);
            int sc = g.sign_at(c);
            int sd = g.sign_at(d);
            // A root of g inside the overlap is a root of both factors,
            // hence the (unique) root of each bracket.
            if (sc == 0 || sd == 0 || sc != sd) return 0;
        }
        refine_once(a);
        refine_once(b);
        if (a.exact()) return compare_rat_time(a.lo, b);
        if (b.exact()) return -compare_rat_time(b.lo, a);
    }
}

namespace {

// g(a + s*x), expanded.
Poly compose_linear(const Poly& g, const Rat& a, const Rat& s) {
    Poly lin({a, s});
    Poly out;
    for (int i = g.degree(); i >= 0; --i) {
        out = out * lin + Poly::constant(g[i]);
    }
    return out;
}

int sign_variations_shifted(const Poly& g1) {
    // Coefficients of (1+y)^d * g1(1/(1+y)): reverse, then Taylor shift by 1.
    int d = g1.degree();
    std::vector<Rat> c(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) c[static_cast<std::size_t>(d - i)] = g1[i];
    for (int i = 0; i <= d; ++i) {
        for (int j = d - 1; j >= i; --j) {
            c[static_cast<std::size_t>(j)] += c[static_cast<std::size_t>(j) + 1];
        }
    }
    int variations = 0;
    int prev = 0;
    for (const Rat& v : c) {
        int s = sgn(v);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++variations;
        prev = s;
    }
    return variations;
}

// Number bound on roots of g in the open interval (lo, hi); exact when <= 1.
int descartes_bound(const Poly& g, const Rat& lo, const Rat& hi) {
    return sign_variations_shifted(compose_linear(g, lo, hi - lo));
}

constexpr int kMaxIsolationDepth = 512;

// Collects isolating brackets for all roots of square-free g in (lo, hi).
// Requires g(lo) != 0 and g(hi) != 0.
void isolate_open(const Poly& g, const Rat& lo, const Rat& hi, int depth,
                  std::vector<EventTime>& out) {
    if (g.degree() < 1) return;
    if (depth > kMaxIsolationDepth) {
        throw InternalError("root isolation depth exceeded");
    }
    int bound = descartes_bound(g, lo, hi);
    if (bound == 0) return;
    if (bound == 1) {
        EventTime e;
        e.factor = g;
        e.lo = lo;
        e.hi = hi;
        out.push_back(std::move(e));
        return;
    }
    Rat m = (lo + hi) / 2;
    if (g.sign_at(m) == 0) {
        out.push_back(EventTime::at(m));
        Poly rest = g.divide_exact(Poly::linear_root(m));
        isolate_open(rest, lo, m, depth + 1, out);
        isolate_open(rest, m, hi, depth + 1, out);
    } else {
        isolate_open(g, lo, m, depth + 1, out);
        isolate_open(g, m, hi, depth + 1, out);
    }
}

}  // namespace

std::vector<EventTime> isolate_roots(const Poly& f, const Rat& a, const Rat& b) {
    if (f.is_zero()) {
        throw DegenerateMotionError("predicate polynomial vanishes identically");
    }
    if (a > b) throw std::invalid_argument("isolate_roots: empty interval");
    std::vector<EventTime> out;
    if (f.degree() < 1) return out;
    std::vector<Poly> factors = square_free_decomposition(f);
    if (a == b) {
        if (f.sign_at(a) == 0) {
            EventTime e = EventTime::at(a);
            for (std::size_t k = 0; k < factors.size(); ++k) {
                if (factors[k].degree() >= 1 && factors[k].sign_at(a) == 0) {
                    e.even = (k + 1) % 2 == 0;
                    break;
                }
            }
            out.push_back(std::move(e));
        }
        return out;
    }

    for (std::size_t k = 0; k < factors.size(); ++k) {
        const Poly& fk = factors[k];
        if (fk.degree() < 1) continue;
        bool even = (k + 1) % 2 == 0;
        std::vector<EventTime> part;
        Poly g = fk;
        if (g.sign_at(a) == 0) {
            part.push_back(EventTime::at(a));
            g = g.divide_exact(Poly::linear_root(a));
        }
        bool root_at_b = g.sign_at(b) == 0;
        if (root_at_b) g = g.divide_exact(Poly::linear_root(b));
        isolate_open(g, a, b, 0, part);
        if (root_at_b) part.push_back(EventTime::at(b));
        for (EventTime& e : part) e.even = even;
        out.insert(out.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    std::sort(out.begin(), out.end(),
              [](EventTime& x, EventTime& y) { return compare_times(x, y) < 0; });
    return out;
}

Poly collinearity_poly(const TrajectoryPiece& p, const TrajectoryPiece& q,
                       const TrajectoryPiece& r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
}

std::vector<Rat> common_breakpoints(const std::vector<const Trajectory*>& trajs,
                                    const Rat& a, const Rat& b) {
    std::vector<Rat> cuts;
    cuts.push_back(a);
    for (const Trajectory* t : trajs) {
        for (const TrajectoryPiece& piece : t->pieces) {
            if (piece.t_begin > a && piece.t_begin < b) cuts.push_back(piece.t_begin);
            if (piece.t_end > a && piece.t_end < b) cuts.push_back(piece.t_end);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

namespace {

const TrajectoryPiece& piece_covering(const Trajectory& t, const Rat& lo, const Rat& hi) {
    Rat m = (lo + hi) / 2;
    return piece_at(t, m);
}

}  // namespace

std::vector<EventTime> x_swap_times(const Trajectory& pi, const Trajectory& pj,
                                    const Rat& a, const Rat& b) {
    return piecewise_roots({&pi, &pj}, a, b, [&](const Rat& lo, const Rat& hi) {
        return piece_covering(pj, lo, hi).x - piece_covering(pi, lo, hi).x;
    });
}

std::vector<EventTime> collinearity_times(const Trajectory& p, const Trajectory& q,
                                          const Trajectory& r, const Rat& a,
                                          const Rat& b) {
    return piecewise_roots({&p, &q, &r}, a, b, [&](const Rat& lo, const Rat& hi) {
        return collinearity_poly(piece_covering(p, lo, hi), piece_covering(q, lo, hi),
                                 piece_covering(r, lo, hi));
    });
}

namespace {

mpz_class floor_rat(const Rat& a) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_num_mpz_t(), a.get_den_mpz_t());
    return q;
}

// Continued-fraction descent for 0 <= a < b.
Rat simplest_pos(const Rat& a, const Rat& b) {
    const Rat fa(floor_rat(a));
    Rat next = fa + 1;
    if (next < b) return next;
    if (a == fa) {
        // The gap starts at an integer, so the answer is fa + 1/q for the
        // smallest q whose unit fraction fits below the width.
        return fa + Rat(1) / Rat(floor_rat(1 / (b - a)) + 1);
    }
    return fa + 1 / simplest_pos(1 / (b - fa), 1 / (a - fa));
}

}  // namespace

Rat simplest_rational_between(const Rat& a, const Rat& b) {
    if (!(a < b)) throw InternalError("simplest_rational_between needs a nonempty open interval");
    if (a < 0 && 0 < b) return Rat(0);
    if (a >= 0) return simplest_pos(a, b);
    return -simplest_pos(-b, -a);
}

}  // namespace ktri
