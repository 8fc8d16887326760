#include "ktri/motion.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ktri/errors.hpp"
#include "ktri/kernel.hpp"

namespace ktri {

using json = nlohmann::ordered_json;

const TrajectoryPiece& piece_at(const Trajectory& traj, const Rat& t) {
    for (const TrajectoryPiece& p : traj.pieces) {
        if (p.t_begin <= t && t <= p.t_end) return p;
    }
    throw WindowError("time " + rat_to_string(t) + " not covered by trajectory");
}

Point2 eval_at(const Trajectory& traj, const Rat& t) {
    const TrajectoryPiece& p = piece_at(traj, t);
    return Point2{p.x.eval(t), p.y.eval(t)};
}

bool general_position_at(const Scenario& s, const Rat& t, std::string* why) {
    const int n = s.n;
    std::vector<Point2> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = eval_at(s.points[static_cast<std::size_t>(i)], t);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return pos[static_cast<std::size_t>(a)].x < pos[static_cast<std::size_t>(b)].x;
    });
    for (int i = 0; i + 1 < n; ++i) {
        int a = order[static_cast<std::size_t>(i)];
        int b = order[static_cast<std::size_t>(i + 1)];
        if (pos[static_cast<std::size_t>(a)].x == pos[static_cast<std::size_t>(b)].x) {
            if (why) {
                *why = "points " + std::to_string(a) + " and " + std::to_string(b) +
                       " share an x-coordinate";
            }
            return false;
        }
    }

    if (n <= kCollinearCheckLimit) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                for (int k = j + 1; k < n; ++k) {
                    if (orient(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)],
                               pos[static_cast<std::size_t>(k)]) == kZero) {
                        if (why) {
                            *why = "points " + std::to_string(i) + ", " + std::to_string(j) +
                                   ", " + std::to_string(k) + " are collinear";
                        }
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

namespace {

json rat_json(const Rat& r) {
    if (r.get_den() == 1 && r.get_num().fits_slong_p()) {
        long v = r.get_num().get_si();
        if (v <= (1L << 53) && v >= -(1L << 53)) return json(v);
    }
    return json(rat_to_string(r));
}

Rat rat_from_json(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Rat(static_cast<long>(j.get<std::int64_t>()));
    if (j.is_number_unsigned()) {
        std::uint64_t u = j.get<std::uint64_t>();
        mpz_class z;
        mpz_import(z.get_mpz_t(), 1, 1, sizeof(u), 0, 0, &u);
        return Rat(z);
    }
    if (j.is_string()) {
        auto r = parse_rat(j.get<std::string>());
        if (!r) throw ParseError(where + ": bad rational literal '" + j.get<std::string>() + "'");
        return *r;
    }
    throw ParseError(where + ": expected integer or rational string");
}

json poly_json(const Poly& p) {
    json arr = json::array();
    if (p.is_zero()) {
        arr.push_back(0);
        return arr;
    }
    for (int i = 0; i <= p.degree(); ++i) arr.push_back(rat_json(p[i]));
    return arr;
}

Poly poly_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ParseError(where + ": expected coefficient array");
    std::vector<Rat> coeffs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        coeffs.push_back(rat_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    }
    Poly p(std::move(coeffs));
    if (p.degree() > kMaxMotionDegree) {
        throw ParseError(where + ": coordinate degree " + std::to_string(p.degree()) +
                         " exceeds " + std::to_string(kMaxMotionDegree));
    }
    return p;
}

void validate_scenario(const Scenario& s) {
    if (s.n < 1) throw ParseError("n must be at least 1");
    if (static_cast<int>(s.points.size()) != s.n) {
        throw ParseError("points array length does not match n");
    }
    if (!(s.t0 < s.t1)) throw ParseError("window must satisfy t0 < t1");
    for (int i = 0; i < s.n; ++i) {
        const Trajectory& tr = s.points[static_cast<std::size_t>(i)];
        const std::string where = "points[" + std::to_string(i) + "]";
        if (tr.pieces.empty()) throw ParseError(where + ": no pieces");
        if (tr.pieces.front().t_begin > s.t0 || tr.pieces.back().t_end < s.t1) {
            throw ParseError(where + ": pieces do not cover the window");
        }
        for (std::size_t k = 0; k < tr.pieces.size(); ++k) {
            const TrajectoryPiece& p = tr.pieces[k];
            if (!(p.t_begin < p.t_end)) {
                throw ParseError(where + ": piece " + std::to_string(k) + " has empty interval");
            }
            if (k > 0) {
                const TrajectoryPiece& prev = tr.pieces[k - 1];
                if (prev.t_end != p.t_begin) {
                    throw ParseError(where + ": pieces " + std::to_string(k - 1) + " and " +
                                     std::to_string(k) + " are not contiguous");
                }
                if (prev.x.eval(p.t_begin) != p.x.eval(p.t_begin) ||
                    prev.y.eval(p.t_begin) != p.y.eval(p.t_begin)) {
                    throw ParseError(where + ": discontinuity at piece " + std::to_string(k));
                }
            }
        }
    }
}

std::mt19937_64 engine_for(std::uint64_t seed) { return std::mt19937_64(seed); }

// Uniform dyadic rational in [0, 1) with 24 fractional bits.
Rat rand_unit(std::mt19937_64& eng) {
    unsigned long k = static_cast<unsigned long>(eng() >> 40);
    Rat r(static_cast<long>(k), 1L << 24);
    r.canonicalize();
    return r;
}

// Uniform dyadic rational in [-1, 1).
Rat rand_sym(std::mt19937_64& eng) { return rand_unit(eng) * 2 - 1; }

void jitter_positions(Scenario& s, std::mt19937_64& eng) {
    const Rat unit = Rat(1, 1000000000);  // 1e-9
    for (Trajectory& tr : s.points) {
        Rat dx = rand_sym(eng) * unit;
        Rat dy = rand_sym(eng) * unit;
        for (TrajectoryPiece& p : tr.pieces) {
            p.x = p.x + Poly::constant(dx);
            p.y = p.y + Poly::constant(dy);
        }
    }
}

}  // namespace

std::string save_scenario(const Scenario& s) {
    json j;
    j["n"] = s.n;
    j["window"] = json::array({rat_json(s.t0), rat_json(s.t1)});
    j["seed"] = s.seed;
    j["label"] = s.label;
    json pts = json::array();
    for (const Trajectory& tr : s.points) {
        json pieces = json::array();
        for (const TrajectoryPiece& p : tr.pieces) {
            json piece;
            piece["interval"] = json::array({rat_json(p.t_begin), rat_json(p.t_end)});
            piece["x"] = poly_json(p.x);
            piece["y"] = poly_json(p.y);
            pieces.push_back(std::move(piece));
        }
        json pt;
        pt["pieces"] = std::move(pieces);
        pts.push_back(std::move(pt));
    }
    j["points"] = std::move(pts);
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& text, DegeneracyPolicy policy) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw ParseError("top level must be an object");

    Scenario s;
    try {
        s.n = j.at("n").get<int>();
        const json& w = j.at("window");
        if (!w.is_array() || w.size() != 2) throw ParseError("window must be [t0, t1]");
        s.t0 = rat_from_json(w[0], "window[0]");
        s.t1 = rat_from_json(w[1], "window[1]");
        s.seed = j.value("seed", std::uint64_t{0});
        s.label = j.value("label", std::string{});
        const json& pts = j.at("points");
        if (!pts.is_array()) throw ParseError("points must be an array");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string where = "points[" + std::to_string(i) + "]";
            const json& pieces = pts[i].at("pieces");
            if (!pieces.is_array()) throw ParseError(where + ".pieces must be an array");
            Trajectory tr;
            for (std::size_t k = 0; k < pieces.size(); ++k) {
                const json& pj = pieces[k];
                const std::string pw = where + ".pieces[" + std::to_string(k) + "]";
                const json& iv = pj.at("interval");
                if (!iv.is_array() || iv.size() != 2) {
                    throw ParseError(pw + ".interval must be [a, b]");
                }
                TrajectoryPiece piece;
                piece.t_begin = rat_from_json(iv[0], pw + ".interval[0]");
                piece.t_end = rat_from_json(iv[1], pw + ".interval[1]");
                piece.x = poly_from_json(pj.at("x"), pw + ".x");
                piece.y = poly_from_json(pj.at("y"), pw + ".y");
                tr.pieces.push_back(std::move(piece));
            }
            s.points.push_back(std::move(tr));
        }
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }

    validate_scenario(s);

    std::string why;
    if (!general_position_at(s, s.t0, &why)) {
        if (policy == DegeneracyPolicy::kReject) throw DegeneracyError(why + " at t0");
        std::mt19937_64 eng = engine_for(s.seed ^ 0xa5c1e5u);
        bool fixed = false;
        for (int attempt = 0; attempt < 64; ++attempt) {
            jitter_positions(s, eng);
            if (general_position_at(s, s.t0, &why)) {
                fixed = true;
                break;
            }
        }
        if (!fixed) throw DegeneracyError("still degenerate after jitter: " + why);
    }
    return s;
}

Scenario gen_random_scenario(int n, std::uint64_t seed, MotionModel model,
                             const Rat& t0, const Rat& t1, DegeneracyPolicy policy) {
    if (n < 1) throw std::invalid_argument("gen_random_scenario: n must be positive");
    if (!(t0 < t1)) throw std::invalid_argument("gen_random_scenario: bad window");

    Scenario s;
    s.n = n;
    s.t0 = t0;
    s.t1 = t1;
    s.seed = seed;
    {
        std::ostringstream lbl;
        lbl << (model == MotionModel::kLinear ? "linear" : "quadratic") << "-n" << n << "-s"
            << seed;
        s.label = lbl.str();
    }

    std::mt19937_64 eng = engine_for(seed);
    for (int i = 0; i < n; ++i) {
        Rat x0 = rand_unit(eng);
        Rat y0 = rand_unit(eng);
        Rat vx = rand_sym(eng);
        Rat vy = rand_sym(eng);
        Rat ax = 0, ay = 0;
        if (model == MotionModel::kQuadratic) {
            ax = rand_sym(eng);
            ay = rand_sym(eng);
        }
        // Position p0 + v*(t - t0) + a*(t - t0)^2, expanded in t.
        TrajectoryPiece piece;
        piece.t_begin = t0;
        piece.t_end = t1;
        piece.x = Poly({x0 - vx * t0 + ax * t0 * t0, vx - 2 * ax * t0, ax});
        piece.y = Poly({y0 - vy * t0 + ay * t0 * t0, vy - 2 * ay * t0, ay});
        Trajectory tr;
        tr.pieces.push_back(std::move(piece));
        s.points.push_back(std::move(tr));
    }

    std::string why;
    if (!general_position_at(s, t0, &why)) {
        if (policy == DegeneracyPolicy::kReject) throw DegeneracyError(why + " at t0");
        std::mt19937_64 jit = engine_for(seed ^ 0xd1f7u);
        bool fixed = false;
        for (int attempt = 0; attempt < 64; ++attempt) {
            jitter_positions(s, jit);
            if (general_position_at(s, t0, &why)) {
                fixed = true;
                break;
            }
        }
        if (!fixed) throw DegeneracyError("still degenerate after jitter: " + why);
    }
    return s;
}

PriorityAssignment draw_priorities(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("draw_priorities: n must be positive");
    std::vector<std::int32_t> ranks(static_cast<std::size_t>(n));
    std::iota(ranks.begin(), ranks.end(), 1);
    std::mt19937_64 eng = engine_for(seed);
    for (int i = n - 1; i > 0; --i) {
        std::uint64_t r = eng() % static_cast<std::uint64_t>(i + 1);
        std::swap(ranks[static_cast<std::size_t>(i)], ranks[static_cast<std::size_t>(r)]);
    }
    PriorityAssignment pa;
    pa.rank_of = std::move(ranks);
    return pa;
}

}  // namespace ktri
