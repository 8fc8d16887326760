#include "ktri/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "ktri/errors.hpp"
#include "ktri/oracle.hpp"

namespace ktri {

namespace {

// True when `text`, read back as a plain decimal, equals `r` exactly.
bool decimal_equals(const std::string& text, const Rat& r) {
    std::string digits = text;
    int frac = 0;
    const std::size_t dot = digits.find('.');
    if (dot != std::string::npos) {
        frac = static_cast<int>(digits.size() - dot - 1);
        digits.erase(dot, 1);
    }
    Rat v{mpz_class(digits)};
    for (int i = 0; i < frac; ++i) v /= 10;
    return v == r;
}

// Decimal form of an event time plus its exactness flag.  The bracket is
// narrowed until it pins the requested significant digits or collapses to a
// rational; only a collapsed bracket whose decimal loses nothing is exact.
std::pair<std::string, bool> render_time(const EventTime& when, int digits) {
    EventTime e = when;
    Rat tol = 1;
    for (int i = 0; i < digits + 2; ++i) tol /= 10;
    while (!e.exact() && e.width() >= tol) refine_once(e);
    Rat value;
    if (e.exact()) {
        value = e.lo;
    } else {
        value = (e.lo + e.hi) / 2;
    }
    std::string text = rat_to_decimal(value, digits);
    return {text, e.exact() && decimal_equals(text, value)};
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

int max_element_or_zero(const std::vector<int>& v) {
    return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const char* model_name(MotionModel m) {
    return m == MotionModel::kLinear ? "linear" : "quadratic";
}

}  // namespace

Scenario config_scenario(const RunConfig& cfg) {
    if (!cfg.scenario_file.empty()) {
        std::ifstream in(cfg.scenario_file);
        if (!in) throw ParseError("cannot open scenario file: " + cfg.scenario_file);
        std::stringstream buf;
        buf << in.rdbuf();
        return load_scenario(buf.str());
    }
    if (cfg.gen_n < 2) {
        throw ParseError("no scenario source: give --scenario FILE or --gen n,seed,model with n >= 2");
    }
    return gen_random_scenario(cfg.gen_n, cfg.gen_seed, cfg.gen_model, make_rat(0), make_rat(1),
                               cfg.strict_degeneracy ? DegeneracyPolicy::kReject
                                                     : DegeneracyPolicy::kPerturb);
}

void resolve_window(const RunConfig& cfg, const Scenario& s, Rat* a, Rat* b) {
    if (!cfg.has_window) {
        *a = s.t0;
        *b = s.t1;
        return;
    }
    if (cfg.window_a < s.t0 || cfg.window_b > s.t1 || !(cfg.window_a < cfg.window_b)) {
        throw WindowError("requested window does not sit inside the scenario window");
    }
    *a = cfg.window_a;
    *b = cfg.window_b;
}

RunOutcome run_window(const Scenario& s, const PriorityAssignment& pr, const Rat& a, const Rat& b,
                      bool deep_verify) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome oc;
    KineticState& st = oc.state;
    st = kinetic_init(s, pr);
    if (a != s.t0) {
        advance_to(st, a);
        st.log.clear();
        st.stats = {};
    }
    st.verify_each_event = deep_verify;

    RunStats& rs = oc.stats;
    auto merge_census = [&rs](const CertCensus& c) {
        rs.entities_peak = std::max(rs.entities_peak, c.storage_entities);
        rs.queued_peak = std::max(rs.queued_peak, c.queued);
        rs.max_point_swap_certs = std::max(rs.max_point_swap_certs, max_element_or_zero(c.swap_count));
        for (const std::vector<int>& side : c.vis_in_own_funnel) {
            rs.max_point_vis_roles = std::max(rs.max_point_vis_roles, max_element_or_zero(side));
        }
    };
    const CertCensus initial = certificate_census(st);
    rs.entities_initial = initial.storage_entities;
    merge_census(initial);
    st.on_batch = [&merge_census](const KineticState& k) { merge_census(certificate_census(k)); };
    advance_to(st, b);
    st.on_batch = nullptr;

    rs.n = s.n;
    for (const EventRecord& r : st.log) {
        switch (r.kind) {
            case EventKind::kSwap: ++rs.swap_events; break;
            case EventKind::kBridge: ++rs.bridge_events; break;
            case EventKind::kVisibility: ++rs.vis_events; break;
        }
        rs.chords_removed += r.chords_removed;
        rs.chords_added += r.chords_added;
        const long long delta = r.chords_removed + r.chords_added;
        rs.max_changes_per_event = std::max(rs.max_changes_per_event, delta);
    }
    rs.events_total = rs.swap_events + rs.bridge_events + rs.vis_events;
    rs.discrete_changes = rs.events_total + rs.chords_removed + rs.chords_added;
    if (rs.events_total > 0) {
        rs.mean_changes_per_event =
            static_cast<double>(rs.chords_removed + rs.chords_added) /
            static_cast<double>(rs.events_total);
    }
    if (rs.swap_events != st.stats.swap_events || rs.bridge_events != st.stats.bridge_events ||
        rs.vis_events != st.stats.vis_events || rs.chords_removed != st.stats.chords_removed ||
        rs.chords_added != st.stats.chords_added) {
        throw InternalError("run statistics disagree with the event log");
    }
    rs.census = certificate_census(st);
    merge_census(rs.census);
    rs.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
    return oc;
}

void write_events_csv(std::ostream& os, const KineticState& st, int digits) {
    os << "event,time,exact,kind,side,ids,chords_removed,chords_added,wall_ns\n";
    std::size_t index = 0;
    for (const EventRecord& r : st.log) {
        const auto [text, exact] = render_time(r.when, digits);
        os << index++ << ',' << text << ',' << (exact ? 1 : 0) << ',' << event_kind_name(r.kind)
           << ',' << r.side << ',';
        for (std::size_t k = 0; k < r.ids.size(); ++k) {
            if (k > 0) os << ';';
            os << r.ids[k];
        }
        os << ',' << r.chords_removed << ',' << r.chords_added << ',' << r.wall_ns << '\n';
    }
}

void write_stats(std::ostream& os, const RunStats& rs) {
    os << "bridge_events=" << rs.bridge_events << '\n';
    os << "chords_added=" << rs.chords_added << '\n';
    os << "chords_removed=" << rs.chords_removed << '\n';
    os << "discrete_changes=" << rs.discrete_changes << '\n';
    os << "entities_initial=" << rs.entities_initial << '\n';
    os << "entities_peak=" << rs.entities_peak << '\n';
    os << "events_total=" << rs.events_total << '\n';
    os << "max_changes_per_event=" << rs.max_changes_per_event << '\n';
    os << "max_point_swap_certs=" << rs.max_point_swap_certs << '\n';
    os << "max_point_vis_roles=" << rs.max_point_vis_roles << '\n';
    os << "mean_changes_per_event=" << fixed6(rs.mean_changes_per_event) << '\n';
    os << "n=" << rs.n << '\n';
    os << "queued_certs=" << rs.census.queued << '\n';
    os << "queued_peak=" << rs.queued_peak << '\n';
    os << "storage_entities=" << rs.census.storage_entities << '\n';
    os << "swap_events=" << rs.swap_events << '\n';
    os << "vis_events=" << rs.vis_events << '\n';
    os << "wall_ns=" << rs.wall_ns << '\n';
}

namespace {

void write_run_files(const RunConfig& cfg, const RunOutcome& oc) {
    if (cfg.out_dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    std::ofstream ev(fs::path(cfg.out_dir) / "events.csv");
    write_events_csv(ev, oc.state, cfg.time_digits);
    std::ofstream stx(fs::path(cfg.out_dir) / "stats.txt");
    write_stats(stx, oc.stats);
    if (!ev || !stx) throw Error("failed to write output files under " + cfg.out_dir);
}

// One verify pass over one scenario; returns the number of failed checks and
// prints a reproducer command for each.
int verify_one(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Scenario s = config_scenario(cfg);
    const PriorityAssignment pr = draw_priorities(s.n, cfg.priority_seed);
    Rat a, b;
    resolve_window(cfg, s, &a, &b);

    int bad = 0;
    auto reproducer = [&](const Rat& t) { err << "  " << reproducer_command(cfg, a, b, t) << '\n'; };

    // Random general-position probe times, advanced to in time order.
    std::mt19937_64 rng(s.seed ^ (cfg.priority_seed * 0x9e3779b97f4a7c15ULL));
    const int kGrid = 1 << 20;
    std::uniform_int_distribution<int> pick(1, kGrid - 1);
    std::vector<Rat> probes;
    const Rat span = b - a;
    for (int attempts = 0;
         static_cast<int>(probes.size()) < cfg.samples && attempts < 50 * cfg.samples; ++attempts) {
        Rat t = a + span * make_rat(pick(rng), kGrid);
        if (!general_position_at(s, t)) continue;
        probes.push_back(std::move(t));
    }
    if (static_cast<int>(probes.size()) < cfg.samples) {
        ++bad;
        err << "could not place " << cfg.samples << " general-position probes in the window\n";
        reproducer(a);
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

    Rat progress = a;
    std::size_t events_seen = 0;
    try {
        KineticState st = kinetic_init(s, pr);
        st.verify_each_event = true;
        if (a != s.t0) advance_to(st, a);
        for (const Rat& t : probes) {
            advance_to(st, t);
            progress = t;
            if (extract_snapshot(st) != reference_snapshot(s, pr, t)) {
                ++bad;
                err << "maintained structure differs from the reference at t=" << rat_to_string(t)
                    << '\n';
                reproducer(t);
            }
        }
        advance_to(st, b);
        events_seen = st.log.size();

        // Small scenarios afford the exhaustive check: between consecutive
        // candidate times the snapshot must be constant and equal to the
        // maintained structure.
        if (s.n <= 10) {
            std::vector<EventTime> cands = candidate_times(s);
            std::vector<Rat> grid = gap_samples(cands, a, b, 3);
            KineticState st2 = kinetic_init(s, pr);
            if (a != s.t0) advance_to(st2, a);
            for (std::size_t i = 0; i + 2 < grid.size(); i += 3) {
                const StaticSnapshot s1 = reference_snapshot(s, pr, grid[i]);
                const StaticSnapshot s2 = reference_snapshot(s, pr, grid[i + 1]);
                const StaticSnapshot s3 = reference_snapshot(s, pr, grid[i + 2]);
                progress = grid[i + 1];
                if (!(s1 == s2 && s2 == s3)) {
                    ++bad;
                    err << "snapshots vary inside the candidate gap around t="
                        << rat_to_string(grid[i + 1]) << '\n';
                    reproducer(grid[i + 1]);
                }
                advance_to(st2, grid[i + 1]);
                if (extract_snapshot(st2) != s2) {
                    ++bad;
                    err << "maintained structure differs from the reference at t="
                        << rat_to_string(grid[i + 1]) << '\n';
                    reproducer(grid[i + 1]);
                }
            }
        }
    } catch (const Error& e) {
        ++bad;
        err << "self-check failure after t=" << rat_to_string(progress) << ": " << e.what() << '\n';
        reproducer(progress);
    }

    out << "verify n=" << s.n << " seed=" << s.seed << " probes=" << probes.size()
        << " events=" << events_seen << (bad == 0 ? " ok" : " FAIL") << '\n';
    return bad;
}

}  // namespace

std::string reproducer_command(const RunConfig& cfg, const Rat& a, const Rat& b, const Rat& t) {
    std::ostringstream os;
    os << "reproduce: ktri --mode verify";
    if (!cfg.scenario_file.empty()) {
        os << " --scenario " << cfg.scenario_file;
    } else {
        os << " --gen " << cfg.gen_n << ',' << cfg.gen_seed << ',' << model_name(cfg.gen_model);
    }
    os << " --priority-seed " << cfg.priority_seed << " --samples " << cfg.samples << " --window "
       << rat_to_string(a) << ',' << rat_to_string(b) << "   # fails at t=" << rat_to_string(t);
    return os.str();
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const Scenario s = config_scenario(cfg);
    const PriorityAssignment pr = draw_priorities(s.n, cfg.priority_seed);
    Rat a, b;
    resolve_window(cfg, s, &a, &b);
    const RunOutcome oc = run_window(s, pr, a, b, false);
    write_stats(out, oc.stats);
    write_run_files(cfg, oc);
    return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (seeds.empty() || !cfg.scenario_file.empty()) seeds.assign(1, cfg.gen_seed);
    int failures = 0;
    for (std::uint64_t seed : seeds) {
        RunConfig one = cfg;
        one.gen_seed = seed;
        failures += verify_one(one, out, err);
    }
    out << (failures == 0 ? "verify passed" : "verify FAILED") << '\n';
    return failures == 0 ? 0 : 1;
}

int cmd_scale(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    std::vector<int> sizes = cfg.sizes;
    if (sizes.empty()) sizes = {32, 64, 128, 256};
    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (seeds.empty()) {
        for (std::uint64_t k = 1; k <= 10; ++k) seeds.push_back(k);
    }

    struct Row {
        int n = 0;
        std::uint64_t seed = 0;
        RunStats rs;
    };
    std::vector<Row> rows;
    for (int n : sizes) {
        for (std::uint64_t seed : seeds) {
            const Scenario s = gen_random_scenario(n, seed, cfg.gen_model, make_rat(0), make_rat(1),
                                                   cfg.strict_degeneracy
                                                       ? DegeneracyPolicy::kReject
                                                       : DegeneracyPolicy::kPerturb);
            const PriorityAssignment pr = draw_priorities(n, cfg.priority_seed + seed);
            Rat a, b;
            resolve_window(cfg, s, &a, &b);
            rows.push_back({n, seed, run_window(s, pr, a, b, false).stats});
        }
    }

    std::vector<double> log_n, log_events, log_changes, per_event, entities_per_point;
    for (int n : sizes) {
        double events = 0, changes = 0, churn = 0, entities = 0;
        int count = 0;
        for (const Row& r : rows) {
            if (r.n != n) continue;
            events += static_cast<double>(r.rs.events_total);
            changes += static_cast<double>(r.rs.discrete_changes);
            churn += r.rs.mean_changes_per_event;
            entities += static_cast<double>(r.rs.entities_peak);
            ++count;
        }
        events /= count;
        changes /= count;
        churn /= count;
        entities /= count;
        log_n.push_back(std::log2(static_cast<double>(n)));
        log_events.push_back(std::log2(events));
        log_changes.push_back(std::log2(changes));
        per_event.push_back(churn);
        entities_per_point.push_back(entities / static_cast<double>(n));
        out << "n=" << n << " runs=" << count << " mean_events=" << fixed6(events)
            << " mean_discrete_changes=" << fixed6(changes)
            << " mean_changes_per_event=" << fixed6(churn)
            << " mean_entities_peak_per_point=" << fixed6(entities / n) << '\n';
    }
    if (sizes.size() >= 2) {
        out << "slope_events_vs_n=" << fixed6(fit_slope(log_n, log_events)) << '\n';
        out << "slope_discrete_changes_vs_n=" << fixed6(fit_slope(log_n, log_changes)) << '\n';
        out << "slope_changes_per_event_vs_log_n=" << fixed6(fit_slope(log_n, per_event)) << '\n';
    } else {
        out << "slope_events_vs_n=n/a\n";
        out << "slope_discrete_changes_vs_n=n/a\n";
        out << "slope_changes_per_event_vs_log_n=n/a\n";
    }

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        std::ofstream csv(fs::path(cfg.out_dir) / "scale.csv");
        csv << "n,seed,swap_events,bridge_events,vis_events,events_total,chords_removed,"
               "chords_added,discrete_changes,mean_changes_per_event,entities_peak,wall_ns\n";
        for (const Row& r : rows) {
            csv << r.n << ',' << r.seed << ',' << r.rs.swap_events << ',' << r.rs.bridge_events
                << ',' << r.rs.vis_events << ',' << r.rs.events_total << ',' << r.rs.chords_removed
                << ',' << r.rs.chords_added << ',' << r.rs.discrete_changes << ','
                << fixed6(r.rs.mean_changes_per_event) << ',' << r.rs.entities_peak << ','
                << r.rs.wall_ns << '\n';
        }
        if (!csv) throw Error("failed to write output files under " + cfg.out_dir);
    }
    return 0;
}

int cmd_census(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const Scenario s = config_scenario(cfg);
    const PriorityAssignment pr = draw_priorities(s.n, cfg.priority_seed);
    Rat a, b;
    resolve_window(cfg, s, &a, &b);
    const RunOutcome oc = run_window(s, pr, a, b, false);

    const TreeCensus upper = census(oc.state.tree[0]);
    const TreeCensus lower = census(oc.state.tree[1]);
    const RunStats& rs = oc.stats;
    write_stats(out, rs);
    out << "census_chain_vertices=" << upper.chain_vertices + lower.chain_vertices << '\n';
    out << "census_chords=" << upper.chords + lower.chords << '\n';
    out << "census_nodes=" << upper.nodes + lower.nodes << '\n';
    out << "census_certificates="
        << rs.census.swap_total + rs.census.bridge_total + rs.census.vis_total << '\n';
    out << "entities_peak_per_point="
        << fixed6(static_cast<double>(rs.entities_peak) / static_cast<double>(s.n)) << '\n';
    write_run_files(cfg, oc);
    return 0;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.mode) {
            case RunMode::kRun: return cmd_run(cfg, out, err);
            case RunMode::kVerify: return cmd_verify(cfg, out, err);
            case RunMode::kScale: return cmd_scale(cfg, out, err);
            case RunMode::kCensus: return cmd_census(cfg, out, err);
        }
        return 2;
    } catch (const InternalError& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 2;
    }
}

}  // namespace ktri
