#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ktri/kds.hpp"
#include "ktri/motion.hpp"

namespace ktri {

enum class RunMode { kRun, kVerify, kScale, kCensus };

// Everything a command needs, assembled by the flag parser or a test. The
// scenario comes from a file when `scenario_file` is set, otherwise from the
// generator fields; `sizes`/`seeds` drive the multi-run modes.
struct RunConfig {
    std::string scenario_file;
    int gen_n = 0;
    std::uint64_t gen_seed = 1;
    MotionModel gen_model = MotionModel::kLinear;
    std::uint64_t priority_seed = 1;
    bool has_window = false;  // when false the scenario's own window is used
    Rat window_a;
    Rat window_b;
    int samples = 20;  // equivalence probes per verify run
    RunMode mode = RunMode::kRun;
    std::vector<int> sizes;               // scale: point counts
    std::vector<std::uint64_t> seeds;     // scale/verify: scenario seeds
    std::string out_dir;                  // when empty no files are written
    bool strict_degeneracy = false;
    int time_digits = 12;  // significant digits for rendered event times
};

// Aggregate of one finished run, recomputed from the event log so the log
// files and the engine's own counters can be cross-checked.
struct RunStats {
    int n = 0;
    long long swap_events = 0;
    long long bridge_events = 0;
    long long vis_events = 0;
    long long chords_removed = 0;
    long long chords_added = 0;
    long long events_total = 0;
    long long discrete_changes = 0;  // events plus chord churn
    double mean_changes_per_event = 0.0;
    long long max_changes_per_event = 0;
    // Census extremes over every rest point of the run (initial state
    // included), next to the final-state census below.
    long long entities_initial = 0;
    long long entities_peak = 0;
    long long queued_peak = 0;
    int max_point_swap_certs = 0;
    int max_point_vis_roles = 0;
    long long wall_ns = 0;
    CertCensus census;  // taken at the final rest time
};

// One complete window run: init at the scenario start, silently roll to `a`,
// then process [a, b] collecting the log.  `deep_verify` turns on the
// engine's full per-event invariant checks.
struct RunOutcome {
    KineticState state;
    RunStats stats;
};
RunOutcome run_window(const Scenario& s, const PriorityAssignment& pr, const Rat& a, const Rat& b,
                      bool deep_verify);

// The run window from config: the explicit --window if given (must sit inside
// the scenario's own), else the scenario's.
void resolve_window(const RunConfig& cfg, const Scenario& s, Rat* a, Rat* b);

// The scenario from config: parsed file or generator.
Scenario config_scenario(const RunConfig& cfg);

// Event log as CSV.  Times are decimals with `digits` significant digits; the
// exact column flags rows whose decimal is the event time with nothing cut.
void write_events_csv(std::ostream& os, const KineticState& st, int digits);

// Stats as sorted key=value lines (wall_ns last; it is the one
// non-reproducible value).
void write_stats(std::ostream& os, const RunStats& rs);

// The exact command line that replays one failed check, for verify reports.
std::string reproducer_command(const RunConfig& cfg, const Rat& a, const Rat& b, const Rat& t);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_scale(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_census(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Dispatch on cfg.mode; catches everything and maps it to an exit code
// (0 clean, 1 verification/self-check failure, 2 bad config or I/O).
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace ktri
