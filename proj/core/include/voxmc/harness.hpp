#pragma once

#include "voxmc/demod.hpp"
#include "voxmc/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace voxmc {

struct RunOptions {
    double scale = 1.0;       // multiplies n_runs_ber / n_runs_ref (min 1)
    std::string out_dir = "out";
    int workers = 0;          // 0: scenario setting, then hardware
    bool use_cache = true;    // reference-signal cache under out_dir/refcache
    bool dump_z = false;      // write one Z-trajectory CSV per symbol
    bool write_files = true;
    uint64_t seed_override = 0;
    bool has_seed_override = false;
};

struct RunResult {
    std::string scenario_hash;
    uint64_t seed = 0;
    int n_runs = 0;
    std::string demodulator;
    std::vector<double> decision_times;
    std::vector<BerCurve> curves; // one per symbol
    long long clamp_events = 0;
    std::vector<std::string> files;
};

// End-to-end run: reference signals (cached), per-symbol SSA ensembles,
// demodulation, BER curves with Wilson intervals, CSV artifacts.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

// Reference bank for the scenario (one signal set per symbol), honoring the
// on-disk cache.
ReferenceBank reference_bank(const SystemModel& model, const ScenarioConfig& cfg, RefKind kind,
                             const RunOptions& opts);

// Analytic reference bank from the deterministic mean flow (used by the
// analytic-BER validation so both sides share one internal model).
ReferenceBank surrogate_beta_bank(const SystemModel& model, double t_end, double dt);

// seeds for distinct sampling purposes derived from the scenario seed
uint64_t ref_seed(uint64_t base, RefKind kind, int symbol);
uint64_t ber_seed(uint64_t base, int symbol);

std::string ber_csv_path(const std::string& out_dir, const std::string& hash,
                         const std::string& demod);
void write_ber_csv(const std::string& path, const RunResult& result);

} // namespace voxmc
