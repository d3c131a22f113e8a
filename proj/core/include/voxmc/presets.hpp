#pragma once

#include "voxmc/harness.hpp"

#include <string>
#include <vector>

namespace voxmc {

// --- canonical experiment scenarios ------------------------------------------

// 3-voxel line, burst symbols (8/20), partitioned two-voxel receiver, M = 10
ScenarioConfig scenario_three_voxel_partitioned();
// 3-voxel line, burst symbols (10/15), mixed receiver (D_r = 0.2 D), M = 4
ScenarioConfig scenario_three_voxel_mixed();
// 5x5x5 medium, constant-rate symbols (10/40), two corner receiver voxels,
// M = 10; dr = 0 selects the partitioned configuration
ScenarioConfig scenario_cube5(double dr);
// same medium with an arbitrary partitioned receiver voxel set
ScenarioConfig scenario_cube5_receiver(const std::vector<Voxel>& voxels, int M);
// 5x5x5 medium with the two-site receiver circuit, M = 2
ScenarioConfig scenario_twosite(double dr);
// voxel-size consistency pair: same physical medium at w = 1/3 or 1/6
ScenarioConfig scenario_voxel_size(bool fine, double D);
// 2x2x2 medium, 0.2 s pulse symbols, 20 s horizon (analytic-BER study)
ScenarioConfig scenario_lna(double dr);

// --- comparison studies -------------------------------------------------------

struct AgreementResult {
    double agreement = 0.0;        // pooled final-decision agreement
    double max_rel_deviation = 0.0; // worst (k,p) time-averaged relative deviation
    int n_per_symbol = 0;
};

// Runs the approximate filter and the optimal filter on the same replicates
// and compares decisions and conditional means against the references.
AgreementResult filter_vs_optimal(const ScenarioConfig& cfg, int n_per_symbol,
                                  const RunOptions& opts);

struct ZMomentStats {
    std::vector<double> times;
    std::vector<std::vector<double>> mean; // [k][t]
    std::vector<std::vector<double>> var;  // [k][t]
    BerCurve curve;                        // empirical BER for the transmitted symbol
};

// Ensemble statistics of the mixed filter outputs under one transmitted
// symbol, demodulated with the supplied reference bank.
ZMomentStats z_statistics(const ScenarioConfig& cfg, int transmitted, const ReferenceBank& refs,
                          int n_runs, const RunOptions& opts);

// --- figure-reproduction presets ----------------------------------------------

struct PresetClaim {
    std::string text;
    bool pass = false;
};

struct PresetReport {
    std::string name;
    std::vector<PresetClaim> claims;
    std::vector<std::string> artifacts;
    bool all_pass() const;
};

std::vector<std::string> preset_names();
PresetReport repro_figure(const std::string& name, const RunOptions& opts);
void write_report(const PresetReport& report, const std::string& out_dir);

} // namespace voxmc
