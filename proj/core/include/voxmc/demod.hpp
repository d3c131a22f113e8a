#pragma once

#include "voxmc/model.hpp"
#include "voxmc/reference.hpp"
#include "voxmc/ssa.hpp"
#include "voxmc/stats.hpp"

#include <vector>

namespace voxmc {

struct DemodOptions {
    double report_dt = 0.05;
    double clamp = 1e-6;          // floor applied to reference values before log
    std::vector<double> priors;   // empty: uniform
    bool keep_per_voxel = false;  // also record the per-voxel accumulators
};

struct JumpRecord {
    double t;
    int p;
    int symbol;
    double log_ref; // jump size added to Z_symbol
};

struct DemodulatorOutput {
    std::vector<double> times;            // reporting grid
    std::vector<std::vector<double>> Z;   // [k][grid]
    std::vector<double> Z_final;          // exact values at t_end
    std::vector<int> decisions;           // argmax per grid point, ties to lowest k
    int final_decision = 0;
    std::vector<JumpRecord> jumps;
    int clamp_count = 0;
    std::vector<std::vector<std::vector<double>>> Z_per_voxel; // [k][p][grid], optional

    int decision_at(double t) const;
};

// references indexed [symbol][receiver voxel]
using ReferenceBank = std::vector<std::vector<ReferenceSignal>>;

// Log-posteriori filter for receivers whose receptors cannot move between
// voxels: each +1 jump of the output count in voxel p adds log alpha_{k,p},
// and between jumps Z_{k,p} drifts at -g+ (M_p - X*_p) alpha_{k,p}.
DemodulatorOutput demod_partitioned_approx(const ObservationStream& obs,
                                           const ReferenceBank& alpha, double g_plus,
                                           const std::vector<int>& M,
                                           const DemodOptions& opts = {});

// Filter for receivers with mobile receptors: every +1 jump of the output
// count adds log beta_{k,p}; drift is -g+ beta_{k,p}.
DemodulatorOutput demod_mixed_approx(const ObservationStream& obs, const ReferenceBank& beta,
                                     double g_plus, const DemodOptions& opts = {});

// Same jump/drift structure driven by an arbitrary circuit's forward channel
// constant and its reactant-product reference.
DemodulatorOutput demod_generic_approx(const ObservationStream& obs, const ReferenceBank& refs,
                                       double forward_const, const DemodOptions& opts = {});

// --- activation trains ------------------------------------------------------

struct ActivationTrains {
    std::vector<std::vector<double>> times; // per receiver voxel
};

// ground-truth labels carried by the simulator
ActivationTrains extract_activation_trains_oracle(const ObservationStream& obs);
// paired-event rule: a +1 at p is an activation unless an adjacent receiver
// voxel shows a simultaneous -1
ActivationTrains extract_activation_trains_inferred(const ObservationStream& obs,
                                                    const SystemModel& model);

// Mixed filter fed the activation train instead of the full +1 jump train.
DemodulatorOutput demod_mixed_oracle(const ObservationStream& obs,
                                     const ActivationTrains& trains, const ReferenceBank& beta,
                                     double g_plus, const DemodOptions& opts = {});

// --- decisions and error rates ----------------------------------------------

struct BerPoint {
    double t;
    long long errors = 0;
    long long n = 0;
    double ber = 0.0;
    Interval ci;
};

struct BerCurve {
    int symbol = 0;
    std::vector<BerPoint> points;
};

// outputs[i] was produced from a trajectory that transmitted true_symbols[i];
// returns one curve per symbol with Wilson 95% intervals.
std::vector<BerCurve> decide_and_ber(const std::vector<DemodulatorOutput>& outputs,
                                     const std::vector<int>& true_symbols,
                                     const std::vector<double>& decision_times);

} // namespace voxmc
