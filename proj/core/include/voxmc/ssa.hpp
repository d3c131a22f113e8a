#pragma once

#include "voxmc/model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace voxmc {

using SystemState = std::vector<long long>;

struct TrajectoryEvent {
    double t;
    int channel; // index into model.channels, or -1 for a scheduled emission burst
};

struct Trajectory {
    int symbol = 0;
    double t_end = 0.0;
    uint64_t seed = 0;
    std::vector<TrajectoryEvent> events;
    SystemState final_state;
};

// Exact stochastic simulation (direct method, linear channel scan) of the
// compiled system driven by symbol k on [0, t_end].
Trajectory simulate(const SystemModel& model, int symbol, double t_end, uint64_t seed);

// Runs n_runs independent replicates; replicate i is seeded with
// replicate_seed(base_seed, i) so results do not depend on scheduling.
// `consume` may be called from worker threads; use the replicate index for
// order-independent merging.
void run_ensemble(const SystemModel& model, int symbol, int n_runs, double t_end,
                  uint64_t base_seed, const std::function<void(int, const Trajectory&)>& consume,
                  int workers = 1);

// Replays a trajectory's state-change sequence, invoking visit(t, state) after
// every event. visit is also called once for the initial state at t = 0.
void replay(const SystemModel& model, const Trajectory& traj,
            const std::function<void(double, const SystemState&)>& visit);

// --- receiver observations -------------------------------------------------

struct ObsEvent {
    enum class Kind {
        Activation,  // output species +1 in voxel p via the circuit
        Deactivation, // output species -1 in voxel p via the circuit
        Transfer,    // one output molecule moved p -> q (atomic paired event)
    };
    double t;
    Kind kind;
    int p;
    int q = -1;
};

// Output-species count history for every receiver voxel.
struct ObservationStream {
    int symbol = 0;
    double t_end = 0.0;
    std::vector<int> initial; // output count per receiver voxel at t = 0
    std::vector<ObsEvent> events;
    int P() const { return int(initial.size()); }
};

ObservationStream extract_observations(const Trajectory& traj, const SystemModel& model);

// Expanded per-voxel view: (time, delta, cause, other voxel q or -1).
struct VoxelDelta {
    double t;
    int delta; // +1 or -1
    enum class Cause { Activation, Deactivation, DiffusionIn, DiffusionOut } cause;
    int q = -1;
};
std::vector<std::vector<VoxelDelta>> per_voxel_deltas(const ObservationStream& obs);

// Tab-separated event dump: time, channel kind, voxel(s), species, delta.
void write_trajectory_tsv(std::ostream& os, const SystemModel& model, const Trajectory& traj);

} // namespace voxmc
