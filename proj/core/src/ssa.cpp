#include "voxmc/ssa.hpp"
#include "voxmc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace voxmc {

namespace {

const char* kind_name(ChannelKind k) {
    switch (k) {
    case ChannelKind::SignalDiffusion: return "signal_diffusion";
    case ChannelKind::BoundaryAbsorb: return "boundary_absorb";
    case ChannelKind::Activation: return "activation";
    case ChannelKind::Deactivation: return "deactivation";
    case ChannelKind::ReceiverDiffusion: return "receiver_diffusion";
    case ChannelKind::Emission: return "emission";
    case ChannelKind::CircuitOther: return "circuit_other";
    }
    return "?";
}

} // namespace

Trajectory simulate(const SystemModel& model, int symbol, double t_end, uint64_t seed) {
    if (symbol < 0 || symbol >= model.K())
        throw std::invalid_argument("simulate: symbol index out of range");
    if (!(t_end > 0)) throw std::invalid_argument("simulate: t_end must be positive");

    const auto& profile = model.emissions[symbol];
    const int nc = int(model.channels.size());

    // compact propensity tables for the hot loop
    std::vector<int> law(nc), ia(nc), ib(nc);
    std::vector<double> rc(nc), emission_share(nc, 0.0);
    for (int i = 0; i < nc; ++i) {
        const Channel& ch = model.channels[i];
        law[i] = int(ch.law);
        rc[i] = ch.c;
        ia[i] = ch.a;
        ib[i] = ch.b;
    }
    for (int i : model.emission_channels) emission_share[i] = model.channels[i].c;

    // times where propensities change discontinuously: profile edges and bursts
    std::vector<double> sched;
    for (size_t i = 1; i < profile.edges.size(); ++i) sched.push_back(profile.edges[i]);
    for (const auto& [bt, bc] : profile.bursts) sched.push_back(bt);
    std::sort(sched.begin(), sched.end());
    sched.erase(std::unique(sched.begin(), sched.end()), sched.end());

    Trajectory traj;
    traj.symbol = symbol;
    traj.t_end = t_end;
    traj.seed = seed;

    SystemState state = model.initial_state;
    Rng rng(seed);

    std::vector<double> props(nc);
    double t = 0.0;
    size_t si = 0;
    size_t bi = 0; // next burst

    auto apply_bursts_at = [&](double time) {
        long long total = 0;
        while (bi < profile.bursts.size() && profile.bursts[bi].first <= time) {
            total += profile.bursts[bi].second;
            ++bi;
        }
        if (total > 0) {
            state[model.emission_state_index] += total;
            traj.events.push_back({time, -1});
        }
    };

    apply_bursts_at(0.0); // bursts scheduled at t = 0

    while (t < t_end) {
        const double em_rate = profile.rate_at(t);
        for (int i : model.emission_channels) rc[i] = emission_share[i] * em_rate;
        double a0 = 0.0;
        for (int i = 0; i < nc; ++i) {
            double a;
            switch (law[i]) {
            case int(PropensityLaw::Zeroth): a = rc[i]; break;
            case int(PropensityLaw::First): a = rc[i] * double(state[ia[i]]); break;
            default: a = rc[i] * double(state[ia[i]]) * double(state[ib[i]]); break;
            }
            props[i] = a;
            a0 += a;
        }
        if (!std::isfinite(a0) || a0 > 1e18)
            throw std::runtime_error("simulate: total propensity overflow at t=" +
                                     std::to_string(t));

        const double t_sched = si < sched.size() ? sched[si] : t_end;
        const double barrier = std::min(t_sched, t_end);

        if (a0 <= 0.0) {
            if (barrier >= t_end) break;
            t = barrier;
            ++si;
            apply_bursts_at(t);
            continue;
        }

        const double tau = rng.exponential(a0);
        if (t + tau >= barrier) {
            // propensities change at the barrier; the exponential clock is
            // memoryless so we restart it there
            t = barrier;
            if (barrier >= t_end) break;
            ++si;
            apply_bursts_at(t);
            continue;
        }
        t += tau;

        double r = rng.uniform() * a0;
        int chosen = nc - 1;
        for (int i = 0; i < nc; ++i) {
            r -= props[i];
            if (r < 0.0) {
                chosen = i;
                break;
            }
        }
        const Channel& ch = model.channels[chosen];
        for (int j = 0; j < ch.n_delta; ++j) state[ch.delta[j].first] += ch.delta[j].second;
        traj.events.push_back({t, chosen});
    }

    traj.final_state = std::move(state);
    return traj;
}

void run_ensemble(const SystemModel& model, int symbol, int n_runs, double t_end,
                  uint64_t base_seed, const std::function<void(int, const Trajectory&)>& consume,
                  int workers) {
    if (n_runs < 1) throw std::invalid_argument("run_ensemble: n_runs must be >= 1");
    if (workers <= 0) workers = int(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n_runs));

    if (workers == 1) {
        for (int i = 0; i < n_runs; ++i) {
            Trajectory traj = simulate(model, symbol, t_end, replicate_seed(base_seed, i));
            consume(i, traj);
        }
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n_runs) return;
                Trajectory traj = simulate(model, symbol, t_end, replicate_seed(base_seed, i));
                consume(i, traj);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void replay(const SystemModel& model, const Trajectory& traj,
            const std::function<void(double, const SystemState&)>& visit) {
    SystemState state = model.initial_state;
    visit(0.0, state);
    size_t bi = 0;
    const auto& profile = model.emissions[traj.symbol];
    for (const auto& ev : traj.events) {
        if (ev.channel < 0) {
            while (bi < profile.bursts.size() && profile.bursts[bi].first <= ev.t) {
                state[model.emission_state_index] += profile.bursts[bi].second;
                ++bi;
            }
        } else {
            const Channel& ch = model.channels[ev.channel];
            for (int j = 0; j < ch.n_delta; ++j) state[ch.delta[j].first] += ch.delta[j].second;
        }
        visit(ev.t, state);
    }
}

ObservationStream extract_observations(const Trajectory& traj, const SystemModel& model) {
    ObservationStream obs;
    obs.symbol = traj.symbol;
    obs.t_end = traj.t_end;
    for (int p = 0; p < model.P(); ++p)
        obs.initial.push_back(int(model.initial_state[model.output_index(p)]));
    for (const auto& ev : traj.events) {
        if (ev.channel < 0) continue;
        const Channel& ch = model.channels[ev.channel];
        switch (ch.kind) {
        case ChannelKind::Activation:
            obs.events.push_back({ev.t, ObsEvent::Kind::Activation, ch.rv, -1});
            break;
        case ChannelKind::Deactivation:
            obs.events.push_back({ev.t, ObsEvent::Kind::Deactivation, ch.rv, -1});
            break;
        case ChannelKind::ReceiverDiffusion:
            if (ch.species == model.output_species)
                obs.events.push_back({ev.t, ObsEvent::Kind::Transfer, ch.rv_from, ch.rv_to});
            break;
        default:
            break;
        }
    }
    return obs;
}

std::vector<std::vector<VoxelDelta>> per_voxel_deltas(const ObservationStream& obs) {
    std::vector<std::vector<VoxelDelta>> out(obs.P());
    for (const auto& ev : obs.events) {
        switch (ev.kind) {
        case ObsEvent::Kind::Activation:
            out[ev.p].push_back({ev.t, +1, VoxelDelta::Cause::Activation, -1});
            break;
        case ObsEvent::Kind::Deactivation:
            out[ev.p].push_back({ev.t, -1, VoxelDelta::Cause::Deactivation, -1});
            break;
        case ObsEvent::Kind::Transfer:
            out[ev.p].push_back({ev.t, -1, VoxelDelta::Cause::DiffusionOut, ev.q});
            out[ev.q].push_back({ev.t, +1, VoxelDelta::Cause::DiffusionIn, ev.p});
            break;
        }
    }
    return out;
}

void write_trajectory_tsv(std::ostream& os, const SystemModel& model, const Trajectory& traj) {
    os << "# time\tkind\tvoxel\tspecies\tdelta\n";
    auto describe = [&](int state_index) {
        // (species name, 1-based voxel triple)
        int species, voxel_flat;
        if (state_index < model.V()) {
            species = 0;
            voxel_flat = state_index;
        } else {
            const int rel = state_index - model.V();
            species = rel / model.P() + 1;
            voxel_flat = model.receiver_voxel_flat[rel % model.P()];
        }
        const Voxel v = model.grid.voxel_at(voxel_flat);
        return std::pair<std::string, std::string>(
            model.species[species].name,
            "(" + std::to_string(v.x) + "," + std::to_string(v.y) + "," + std::to_string(v.z) +
                ")");
    };
    const auto& profile = model.emissions[traj.symbol];
    size_t bi = 0;
    for (const auto& ev : traj.events) {
        if (ev.channel < 0) {
            long long total = 0;
            while (bi < profile.bursts.size() && profile.bursts[bi].first <= ev.t) {
                total += profile.bursts[bi].second;
                ++bi;
            }
            const auto [sp, vx] = describe(model.emission_state_index);
            os << ev.t << "\temission_burst\t" << vx << '\t' << sp << '\t' << total << '\n';
            continue;
        }
        const Channel& ch = model.channels[ev.channel];
        for (int j = 0; j < ch.n_delta; ++j) {
            const auto [sp, vx] = describe(ch.delta[j].first);
            os << ev.t << '\t' << kind_name(ch.kind) << '\t' << vx << '\t' << sp << '\t'
               << ch.delta[j].second << '\n';
        }
    }
}

} // namespace voxmc
