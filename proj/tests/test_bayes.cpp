#include <doctest.h>

#include "voxmc/bayes.hpp"
#include "voxmc/demod.hpp"
#include "voxmc/presets.hpp"

#include <cmath>

using namespace voxmc;

namespace {

SystemModel closed_single_voxel(int burst, int M) {
    const SpatialGrid grid = build_grid(1, 1, 1, 1.0 / 3.0);
    TransmitterSpec tx;
    tx.voxel = {1, 1, 1};
    tx.symbols = {SymbolDef::bursts({0.0}, {burst}), SymbolDef::poisson(0)};
    tx.priors = {0.5, 0.5};
    ReceiverSpec rx;
    rx.voxels = {{1, 1, 1}};
    rx.M = M;
    return assemble_model(grid, {1.0}, tx, rx);
}

SystemModel line_model(int s0, int s1, int M, ReceiverConfig config, double dr) {
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    TransmitterSpec tx;
    tx.voxel = {1, 1, 1};
    tx.symbols = {SymbolDef::bursts({0, 0.2, 0.4}, {s0, s0, s0}),
                  SymbolDef::bursts({0, 0.2, 0.4}, {s1, s1, s1})};
    tx.priors = {0.5, 0.5};
    ReceiverSpec rx;
    rx.voxels = {{2, 1, 1}, {3, 1, 1}};
    rx.config = config;
    rx.dr = dr;
    rx.M = M;
    return assemble_model(grid, {1.0}, tx, rx);
}

} // namespace

TEST_CASE("frozen medium: filter reduces to the single-voxel form") {
    // a closed voxel holds exactly `burst` signalling molecules, so the
    // conditional mean is the constant N and the log-posteriori path has the
    // closed form  sum of jumps log(N) minus g+ integral (M - X*) N dt
    const SystemModel m = closed_single_voxel(20, 4);
    const Trajectory traj = simulate(m, 0, 2.0, 31);
    const ObservationStream obs = extract_observations(traj, m);
    REQUIRE(!obs.events.empty());

    BayesOptions opts;
    opts.report_dt = 0.5;
    const BayesFilterResult res = bayes_filter_optimal(m, obs, 0, ReceiverConfig::Partitioned, opts);

    const double gp = m.forward_const;
    for (size_t j = 0; j < res.times.size(); ++j) {
        const double t = res.times[j];
        double expect = 0.0; // uniform priors
        int xstar = obs.initial[0];
        double t_prev = 0.0;
        for (const auto& ev : obs.events) {
            if (ev.t > t) break;
            expect -= gp * (4 - xstar) * 20.0 * (ev.t - t_prev);
            t_prev = ev.t;
            if (ev.kind == ObsEvent::Kind::Activation) {
                expect += std::log(20.0);
                ++xstar;
            } else {
                --xstar;
            }
        }
        expect -= gp * (4 - xstar) * 20.0 * (t - t_prev);
        CHECK(res.L[j] == doctest::Approx(expect).epsilon(1e-4));
        CHECK(res.cond_mean[0][j] == doctest::Approx(20.0).epsilon(1e-9));
    }
    CHECK(res.leakage < 1e-12);
}

TEST_CASE("no dynamics: posterior stays at the prior") {
    const SystemModel m = closed_single_voxel(0, 0);
    ObservationStream obs;
    obs.t_end = 1.0;
    obs.initial = {0};
    BayesOptions opts;
    opts.priors = {0.25, 0.75};
    const BayesFilterResult res = bayes_filter_optimal(m, obs, 1, ReceiverConfig::Partitioned, opts);
    for (double l : res.L) CHECK(l == doctest::Approx(std::log(2 * 0.75)));
}

TEST_CASE("impossible observations kill the hypothesis") {
    // symbol 1 emits nothing; an observed activation is impossible under it
    const SystemModel m = closed_single_voxel(20, 4);
    ObservationStream obs;
    obs.t_end = 1.0;
    obs.initial = {0};
    obs.events.push_back({0.4, ObsEvent::Kind::Activation, 0, -1});
    const BayesFilterResult res = bayes_filter_optimal(m, obs, 1, ReceiverConfig::Partitioned, {});
    CHECK(std::isinf(res.L.back()));
    CHECK(res.L.back() < 0);
}

TEST_CASE("identical symbols give identical log-posteriors") {
    const SystemModel m = line_model(8, 8, 4, ReceiverConfig::Partitioned, 0.0);
    const Trajectory traj = simulate(m, 0, 1.0, 7);
    const ObservationStream obs = extract_observations(traj, m);
    const auto r0 = bayes_filter_optimal(m, obs, 0, ReceiverConfig::Partitioned, {});
    const auto r1 = bayes_filter_optimal(m, obs, 1, ReceiverConfig::Partitioned, {});
    for (size_t j = 0; j < r0.times.size(); ++j) CHECK(r0.L[j] == doctest::Approx(r1.L[j]));
}

TEST_CASE("mixed filter consumes transfer and deactivation bookkeeping") {
    const SystemModel m = line_model(4, 8, 2, ReceiverConfig::Mixed, 1.8);
    bool saw_transfer = false;
    for (uint64_t seed = 3; seed < 15 && !saw_transfer; ++seed) {
        const Trajectory traj = simulate(m, 1, 1.5, seed);
        const ObservationStream obs = extract_observations(traj, m);
        for (const auto& ev : obs.events)
            if (ev.kind == ObsEvent::Kind::Transfer) saw_transfer = true;
        const auto res = bayes_filter_optimal(m, obs, 1, ReceiverConfig::Mixed, {});
        CHECK(std::isfinite(res.L.back()));
        CHECK(res.leakage < 1e-9);
        for (int p = 0; p < 2; ++p)
            for (double v : res.cond_mean[p]) CHECK(v >= -1e-12);
    }
    CHECK(saw_transfer);
}

TEST_CASE("approximate filters track the optimal decisions on a small system") {
    RunOptions ropts;
    ropts.workers = 1;
    ropts.use_cache = false;

    SUBCASE("partitioned") {
        ScenarioConfig cfg;
        cfg.nx = 3;
        cfg.ny = cfg.nz = 1;
        cfg.w = 1.0 / 3.0;
        cfg.tx_voxels = {{1, 1, 1}};
        cfg.rx_voxels = {{2, 1, 1}, {3, 1, 1}};
        cfg.symbols.resize(2);
        for (int k = 0; k < 2; ++k) {
            cfg.symbols[k].emission = "bursts";
            cfg.symbols[k].times = {0.0, 0.2, 0.4};
            cfg.symbols[k].counts = std::vector<int>(3, k == 0 ? 3 : 8);
        }
        cfg.configuration = "partitioned";
        cfg.M = 4;
        cfg.t_end = 1.0;
        cfg.n_runs_ref = 200;
        cfg.seed = 555;
        const AgreementResult res = filter_vs_optimal(cfg, 25, ropts);
        CHECK(res.agreement >= 0.6);
        CHECK(res.max_rel_deviation < 0.8);
    }
}
