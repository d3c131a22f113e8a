#include <doctest.h>

// Cross-component checks at the paper-scale systems: the exact transient
// master-equation oracle against Monte Carlo estimates, and the Gaussian
// moment approximation against ensemble statistics. Slower than the unit
// suite, so they live in their own binary.

#include "voxmc/cme.hpp"
#include "voxmc/lna.hpp"
#include "voxmc/presets.hpp"
#include "voxmc/reference.hpp"
#include "voxmc/ssa.hpp"

#include <cmath>

using namespace voxmc;

TEST_CASE("three-voxel partitioned: oracle mean vs SSA average") {
    const ScenarioConfig cfg = scenario_three_voxel_partitioned();
    const SystemModel m = cfg.build();

    std::vector<double> grid;
    for (double t = 0.25; t <= 2.0 + 1e-9; t += 0.25) grid.push_back(t);

    CmeOptions copts;
    copts.nmax_per_voxel = 100;
    const CmeResult oracle = cme_transient_oracle(m, 0, grid, copts);
    CHECK(!oracle.leak_flagged);
    CHECK(oracle.leakage.back() == doctest::Approx(0.0));

    const int n = 500;
    const auto alpha = estimate_alpha(m, 0, 0.25, 2.0, n, 90210);
    for (int p = 0; p < m.P(); ++p) {
        for (size_t j = 0; j < grid.size(); ++j) {
            const size_t aj = j + 1; // alpha grid includes t = 0
            const double se = std::max(alpha[p].se[aj], 1e-6);
            CHECK(std::abs(oracle.mean_nr[p][j] - alpha[p].values[aj]) < 3.0 * se);
        }
    }
}

TEST_CASE("three-voxel mixed: oracle product mean vs Monte Carlo beta") {
    const ScenarioConfig cfg = scenario_three_voxel_mixed();
    const SystemModel m = cfg.build();

    std::vector<double> grid;
    for (double t = 0.25; t <= 2.0 + 1e-9; t += 0.25) grid.push_back(t);

    const CmeResult oracle = cme_transient_oracle(m, 0, grid, {});
    CHECK(!oracle.leak_flagged);

    const int n = 2000;
    const auto beta = estimate_beta(m, 0, 0.25, 2.0, n, 31415);
    for (int p = 0; p < m.P(); ++p)
        for (size_t j = 0; j < grid.size(); ++j) {
            const size_t bj = j + 1;
            const double se = std::max(beta[p].se[bj], 1e-6);
            CHECK(std::abs(oracle.mean_product[p][j] - beta[p].values[bj]) < 3.0 * se);
        }
}

TEST_CASE("analytic moments vs ensemble statistics on the pulse scenario") {
    const ScenarioConfig cfg = scenario_lna(0.2);
    const SystemModel m = cfg.build();
    const double t_end = 20.0;

    LnaOptions lopts;
    lopts.report_dt = 1.0;
    const LnaMoments mom = lna_analyze(m, 0, t_end, lopts);

    const int n = 5000;
    const int idx = m.output_index(0);
    std::vector<double> sum(21, 0.0), sumsq(21, 0.0);
    run_ensemble(m, 0, n, t_end, 112233, [&](int, const Trajectory& traj) {
        std::vector<double> row(21, 0.0);
        size_t j = 0;
        long long count = 0;
        replay(m, traj, [&](double t, const SystemState& state) {
            while (j < row.size() && double(j) < t) row[j++] = double(count);
            count = state[idx];
        });
        while (j < row.size()) row[j++] = double(count);
        for (size_t i = 0; i < row.size(); ++i) {
            sum[i] += row[i];
            sumsq[i] += row[i] * row[i];
        }
    });

    // tolerance: the stated 5%/10% plus the Monte Carlo uncertainty of the
    // ensemble estimate itself
    for (int t = 15; t <= 20; ++t) {
        const double mean_ssa = sum[t] / n;
        const double var_ssa = (sumsq[t] - n * mean_ssa * mean_ssa) / (n - 1);
        const double se_mean = std::sqrt(var_ssa / n);
        const double se_var = var_ssa * std::sqrt(2.0 / (n - 1));
        const size_t lj = size_t(std::llround(t / lopts.report_dt));
        CHECK(std::abs(mom.count_mean(idx, int(lj)) - mean_ssa) <
              0.05 * mean_ssa + 3.0 * se_mean);
        CHECK(std::abs(mom.count_variance(idx, int(lj)) - var_ssa) <
              0.10 * var_ssa + 3.0 * se_var);
    }
}
