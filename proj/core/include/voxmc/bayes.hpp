#pragma once

#include "voxmc/model.hpp"
#include "voxmc/ssa.hpp"

#include <vector>

namespace voxmc {

struct BayesOptions {
    int nmax_per_voxel = 100;
    long long total_cap = -1; // -1: exact burst bound when available, else V*nmax
    long long max_states = 10'000'000;
    double theta = 0.25; // max exit-rate * step
    double leak_tol = 1e-6;
    double report_dt = 0.01;
    std::vector<double> priors; // empty: model priors
};

struct BayesFilterResult {
    std::vector<double> times;
    std::vector<double> L; // shifted log-posteriori for the hypothesised symbol
    // conditional means per receiver voxel on the grid:
    // partitioned mode: E[N_{R,p} | k, history]
    // mixed mode:       E[X_p N_{R,p} | k, history]
    std::vector<std::vector<double>> cond_mean;
    double leakage = 0.0;
    bool leak_flagged = false;
    long long n_states = 0;
};

// Exact conditioned-CTMP filter for the hypothesis "symbol k was sent",
// driven by the output-species jump record. Supports the two-state
// activation/deactivation circuit.
BayesFilterResult bayes_filter_optimal(const SystemModel& model, const ObservationStream& obs,
                                       int symbol, ReceiverConfig mode,
                                       const BayesOptions& opts = {});

} // namespace voxmc
