#pragma once

#include "voxmc/model.hpp"

#include <vector>

namespace voxmc {

struct CmeOptions {
    int nmax_per_voxel = 100;     // signalling-molecule cap per voxel
    long long total_cap = -1;     // -1: exact burst bound when available, else V*nmax
    long long max_states = 10'000'000;
    double leak_tol = 1e-6;
    double theta = 0.25;          // max exit-rate * step (L1 scale of dπ/dt)
};

// Exact transient marginals of the truncated master equation.
struct CmeResult {
    std::vector<double> times;
    // per receiver voxel p, per grid point
    std::vector<std::vector<double>> mean_nr;      // E[N_{R,p}]
    std::vector<std::vector<double>> mean_product; // E[product of activation reactant counts]
    std::vector<std::vector<double>> mean_output;  // E[output species count]
    std::vector<double> leakage;                   // cumulative lost mass per grid point
    bool leak_flagged = false;
    long long n_states = 0;
};

CmeResult cme_transient_oracle(const SystemModel& model, int symbol,
                               const std::vector<double>& grid, const CmeOptions& opts = {});

} // namespace voxmc
