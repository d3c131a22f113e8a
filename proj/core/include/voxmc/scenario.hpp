#pragma once

#include "voxmc/model.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace voxmc {

// Full declaration of one experiment: the physical system plus run
// parameters. Built from a scenario file (see docs/scenario-format.md) or
// directly in code by the presets.
struct ScenarioConfig {
    // [grid]
    int nx = 1, ny = 1, nz = 1;
    double w = 1.0;
    std::string boundary = "reflecting"; // reflecting | absorbing
    double absorb_fraction = 1.0 / 50.0;

    // [medium]
    double D = 1.0;

    // [transmitter]
    std::vector<Voxel> tx_voxels{{1, 1, 1}};
    std::vector<double> priors; // empty: uniform

    // [symbol k]
    struct Sym {
        std::string emission = "rate"; // rate | bursts | pulse
        double rate = 0.0;
        double duration = std::numeric_limits<double>::infinity();
        double width = 0.0;
        std::vector<double> times;
        std::vector<int> counts;
    };
    std::vector<Sym> symbols;

    // [receiver]
    std::vector<Voxel> rx_voxels;
    std::string configuration = "partitioned"; // partitioned | mixed
    double dr = 0.0;
    std::string circuit = "actdeact"; // actdeact | twosite
    int M = 0;
    double kplus = 0.005, kminus = 1.0;
    double lambda1 = 0.0, mu1 = 0.0, lambda2 = 0.0, mu2 = 0.0;

    // [run]
    double t_end = 1.0;
    int n_runs_ber = 300;
    int n_runs_ref = 500;
    uint64_t seed = 1;
    double dt_ref = 0.01;
    double decision_dt = 0.05;
    std::vector<double> decision_times; // empty: full grid at decision_dt
    std::string demodulator = "auto";   // auto | partitioned | mixed | oracle | optimal
    int truncation_nmax = 100;
    int workers = 0; // 0: hardware concurrency

    SystemModel build() const;
    std::vector<double> resolved_decision_times() const;
    std::string canonical_text() const; // normalized serialization, input to the hash
    std::string hash() const;           // 16 hex digits (FNV-1a 64)
};

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin = "<text>");
ScenarioConfig parse_scenario_file(const std::string& path);

uint64_t fnv1a64(const std::string& text);

} // namespace voxmc
