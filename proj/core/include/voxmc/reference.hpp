#pragma once

#include "voxmc/model.hpp"
#include "voxmc/ssa.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace voxmc {

// Alpha: prior mean signalling count in receiver voxel p given symbol k.
// Beta: prior mean of the product of the activation reaction's reactant
// counts in voxel p (signal count x free receptor count for the two-state
// circuit, signal x first complex for the two-site circuit).
enum class RefKind { Alpha, Beta };

// Symbol-conditioned internal-model curve on a uniform time grid, with
// piecewise-linear interpolation between grid points.
struct ReferenceSignal {
    RefKind kind = RefKind::Alpha;
    int symbol = 0;
    int p = 0;
    double dt = 0.01;
    std::vector<double> values;
    std::vector<double> se; // standard error per grid point (Monte Carlo estimates)
    int n_runs = 0;
    uint64_t seed = 0;

    double t_end() const { return values.empty() ? 0.0 : dt * double(values.size() - 1); }
    double at(double t) const;
    // exact integral of the interpolant over [a, b]
    double integral(double a, double b) const;

    void finalize(); // builds the prefix-integral table

  private:
    std::vector<double> cum_;
    double cum_to(double t) const;
};

// Monte Carlo estimate over n_runs replicates; one signal per receiver voxel.
std::vector<ReferenceSignal> estimate_reference(const SystemModel& model, RefKind kind,
                                                int symbol, double dt, double t_end, int n_runs,
                                                uint64_t base_seed, int workers = 1);

inline std::vector<ReferenceSignal> estimate_alpha(const SystemModel& m, int k, double dt,
                                                   double t_end, int n_runs, uint64_t seed,
                                                   int workers = 1) {
    return estimate_reference(m, RefKind::Alpha, k, dt, t_end, n_runs, seed, workers);
}
inline std::vector<ReferenceSignal> estimate_beta(const SystemModel& m, int k, double dt,
                                                  double t_end, int n_runs, uint64_t seed,
                                                  int workers = 1) {
    return estimate_reference(m, RefKind::Beta, k, dt, t_end, n_runs, seed, workers);
}

// On-disk cache, one file per (scenario, kind, symbol); plain text.
void save_reference(const std::string& path, const std::string& scenario_hash,
                    const std::vector<ReferenceSignal>& per_voxel);
std::optional<std::vector<ReferenceSignal>> load_reference(const std::string& path,
                                                           const std::string& scenario_hash);

void write_reference_csv(std::ostream& os, const std::vector<ReferenceSignal>& per_voxel);

} // namespace voxmc
