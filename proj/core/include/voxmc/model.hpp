#pragma once

#include "voxmc/grid.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace voxmc {

// Diffusion properties of the signalling molecules.
struct MediumSpec {
    double D = 1.0; // µm²/s
};

// Production schedule of signalling molecules for one symbol, resolved to a
// piecewise-constant rate plus scheduled impulses.
struct EmissionProfile {
    std::vector<double> edges;                 // segment starts; edges[0] == 0
    std::vector<double> rates;                 // rates[i] active on [edges[i], edges[i+1])
    std::vector<std::pair<double, int>> bursts; // (time, molecule count), times non-decreasing
    double rate_at(double t) const;
    double max_rate() const;
    // mean molecules emitted in [0, t]
    double mean_emitted(double t) const;
};

struct SymbolDef {
    enum class Kind { PoissonRate, DeterministicBursts, Pulse };
    Kind kind = Kind::PoissonRate;
    double rate = 0.0;     // molecules/s (PoissonRate, Pulse)
    double duration = std::numeric_limits<double>::infinity(); // PoissonRate window
    double pulse_width = 0.0;
    std::vector<double> burst_times;
    std::vector<int> burst_counts;

    EmissionProfile profile() const;

    static SymbolDef poisson(double rate,
                             double duration = std::numeric_limits<double>::infinity());
    static SymbolDef bursts(std::vector<double> times, std::vector<int> counts);
    static SymbolDef pulse(double rate, double width);
};

struct TransmitterSpec {
    Voxel voxel;
    // optional multi-voxel transmitter; when non-empty the emission rate is
    // split equally across these voxels (burst symbols then unsupported)
    std::vector<Voxel> voxels;
    std::vector<SymbolDef> symbols;
    std::vector<double> priors; // sums to 1, one entry per symbol

    std::vector<Voxel> emitting_voxels() const { return voxels.empty() ? std::vector<Voxel>{voxel} : voxels; }
};

enum class ReceiverConfig { Partitioned, Mixed };
enum class CircuitKind { ActDeact, TwoSite, Custom };

// A reaction local to one receiver voxel. Species are referred to by name;
// the reserved name "S" is the signalling molecule in that voxel.
struct CustomReaction {
    std::vector<std::string> reactants;
    std::vector<std::string> products;
    double rate = 0.0;
    bool rate_is_concentration = false; // true: µm³/s, divided by voxel volume at compile
};

struct CustomCircuit {
    std::vector<std::string> species; // receiver species names, fixed order
    std::string receptor_species;     // initialized to M per receiver voxel
    std::string output_species;       // observed count
    std::vector<CustomReaction> reactions;
};

struct ReceiverSpec {
    std::vector<Voxel> voxels; // P voxels
    ReceiverConfig config = ReceiverConfig::Partitioned;
    double dr = 0.0;           // receiver-species inter-voxel jump rate (s⁻¹), Mixed only
    CircuitKind circuit = CircuitKind::ActDeact;
    int M = 0;                 // initial receptor count per receiver voxel

    // ActDeact constants
    double k_plus_conc = 0.005; // µm³/s, converted with the voxel volume
    double k_minus = 1.0;       // s⁻¹

    // TwoSite constants (forward ones are concentration rate constants)
    double lambda1_conc = 0.0;
    double mu1 = 0.0;
    double lambda2_conc = 0.0;
    double mu2 = 0.0;

    CustomCircuit custom;
};

enum class ChannelKind {
    SignalDiffusion,
    BoundaryAbsorb,
    Activation,
    Deactivation,
    ReceiverDiffusion,
    Emission,
    CircuitOther,
};

enum class PropensityLaw { Zeroth, First, SecondHetero };

// One compiled reaction channel. Propensity:
//   Zeroth:        c
//   First:         c * state[a]
//   SecondHetero:  c * state[a] * state[b]
struct Channel {
    ChannelKind kind = ChannelKind::CircuitOther;
    PropensityLaw law = PropensityLaw::Zeroth;
    double c = 0.0;
    int a = -1, b = -1;
    std::array<std::pair<int, int>, 4> delta{}; // (state index, count change)
    int n_delta = 0;
    int rv = -1;      // receiver voxel index p (Activation/Deactivation/CircuitOther)
    int rv_from = -1; // ReceiverDiffusion source p
    int rv_to = -1;   // ReceiverDiffusion target p
    int species = -1; // species id moved/consumed (diffusion channels)
};

struct SpeciesInfo {
    std::string name;
    bool is_signal = false;
};

// Immutable compiled system: state layout, channel list, emission programs.
// State vector layout: [S per voxel (flat grid order)] then
// [receiver species rs, receiver voxel p] at V + rs*P + p.
struct SystemModel {
    SpatialGrid grid;
    MediumSpec medium;
    TransmitterSpec tx;
    ReceiverSpec rx;

    std::vector<SpeciesInfo> species; // species[0] is S
    int n_receiver_species = 0;
    int state_size = 0;
    std::vector<long long> initial_state;

    std::vector<Channel> channels;
    std::vector<EmissionProfile> emissions; // per symbol
    std::vector<int> emission_channels;     // one per emitting voxel; c is the rate share
    std::vector<int> emission_state_indices;
    int emission_state_index = -1;          // S at the primary transmitter voxel (bursts)

    std::vector<int> receiver_voxel_flat; // grid flat index per p
    std::vector<int> activation_channels; // channel index of the Activation channel per p
    int output_species = -1;              // species id of the observed species
    double forward_const = 0.0;           // propensity constant of the Activation family

    int P() const { return int(rx.voxels.size()); }
    int K() const { return int(tx.symbols.size()); }
    int V() const { return grid.voxel_count(); }
    double d() const { return medium.D / (grid.w() * grid.w()); }
    double voxel_volume() const { return grid.voxel_volume(); }

    int s_index(int voxel_flat) const { return voxel_flat; }
    int r_index(int rs_local, int p) const { return V() + rs_local * P() + p; }
    int output_index(int p) const { return r_index(output_species - 1, p); }

    // serialization of the compiled channel list, used for the deterministic
    // compilation check and for scenario hashing
    std::string channel_fingerprint() const;
};

// k̂ (µm³/s) to propensity constant (s⁻¹) in a voxel of volume V (µm³).
double convert_rate_constant(double k_conc, double volume);

SystemModel assemble_model(const SpatialGrid& grid, const MediumSpec& medium,
                           const TransmitterSpec& tx, const ReceiverSpec& rx);

// Propensity of one channel at the given state. Emission channels need the
// active symbol and current time; other channels ignore them.
double propensity_eval(const SystemModel& model, const std::vector<long long>& state,
                       const Channel& ch, double t = 0.0, int symbol = -1);

} // namespace voxmc
