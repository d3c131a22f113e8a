#include "voxmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace voxmc {

double EmissionProfile::rate_at(double t) const {
    if (rates.empty() || t < edges.front()) return 0.0;
    size_t i = std::upper_bound(edges.begin(), edges.end(), t) - edges.begin();
    return rates[i - 1];
}

double EmissionProfile::max_rate() const {
    double m = 0.0;
    for (double r : rates) m = std::max(m, r);
    return m;
}

double EmissionProfile::mean_emitted(double t) const {
    double total = 0.0;
    for (size_t i = 0; i < rates.size(); ++i) {
        const double a = edges[i];
        const double b = (i + 1 < edges.size()) ? edges[i + 1] : t;
        if (a >= t) break;
        total += rates[i] * (std::min(b, t) - a);
    }
    for (const auto& [bt, bc] : bursts)
        if (bt <= t) total += bc;
    return total;
}

SymbolDef SymbolDef::poisson(double rate, double duration) {
    SymbolDef s;
    s.kind = Kind::PoissonRate;
    s.rate = rate;
    s.duration = duration;
    return s;
}

SymbolDef SymbolDef::bursts(std::vector<double> times, std::vector<int> counts) {
    SymbolDef s;
    s.kind = Kind::DeterministicBursts;
    s.burst_times = std::move(times);
    s.burst_counts = std::move(counts);
    return s;
}

SymbolDef SymbolDef::pulse(double rate, double width) {
    SymbolDef s;
    s.kind = Kind::Pulse;
    s.rate = rate;
    s.pulse_width = width;
    return s;
}

EmissionProfile SymbolDef::profile() const {
    EmissionProfile p;
    switch (kind) {
    case Kind::PoissonRate:
        if (rate < 0) throw std::invalid_argument("emission rate must be >= 0");
        if (std::isfinite(duration)) {
            if (duration < 0) throw std::invalid_argument("emission duration must be >= 0");
            p.edges = {0.0, duration};
            p.rates = {rate, 0.0};
        } else {
            p.edges = {0.0};
            p.rates = {rate};
        }
        break;
    case Kind::Pulse:
        if (rate < 0 || pulse_width < 0)
            throw std::invalid_argument("pulse rate and width must be >= 0");
        p.edges = {0.0, pulse_width};
        p.rates = {rate, 0.0};
        break;
    case Kind::DeterministicBursts: {
        if (burst_times.size() != burst_counts.size())
            throw std::invalid_argument("burst times/counts size mismatch");
        p.edges = {0.0};
        p.rates = {0.0};
        double prev = -1.0;
        for (size_t i = 0; i < burst_times.size(); ++i) {
            if (burst_times[i] < prev)
                throw std::invalid_argument("burst times must be non-decreasing");
            if (burst_counts[i] < 0) throw std::invalid_argument("burst counts must be >= 0");
            prev = burst_times[i];
            if (!p.bursts.empty() && p.bursts.back().first == burst_times[i])
                p.bursts.back().second += burst_counts[i];
            else
                p.bursts.emplace_back(burst_times[i], burst_counts[i]);
        }
        break;
    }
    }
    return p;
}

double convert_rate_constant(double k_conc, double volume) {
    if (!(volume > 0.0)) throw std::invalid_argument("convert_rate_constant: volume must be > 0");
    return k_conc / volume;
}

namespace {

CustomCircuit act_deact_circuit(const ReceiverSpec& rx) {
    CustomCircuit c;
    c.species = {"X", "X*"};
    c.receptor_species = "X";
    c.output_species = "X*";
    CustomReaction on;
    on.reactants = {"S", "X"};
    on.products = {"S", "X*"};
    on.rate = rx.k_plus_conc;
    on.rate_is_concentration = true;
    CustomReaction off;
    off.reactants = {"X*"};
    off.products = {"X"};
    off.rate = rx.k_minus;
    c.reactions = {on, off};
    return c;
}

CustomCircuit two_site_circuit(const ReceiverSpec& rx) {
    CustomCircuit c;
    c.species = {"E", "C1", "C2"};
    c.receptor_species = "E";
    c.output_species = "C2";
    CustomReaction bind1{{"S", "E"}, {"C1"}, rx.lambda1_conc, true};
    CustomReaction unbind1{{"C1"}, {"S", "E"}, rx.mu1, false};
    CustomReaction bind2{{"S", "C1"}, {"C2"}, rx.lambda2_conc, true};
    CustomReaction unbind2{{"C2"}, {"S", "C1"}, rx.mu2, false};
    c.reactions = {bind1, unbind1, bind2, unbind2};
    return c;
}

struct ReactionNet {
    // per circuit species (index into circuit.species, S mapped to -1): net change
    std::map<int, int> net;
    PropensityLaw law;
    int a_local = -2, b_local = -2; // -1 for S
    double prop_const;
};

ReactionNet analyze_reaction(const CustomReaction& r, const CustomCircuit& circuit,
                             double volume) {
    auto local_of = [&](const std::string& name) -> int {
        if (name == "S") return -1;
        for (size_t i = 0; i < circuit.species.size(); ++i)
            if (circuit.species[i] == name) return int(i);
        throw std::invalid_argument("circuit reaction references unknown species '" + name + "'");
    };
    ReactionNet out;
    for (const auto& s : r.reactants) out.net[local_of(s)] -= 1;
    for (const auto& s : r.products) out.net[local_of(s)] += 1;
    switch (r.reactants.size()) {
    case 0:
        out.law = PropensityLaw::Zeroth;
        break;
    case 1:
        out.law = PropensityLaw::First;
        out.a_local = local_of(r.reactants[0]);
        break;
    case 2:
        out.law = PropensityLaw::SecondHetero;
        out.a_local = local_of(r.reactants[0]);
        out.b_local = local_of(r.reactants[1]);
        if (out.a_local == out.b_local)
            throw std::invalid_argument("homodimer reactions are not supported");
        break;
    default:
        throw std::invalid_argument("reactions with more than two reactants are not supported");
    }
    if (r.rate < 0) throw std::invalid_argument("reaction rate constants must be >= 0");
    out.prop_const = r.rate_is_concentration ? convert_rate_constant(r.rate, volume) : r.rate;
    return out;
}

} // namespace

SystemModel assemble_model(const SpatialGrid& grid, const MediumSpec& medium,
                           const TransmitterSpec& tx, const ReceiverSpec& rx) {
    if (!grid.contains(tx.voxel))
        throw std::invalid_argument("assemble_model: transmitter voxel outside grid");
    if (tx.symbols.size() < 2)
        throw std::invalid_argument("assemble_model: at least two transmission symbols required");
    if (tx.priors.size() != tx.symbols.size())
        throw std::invalid_argument("assemble_model: priors must match symbol count");
    double prior_sum = 0.0;
    for (double p : tx.priors) {
        if (p < 0) throw std::invalid_argument("assemble_model: negative prior");
        prior_sum += p;
    }
    if (std::abs(prior_sum - 1.0) > 1e-9)
        throw std::invalid_argument("assemble_model: priors must sum to 1");
    if (rx.voxels.empty()) throw std::invalid_argument("assemble_model: receiver needs >= 1 voxel");
    for (const auto& v : rx.voxels)
        if (!grid.contains(v))
            throw std::invalid_argument("assemble_model: receiver voxel outside grid");
    for (size_t i = 0; i < rx.voxels.size(); ++i)
        for (size_t j = i + 1; j < rx.voxels.size(); ++j)
            if (rx.voxels[i] == rx.voxels[j])
                throw std::invalid_argument("assemble_model: duplicate receiver voxel");
    if (rx.config == ReceiverConfig::Mixed && rx.dr < 0)
        throw std::invalid_argument("assemble_model: mixed configuration needs d_r >= 0");
    if (rx.M < 0) throw std::invalid_argument("assemble_model: M must be >= 0");
    if (medium.D < 0) throw std::invalid_argument("assemble_model: D must be >= 0");

    const std::vector<Voxel> tx_voxels = tx.emitting_voxels();
    for (const auto& v : tx_voxels)
        if (!grid.contains(v))
            throw std::invalid_argument("assemble_model: transmitter voxel outside grid");
    if (tx_voxels.size() > 1)
        for (const auto& sym : tx.symbols)
            if (sym.kind == SymbolDef::Kind::DeterministicBursts)
                throw std::invalid_argument(
                    "assemble_model: burst symbols require a single transmitter voxel");

    SystemModel m;
    m.grid = grid;
    m.medium = medium;
    m.tx = tx;
    m.rx = rx;
    if (m.rx.config == ReceiverConfig::Partitioned) m.rx.dr = 0.0;

    const CustomCircuit circuit = rx.circuit == CircuitKind::ActDeact ? act_deact_circuit(rx)
                                  : rx.circuit == CircuitKind::TwoSite ? two_site_circuit(rx)
                                                                       : rx.custom;
    if (circuit.species.empty() || circuit.output_species.empty())
        throw std::invalid_argument("assemble_model: circuit must declare species and an output");

    const int V = grid.voxel_count();
    const int P = int(rx.voxels.size());
    m.n_receiver_species = int(circuit.species.size());
    m.state_size = V + m.n_receiver_species * P;

    m.species.push_back({"S", true});
    for (const auto& name : circuit.species) m.species.push_back({name, false});
    int output_local = -1, receptor_local = -1;
    for (size_t i = 0; i < circuit.species.size(); ++i) {
        if (circuit.species[i] == circuit.output_species) output_local = int(i);
        if (circuit.species[i] == circuit.receptor_species) receptor_local = int(i);
    }
    if (output_local < 0)
        throw std::invalid_argument("assemble_model: output species not in species list");
    if (receptor_local < 0)
        throw std::invalid_argument("assemble_model: receptor species not in species list");
    m.output_species = output_local + 1;

    for (const auto& v : rx.voxels) m.receiver_voxel_flat.push_back(grid.index_of(v));

    m.initial_state.assign(m.state_size, 0);
    for (int p = 0; p < P; ++p) m.initial_state[m.r_index(receptor_local, p)] = rx.M;

    for (const auto& sym : tx.symbols) m.emissions.push_back(sym.profile());
    m.emission_state_index = m.s_index(grid.index_of(tx_voxels.front()));

    const double d = m.d();
    const double volume = m.voxel_volume();

    // Emission channels first, one per emitting voxel; c holds the rate share
    // and the symbol profile supplies the time-varying rate at eval time.
    const double share = 1.0 / double(tx_voxels.size());
    for (const auto& v : tx_voxels) {
        Channel ch;
        ch.kind = ChannelKind::Emission;
        ch.law = PropensityLaw::Zeroth;
        ch.c = share;
        ch.delta[0] = {m.s_index(grid.index_of(v)), +1};
        ch.n_delta = 1;
        ch.species = 0;
        m.emission_channels.push_back(int(m.channels.size()));
        m.emission_state_indices.push_back(m.s_index(grid.index_of(v)));
        m.channels.push_back(ch);
    }

    // Signalling diffusion, one channel per directed neighbor pair.
    for (const auto& [src, dst] : grid.directed_neighbor_pairs()) {
        Channel ch;
        ch.kind = ChannelKind::SignalDiffusion;
        ch.law = PropensityLaw::First;
        ch.c = d;
        ch.a = m.s_index(src);
        ch.delta[0] = {m.s_index(src), -1};
        ch.delta[1] = {m.s_index(dst), +1};
        ch.n_delta = 2;
        ch.species = 0;
        m.channels.push_back(ch);
    }

    // Boundary absorption, one channel per exposed face of each boundary voxel.
    if (grid.boundary().kind == BoundaryKind::Absorbing) {
        const double absorb = grid.boundary().rate_fraction * d;
        for (int idx = 0; idx < V; ++idx) {
            const int faces = grid.exposed_faces(idx);
            for (int f = 0; f < faces; ++f) {
                Channel ch;
                ch.kind = ChannelKind::BoundaryAbsorb;
                ch.law = PropensityLaw::First;
                ch.c = absorb;
                ch.a = m.s_index(idx);
                ch.delta[0] = {m.s_index(idx), -1};
                ch.n_delta = 1;
                ch.species = 0;
                m.channels.push_back(ch);
            }
        }
    }

    // Circuit reactions, per receiver voxel, declaration order.
    std::vector<int> output_inc_per_voxel(P, 0);
    for (int p = 0; p < P; ++p) {
        const int voxel_flat = m.receiver_voxel_flat[p];
        for (const auto& reac : circuit.reactions) {
            const ReactionNet net = analyze_reaction(reac, circuit, volume);
            Channel ch;
            ch.law = net.law;
            ch.c = net.prop_const;
            ch.rv = p;
            auto state_idx = [&](int local) {
                return local < 0 ? m.s_index(voxel_flat) : m.r_index(local, p);
            };
            if (net.a_local != -2) ch.a = state_idx(net.a_local);
            if (net.b_local != -2) ch.b = state_idx(net.b_local);
            int nd = 0;
            for (const auto& [local, change] : net.net) {
                if (change == 0) continue;
                if (nd >= int(ch.delta.size()))
                    throw std::invalid_argument("reaction changes too many species");
                ch.delta[nd++] = {state_idx(local), change};
            }
            ch.n_delta = nd;
            const int out_change = net.net.count(output_local) ? net.net.at(output_local) : 0;
            if (out_change > 0) {
                if (out_change != 1)
                    throw std::invalid_argument(
                        "output species may only be incremented by one per reaction");
                ch.kind = ChannelKind::Activation;
                ++output_inc_per_voxel[p];
                m.forward_const = ch.c;
            } else if (out_change < 0) {
                ch.kind = ChannelKind::Deactivation;
            } else {
                ch.kind = ChannelKind::CircuitOther;
            }
            m.channels.push_back(ch);
        }
    }
    for (int p = 0; p < P; ++p)
        if (output_inc_per_voxel[p] != 1)
            throw std::invalid_argument(
                "circuit must have exactly one output-incrementing reaction per receiver voxel");
    m.activation_channels.assign(P, -1);
    for (size_t i = 0; i < m.channels.size(); ++i)
        if (m.channels[i].kind == ChannelKind::Activation)
            m.activation_channels[m.channels[i].rv] = int(i);

    // Receiver-species diffusion between adjacent receiver voxels (mixed only).
    if (m.rx.config == ReceiverConfig::Mixed) {
        for (int p = 0; p < P; ++p) {
            for (int q = p + 1; q < P; ++q) {
                if (!grid.adjacent(rx.voxels[p], rx.voxels[q])) continue;
                for (int rs = 0; rs < m.n_receiver_species; ++rs) {
                    for (const auto& [from, to] :
                         {std::pair{p, q}, std::pair{q, p}}) {
                        Channel ch;
                        ch.kind = ChannelKind::ReceiverDiffusion;
                        ch.law = PropensityLaw::First;
                        ch.c = m.rx.dr;
                        ch.a = m.r_index(rs, from);
                        ch.delta[0] = {m.r_index(rs, from), -1};
                        ch.delta[1] = {m.r_index(rs, to), +1};
                        ch.n_delta = 2;
                        ch.rv_from = from;
                        ch.rv_to = to;
                        ch.species = rs + 1;
                        m.channels.push_back(ch);
                    }
                }
            }
        }
    }

    return m;
}

double propensity_eval(const SystemModel& model, const std::vector<long long>& state,
                       const Channel& ch, double t, int symbol) {
    if (ch.kind == ChannelKind::Emission)
        return (symbol >= 0 && symbol < model.K()) ? ch.c * model.emissions[symbol].rate_at(t)
                                                   : 0.0;
    switch (ch.law) {
    case PropensityLaw::Zeroth:
        return ch.c;
    case PropensityLaw::First:
        return ch.c * double(state[ch.a]);
    case PropensityLaw::SecondHetero:
        return ch.c * double(state[ch.a]) * double(state[ch.b]);
    }
    return 0.0;
}

std::string SystemModel::channel_fingerprint() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "state=%d V=%d P=%d\n", state_size, V(), P());
    out += buf;
    for (size_t i = 0; i < initial_state.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld%c", initial_state[i],
                      i + 1 == initial_state.size() ? '\n' : ' ');
        out += buf;
    }
    for (const auto& ch : channels) {
        std::snprintf(buf, sizeof(buf), "k=%d law=%d c=%.17g a=%d b=%d rv=%d f=%d t=%d s=%d d=",
                      int(ch.kind), int(ch.law), ch.c, ch.a, ch.b, ch.rv, ch.rv_from, ch.rv_to,
                      ch.species);
        out += buf;
        for (int j = 0; j < ch.n_delta; ++j) {
            std::snprintf(buf, sizeof(buf), "(%d,%d)", ch.delta[j].first, ch.delta[j].second);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace voxmc
