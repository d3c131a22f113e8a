#include "voxmc/cme.hpp"
#include "product_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace voxmc {

using detail::PChannel;
using detail::ProductSystem;
using detail::Rk4Work;

namespace {

struct SplitChannel {
    std::vector<std::pair<int, int>> sig_deltas;  // (voxel, change)
    std::vector<std::pair<int, int>> recv_deltas; // (slot, change)
    int sig_factor = -1;
    int recv_factor = -1;
};

SplitChannel split_channel(const SystemModel& model, const Channel& ch) {
    SplitChannel out;
    const int V = model.V();
    for (int j = 0; j < ch.n_delta; ++j) {
        const auto& [idx, change] = ch.delta[j];
        if (idx < V)
            out.sig_deltas.emplace_back(idx, change);
        else
            out.recv_deltas.emplace_back(idx - V, change);
    }
    auto classify = [&](int idx, int& sig_f, int& recv_f) {
        if (idx < 0) return;
        if (idx < V) {
            if (sig_f >= 0) throw std::runtime_error("second-order signal pair unsupported");
            sig_f = idx;
        } else {
            if (recv_f >= 0)
                throw std::runtime_error("second-order receiver pair unsupported in oracle");
            recv_f = idx - V;
        }
    };
    classify(ch.a, out.sig_factor, out.recv_factor);
    classify(ch.b, out.sig_factor, out.recv_factor);
    return out;
}

} // namespace

CmeResult cme_transient_oracle(const SystemModel& model, int symbol,
                               const std::vector<double>& grid, const CmeOptions& opts) {
    if (symbol < 0 || symbol >= model.K())
        throw std::invalid_argument("cme_transient_oracle: symbol out of range");
    if (grid.empty() || grid.front() < 0)
        throw std::invalid_argument("cme_transient_oracle: grid must start at t >= 0");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw std::invalid_argument("cme_transient_oracle: grid must be increasing");

    const auto& profile = model.emissions[symbol];
    const int V = model.V();
    const int P = model.P();
    const int n_slots = model.n_receiver_species * P;

    const bool burst_only = profile.max_rate() == 0.0;
    const bool reflecting = model.grid.boundary().kind == BoundaryKind::Reflecting;
    long long total_cap = opts.total_cap;
    if (total_cap < 0) {
        if (burst_only) {
            total_cap = 0;
            for (const auto& [t, c] : profile.bursts) total_cap += c;
        } else {
            total_cap = (long long)V * opts.nmax_per_voxel;
        }
    }

    // under a reflecting boundary a burst schedule pins the reachable totals
    // to its partial sums
    std::vector<int> allowed_totals;
    const bool exact_totals = burst_only && reflecting && opts.total_cap < 0;
    if (exact_totals) {
        long long acc = 0;
        allowed_totals.push_back(0);
        for (const auto& [t, c] : profile.bursts) {
            acc += c;
            allowed_totals.push_back(int(acc));
        }
    }
    SignalSpace sig(V, opts.nmax_per_voxel, total_cap, opts.max_states,
                    exact_totals ? &allowed_totals : nullptr);

    // receiver space: closure of the initial receiver configuration under
    // every channel's receiver-side delta
    std::vector<int> recv_init(n_slots);
    for (int i = 0; i < n_slots; ++i) recv_init[i] = int(model.initial_state[V + i]);
    std::vector<std::vector<std::pair<int, int>>> recv_maps;
    for (const auto& ch : model.channels) {
        const SplitChannel sc = split_channel(model, ch);
        if (!sc.recv_deltas.empty()) recv_maps.push_back(sc.recv_deltas);
    }
    long long recv_total_cap = 0;
    for (int c : recv_init) recv_total_cap += c;
    bool recv_conserving = true;
    for (const auto& map : recv_maps) {
        int net = 0;
        for (const auto& [slot, change] : map) net += change;
        if (net != 0) recv_conserving = false;
    }
    if (!recv_conserving) recv_total_cap = 255LL * std::max(1, n_slots);
    ReceiverSpace recv(recv_init, recv_maps, 255, recv_total_cap,
                       opts.max_states / std::max(1, sig.size()) + 1);

    ProductSystem sys;
    sys.sig = &sig;
    sys.recv = &recv;
    const int nr = recv.size();
    if ((long long)sig.size() * nr > opts.max_states)
        throw std::runtime_error("cme_transient_oracle: truncated product space exceeds guard");

    std::vector<std::pair<int, double>> emission_pchs; // (channel index, rate share)
    for (size_t ci = 0; ci < model.channels.size(); ++ci) {
        const Channel& ch = model.channels[ci];
        const SplitChannel sc = split_channel(model, ch);
        PChannel pc;
        pc.c = ch.c;
        pc.sig_factor_voxel = sc.sig_factor;
        pc.recv_factor_slot = sc.recv_factor;
        if (!sc.sig_deltas.empty())
            pc.sig_map = std::make_shared<const std::vector<int32_t>>(sig.shift_table(sc.sig_deltas));
        if (!sc.recv_deltas.empty())
            pc.recv_map =
                std::make_shared<const std::vector<int32_t>>(recv.shift_table(sc.recv_deltas));
        if (ch.kind == ChannelKind::Emission) {
            pc.time_windowed = true;
            emission_pchs.emplace_back(int(sys.channels.size()), ch.c);
            pc.c = 0.0;
        }
        sys.channels.push_back(std::move(pc));
    }

    // initial distribution: point mass
    const int s0 = sig.index_of(std::vector<int>(V, 0));
    const int r0 = recv.index_of(recv_init);
    if (s0 < 0 || r0 < 0) throw std::runtime_error("cme_transient_oracle: initial state truncated");
    std::vector<double> pi((size_t)sig.size() * nr, 0.0);

    const auto live = recv_conserving ? recv.block(recv.total(r0)) : std::pair<int, int>{0, nr};
    sys.r_lo = live.first;
    sys.r_hi = live.second;

    long long emitted = 0;
    auto set_signal_window = [&]() {
        const long long hi = burst_only ? emitted : sig.max_total();
        const auto blk = exact_totals ? sig.block_range(int(emitted), int(emitted))
                                      : sig.block_range(0, int(hi));
        sys.s_lo = blk.first;
        sys.s_hi = blk.second;
    };
    set_signal_window();

    pi[(size_t)s0 * nr + r0] = 1.0;
    double leak = 0.0;

    // burst shift tables by distinct burst size
    const int tx_voxel = model.emission_state_index;
    std::map<int, std::vector<int32_t>> burst_tables;
    for (const auto& [t, c] : profile.bursts)
        if (c > 0 && !burst_tables.count(c))
            burst_tables.emplace(c, sig.shift_table({{tx_voxel, c}}));
    auto apply_burst = [&](int count) {
        const auto& tab = burst_tables.at(count);
        std::vector<double> next(pi.size(), 0.0);
        for (int s = sys.s_lo; s < sys.s_hi; ++s) {
            const long long base = (long long)s * nr;
            const int s2 = tab[s];
            if (s2 < 0) {
                for (int r = sys.r_lo; r < sys.r_hi; ++r) leak += pi[base + r];
            } else {
                const long long dst = (long long)s2 * nr;
                for (int r = sys.r_lo; r < sys.r_hi; ++r) next[dst + r] += pi[base + r];
            }
        }
        pi.swap(next);
        emitted += count;
        set_signal_window();
    };

    // interval boundaries: profile edges, burst times, grid points
    std::vector<double> cuts(grid.begin(), grid.end());
    for (size_t i = 1; i < profile.edges.size(); ++i) cuts.push_back(profile.edges[i]);
    for (const auto& [t, c] : profile.bursts) cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    CmeResult res;
    res.n_states = (long long)sig.size() * nr;
    res.mean_nr.assign(P, {});
    res.mean_product.assign(P, {});
    res.mean_output.assign(P, {});

    auto record = [&]() {
        double mass = 0.0;
        for (int s = sys.s_lo; s < sys.s_hi; ++s) {
            const long long base = (long long)s * nr;
            for (int r = sys.r_lo; r < sys.r_hi; ++r) mass += pi[base + r];
        }
        for (int p = 0; p < P; ++p) {
            const int rv = model.receiver_voxel_flat[p];
            const Channel& act = model.channels[model.activation_channels[p]];
            const SplitChannel sc = split_channel(model, act);
            const int out_slot = (model.output_species - 1) * P + p;
            double m_nr = 0, m_prod = 0, m_out = 0;
            for (int s = sys.s_lo; s < sys.s_hi; ++s) {
                const long long base = (long long)s * nr;
                const double n_here = double(sig.count(s, rv));
                const double f_sig = sc.sig_factor >= 0 ? double(sig.count(s, sc.sig_factor)) : 1.0;
                for (int r = sys.r_lo; r < sys.r_hi; ++r) {
                    const double w = pi[base + r];
                    if (w == 0.0) continue;
                    m_nr += w * n_here;
                    const double f_recv =
                        sc.recv_factor >= 0 ? double(recv.count(r, sc.recv_factor)) : 1.0;
                    m_prod += w * f_sig * f_recv;
                    m_out += w * double(recv.count(r, out_slot));
                }
            }
            const double inv = mass > 0 ? 1.0 / mass : 0.0;
            res.mean_nr[p].push_back(m_nr * inv);
            res.mean_product[p].push_back(m_prod * inv);
            res.mean_output[p].push_back(m_out * inv);
        }
        res.leakage.push_back(leak);
    };

    Rk4Work work;
    work.resize(pi.size());

    double t = 0.0;
    size_t gi = 0;
    // events exactly at t = 0
    for (const auto& [bt, bc] : profile.bursts)
        if (bt == 0.0 && bc > 0) apply_burst(bc);
    if (gi < grid.size() && grid[gi] == 0.0) {
        res.times.push_back(0.0);
        record();
        ++gi;
    }

    for (double cut : cuts) {
        if (cut <= 0.0) continue;
        for (const auto& [pch, share] : emission_pchs)
            sys.channels[pch].c = share * profile.rate_at(t);
        detail::integrate_interval(sys, pi, leak, t, cut, opts.theta, work);
        t = cut;
        for (const auto& [bt, bc] : profile.bursts)
            if (bt == t && bc > 0) apply_burst(bc);
        if (gi < grid.size() && grid[gi] == t) {
            res.times.push_back(t);
            record();
            ++gi;
        }
    }

    if (gi != grid.size())
        throw std::logic_error("cme_transient_oracle: grid points beyond final cut");
    res.leak_flagged = leak > opts.leak_tol;
    return res;
}

} // namespace voxmc
