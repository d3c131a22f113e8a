#include "voxmc/bayes.hpp"
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

struct EventPoint {
    double t;
    enum class What { Obs, Burst, Edge, Grid } what;
    int idx; // into obs.events / profile.bursts / -, grid index
};

} // namespace

BayesFilterResult bayes_filter_optimal(const SystemModel& model, const ObservationStream& obs,
                                       int symbol, ReceiverConfig mode,
                                       const BayesOptions& opts) {
    if (model.rx.circuit != CircuitKind::ActDeact)
        throw std::invalid_argument("bayes_filter_optimal: only the two-state circuit is supported");
    if (symbol < 0 || symbol >= model.K())
        throw std::invalid_argument("bayes_filter_optimal: symbol out of range");

    const int V = model.V();
    const int P = model.P();
    const int M = model.rx.M;
    const double g_plus = model.forward_const;
    const double t_end = obs.t_end;
    const auto& profile = model.emissions[symbol];

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

    const bool mixed = mode == ReceiverConfig::Mixed;

    // hidden receiver state: free receptor counts per voxel (mixed only)
    std::vector<int> recv_init;
    std::vector<std::vector<std::pair<int, int>>> recv_maps;
    std::vector<std::pair<int, int>> diff_pairs; // adjacent receiver voxel pairs
    if (mixed) {
        recv_init.assign(P, M);
        for (int p = 0; p < P; ++p) {
            recv_maps.push_back({{p, -1}}); // activation consumes a receptor
            recv_maps.push_back({{p, +1}}); // deactivation frees one
        }
        for (int p = 0; p < P; ++p)
            for (int q = p + 1; q < P; ++q)
                if (model.grid.adjacent(model.rx.voxels[p], model.rx.voxels[q])) {
                    diff_pairs.emplace_back(p, q);
                    recv_maps.push_back({{p, -1}, {q, +1}});
                    recv_maps.push_back({{q, -1}, {p, +1}});
                }
    }
    ReceiverSpace recv(recv_init, recv_maps, 255, (long long)P * M,
                       opts.max_states / std::max(1, sig.size()) + 1);
    const int nr = recv.size();
    if ((long long)sig.size() * nr > opts.max_states)
        throw std::runtime_error("bayes_filter_optimal: truncated product space exceeds guard");

    ProductSystem sys;
    sys.sig = &sig;
    sys.recv = &recv;

    // hidden dynamics: signalling diffusion/absorption/emission, and for the
    // mixed case the diffusion of free receptors between receiver voxels
    std::vector<std::pair<int, double>> emission_pchs; // (channel index, rate share)
    for (const auto& ch : model.channels) {
        switch (ch.kind) {
        case ChannelKind::SignalDiffusion:
        case ChannelKind::BoundaryAbsorb: {
            PChannel pc;
            pc.c = ch.c;
            pc.sig_factor_voxel = ch.a;
            std::vector<std::pair<int, int>> deltas;
            for (int j = 0; j < ch.n_delta; ++j) deltas.emplace_back(ch.delta[j].first, ch.delta[j].second);
            pc.sig_map = std::make_shared<const std::vector<int32_t>>(sig.shift_table(deltas));
            sys.channels.push_back(std::move(pc));
            break;
        }
        case ChannelKind::Emission: {
            PChannel pc;
            pc.c = 0.0;
            pc.time_windowed = true;
            pc.sig_map = std::make_shared<const std::vector<int32_t>>(
                sig.shift_table({{ch.delta[0].first, +1}}));
            emission_pchs.emplace_back(int(sys.channels.size()), ch.c);
            sys.channels.push_back(std::move(pc));
            break;
        }
        default:
            break;
        }
    }
    if (mixed) {
        for (const auto& [p, q] : diff_pairs) {
            for (const auto& [from, to] : {std::pair{p, q}, std::pair{q, p}}) {
                PChannel pc;
                pc.c = model.rx.dr;
                pc.recv_factor_slot = from;
                pc.recv_map = std::make_shared<const std::vector<int32_t>>(
                    recv.shift_table({{from, -1}, {to, +1}}));
                sys.channels.push_back(std::move(pc));
            }
        }
    }

    // conditioning on "no observable jump": diagonal loss at the
    // symbol-dependent activation intensities
    std::vector<int> kill_idx(P, -1);
    for (int p = 0; p < P; ++p) {
        PChannel pc;
        pc.kill_only = true;
        pc.sig_factor_voxel = model.receiver_voxel_flat[p];
        if (mixed) {
            pc.c = g_plus;
            pc.recv_factor_slot = p;
        } else {
            pc.c = 0.0; // set per interval from g+ (M - X*_p(t))
        }
        kill_idx[p] = int(sys.channels.size());
        sys.channels.push_back(std::move(pc));
    }

    // event reweight/shift tables for the mixed hidden state
    std::vector<std::shared_ptr<const std::vector<int32_t>>> act_map(P), deact_map(P);
    if (mixed) {
        for (int p = 0; p < P; ++p) {
            act_map[p] =
                std::make_shared<const std::vector<int32_t>>(recv.shift_table({{p, -1}}));
            deact_map[p] =
                std::make_shared<const std::vector<int32_t>>(recv.shift_table({{p, +1}}));
        }
    }

    // initial condition: empty medium, all receptors free
    const int s0 = sig.index_of(std::vector<int>(V, 0));
    const int r0 = mixed ? recv.index_of(recv_init) : 0;
    std::vector<double> pi((size_t)sig.size() * nr, 0.0);
    pi[(size_t)s0 * nr + r0] = 1.0;

    std::vector<int> xstar(obs.initial);
    auto set_live_block = [&]() {
        if (!mixed) {
            sys.r_lo = 0;
            sys.r_hi = 1;
        } else {
            int free_total = P * M;
            for (int p = 0; p < P; ++p) free_total -= xstar[p];
            const auto blk = recv.block(free_total);
            sys.r_lo = blk.first;
            sys.r_hi = blk.second;
        }
    };
    long long emitted = 0;
    auto set_signal_window = [&]() {
        const long long hi = burst_only ? emitted : sig.max_total();
        const auto blk = exact_totals ? sig.block_range(int(emitted), int(emitted))
                                      : sig.block_range(0, int(hi));
        sys.s_lo = blk.first;
        sys.s_hi = blk.second;
    };
    set_live_block();
    set_signal_window();

    // burst shift tables
    const int tx_voxel = model.emission_state_index;
    std::map<int, std::vector<int32_t>> burst_tables;
    for (const auto& [t, c] : profile.bursts)
        if (c > 0 && !burst_tables.count(c))
            burst_tables.emplace(c, sig.shift_table({{tx_voxel, c}}));

    double leak = 0.0;
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

    BayesFilterResult res;
    res.n_states = (long long)sig.size() * nr;
    const size_t n_grid = size_t(std::floor(t_end / opts.report_dt + 1e-9)) + 1;
    res.times.resize(n_grid);
    for (size_t j = 0; j < n_grid; ++j) res.times[j] = double(j) * opts.report_dt;
    res.L.assign(n_grid, 0.0);
    res.cond_mean.assign(P, std::vector<double>(n_grid, 0.0));

    const std::vector<double>& priors = opts.priors.empty() ? model.tx.priors : opts.priors;
    double L = std::log(double(model.K()) * priors[symbol]);
    bool dead = false; // posterior mass hit zero: symbol impossible given history

    auto mass_of = [&]() {
        double m = 0.0;
        for (int s = sys.s_lo; s < sys.s_hi; ++s) {
            const long long base = (long long)s * nr;
            for (int r = sys.r_lo; r < sys.r_hi; ++r) m += pi[base + r];
        }
        return m;
    };
    auto renormalize = [&]() {
        const double m = mass_of();
        if (m <= 0.0 || !std::isfinite(m)) {
            dead = true;
            return;
        }
        L += std::log(m);
        const double inv = 1.0 / m;
        for (int s = sys.s_lo; s < sys.s_hi; ++s) {
            const long long base = (long long)s * nr;
            for (int r = sys.r_lo; r < sys.r_hi; ++r) pi[base + r] *= inv;
        }
    };

    auto record_grid = [&](size_t j) {
        res.L[j] = dead ? -std::numeric_limits<double>::infinity() : L;
        for (int p = 0; p < P; ++p) {
            double m = 0.0;
            if (!dead) {
                const int rv = model.receiver_voxel_flat[p];
                for (int s = sys.s_lo; s < sys.s_hi; ++s) {
                    const double n_here = double(sig.count(s, rv));
                    if (n_here == 0.0 && !mixed) continue;
                    const long long base = (long long)s * nr;
                    for (int r = sys.r_lo; r < sys.r_hi; ++r) {
                        const double w = pi[base + r];
                        if (w == 0.0) continue;
                        m += mixed ? w * n_here * double(recv.count(r, p)) : w * n_here;
                    }
                }
            }
            res.cond_mean[p][j] = m;
        }
    };

    // ordered processing points: observation events, bursts, profile edges,
    // grid times
    std::vector<EventPoint> points;
    for (size_t i = 0; i < obs.events.size(); ++i)
        points.push_back({obs.events[i].t, EventPoint::What::Obs, int(i)});
    for (size_t i = 0; i < profile.bursts.size(); ++i)
        points.push_back({profile.bursts[i].first, EventPoint::What::Burst, int(i)});
    for (size_t i = 1; i < profile.edges.size(); ++i)
        points.push_back({profile.edges[i], EventPoint::What::Edge, int(i)});
    for (size_t j = 0; j < n_grid; ++j)
        points.push_back({res.times[j], EventPoint::What::Grid, int(j)});
    std::stable_sort(points.begin(), points.end(),
                     [](const EventPoint& a, const EventPoint& b) { return a.t < b.t; });

    Rk4Work work;
    work.resize(pi.size());

    auto refresh_kills = [&]() {
        if (mixed) return;
        for (int p = 0; p < P; ++p)
            sys.channels[kill_idx[p]].c = g_plus * double(std::max(0, M - xstar[p]));
    };
    refresh_kills();
    for (const auto& [pch, share] : emission_pchs)
        sys.channels[pch].c = share * profile.rate_at(0.0);
    double h_stab = -1.0; // lazily recomputed after structural changes

    double t = 0.0;
    for (const auto& pt : points) {
        if (pt.t > t_end + 1e-12) break;
        if (pt.t > t && !dead) {
            if (h_stab <= 0) {
                const double rate = sys.max_exit_rate();
                h_stab = rate > 0 ? std::min(opts.theta, 2.5) / rate : (pt.t - t);
            }
            detail::integrate_interval(sys, pi, leak, t, pt.t, opts.theta, work, h_stab);
            renormalize();
        }
        t = pt.t;
        switch (pt.what) {
        case EventPoint::What::Grid:
            record_grid(size_t(pt.idx));
            break;
        case EventPoint::What::Edge:
            for (const auto& [pch, share] : emission_pchs)
                sys.channels[pch].c = share * profile.rate_at(t);
            h_stab = -1.0;
            break;
        case EventPoint::What::Burst: {
            const int c = profile.bursts[pt.idx].second;
            if (c > 0 && !dead) apply_burst(c);
            h_stab = -1.0;
            break;
        }
        case EventPoint::What::Obs: {
            // observed counts are replayed even after the posterior dies so the
            // live-block bookkeeping stays consistent
            const ObsEvent& ev = obs.events[pt.idx];
            if (!dead) {
                if (ev.kind == ObsEvent::Kind::Activation) {
                    // weight by the activation intensity's state-dependent factor,
                    // then apply the hidden shift (a receptor binds)
                    const int rv = model.receiver_voxel_flat[ev.p];
                    double val = 0.0;
                    std::vector<double> next(pi.size(), 0.0);
                    const auto* rmap = mixed ? act_map[ev.p]->data() : nullptr;
                    for (int s = sys.s_lo; s < sys.s_hi; ++s) {
                        const double n_here = double(sig.count(s, rv));
                        if (n_here == 0.0) continue;
                        const long long base = (long long)s * nr;
                        for (int r = sys.r_lo; r < sys.r_hi; ++r) {
                            double w = pi[base + r] * n_here;
                            if (w == 0.0) continue;
                            if (mixed) {
                                w *= double(recv.count(r, ev.p));
                                if (w == 0.0) continue;
                                const int r2 = rmap[r];
                                if (r2 >= 0) next[base + r2] += w;
                            } else {
                                next[base + r] += w;
                            }
                            val += w;
                        }
                    }
                    pi.swap(next);
                    // the log-likelihood increment log(val) is folded in by the
                    // renormalization below
                    if (val <= 0.0) dead = true;
                } else if (ev.kind == ObsEvent::Kind::Deactivation && mixed) {
                    // intensity is history-measurable; only the hidden shift applies
                    std::vector<double> next(pi.size(), 0.0);
                    const auto* rmap = deact_map[ev.p]->data();
                    for (int s = sys.s_lo; s < sys.s_hi; ++s) {
                        const long long base = (long long)s * nr;
                        for (int r = sys.r_lo; r < sys.r_hi; ++r) {
                            const double w = pi[base + r];
                            if (w == 0.0) continue;
                            const int r2 = rmap[r];
                            if (r2 >= 0) next[base + r2] += w;
                        }
                    }
                    pi.swap(next);
                }
                // Transfer: intensity d_r X*_q is history-measurable and the
                // hidden state is untouched
            }
            // replay the observed counts
            switch (ev.kind) {
            case ObsEvent::Kind::Activation: xstar[ev.p] += 1; break;
            case ObsEvent::Kind::Deactivation: xstar[ev.p] -= 1; break;
            case ObsEvent::Kind::Transfer:
                xstar[ev.p] -= 1;
                xstar[ev.q] += 1;
                break;
            }
            set_live_block();
            refresh_kills();
            if (!dead) renormalize();
            h_stab = -1.0;
            break;
        }
        }
    }

    res.leakage = leak;
    res.leak_flagged = leak > opts.leak_tol;
    return res;
}

} // namespace voxmc
