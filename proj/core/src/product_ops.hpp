#pragma once

// Internal machinery shared by the CME transient oracle and the optimal
// Bayesian filter. The joint space is a product of a SignalSpace (signalling
// counts per voxel) and a ReceiverSpace (receiver-species counts); every
// channel factorizes as c * f_sig(s) * f_recv(r) with independent index maps
// on the two parts, so the generator never needs to be materialized. Sweeps
// run over the live window [s_lo,s_hi) x [r_lo,r_hi) that conservation laws
// confine the probability mass to.

#include "voxmc/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace voxmc::detail {

struct PChannel {
    double c = 0.0;
    int sig_factor_voxel = -1; // multiply by signalling count in this voxel
    int recv_factor_slot = -1; // multiply by receiver count in this slot
    std::shared_ptr<const std::vector<int32_t>> sig_map;  // null: identity
    std::shared_ptr<const std::vector<int32_t>> recv_map; // null: identity
    bool kill_only = false;     // diagonal loss without a destination (conditioning)
    bool time_windowed = false; // c rebound per interval (emission)
};

struct ProductSystem {
    const SignalSpace* sig = nullptr;
    const ReceiverSpace* recv = nullptr;
    std::vector<PChannel> channels;
    int s_lo = 0, s_hi = 1; // live signal block
    int r_lo = 0, r_hi = 1; // live receiver block

    int n_sig() const { return sig->size(); }
    int n_recv() const { return recv ? recv->size() : 1; }
    long long dim() const { return (long long)n_sig() * n_recv(); }

    // out += d(pi)/dt on the live window; dleak accumulates the rate of
    // probability flowing out of the truncated space.
    void deriv(const std::vector<double>& pi, std::vector<double>& out, double& dleak) const {
        const int nr = n_recv();
        for (const auto& ch : channels) {
            if (ch.c == 0.0) continue;
            const auto* smap = ch.sig_map ? ch.sig_map->data() : nullptr;
            const auto* rmap = ch.recv_map ? ch.recv_map->data() : nullptr;
            for (int s = s_lo; s < s_hi; ++s) {
                double fs = ch.c;
                if (ch.sig_factor_voxel >= 0) {
                    const int cnt = sig->count(s, ch.sig_factor_voxel);
                    if (cnt == 0) continue;
                    fs *= double(cnt);
                }
                const long long src = (long long)s * nr;
                const int s2 = smap ? smap[s] : s;
                const long long dst = s2 >= 0 ? (long long)s2 * nr : -1;
                for (int r = r_lo; r < r_hi; ++r) {
                    double rate = fs * pi[src + r];
                    if (rate == 0.0) continue;
                    if (ch.recv_factor_slot >= 0) {
                        rate *= double(recv->count(r, ch.recv_factor_slot));
                        if (rate == 0.0) continue;
                    }
                    out[src + r] -= rate;
                    if (ch.kill_only) continue;
                    const int r2 = rmap ? rmap[r] : r;
                    if (dst >= 0 && r2 >= 0)
                        out[dst + r2] += rate;
                    else
                        dleak += rate;
                }
            }
        }
    }

    // largest total exit rate over the live window; bounds both the stable
    // and the accurate explicit step
    double max_exit_rate() const {
        const int nr = n_recv();
        std::vector<double> exit((size_t)(s_hi - s_lo) * (r_hi - r_lo), 0.0);
        for (const auto& ch : channels) {
            if (ch.c == 0.0) continue;
            for (int s = s_lo; s < s_hi; ++s) {
                double fs = ch.c;
                if (ch.sig_factor_voxel >= 0) fs *= double(sig->count(s, ch.sig_factor_voxel));
                if (fs == 0.0) continue;
                const long long base = (long long)(s - s_lo) * (r_hi - r_lo);
                for (int r = r_lo; r < r_hi; ++r) {
                    double rate = fs;
                    if (ch.recv_factor_slot >= 0)
                        rate *= double(recv->count(r, ch.recv_factor_slot));
                    exit[base + r - r_lo] += rate;
                }
            }
        }
        double m = 0.0;
        for (double e : exit) m = std::max(m, e);
        return m;
    }
};

struct Rk4Work {
    std::vector<double> k1, k2, k3, k4, tmp;
    void resize(size_t n) {
        k1.assign(n, 0.0);
        k2.assign(n, 0.0);
        k3.assign(n, 0.0);
        k4.assign(n, 0.0);
        tmp.assign(n, 0.0);
    }
};

// one classic 4th-order step of dπ/dt = deriv(π); leak integrated alongside
inline void rk4_step(const ProductSystem& sys, std::vector<double>& pi, double& leak, double h,
                     Rk4Work& w, bool have_k1, double k1_leak) {
    const int nr = sys.n_recv();
    const long long lo = (long long)sys.s_lo * nr;
    const long long hi = (long long)sys.s_hi * nr;
    auto eval = [&](const std::vector<double>& y, std::vector<double>& out, double& dl) {
        std::fill(out.begin() + lo, out.begin() + hi, 0.0);
        dl = 0.0;
        sys.deriv(y, out, dl);
    };
    double l1 = k1_leak, l2 = 0, l3 = 0, l4 = 0;
    if (!have_k1) eval(pi, w.k1, l1);
    for (long long i = lo; i < hi; ++i) w.tmp[i] = pi[i] + 0.5 * h * w.k1[i];
    eval(w.tmp, w.k2, l2);
    for (long long i = lo; i < hi; ++i) w.tmp[i] = pi[i] + 0.5 * h * w.k2[i];
    eval(w.tmp, w.k3, l3);
    for (long long i = lo; i < hi; ++i) w.tmp[i] = pi[i] + h * w.k3[i];
    eval(w.tmp, w.k4, l4);
    for (long long i = lo; i < hi; ++i)
        pi[i] += h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    leak += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

// integrates dπ/dt over [t0, t1]; the step keeps lambda_max * h <= theta
// (theta < 2.78 also keeps the classic scheme inside its stability region),
// where lambda_max is the largest per-state exit rate, i.e. the L1 operator
// scale of dπ/dt
inline void integrate_interval(const ProductSystem& sys, std::vector<double>& pi, double& leak,
                               double t0, double t1, double theta, Rk4Work& w,
                               double h_bound = -1.0) {
    if (t1 <= t0) return;
    if (h_bound <= 0) {
        const double rate = sys.max_exit_rate();
        h_bound = rate > 0 ? std::min(theta, 2.5) / rate : (t1 - t0);
    }
    double t = t0;
    while (t < t1 - 1e-15) {
        const double h = std::min(h_bound, t1 - t);
        rk4_step(sys, pi, leak, h, w, false, 0.0);
        t += h;
    }
}

// π mass outside the live window must stay zero; callers widen the window
// before transitions can populate new blocks
inline void clear_outside(const ProductSystem& sys, std::vector<double>& pi) {
    const int nr = sys.n_recv();
    std::fill(pi.begin(), pi.begin() + (long long)sys.s_lo * nr, 0.0);
    std::fill(pi.begin() + (long long)sys.s_hi * nr, pi.end(), 0.0);
}

} // namespace voxmc::detail
