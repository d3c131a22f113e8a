#include "voxmc/demod.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voxmc {

namespace {

std::vector<double> shifted_log_priors(const DemodOptions& opts, int K) {
    std::vector<double> lp(K, 0.0);
    if (opts.priors.empty()) return lp; // uniform: log(K * 1/K) = 0
    if (int(opts.priors.size()) != K)
        throw std::invalid_argument("demod: priors size does not match symbol count");
    for (int k = 0; k < K; ++k) {
        if (opts.priors[k] < 0) throw std::invalid_argument("demod: negative prior");
        lp[k] = std::log(double(K) * opts.priors[k]); // -inf for zero prior is fine
    }
    return lp;
}

int argmax_lowest(const std::vector<double>& z) {
    return int(std::max_element(z.begin(), z.end()) - z.begin());
}

// Unified accumulator for the approximate filters. Events are processed in
// time order; `drift_rate_factor(k, p)` supplies the multiplier of the
// reference integral in the drift term and `jump(k, p, t)` is applied at +1
// jumps.
struct FilterRun {
    const ReferenceBank& refs;
    const DemodOptions& opts;
    double t_end;
    int K, P;

    DemodulatorOutput out;
    std::vector<double> Z;                          // [k]
    std::vector<std::vector<double>> Zp;            // [k][p]
    size_t grid_next = 0;
    size_t n_grid = 0;
    double t_prev = 0.0;

    // drift factor per (k, p), piecewise constant between events
    std::vector<double> factor; // [k*P + p]

    FilterRun(const ReferenceBank& refs_, const DemodOptions& opts_, double t_end_)
        : refs(refs_), opts(opts_), t_end(t_end_), K(int(refs_.size())),
          P(refs_.empty() ? 0 : int(refs_.front().size())) {
        if (K < 1 || P < 1) throw std::invalid_argument("demod: empty reference bank");
        for (const auto& per_voxel : refs)
            if (int(per_voxel.size()) != P)
                throw std::invalid_argument("demod: ragged reference bank");
        Z = shifted_log_priors(opts, K);
        Zp.assign(K, std::vector<double>(P, 0.0));
        factor.assign(size_t(K) * P, 0.0);
        n_grid = size_t(std::floor(t_end / opts.report_dt + 1e-9)) + 1;
        out.times.resize(n_grid);
        for (size_t j = 0; j < n_grid; ++j) out.times[j] = double(j) * opts.report_dt;
        out.Z.assign(K, std::vector<double>(n_grid, 0.0));
        if (opts.keep_per_voxel)
            out.Z_per_voxel.assign(K, std::vector<std::vector<double>>(P, std::vector<double>(n_grid, 0.0)));
    }

    double clamped_ref(int k, int p, double t) {
        const double v = refs[k][p].at(t);
        if (v < opts.clamp) {
            ++out.clamp_count;
            return opts.clamp;
        }
        return v;
    }

    // integrate drift on [t_prev, t], recording grid points passed
    void advance_to(double t) {
        while (grid_next < n_grid && out.times[grid_next] < t) {
            const double tj = out.times[grid_next];
            for (int k = 0; k < K; ++k) {
                double zk = Z[k];
                for (int p = 0; p < P; ++p) {
                    const double zp =
                        Zp[k][p] - factor[size_t(k) * P + p] * refs[k][p].integral(t_prev, tj);
                    if (opts.keep_per_voxel) out.Z_per_voxel[k][p][grid_next] = zp;
                    zk += zp - Zp[k][p];
                }
                out.Z[k][grid_next] = zk;
            }
            ++grid_next;
        }
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p) {
                const double dz = factor[size_t(k) * P + p] * refs[k][p].integral(t_prev, t);
                Zp[k][p] -= dz;
                Z[k] -= dz;
            }
        t_prev = t;
    }

    void jump(int p, double t) {
        for (int k = 0; k < K; ++k) {
            const double lr = std::log(clamped_ref(k, p, t));
            Z[k] += lr;
            Zp[k][p] += lr;
            out.jumps.push_back({t, p, k, lr});
        }
    }

    DemodulatorOutput finish() {
        advance_to(t_end);
        // grid points at exactly t_end
        while (grid_next < n_grid) {
            for (int k = 0; k < K; ++k) {
                out.Z[k][grid_next] = Z[k];
                if (opts.keep_per_voxel)
                    for (int p = 0; p < P; ++p) out.Z_per_voxel[k][p][grid_next] = Zp[k][p];
            }
            ++grid_next;
        }
        out.Z_final = Z;
        out.decisions.resize(n_grid);
        for (size_t j = 0; j < n_grid; ++j) {
            std::vector<double> col(K);
            for (int k = 0; k < K; ++k) col[k] = out.Z[k][j];
            out.decisions[j] = argmax_lowest(col);
        }
        out.final_decision = argmax_lowest(Z);
        return std::move(out);
    }
};

} // namespace

int DemodulatorOutput::decision_at(double t) const {
    if (times.empty()) throw std::logic_error("DemodulatorOutput: empty grid");
    if (t > times.back() + 1e-9)
        throw std::invalid_argument("decision_at: time beyond demodulated horizon");
    const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    size_t j = size_t(std::min<double>(std::max(0.0, t / dt + 0.5), double(times.size() - 1)));
    return decisions[j];
}

DemodulatorOutput demod_partitioned_approx(const ObservationStream& obs,
                                           const ReferenceBank& alpha, double g_plus,
                                           const std::vector<int>& M, const DemodOptions& opts) {
    if (int(M.size()) != obs.P())
        throw std::invalid_argument("demod_partitioned_approx: M list size mismatch");
    FilterRun run(alpha, opts, obs.t_end);
    if (run.P != obs.P())
        throw std::invalid_argument("demod_partitioned_approx: reference voxel count mismatch");

    std::vector<int> xstar(obs.initial);
    auto refresh_factors = [&]() {
        for (int k = 0; k < run.K; ++k)
            for (int p = 0; p < run.P; ++p)
                run.factor[size_t(k) * run.P + p] = g_plus * double(M[p] - xstar[p]);
    };
    refresh_factors();

    for (const auto& ev : obs.events) {
        run.advance_to(ev.t);
        switch (ev.kind) {
        case ObsEvent::Kind::Activation:
            run.jump(ev.p, ev.t);
            xstar[ev.p] += 1;
            break;
        case ObsEvent::Kind::Deactivation:
            xstar[ev.p] -= 1;
            break;
        case ObsEvent::Kind::Transfer:
            run.jump(ev.q, ev.t); // the +1 side of the pair
            xstar[ev.p] -= 1;
            xstar[ev.q] += 1;
            break;
        }
        refresh_factors();
    }
    return run.finish();
}

DemodulatorOutput demod_generic_approx(const ObservationStream& obs, const ReferenceBank& refs,
                                       double forward_const, const DemodOptions& opts) {
    FilterRun run(refs, opts, obs.t_end);
    if (run.P != obs.P())
        throw std::invalid_argument("demod_generic_approx: reference voxel count mismatch");
    for (int k = 0; k < run.K; ++k)
        for (int p = 0; p < run.P; ++p) run.factor[size_t(k) * run.P + p] = forward_const;

    for (const auto& ev : obs.events) {
        run.advance_to(ev.t);
        if (ev.kind == ObsEvent::Kind::Activation)
            run.jump(ev.p, ev.t);
        else if (ev.kind == ObsEvent::Kind::Transfer)
            run.jump(ev.q, ev.t);
    }
    return run.finish();
}

DemodulatorOutput demod_mixed_approx(const ObservationStream& obs, const ReferenceBank& beta,
                                     double g_plus, const DemodOptions& opts) {
    return demod_generic_approx(obs, beta, g_plus, opts);
}

ActivationTrains extract_activation_trains_oracle(const ObservationStream& obs) {
    ActivationTrains trains;
    trains.times.assign(obs.P(), {});
    for (const auto& ev : obs.events)
        if (ev.kind == ObsEvent::Kind::Activation) trains.times[ev.p].push_back(ev.t);
    return trains;
}

ActivationTrains extract_activation_trains_inferred(const ObservationStream& obs,
                                                    const SystemModel& model) {
    if (obs.P() == 1 && model.rx.config == ReceiverConfig::Mixed)
        throw std::invalid_argument(
            "extract_activation_trains_inferred: single-voxel record of a mixed receiver is "
            "undecidable");
    // work from bare per-voxel jumps: (t, p, delta), no cause labels
    struct Jump {
        double t;
        int p;
        int delta;
    };
    std::vector<Jump> jumps;
    const auto deltas = per_voxel_deltas(obs);
    for (int p = 0; p < obs.P(); ++p)
        for (const auto& d : deltas[p]) jumps.push_back({d.t, p, d.delta});
    std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.t < b.t; });

    ActivationTrains trains;
    trains.times.assign(obs.P(), {});
    for (size_t i = 0; i < jumps.size(); ++i) {
        if (jumps[i].delta != +1) continue;
        bool paired = false;
        for (size_t j = i; j-- > 0 && jumps[j].t == jumps[i].t;)
            if (jumps[j].delta == -1 &&
                model.grid.adjacent(model.rx.voxels[jumps[j].p], model.rx.voxels[jumps[i].p]))
                paired = true;
        for (size_t j = i + 1; j < jumps.size() && jumps[j].t == jumps[i].t; ++j)
            if (jumps[j].delta == -1 &&
                model.grid.adjacent(model.rx.voxels[jumps[j].p], model.rx.voxels[jumps[i].p]))
                paired = true;
        if (!paired) trains.times[jumps[i].p].push_back(jumps[i].t);
    }
    return trains;
}

DemodulatorOutput demod_mixed_oracle(const ObservationStream& obs, const ActivationTrains& trains,
                                     const ReferenceBank& beta, double g_plus,
                                     const DemodOptions& opts) {
    FilterRun run(beta, opts, obs.t_end);
    if (int(trains.times.size()) != run.P)
        throw std::invalid_argument("demod_mixed_oracle: train voxel count mismatch");
    for (int k = 0; k < run.K; ++k)
        for (int p = 0; p < run.P; ++p) run.factor[size_t(k) * run.P + p] = g_plus;

    struct Ev {
        double t;
        int p;
    };
    std::vector<Ev> evs;
    for (int p = 0; p < run.P; ++p)
        for (double t : trains.times[p]) evs.push_back({t, p});
    std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.t < b.t; });

    for (const auto& ev : evs) {
        run.advance_to(ev.t);
        run.jump(ev.p, ev.t);
    }
    return run.finish();
}

std::vector<BerCurve> decide_and_ber(const std::vector<DemodulatorOutput>& outputs,
                                     const std::vector<int>& true_symbols,
                                     const std::vector<double>& decision_times) {
    if (outputs.empty() || outputs.size() != true_symbols.size())
        throw std::invalid_argument("decide_and_ber: outputs/true_symbols mismatch");
    int K = 0;
    for (int s : true_symbols) K = std::max(K, s + 1);
    for (const auto& o : outputs) K = std::max(K, int(o.Z.size()));

    std::vector<BerCurve> curves(K);
    for (int k = 0; k < K; ++k) {
        curves[k].symbol = k;
        curves[k].points.resize(decision_times.size());
    }
    for (size_t j = 0; j < decision_times.size(); ++j)
        for (int k = 0; k < K; ++k) curves[k].points[j].t = decision_times[j];

    for (size_t i = 0; i < outputs.size(); ++i) {
        const int k = true_symbols[i];
        for (size_t j = 0; j < decision_times.size(); ++j) {
            auto& pt = curves[k].points[j];
            pt.n += 1;
            if (outputs[i].decision_at(decision_times[j]) != k) pt.errors += 1;
        }
    }
    for (auto& curve : curves)
        for (auto& pt : curve.points) {
            if (pt.n == 0) continue;
            pt.ber = double(pt.errors) / double(pt.n);
            pt.ci = wilson_interval(pt.errors, pt.n);
        }
    return curves;
}

} // namespace voxmc
