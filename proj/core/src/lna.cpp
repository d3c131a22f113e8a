#include "voxmc/lna.hpp"
#include "voxmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voxmc {

MeanSystem build_mean_system(const SystemModel& model) {
    MeanSystem sys;
    sys.n = model.state_size;
    sys.volume = model.voxel_volume();
    sys.input = Eigen::VectorXd::Zero(sys.n);
    for (int i : model.emission_channels) {
        const Channel& ch = model.channels[i];
        sys.input[ch.delta[0].first] += ch.c; // rate share per emitting voxel
    }

    std::vector<Eigen::VectorXd> cols;
    for (const auto& ch : model.channels) {
        if (ch.kind == ChannelKind::Emission) continue;
        RateTerm rt;
        rt.law = ch.law;
        rt.a = ch.a;
        rt.b = ch.b;
        rt.kind = ch.kind;
        rt.rv = ch.rv >= 0 ? ch.rv : ch.rv_from;
        rt.rv_to = ch.rv_to;
        rt.species = ch.species;
        switch (ch.law) {
        case PropensityLaw::Zeroth: rt.khat = ch.c / sys.volume; break;
        case PropensityLaw::First: rt.khat = ch.c; break;
        case PropensityLaw::SecondHetero: rt.khat = ch.c * sys.volume; break;
        }
        Eigen::VectorXd col = Eigen::VectorXd::Zero(sys.n);
        for (int j = 0; j < ch.n_delta; ++j) col[ch.delta[j].first] += double(ch.delta[j].second);
        cols.push_back(col);
        sys.rates.push_back(rt);
    }
    sys.S.resize(sys.n, int(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) sys.S.col(int(c)) = cols[c];
    return sys;
}

Eigen::VectorXd eval_rates(const MeanSystem& sys, const Eigen::VectorXd& x) {
    Eigen::VectorXd r(sys.m());
    for (int c = 0; c < sys.m(); ++c) {
        const RateTerm& rt = sys.rates[c];
        switch (rt.law) {
        case PropensityLaw::Zeroth: r[c] = rt.khat; break;
        case PropensityLaw::First: r[c] = rt.khat * x[rt.a]; break;
        case PropensityLaw::SecondHetero: r[c] = rt.khat * x[rt.a] * x[rt.b]; break;
        }
    }
    return r;
}

Eigen::MatrixXd eval_rate_jacobian(const MeanSystem& sys, const Eigen::VectorXd& x) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(sys.m(), sys.n);
    for (int c = 0; c < sys.m(); ++c) {
        const RateTerm& rt = sys.rates[c];
        switch (rt.law) {
        case PropensityLaw::Zeroth: break;
        case PropensityLaw::First: J(c, rt.a) = rt.khat; break;
        case PropensityLaw::SecondHetero:
            J(c, rt.a) = rt.khat * x[rt.b];
            J(c, rt.b) = rt.khat * x[rt.a];
            break;
        }
    }
    return J;
}

namespace {

// step boundaries aligned with the emission profile's discontinuities
std::vector<double> step_edges(const EmissionProfile& profile, double t_end) {
    std::vector<double> cuts{0.0, t_end};
    for (size_t i = 1; i < profile.edges.size(); ++i)
        if (profile.edges[i] < t_end) cuts.push_back(profile.edges[i]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

// fixed-step RK4 with local halving when a component dips negative
template <typename Deriv, typename Accept>
void rk4_drive(double t0, double t1, double h, int max_halvings, Eigen::VectorXd& y,
               const Deriv& f, const Accept& acceptable) {
    double t = t0;
    while (t < t1 - 1e-15) {
        double step = std::min(h, t1 - t);
        int halvings = 0;
        for (;;) {
            Eigen::VectorXd k1 = f(t, y);
            Eigen::VectorXd k2 = f(t + 0.5 * step, y + 0.5 * step * k1);
            Eigen::VectorXd k3 = f(t + 0.5 * step, y + 0.5 * step * k2);
            Eigen::VectorXd k4 = f(t + step, y + step * k3);
            Eigen::VectorXd next = y + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (acceptable(next)) {
                y = next;
                t += step;
                break;
            }
            if (++halvings > max_halvings)
                throw std::runtime_error("lna: step halving limit reached (negative mean)");
            step *= 0.5;
        }
    }
}

} // namespace

MeanSolution solve_mean_system(const SystemModel& model, int symbol, double t_end,
                               const LnaOptions& opts) {
    if (symbol < 0 || symbol >= model.K())
        throw std::invalid_argument("solve_mean_system: symbol out of range");
    const auto& profile = model.emissions[symbol];
    if (!profile.bursts.empty())
        throw std::invalid_argument(
            "solve_mean_system: deterministic-burst symbols have no rate representation; use a "
            "pulse or rate emission");

    const MeanSystem sys = build_mean_system(model);
    const double V = sys.volume;
    const int P = model.P();

    MeanSolution sol;
    const size_t n_report = size_t(std::floor(t_end / opts.report_dt + 1e-9)) + 1;
    const size_t n_dense = size_t(std::llround(t_end / opts.h)) + 1;
    sol.times.resize(n_report);
    for (size_t j = 0; j < n_report; ++j) sol.times[j] = double(j) * opts.report_dt;
    sol.x.resize(sys.n, n_report);
    sol.alpha.resize(P, n_report);
    sol.beta.resize(P, n_report);
    sol.dense_times.resize(n_dense);
    sol.dense_beta.resize(P, n_dense);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.n);
    for (int i = 0; i < sys.n; ++i) x[i] = double(model.initial_state[i]) / V;

    auto deriv = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return sys.S * eval_rates(sys, y) + sys.input * (profile.rate_at(t) / V);
    };
    auto nonneg = [](const Eigen::VectorXd& y) { return (y.array() >= -1e-12).all(); };

    auto record = [&](size_t dense_idx, const Eigen::VectorXd& y) {
        for (int p = 0; p < P; ++p) {
            const Channel& act = model.channels[model.activation_channels[p]];
            sol.dense_beta(p, dense_idx) = V * V * y[act.a] * y[act.b];
        }
        sol.dense_times[dense_idx] = double(dense_idx) * opts.h;
    };

    const auto cuts = step_edges(profile, t_end);
    size_t dense_idx = 0, report_idx = 0;
    record(dense_idx++, x);
    if (report_idx < n_report && sol.times[report_idx] == 0.0) {
        sol.x.col(0) = x;
        for (int p = 0; p < P; ++p) {
            sol.alpha(p, 0) = V * x[model.s_index(model.receiver_voxel_flat[p])];
            sol.beta(p, 0) = sol.dense_beta(p, 0);
        }
        ++report_idx;
    }
    // march on the h-grid so the dense table needs no interpolation
    double t = 0.0;
    while (dense_idx < n_dense) {
        const double t_next = double(dense_idx) * opts.h;
        // honor profile discontinuities inside the step
        double a = t;
        for (double cut : cuts) {
            if (cut > a + 1e-15 && cut < t_next - 1e-15) {
                rk4_drive(a, cut, opts.h, opts.max_halvings, x, deriv, nonneg);
                a = cut;
            }
        }
        rk4_drive(a, t_next, opts.h, opts.max_halvings, x, deriv, nonneg);
        t = t_next;
        record(dense_idx, x);
        if (report_idx < n_report && std::abs(sol.times[report_idx] - t) < 0.5 * opts.h) {
            sol.x.col(report_idx) = x;
            for (int p = 0; p < P; ++p) {
                sol.alpha(p, report_idx) = V * x[model.s_index(model.receiver_voxel_flat[p])];
                sol.beta(p, report_idx) = sol.dense_beta(p, dense_idx);
            }
            ++report_idx;
        }
        ++dense_idx;
    }
    if (report_idx != n_report)
        throw std::logic_error("solve_mean_system: report grid misaligned with step grid");
    return sol;
}

Eigen::MatrixXd solve_lyapunov(const std::function<Eigen::MatrixXd(double)>& A,
                               const std::function<Eigen::MatrixXd(double)>& B,
                               Eigen::MatrixXd sigma, double t_end, double h) {
    double t = 0.0;
    auto f = [&](double tt, const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
        const Eigen::MatrixXd a = A(tt);
        const Eigen::MatrixXd b = B(tt);
        return a * s + s * a.transpose() + b * b.transpose();
    };
    while (t < t_end - 1e-15) {
        const double step = std::min(h, t_end - t);
        const Eigen::MatrixXd k1 = f(t, sigma);
        const Eigen::MatrixXd k2 = f(t + 0.5 * step, sigma + 0.5 * step * k1);
        const Eigen::MatrixXd k3 = f(t + 0.5 * step, sigma + 0.5 * step * k2);
        const Eigen::MatrixXd k4 = f(t + step, sigma + step * k3);
        sigma += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
        t += step;
    }
    return sigma;
}

LnaMoments lna_analyze(const SystemModel& model, int transmitted, double t_end,
                       const LnaOptions& opts) {
    const int K = model.K();
    const int P = model.P();
    const MeanSystem sys = build_mean_system(model);
    const int n = sys.n;
    const int m = sys.m();
    const double V = sys.volume;
    const double sqrtV = std::sqrt(V);
    const double fwd = model.forward_const;

    // filter references: the analytic beta surrogate of every symbol
    std::vector<MeanSolution> ref(K);
    for (int k = 0; k < K; ++k) ref[k] = solve_mean_system(model, k, t_end, opts);

    auto interp_beta = [&](int k, int p, double t) {
        const auto& dense = ref[k].dense_beta;
        const double s = t / opts.h;
        const int i = std::min(int(s), int(dense.cols()) - 1);
        if (i + 1 >= int(dense.cols())) return dense(p, dense.cols() - 1);
        const double frac = s - double(i);
        return dense(p, i) * (1.0 - frac) + dense(p, i + 1) * frac;
    };
    auto log_beta = [&](int k, int p, double t) {
        return std::log(std::max(interp_beta(k, p, t), opts.clamp));
    };

    // channels feeding +1 jumps of the output count in voxel p
    std::vector<std::vector<int>> up(P);
    {
        int mc = 0;
        for (const auto& ch : model.channels) {
            if (ch.kind == ChannelKind::Emission) continue;
            for (int j = 0; j < ch.n_delta; ++j)
                for (int p = 0; p < P; ++p)
                    if (ch.delta[j].first == model.output_index(p) && ch.delta[j].second > 0)
                        up[p].push_back(mc);
            ++mc;
        }
    }

    const auto& profile = model.emissions[transmitted];

    // independent shot-noise column per emitting voxel
    std::vector<std::pair<int, double>> em_cols; // (state index, share)
    for (int i : model.emission_channels)
        em_cols.emplace_back(model.channels[i].delta[0].first, model.channels[i].c);
    const int n_em = int(em_cols.size());

    // flat joint state: x (n), Sigma ((n+K)^2), Z (K)
    const int na = n + K;
    const int dim = n + na * na + K;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = double(model.initial_state[i]) / V;
    y.segment(0, n) = x0;
    const std::vector<double>& priors = model.tx.priors;
    for (int k = 0; k < K; ++k) y[n + na * na + k] = std::log(double(K) * priors[k]);

    auto deriv = [&](double t, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
        Eigen::VectorXd x = yy.segment(0, n);
        Eigen::VectorXd xc = x.cwiseMax(0.0); // rates evaluated on clamped means
        Eigen::Map<const Eigen::MatrixXd> sigma(yy.data() + n, na, na);

        const Eigen::VectorXd r = eval_rates(sys, xc);
        const Eigen::MatrixXd J = eval_rate_jacobian(sys, xc);
        const double u = profile.rate_at(t) / V;

        Eigen::MatrixXd A_aug = Eigen::MatrixXd::Zero(na, na);
        A_aug.topLeftCorner(n, n) = sys.S * J;

        // noise loadings: one column per channel plus one per emitting voxel
        Eigen::MatrixXd Maug = Eigen::MatrixXd::Zero(na, m + n_em);
        for (int c = 0; c < m; ++c)
            Maug.col(c).head(n) = sys.S.col(c) * std::sqrt(std::max(0.0, r[c]));
        for (int e = 0; e < n_em; ++e)
            Maug(em_cols[e].first, m + e) = std::sqrt(std::max(0.0, em_cols[e].second * u));

        Eigen::VectorXd dz = Eigen::VectorXd::Zero(K);
        for (int k = 0; k < K; ++k) {
            for (int p = 0; p < P; ++p) {
                const double lgb = log_beta(k, p, t);
                double lam = 0.0; // count-rate of +1 jumps of X*_p under the true symbol
                for (int c : up[p]) {
                    lam += V * r[c];
                    A_aug.row(n + k).head(n) += sqrtV * lgb * J.row(c);
                    Maug(n + k, c) += sqrtV * lgb * std::sqrt(std::max(0.0, r[c]));
                }
                const double beta_k = std::max(interp_beta(k, p, t), 0.0);
                dz[k] += lam * lgb - fwd * beta_k;
            }
        }

        Eigen::VectorXd out(dim);
        out.segment(0, n) = sys.S * r + sys.input * u;
        Eigen::MatrixXd dsigma = A_aug * sigma + sigma * A_aug.transpose() +
                                 Maug * Maug.transpose();
        Eigen::Map<Eigen::MatrixXd>(out.data() + n, na, na) = dsigma;
        out.segment(n + na * na, K) = dz;
        return out;
    };
    auto acceptable = [&](const Eigen::VectorXd& yy) {
        return (yy.segment(0, n).array() >= -1e-9).all();
    };

    LnaMoments mom;
    mom.n = n;
    mom.K = K;
    mom.volume = V;
    const size_t n_report = size_t(std::floor(t_end / opts.report_dt + 1e-9)) + 1;
    mom.times.resize(n_report);
    for (size_t j = 0; j < n_report; ++j) mom.times[j] = double(j) * opts.report_dt;
    mom.xbar.resize(n, n_report);
    mom.zmean.resize(K, n_report);
    mom.cov.resize(n_report);

    auto snapshot = [&](size_t j) {
        mom.xbar.col(j) = y.segment(0, n);
        Eigen::Map<const Eigen::MatrixXd> sigma(y.data() + n, na, na);
        mom.cov[j] = 0.5 * (sigma + sigma.transpose());
        for (int k = 0; k < K; ++k) mom.zmean(k, j) = y[n + na * na + k];
    };
    snapshot(0);

    const auto cuts = step_edges(profile, t_end);
    for (size_t j = 1; j < n_report; ++j) {
        const double t0 = mom.times[j - 1], t1 = mom.times[j];
        double a = t0;
        for (double cut : cuts)
            if (cut > a + 1e-15 && cut < t1 - 1e-15) {
                rk4_drive(a, cut, opts.h, opts.max_halvings, y, deriv, acceptable);
                a = cut;
            }
        rk4_drive(a, t1, opts.h, opts.max_halvings, y, deriv, acceptable);
        // keep the covariance block symmetric as it accumulates
        Eigen::Map<Eigen::MatrixXd> sigma(y.data() + n, na, na);
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
        snapshot(j);
    }
    return mom;
}

LnaBer lna_ber(const SystemModel& model, double t_end, const LnaOptions& opts) {
    if (model.K() != 2)
        throw std::invalid_argument("lna_ber: the Gaussian error formula is defined for K = 2");
    LnaBer out;
    out.ber.assign(2, {});
    for (int kt = 0; kt < 2; ++kt) {
        const LnaMoments mom = lna_analyze(model, kt, t_end, opts);
        if (kt == 0) out.times = mom.times;
        const int other = 1 - kt;
        for (size_t j = 0; j < mom.times.size(); ++j) {
            const double mu = mom.zmean(kt, j) - mom.zmean(other, j);
            const double var = mom.z_variance(kt, j) + mom.z_variance(other, j) -
                               2.0 * mom.z_covariance(kt, other, j);
            double ber;
            if (var > 0)
                ber = normal_cdf(-mu / std::sqrt(var));
            else
                ber = mu > 0 ? 0.0 : (mu < 0 ? 1.0 : 0.5);
            out.ber[kt].push_back(ber);
        }
    }
    return out;
}

} // namespace voxmc
