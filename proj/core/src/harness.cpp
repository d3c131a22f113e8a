#include "voxmc/harness.hpp"
#include "voxmc/bayes.hpp"
#include "voxmc/lna.hpp"
#include "voxmc/rng.hpp"
#include "voxmc/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace voxmc {

uint64_t ref_seed(uint64_t base, RefKind kind, int symbol) {
    return splitmix64(base ^ splitmix64(0x52454600ULL + (uint64_t(kind) << 8) + symbol));
}

uint64_t ber_seed(uint64_t base, int symbol) {
    return splitmix64(base ^ splitmix64(0x42455200ULL + symbol));
}

namespace {

int resolve_workers(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (opts.workers > 0) return opts.workers;
    if (cfg.workers > 0) return cfg.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

int scaled_runs(int n, double scale) { return std::max(1, int(std::llround(n * scale))); }

std::string resolve_demod(const ScenarioConfig& cfg, const SystemModel& model) {
    if (cfg.demodulator != "auto") return cfg.demodulator;
    if (model.rx.config == ReceiverConfig::Partitioned &&
        model.rx.circuit == CircuitKind::ActDeact)
        return "partitioned";
    return "mixed";
}

} // namespace

ReferenceBank reference_bank(const SystemModel& model, const ScenarioConfig& cfg, RefKind kind,
                             const RunOptions& opts) {
    const int n_ref = scaled_runs(cfg.n_runs_ref, opts.scale);
    const uint64_t base = opts.has_seed_override ? opts.seed_override : cfg.seed;
    const std::string hash = cfg.hash();
    const std::string cache_dir = opts.out_dir + "/refcache";
    const int workers = resolve_workers(cfg, opts);

    ReferenceBank bank(model.K());
    for (int k = 0; k < model.K(); ++k) {
        const uint64_t seed = ref_seed(base, kind, k);
        std::string path;
        if (opts.use_cache) {
            std::filesystem::create_directories(cache_dir);
            char name[128];
            std::snprintf(name, sizeof(name), "%s/ref_%s_%s%d_n%d_s%llu.txt", cache_dir.c_str(),
                          hash.c_str(), kind == RefKind::Alpha ? "alpha" : "beta", k, n_ref,
                          (unsigned long long)seed);
            path = name;
            if (auto cached = load_reference(path, hash)) {
                const auto& first = cached->front();
                if (first.n_runs == n_ref && first.seed == seed &&
                    std::abs(first.dt - cfg.dt_ref) < 1e-15) {
                    bank[k] = std::move(*cached);
                    continue;
                }
            }
        }
        bank[k] = estimate_reference(model, kind, k, cfg.dt_ref, cfg.t_end, n_ref, seed, workers);
        if (opts.use_cache) save_reference(path, hash, bank[k]);
    }
    return bank;
}

ReferenceBank surrogate_beta_bank(const SystemModel& model, double t_end, double dt) {
    ReferenceBank bank(model.K());
    LnaOptions lo;
    lo.report_dt = dt;
    for (int k = 0; k < model.K(); ++k) {
        const MeanSolution sol = solve_mean_system(model, k, t_end, lo);
        bank[k].resize(model.P());
        for (int p = 0; p < model.P(); ++p) {
            ReferenceSignal& sig = bank[k][p];
            sig.kind = RefKind::Beta;
            sig.symbol = k;
            sig.p = p;
            sig.dt = dt;
            sig.n_runs = 0;
            sig.seed = 0;
            sig.values.assign(sol.times.size(), 0.0);
            sig.se.assign(sol.times.size(), 0.0);
            for (size_t j = 0; j < sol.times.size(); ++j) sig.values[j] = sol.beta(p, int(j));
            sig.finalize();
        }
    }
    return bank;
}

std::string ber_csv_path(const std::string& out_dir, const std::string& hash,
                         const std::string& demod) {
    return out_dir + "/ber_" + hash + "_" + demod + ".csv";
}

void write_ber_csv(const std::string& path, const RunResult& r) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    char buf[256];
    os << "# voxmc " << kVersion << '\n';
    std::snprintf(buf, sizeof(buf), "# scenario=%s seed=%llu n_runs=%d demodulator=%s\n",
                  r.scenario_hash.c_str(), (unsigned long long)r.seed, r.n_runs,
                  r.demodulator.c_str());
    os << buf;
    os << "t,symbol,errors,n,ber,ci_lo,ci_hi\n";
    for (const auto& curve : r.curves) {
        for (const auto& pt : curve.points) {
            std::snprintf(buf, sizeof(buf), "%.17g,%d,%lld,%lld,%.17g,%.17g,%.17g\n", pt.t,
                          curve.symbol, pt.errors, pt.n, pt.ber, pt.ci.lo, pt.ci.hi);
            os << buf;
        }
    }
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    const SystemModel model = cfg.build();
    const int workers = resolve_workers(cfg, opts);
    const uint64_t seed = opts.has_seed_override ? opts.seed_override : cfg.seed;
    const int n_ber = scaled_runs(cfg.n_runs_ber, opts.scale);
    const std::string demod = resolve_demod(cfg, model);

    RunResult result;
    result.scenario_hash = cfg.hash();
    result.seed = seed;
    result.n_runs = n_ber;
    result.demodulator = demod;
    result.decision_times = cfg.resolved_decision_times();

    ReferenceBank bank;
    if (demod == "partitioned")
        bank = reference_bank(model, cfg, RefKind::Alpha, opts);
    else if (demod == "mixed" || demod == "oracle")
        bank = reference_bank(model, cfg, RefKind::Beta, opts);

    DemodOptions dopts;
    dopts.report_dt = cfg.decision_dt;
    dopts.priors = model.tx.priors;

    std::vector<int> M_list(model.P(), model.rx.M);
    const int K = model.K();

    // per symbol, per replicate: decisions at the decision times
    std::vector<std::vector<std::vector<int8_t>>> decisions(K);
    std::vector<long long> clamp_total(K, 0);
    std::filesystem::create_directories(opts.out_dir);

    for (int kt = 0; kt < K; ++kt) {
        decisions[kt].assign(n_ber, {});
        std::vector<long long> clamps(n_ber, 0);
        run_ensemble(
            model, kt, n_ber, cfg.t_end, ber_seed(seed, kt),
            [&](int i, const Trajectory& traj) {
                const ObservationStream obs = extract_observations(traj, model);
                DemodulatorOutput out;
                if (demod == "partitioned") {
                    out = demod_partitioned_approx(obs, bank, model.forward_const, M_list, dopts);
                } else if (demod == "mixed") {
                    out = demod_mixed_approx(obs, bank, model.forward_const, dopts);
                } else if (demod == "oracle") {
                    const ActivationTrains trains = extract_activation_trains_oracle(obs);
                    out = demod_mixed_oracle(obs, trains, bank, model.forward_const, dopts);
                } else if (demod == "optimal") {
                    BayesOptions bopts;
                    bopts.nmax_per_voxel = cfg.truncation_nmax;
                    bopts.report_dt = cfg.decision_dt;
                    std::vector<BayesFilterResult> filters;
                    for (int k = 0; k < K; ++k)
                        filters.push_back(
                            bayes_filter_optimal(model, obs, k, model.rx.config, bopts));
                    out.times = filters[0].times;
                    out.Z.resize(K);
                    for (int k = 0; k < K; ++k) out.Z[k] = filters[k].L;
                    out.decisions.resize(out.times.size());
                    for (size_t j = 0; j < out.times.size(); ++j) {
                        int best = 0;
                        for (int k = 1; k < K; ++k)
                            if (out.Z[k][j] > out.Z[best][j]) best = k;
                        out.decisions[j] = best;
                    }
                } else {
                    throw std::invalid_argument("run_scenario: unknown demodulator " + demod);
                }
                auto& row = decisions[kt][i];
                row.resize(result.decision_times.size());
                for (size_t j = 0; j < result.decision_times.size(); ++j)
                    row[j] = int8_t(out.decision_at(result.decision_times[j]));
                clamps[i] = out.clamp_count;
                if (opts.dump_z && i == 0 && opts.write_files) {
                    char name[160];
                    std::snprintf(name, sizeof(name), "%s/z_%s_%s_k%d.csv", opts.out_dir.c_str(),
                                  result.scenario_hash.c_str(), demod.c_str(), kt);
                    std::ofstream os(name);
                    os << "t";
                    for (int k = 0; k < K; ++k) os << ",Z_" << k;
                    os << ",decision\n";
                    char buf[64];
                    for (size_t j = 0; j < out.times.size(); ++j) {
                        std::snprintf(buf, sizeof(buf), "%.9g", out.times[j]);
                        os << buf;
                        for (int k = 0; k < K; ++k) {
                            std::snprintf(buf, sizeof(buf), ",%.9g", out.Z[k][j]);
                            os << buf;
                        }
                        os << ',' << out.decisions[j] << '\n';
                    }
                }
            },
            workers);
        for (long long c : clamps) clamp_total[kt] += c;
    }

    result.curves.resize(K);
    for (int kt = 0; kt < K; ++kt) {
        result.curves[kt].symbol = kt;
        result.curves[kt].points.resize(result.decision_times.size());
        for (size_t j = 0; j < result.decision_times.size(); ++j) {
            auto& pt = result.curves[kt].points[j];
            pt.t = result.decision_times[j];
            pt.n = n_ber;
            for (int i = 0; i < n_ber; ++i)
                if (decisions[kt][i][j] != kt) ++pt.errors;
            pt.ber = double(pt.errors) / double(pt.n);
            pt.ci = wilson_interval(pt.errors, pt.n);
        }
        result.clamp_events += clamp_total[kt];
    }

    if (opts.write_files) {
        const std::string path = ber_csv_path(opts.out_dir, result.scenario_hash, demod);
        write_ber_csv(path, result);
        result.files.push_back(path);
    }
    return result;
}

} // namespace voxmc
