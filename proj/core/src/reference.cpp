#include "voxmc/reference.hpp"
#include "voxmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace voxmc {

double ReferenceSignal::at(double t) const {
    if (values.empty()) return 0.0;
    if (t <= 0.0) return values.front();
    const double s = t / dt;
    const size_t i = size_t(s);
    if (i + 1 >= values.size()) return values.back();
    const double frac = s - double(i);
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

void ReferenceSignal::finalize() {
    cum_.assign(values.size(), 0.0);
    for (size_t i = 1; i < values.size(); ++i)
        cum_[i] = cum_[i - 1] + 0.5 * (values[i - 1] + values[i]) * dt;
}

double ReferenceSignal::cum_to(double t) const {
    if (values.empty() || t <= 0.0) return 0.0;
    const double s = t / dt;
    const size_t i = size_t(s);
    if (i + 1 >= values.size())
        return cum_.back() + (t - t_end()) * values.back();
    const double t_i = double(i) * dt;
    return cum_[i] + (t - t_i) * 0.5 * (values[i] + at(t));
}

double ReferenceSignal::integral(double a, double b) const {
    if (cum_.size() != values.size())
        throw std::logic_error("ReferenceSignal::integral called before finalize()");
    return cum_to(b) - cum_to(a);
}

namespace {

// per-voxel statistic sampled on the reference grid
double ref_statistic(const SystemModel& model, RefKind kind, const SystemState& state, int p) {
    if (kind == RefKind::Alpha) return double(state[model.s_index(model.receiver_voxel_flat[p])]);
    const Channel& act = model.channels[model.activation_channels[p]];
    return double(state[act.a]) * double(state[act.b]);
}

} // namespace

std::vector<ReferenceSignal> estimate_reference(const SystemModel& model, RefKind kind,
                                                int symbol, double dt, double t_end, int n_runs,
                                                uint64_t base_seed, int workers) {
    if (!(dt > 0) || !(t_end > 0))
        throw std::invalid_argument("estimate_reference: dt and t_end must be positive");
    if (n_runs < 1) throw std::invalid_argument("estimate_reference: n_runs must be >= 1");

    const int P = model.P();
    const size_t n_grid = size_t(std::floor(t_end / dt + 1e-9)) + 1;

    // one row per replicate keeps the reduction order fixed regardless of
    // worker scheduling
    std::vector<std::vector<double>> rows(n_runs);

    run_ensemble(
        model, symbol, n_runs, t_end, base_seed,
        [&](int i, const Trajectory& traj) {
            std::vector<double> row(n_grid * P, 0.0);
            size_t j = 0; // next grid point to fill
            SystemState prev;
            replay(model, traj, [&](double t, const SystemState& state) {
                while (j < n_grid && double(j) * dt < t) {
                    for (int p = 0; p < P; ++p)
                        row[j * P + p] = ref_statistic(model, kind, prev, p);
                    ++j;
                }
                prev = state;
            });
            while (j < n_grid) {
                for (int p = 0; p < P; ++p) row[j * P + p] = ref_statistic(model, kind, prev, p);
                ++j;
            }
            rows[i] = std::move(row);
        },
        workers);

    std::vector<ReferenceSignal> out(P);
    for (int p = 0; p < P; ++p) {
        ReferenceSignal& sig = out[p];
        sig.kind = kind;
        sig.symbol = symbol;
        sig.p = p;
        sig.dt = dt;
        sig.n_runs = n_runs;
        sig.seed = base_seed;
        sig.values.assign(n_grid, 0.0);
        sig.se.assign(n_grid, 0.0);
    }
    for (int i = 0; i < n_runs; ++i)
        for (size_t j = 0; j < n_grid; ++j)
            for (int p = 0; p < P; ++p) out[p].values[j] += rows[i][j * P + p];
    for (int p = 0; p < P; ++p)
        for (size_t j = 0; j < n_grid; ++j) out[p].values[j] /= double(n_runs);
    if (n_runs > 1) {
        for (int i = 0; i < n_runs; ++i)
            for (size_t j = 0; j < n_grid; ++j)
                for (int p = 0; p < P; ++p) {
                    const double d = rows[i][j * P + p] - out[p].values[j];
                    out[p].se[j] += d * d;
                }
        for (int p = 0; p < P; ++p)
            for (size_t j = 0; j < n_grid; ++j)
                out[p].se[j] = std::sqrt(out[p].se[j] / double(n_runs - 1) / double(n_runs));
    }
    for (auto& sig : out) sig.finalize();
    return out;
}

namespace {
const char* kind_tag(RefKind k) { return k == RefKind::Alpha ? "alpha" : "beta"; }
} // namespace

void save_reference(const std::string& path, const std::string& scenario_hash,
                    const std::vector<ReferenceSignal>& per_voxel) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_reference: cannot open " + path);
    if (per_voxel.empty()) throw std::invalid_argument("save_reference: empty signal set");
    const auto& first = per_voxel.front();
    char buf[128];
    os << "voxmc-ref 1\n";
    os << "scenario " << scenario_hash << '\n';
    os << "kind " << kind_tag(first.kind) << '\n';
    os << "symbol " << first.symbol << '\n';
    std::snprintf(buf, sizeof(buf), "dt %.17g\n", first.dt);
    os << buf;
    os << "n_runs " << first.n_runs << '\n';
    os << "seed " << first.seed << '\n';
    os << "P " << per_voxel.size() << '\n';
    os << "n " << first.values.size() << '\n';
    for (const auto& sig : per_voxel) {
        for (size_t j = 0; j < sig.values.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", sig.values[j], sig.se[j]);
            os << buf;
        }
    }
}

std::optional<std::vector<ReferenceSignal>> load_reference(const std::string& path,
                                                           const std::string& scenario_hash) {
    std::ifstream is(path);
    if (!is) return std::nullopt;
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "voxmc-ref" || version != 1) return std::nullopt;
    std::string key, hash, kind_s;
    int symbol = 0, n_runs = 0, P = 0;
    size_t n = 0;
    double dt = 0;
    uint64_t seed = 0;
    is >> key >> hash;
    if (key != "scenario" || hash != scenario_hash) return std::nullopt;
    is >> key >> kind_s >> key >> symbol >> key >> dt >> key >> n_runs >> key >> seed >> key >>
        P >> key >> n;
    if (!is) return std::nullopt;
    std::vector<ReferenceSignal> out(P);
    for (int p = 0; p < P; ++p) {
        auto& sig = out[p];
        sig.kind = kind_s == "alpha" ? RefKind::Alpha : RefKind::Beta;
        sig.symbol = symbol;
        sig.p = p;
        sig.dt = dt;
        sig.n_runs = n_runs;
        sig.seed = seed;
        sig.values.resize(n);
        sig.se.resize(n);
        for (size_t j = 0; j < n; ++j)
            if (!(is >> sig.values[j] >> sig.se[j])) return std::nullopt;
        sig.finalize();
    }
    return out;
}

void write_reference_csv(std::ostream& os, const std::vector<ReferenceSignal>& per_voxel) {
    os << "t";
    for (const auto& sig : per_voxel)
        os << ',' << kind_tag(sig.kind) << "_k" << sig.symbol << "_p" << sig.p + 1 << ",se";
    os << '\n';
    if (per_voxel.empty()) return;
    char buf[64];
    for (size_t j = 0; j < per_voxel.front().values.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.9g", double(j) * per_voxel.front().dt);
        os << buf;
        for (const auto& sig : per_voxel) {
            std::snprintf(buf, sizeof(buf), ",%.9g,%.9g", sig.values[j], sig.se[j]);
            os << buf;
        }
        os << '\n';
    }
}

} // namespace voxmc
