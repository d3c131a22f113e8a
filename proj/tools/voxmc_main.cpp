#include "voxmc/harness.hpp"
#include "voxmc/lna.hpp"
#include "voxmc/presets.hpp"
#include "voxmc/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace voxmc;

namespace {

void add_common(CLI::App* cmd, RunOptions& opts, uint64_t& seed, bool& has_seed) {
    cmd->add_option("--scale", opts.scale, "scale factor for run counts (quick checks)");
    cmd->add_option("-o,--out", opts.out_dir, "output directory");
    cmd->add_option("-w,--workers", opts.workers, "worker threads (0 = scenario/hardware)");
    cmd->add_flag("--no-cache", [&opts](int64_t) { opts.use_cache = false; },
                  "ignore the reference-signal cache");
    auto* s = cmd->add_option("--seed", seed, "override the scenario seed");
    s->each([&has_seed](const std::string&) { has_seed = true; });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"voxel-based molecular communication simulator and demodulation toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunOptions opts;
    uint64_t seed = 0;
    bool has_seed = false;

    std::string config_path;
    bool dump_z = false;
    auto* run = app.add_subcommand("run", "run a scenario file end to end (BER curves)");
    run->add_option("config", config_path, "scenario file")->required();
    run->add_flag("--dump-z", dump_z, "write a sample Z-trajectory CSV per symbol");
    add_common(run, opts, seed, has_seed);

    std::string preset_name;
    bool list_presets = false;
    auto* repro = app.add_subcommand("repro", "reproduce a study preset and check its claims");
    repro->add_option("preset", preset_name, "preset name");
    repro->add_flag("--list", list_presets, "list available presets");
    add_common(repro, opts, seed, has_seed);

    std::string ref_config;
    auto* ref = app.add_subcommand("ref", "build the reference-signal cache for a scenario");
    ref->add_option("config", ref_config, "scenario file")->required();
    add_common(ref, opts, seed, has_seed);

    std::string lna_config;
    auto* lna = app.add_subcommand("lna", "analytic BER for a scenario");
    lna->add_option("config", lna_config, "scenario file")->required();
    add_common(lna, opts, seed, has_seed);

    CLI11_PARSE(app, argc, argv);
    opts.has_seed_override = has_seed;
    opts.seed_override = seed;

    try {
        if (run->parsed()) {
            opts.dump_z = dump_z;
            const ScenarioConfig cfg = parse_scenario_file(config_path);
            const RunResult r = run_scenario(cfg, opts);
            std::printf("scenario %s seed %llu n_runs %d demodulator %s\n",
                        r.scenario_hash.c_str(), (unsigned long long)r.seed, r.n_runs,
                        r.demodulator.c_str());
            for (const auto& curve : r.curves) {
                const auto& last = curve.points.back();
                std::printf("symbol %d: BER(t=%g) = %.4f [%.4f, %.4f] (%lld/%lld)\n",
                            curve.symbol, last.t, last.ber, last.ci.lo, last.ci.hi, last.errors,
                            last.n);
            }
            for (const auto& f : r.files) std::printf("wrote %s\n", f.c_str());
            return 0;
        }
        if (repro->parsed()) {
            if (list_presets || preset_name.empty()) {
                for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
                return 0;
            }
            const PresetReport rep = repro_figure(preset_name, opts);
            write_report(rep, opts.out_dir);
            for (const auto& c : rep.claims)
                std::printf("[%s] %s\n", c.pass ? "PASS" : "FAIL", c.text.c_str());
            std::printf("preset %s: %s (report in %s)\n", rep.name.c_str(),
                        rep.all_pass() ? "PASS" : "FAIL", opts.out_dir.c_str());
            return rep.all_pass() ? 0 : 1;
        }
        if (ref->parsed()) {
            const ScenarioConfig cfg = parse_scenario_file(ref_config);
            const SystemModel model = cfg.build();
            const bool partitioned = model.rx.config == ReceiverConfig::Partitioned &&
                                     model.rx.circuit == CircuitKind::ActDeact;
            const RefKind kind = partitioned ? RefKind::Alpha : RefKind::Beta;
            const ReferenceBank bank = reference_bank(model, cfg, kind, opts);
            for (int k = 0; k < model.K(); ++k) {
                char name[160];
                std::snprintf(name, sizeof(name), "%s/ref_%s_%s%d.csv", opts.out_dir.c_str(),
                              cfg.hash().c_str(), kind == RefKind::Alpha ? "alpha" : "beta", k);
                std::ofstream os(name);
                write_reference_csv(os, bank[k]);
                std::printf("wrote %s\n", name);
            }
            return 0;
        }
        if (lna->parsed()) {
            const ScenarioConfig cfg = parse_scenario_file(lna_config);
            const SystemModel model = cfg.build();
            LnaOptions lopts;
            lopts.report_dt = cfg.decision_dt;
            const LnaBer result = lna_ber(model, cfg.t_end, lopts);
            std::filesystem::create_directories(opts.out_dir);
            const std::string path = opts.out_dir + "/lna_ber_" + cfg.hash() + ".csv";
            std::ofstream os(path);
            os << "t,ber_tx0,ber_tx1\n";
            char buf[96];
            for (size_t j = 0; j < result.times.size(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", result.times[j],
                              result.ber[0][j], result.ber[1][j]);
                os << buf;
            }
            std::printf("wrote %s\n", path.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
