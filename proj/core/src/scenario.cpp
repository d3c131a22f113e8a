#include "voxmc/scenario.hpp"
#include "voxmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace voxmc {

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& origin, int line, const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    try {
        size_t pos;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& origin, int line, const std::string& v) {
    try {
        size_t pos;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

// voxel lists look like: (4,5,5) (5,5,5)
std::vector<Voxel> parse_voxels(const std::string& origin, int line, const std::string& v) {
    std::vector<Voxel> out;
    std::string cur;
    for (char c : v) {
        if (c == '(') {
            cur.clear();
        } else if (c == ')') {
            std::replace(cur.begin(), cur.end(), ',', ' ');
            const auto parts = split_ws(cur);
            if (parts.size() != 3) fail(origin, line, "voxel needs three coordinates");
            out.push_back({int(to_int(origin, line, parts[0])), int(to_int(origin, line, parts[1])),
                           int(to_int(origin, line, parts[2]))});
        } else {
            cur += c;
        }
    }
    if (out.empty()) fail(origin, line, "expected at least one voxel like (x,y,z)");
    return out;
}

} // namespace

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
    ScenarioConfig cfg;
    cfg.symbols.clear();

    std::istringstream is(text);
    std::string raw;
    std::string section;
    int symbol_idx = -1;
    int line_no = 0;
    std::set<std::string> seen_sections;

    const std::set<std::string> known_sections{"grid", "medium", "transmitter", "receiver", "run"};

    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        const size_t hash_pos = line.find_first_of("#;");
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, line_no, "malformed section header");
            section = line.substr(1, line.size() - 2);
            const auto parts = split_ws(section);
            if (parts.size() == 2 && parts[0] == "symbol") {
                symbol_idx = int(to_int(origin, line_no, parts[1]));
                if (symbol_idx != int(cfg.symbols.size()))
                    fail(origin, line_no, "symbol sections must be declared in order 0,1,...");
                cfg.symbols.emplace_back();
                section = "symbol";
            } else if (known_sections.count(section)) {
                if (!seen_sections.insert(section).second)
                    fail(origin, line_no, "duplicate section [" + section + "]");
            } else {
                fail(origin, line_no, "unknown section [" + section + "]");
            }
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        const auto kb = key.find_last_not_of(" \t");
        key = key.substr(0, kb + 1);
        const auto vb = val.find_first_not_of(" \t");
        val = vb == std::string::npos ? "" : val.substr(vb);
        if (val.empty()) fail(origin, line_no, "empty value for '" + key + "'");

        if (section == "grid") {
            if (key == "nx") cfg.nx = int(to_int(origin, line_no, val));
            else if (key == "ny") cfg.ny = int(to_int(origin, line_no, val));
            else if (key == "nz") cfg.nz = int(to_int(origin, line_no, val));
            else if (key == "w") cfg.w = to_double(origin, line_no, val);
            else if (key == "boundary") cfg.boundary = val;
            else if (key == "absorb_fraction") cfg.absorb_fraction = to_double(origin, line_no, val);
            else fail(origin, line_no, "unknown key '" + key + "' in [grid]");
        } else if (section == "medium") {
            if (key == "D") cfg.D = to_double(origin, line_no, val);
            else fail(origin, line_no, "unknown key '" + key + "' in [medium]");
        } else if (section == "transmitter") {
            if (key == "voxel" || key == "voxels") cfg.tx_voxels = parse_voxels(origin, line_no, val);
            else if (key == "priors") {
                cfg.priors.clear();
                for (const auto& tok : split_ws(val))
                    cfg.priors.push_back(to_double(origin, line_no, tok));
            } else fail(origin, line_no, "unknown key '" + key + "' in [transmitter]");
        } else if (section == "symbol") {
            auto& sym = cfg.symbols[symbol_idx];
            if (key == "emission") sym.emission = val;
            else if (key == "rate") sym.rate = to_double(origin, line_no, val);
            else if (key == "duration") sym.duration = to_double(origin, line_no, val);
            else if (key == "width") sym.width = to_double(origin, line_no, val);
            else if (key == "times") {
                sym.times.clear();
                for (const auto& tok : split_ws(val)) sym.times.push_back(to_double(origin, line_no, tok));
            } else if (key == "counts") {
                sym.counts.clear();
                for (const auto& tok : split_ws(val))
                    sym.counts.push_back(int(to_int(origin, line_no, tok)));
            } else if (key == "count") {
                sym.counts.assign(1, int(to_int(origin, line_no, val)));
            } else fail(origin, line_no, "unknown key '" + key + "' in [symbol]");
        } else if (section == "receiver") {
            if (key == "voxels") cfg.rx_voxels = parse_voxels(origin, line_no, val);
            else if (key == "configuration") cfg.configuration = val;
            else if (key == "dr") cfg.dr = to_double(origin, line_no, val);
            else if (key == "circuit") cfg.circuit = val;
            else if (key == "M") cfg.M = int(to_int(origin, line_no, val));
            else if (key == "kplus") cfg.kplus = to_double(origin, line_no, val);
            else if (key == "kminus") cfg.kminus = to_double(origin, line_no, val);
            else if (key == "lambda1") cfg.lambda1 = to_double(origin, line_no, val);
            else if (key == "mu1") cfg.mu1 = to_double(origin, line_no, val);
            else if (key == "lambda2") cfg.lambda2 = to_double(origin, line_no, val);
            else if (key == "mu2") cfg.mu2 = to_double(origin, line_no, val);
            else fail(origin, line_no, "unknown key '" + key + "' in [receiver]");
        } else if (section == "run") {
            if (key == "t_end") cfg.t_end = to_double(origin, line_no, val);
            else if (key == "n_runs_ber") cfg.n_runs_ber = int(to_int(origin, line_no, val));
            else if (key == "n_runs_ref") cfg.n_runs_ref = int(to_int(origin, line_no, val));
            else if (key == "seed") cfg.seed = uint64_t(to_int(origin, line_no, val));
            else if (key == "dt_ref") cfg.dt_ref = to_double(origin, line_no, val);
            else if (key == "decision_dt") cfg.decision_dt = to_double(origin, line_no, val);
            else if (key == "decision_times") {
                cfg.decision_times.clear();
                for (const auto& tok : split_ws(val))
                    cfg.decision_times.push_back(to_double(origin, line_no, tok));
            } else if (key == "demodulator") cfg.demodulator = val;
            else if (key == "truncation_nmax") cfg.truncation_nmax = int(to_int(origin, line_no, val));
            else if (key == "workers") cfg.workers = int(to_int(origin, line_no, val));
            else fail(origin, line_no, "unknown key '" + key + "' in [run]");
        } else if (section.empty()) {
            fail(origin, line_no, "key outside any section");
        }
    }

    // structural validation beyond what assemble_model enforces
    if (cfg.symbols.size() < 2) fail(origin, line_no, "at least two [symbol k] sections required");
    if (cfg.rx_voxels.empty()) fail(origin, line_no, "[receiver] voxels required");
    if (cfg.boundary != "reflecting" && cfg.boundary != "absorbing")
        fail(origin, line_no, "boundary must be 'reflecting' or 'absorbing'");
    if (cfg.configuration != "partitioned" && cfg.configuration != "mixed")
        fail(origin, line_no, "configuration must be 'partitioned' or 'mixed'");
    if (cfg.circuit != "actdeact" && cfg.circuit != "twosite")
        fail(origin, line_no, "circuit must be 'actdeact' or 'twosite'");
    const std::set<std::string> demods{"auto", "partitioned", "mixed", "oracle", "optimal"};
    if (!demods.count(cfg.demodulator)) fail(origin, line_no, "unknown demodulator selection");
    for (const auto& sym : cfg.symbols)
        if (sym.emission != "rate" && sym.emission != "bursts" && sym.emission != "pulse")
            fail(origin, line_no, "emission must be rate|bursts|pulse");
    return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_scenario_text(ss.str(), path);
}

SystemModel ScenarioConfig::build() const {
    Boundary b;
    b.kind = boundary == "absorbing" ? BoundaryKind::Absorbing : BoundaryKind::Reflecting;
    b.rate_fraction = absorb_fraction;
    const SpatialGrid grid = build_grid(nx, ny, nz, w, b);

    MediumSpec medium;
    medium.D = D;

    TransmitterSpec tx;
    tx.voxel = tx_voxels.front();
    tx.voxels = tx_voxels;
    for (const auto& sym : symbols) {
        if (sym.emission == "rate") {
            tx.symbols.push_back(SymbolDef::poisson(sym.rate, sym.duration));
        } else if (sym.emission == "pulse") {
            tx.symbols.push_back(SymbolDef::pulse(sym.rate, sym.width));
        } else {
            std::vector<int> counts = sym.counts;
            if (counts.size() == 1 && sym.times.size() > 1)
                counts.assign(sym.times.size(), counts.front());
            tx.symbols.push_back(SymbolDef::bursts(sym.times, counts));
        }
    }
    tx.priors = priors.empty() ? std::vector<double>(symbols.size(), 1.0 / double(symbols.size()))
                               : priors;

    ReceiverSpec rx;
    rx.voxels = rx_voxels;
    rx.config = configuration == "mixed" ? ReceiverConfig::Mixed : ReceiverConfig::Partitioned;
    rx.dr = dr;
    rx.circuit = circuit == "twosite" ? CircuitKind::TwoSite : CircuitKind::ActDeact;
    rx.M = M;
    rx.k_plus_conc = kplus;
    rx.k_minus = kminus;
    rx.lambda1_conc = lambda1;
    rx.mu1 = mu1;
    rx.lambda2_conc = lambda2;
    rx.mu2 = mu2;

    return assemble_model(grid, medium, tx, rx);
}

std::vector<double> ScenarioConfig::resolved_decision_times() const {
    if (!decision_times.empty()) return decision_times;
    std::vector<double> out;
    const size_t n = size_t(std::floor(t_end / decision_dt + 1e-9)) + 1;
    for (size_t j = 0; j < n; ++j) out.push_back(double(j) * decision_dt);
    return out;
}

std::string ScenarioConfig::canonical_text() const {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    os << "grid " << nx << ' ' << ny << ' ' << nz << ' ' << num(w) << ' ' << boundary << ' '
       << num(absorb_fraction) << '\n';
    os << "medium " << num(D) << '\n';
    os << "tx";
    for (const auto& v : tx_voxels) os << " (" << v.x << ',' << v.y << ',' << v.z << ')';
    os << '\n';
    os << "priors";
    for (double p : priors) os << ' ' << num(p);
    os << '\n';
    for (size_t k = 0; k < symbols.size(); ++k) {
        const auto& s = symbols[k];
        os << "symbol " << k << ' ' << s.emission << ' ' << num(s.rate) << ' ' << num(s.duration)
           << ' ' << num(s.width);
        for (double t : s.times) os << ' ' << num(t);
        for (int c : s.counts) os << ' ' << c;
        os << '\n';
    }
    os << "rx";
    for (const auto& v : rx_voxels) os << " (" << v.x << ',' << v.y << ',' << v.z << ')';
    os << ' ' << configuration << ' ' << num(dr) << ' ' << circuit << ' ' << M << ' ' << num(kplus)
       << ' ' << num(kminus) << ' ' << num(lambda1) << ' ' << num(mu1) << ' ' << num(lambda2)
       << ' ' << num(mu2) << '\n';
    os << "run " << num(t_end) << ' ' << n_runs_ber << ' ' << n_runs_ref << ' ' << seed << ' '
       << num(dt_ref) << ' ' << num(decision_dt) << ' ' << demodulator << ' ' << truncation_nmax;
    for (double t : decision_times) os << ' ' << num(t);
    os << '\n';
    return os.str();
}

std::string ScenarioConfig::hash() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  (unsigned long long)fnv1a64(canonical_text()));
    return buf;
}

} // namespace voxmc
