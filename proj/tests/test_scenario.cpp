#include <doctest.h>

#include "voxmc/scenario.hpp"

using namespace voxmc;

namespace {

const char* kSample = R"(
# two-voxel corner receiver on the 5x5x5 medium
[grid]
nx = 5
ny = 5
nz = 5
w = 0.3333333333333333
boundary = absorbing

[medium]
D = 1.0

[transmitter]
voxel = (1,1,1)
priors = 0.5 0.5

[symbol 0]
emission = rate
rate = 10

[symbol 1]
emission = rate
rate = 40

[receiver]
voxels = (4,5,5) (5,5,5)
configuration = mixed
dr = 0.5
circuit = actdeact
M = 10
kplus = 0.005
kminus = 1.0

[run]
t_end = 2.5
n_runs_ber = 300
n_runs_ref = 500
seed = 12345
decision_dt = 0.5
)";

} // namespace

TEST_CASE("parse and build a scenario") {
    const ScenarioConfig cfg = parse_scenario_text(kSample);
    CHECK(cfg.nx == 5);
    CHECK(cfg.dr == 0.5);
    CHECK(cfg.symbols.size() == 2);
    CHECK(cfg.symbols[1].rate == 40);
    CHECK(cfg.seed == 12345);

    const SystemModel m = cfg.build();
    CHECK(m.V() == 125);
    CHECK(m.P() == 2);
    CHECK(m.rx.config == ReceiverConfig::Mixed);
    CHECK(m.K() == 2);

    const auto times = cfg.resolved_decision_times();
    CHECK(times.front() == 0.0);
    CHECK(times.back() == doctest::Approx(2.5));
    CHECK(times.size() == 6);
}

TEST_CASE("unknown keys and sections are rejected") {
    std::string bad1(kSample);
    bad1 += "\n[grid]\n"; // duplicate section
    CHECK_THROWS(parse_scenario_text(bad1));

    std::string bad2(kSample);
    bad2 += "\n[magic]\nx = 1\n";
    CHECK_THROWS(parse_scenario_text(bad2));

    std::string bad3(kSample);
    bad3.replace(bad3.find("t_end"), 5, "t_fin");
    CHECK_THROWS(parse_scenario_text(bad3));

    CHECK_THROWS(parse_scenario_text("[grid]\nnx = five\n"));
    CHECK_THROWS(parse_scenario_text("[receiver]\nvoxels = 4 5 5\n"));
    CHECK_THROWS(parse_scenario_text("nx = 5\n")); // key outside a section
}

TEST_CASE("hash is stable and sensitive") {
    const ScenarioConfig a = parse_scenario_text(kSample);
    const ScenarioConfig b = parse_scenario_text(kSample);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);

    ScenarioConfig c = a;
    c.seed = 999;
    CHECK(c.hash() != a.hash());
    ScenarioConfig d = a;
    d.dr = 0.6;
    CHECK(d.hash() != a.hash());
    // workers do not affect results, so they do not enter the hash
    ScenarioConfig e = a;
    e.workers = 7;
    CHECK(e.hash() == a.hash());
}

TEST_CASE("burst and pulse symbols parse") {
    std::string text(kSample);
    text.replace(text.find("emission = rate\nrate = 10"), 25,
                 "emission = bursts\ntimes = 0 0.2 0.4\ncount = 8");
    const ScenarioConfig cfg = parse_scenario_text(text);
    CHECK(cfg.symbols[0].emission == "bursts");
    CHECK(cfg.symbols[0].times.size() == 3);
    const SystemModel m = cfg.build();
    CHECK(m.emissions[0].bursts.size() == 3);
    CHECK(m.emissions[0].bursts[0].second == 8);
}

TEST_CASE("explicit decision times override the grid") {
    std::string text(kSample);
    text += "\n[run]x"; // malformed, should throw
    CHECK_THROWS(parse_scenario_text(text));

    ScenarioConfig cfg = parse_scenario_text(kSample);
    cfg.decision_times = {1.0, 2.5};
    CHECK(cfg.resolved_decision_times() == std::vector<double>{1.0, 2.5});
}
