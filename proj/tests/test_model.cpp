#include <doctest.h>

#include "voxmc/model.hpp"

#include <algorithm>

using namespace voxmc;

namespace {

TransmitterSpec two_rate_symbols(Voxel v, double r0 = 10, double r1 = 40) {
    TransmitterSpec tx;
    tx.voxel = v;
    tx.symbols = {SymbolDef::poisson(r0), SymbolDef::poisson(r1)};
    tx.priors = {0.5, 0.5};
    return tx;
}

int count_kind(const SystemModel& m, ChannelKind k) {
    return int(std::count_if(m.channels.begin(), m.channels.end(),
                             [&](const Channel& ch) { return ch.kind == k; }));
}

} // namespace

TEST_CASE("rate constant conversion") {
    CHECK(convert_rate_constant(0.005, 1.0 / 27.0) == doctest::Approx(0.135));
    CHECK(convert_rate_constant(0.0, 0.5) == 0.0);
    CHECK(convert_rate_constant(3.25, 1.0) == doctest::Approx(3.25));
    CHECK_THROWS(convert_rate_constant(1.0, 0.0));
    CHECK_THROWS(convert_rate_constant(1.0, -2.0));
}

TEST_CASE("jump rate scales with 1/w^2") {
    MediumSpec med{1.0};
    SystemModel a, b;
    a.grid = build_grid(2, 1, 1, 1.0 / 3.0);
    a.medium = med;
    b.grid = build_grid(2, 1, 1, 1.0 / 6.0);
    b.medium = med;
    CHECK(a.d() == doctest::Approx(9.0));
    CHECK(b.d() == doctest::Approx(4.0 * a.d()));
}

TEST_CASE("two-voxel receiver on the 5x5x5 medium") {
    const SpatialGrid grid = build_grid(5, 5, 5, 1.0 / 3.0, {BoundaryKind::Absorbing, 0.02});
    ReceiverSpec rx;
    rx.voxels = {{4, 5, 5}, {5, 5, 5}};
    rx.config = ReceiverConfig::Mixed;
    rx.dr = 0.5;
    rx.M = 10;

    const SystemModel m = assemble_model(grid, {1.0}, two_rate_symbols({1, 1, 1}), rx);

    CHECK(count_kind(m, ChannelKind::Activation) == 2);
    CHECK(count_kind(m, ChannelKind::Deactivation) == 2);
    // two mobile receiver species, one adjacent pair, two directions
    CHECK(count_kind(m, ChannelKind::ReceiverDiffusion) == 4);
    int output_transfers = 0;
    for (const auto& ch : m.channels)
        if (ch.kind == ChannelKind::ReceiverDiffusion && ch.species == m.output_species)
            ++output_transfers;
    CHECK(output_transfers == 2);

    CHECK(count_kind(m, ChannelKind::SignalDiffusion) == 600);
    CHECK(count_kind(m, ChannelKind::BoundaryAbsorb) == 6 * 25);
    CHECK(m.forward_const == doctest::Approx(0.005 * 27.0));

    // receiver species stay inside the receiver
    for (const auto& ch : m.channels)
        if (ch.kind == ChannelKind::ReceiverDiffusion) {
            CHECK(ch.rv_from >= 0);
            CHECK(ch.rv_from < m.P());
            CHECK(ch.rv_to >= 0);
            CHECK(ch.rv_to < m.P());
        }

    // initial state: M receptors per receiver voxel, nothing else
    long long total = 0;
    for (long long c : m.initial_state) total += c;
    CHECK(total == 2 * 10);
}

TEST_CASE("partitioned receivers have no transfer channels") {
    const SpatialGrid grid = build_grid(5, 5, 5, 1.0 / 3.0, {BoundaryKind::Absorbing, 0.02});
    ReceiverSpec rx;
    rx.voxels = {{4, 5, 5}, {5, 5, 5}};
    rx.config = ReceiverConfig::Partitioned;
    rx.dr = 0.7; // ignored for the partitioned configuration
    rx.M = 10;
    const SystemModel m = assemble_model(grid, {1.0}, two_rate_symbols({1, 1, 1}), rx);
    CHECK(count_kind(m, ChannelKind::ReceiverDiffusion) == 0);
    CHECK(m.rx.dr == 0.0);
}

TEST_CASE("reflecting medium has no absorption channels") {
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    ReceiverSpec rx;
    rx.voxels = {{2, 1, 1}, {3, 1, 1}};
    rx.M = 10;
    const SystemModel m = assemble_model(grid, {1.0}, two_rate_symbols({1, 1, 1}), rx);
    CHECK(count_kind(m, ChannelKind::BoundaryAbsorb) == 0);
    CHECK(count_kind(m, ChannelKind::SignalDiffusion) == 4);
}

TEST_CASE("propensities") {
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    ReceiverSpec rx;
    rx.voxels = {{2, 1, 1}};
    rx.M = 10;
    rx.k_plus_conc = 0.005;
    rx.k_minus = 1.0;
    const SystemModel m = assemble_model(grid, {1.0}, two_rate_symbols({1, 1, 1}), rx);

    std::vector<long long> state = m.initial_state;
    const Channel& act = m.channels[m.activation_channels[0]];
    // g+ = 0.135 with 10 free receptors and 2 signalling molecules: 2.7/s
    state[m.s_index(grid.index_of({2, 1, 1}))] = 2;
    CHECK(propensity_eval(m, state, act) == doctest::Approx(0.135 * 10 * 2));
    // no signalling molecules: no activation
    state[m.s_index(grid.index_of({2, 1, 1}))] = 0;
    CHECK(propensity_eval(m, state, act) == 0.0);

    // deactivation at 1/s per active receptor
    const Channel* deact = nullptr;
    for (const auto& ch : m.channels)
        if (ch.kind == ChannelKind::Deactivation) deact = &ch;
    REQUIRE(deact != nullptr);
    state[m.output_index(0)] = 3;
    CHECK(propensity_eval(m, state, *deact) == doctest::Approx(3.0));
}

TEST_CASE("compilation is deterministic") {
    auto make = [] {
        const SpatialGrid grid = build_grid(4, 4, 4, 0.25, {BoundaryKind::Absorbing, 0.02});
        ReceiverSpec rx;
        rx.voxels = {{3, 4, 4}, {4, 4, 4}};
        rx.config = ReceiverConfig::Mixed;
        rx.dr = 0.3;
        rx.M = 7;
        return assemble_model(grid, {1.5}, two_rate_symbols({1, 1, 1}), rx);
    };
    CHECK(make().channel_fingerprint() == make().channel_fingerprint());
}

TEST_CASE("validation errors") {
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    MediumSpec med{1.0};
    ReceiverSpec rx;
    rx.voxels = {{2, 1, 1}};
    rx.M = 5;

    // receiver voxel outside
    ReceiverSpec out = rx;
    out.voxels = {{4, 1, 1}};
    CHECK_THROWS(assemble_model(grid, med, two_rate_symbols({1, 1, 1}), out));

    // mixed with negative d_r
    ReceiverSpec neg = rx;
    neg.config = ReceiverConfig::Mixed;
    neg.dr = -0.1;
    CHECK_THROWS(assemble_model(grid, med, two_rate_symbols({1, 1, 1}), neg));

    // transmitter outside
    CHECK_THROWS(assemble_model(grid, med, two_rate_symbols({4, 1, 1}), rx));

    // fewer than two symbols
    TransmitterSpec tx1;
    tx1.voxel = {1, 1, 1};
    tx1.symbols = {SymbolDef::poisson(10)};
    tx1.priors = {1.0};
    CHECK_THROWS(assemble_model(grid, med, tx1, rx));

    // priors must sum to one
    TransmitterSpec bad = two_rate_symbols({1, 1, 1});
    bad.priors = {0.4, 0.4};
    CHECK_THROWS(assemble_model(grid, med, bad, rx));

    // burst symbols cannot be split across several transmitter voxels
    TransmitterSpec multi = two_rate_symbols({1, 1, 1});
    multi.voxels = {{1, 1, 1}, {2, 1, 1}};
    multi.symbols[0] = SymbolDef::bursts({0.0}, {5});
    CHECK_THROWS(assemble_model(grid, med, multi, rx));
}

TEST_CASE("emission profiles") {
    const EmissionProfile rate = SymbolDef::poisson(10, 0.5).profile();
    CHECK(rate.rate_at(0.0) == 10.0);
    CHECK(rate.rate_at(0.49) == 10.0);
    CHECK(rate.rate_at(0.5) == 0.0);
    CHECK(rate.mean_emitted(1.0) == doctest::Approx(5.0));

    const EmissionProfile pulse = SymbolDef::pulse(40, 0.2).profile();
    CHECK(pulse.rate_at(0.1) == 40.0);
    CHECK(pulse.rate_at(0.3) == 0.0);

    const EmissionProfile bursts = SymbolDef::bursts({0.0, 0.2, 0.4}, {8, 8, 8}).profile();
    CHECK(bursts.max_rate() == 0.0);
    CHECK(bursts.mean_emitted(0.3) == doctest::Approx(16.0));
    CHECK(bursts.bursts.size() == 3);

    CHECK_THROWS(SymbolDef::bursts({0.2, 0.1}, {1, 1}).profile());
    CHECK_THROWS(SymbolDef::bursts({0.1}, {-2}).profile());
    CHECK_THROWS(SymbolDef::poisson(-1).profile());
}

TEST_CASE("two-site circuit compiles with one output-incrementing channel per voxel") {
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    ReceiverSpec rx;
    rx.voxels = {{2, 1, 1}, {3, 1, 1}};
    rx.circuit = CircuitKind::TwoSite;
    rx.M = 2;
    rx.lambda1_conc = 0.005;
    rx.mu1 = 1.0;
    rx.lambda2_conc = 0.005;
    rx.mu2 = 1.0;
    const SystemModel m = assemble_model(grid, {1.0}, two_rate_symbols({1, 1, 1}), rx);
    CHECK(count_kind(m, ChannelKind::Activation) == 2);
    CHECK(count_kind(m, ChannelKind::Deactivation) == 2);
    CHECK(count_kind(m, ChannelKind::CircuitOther) == 4);
    CHECK(m.species.size() == 4); // S, E, C1, C2
    CHECK(m.forward_const == doctest::Approx(0.005 * 27.0));

    // the binding reaction consumes a signalling molecule
    const Channel& act = m.channels[m.activation_channels[0]];
    bool consumes_signal = false;
    for (int j = 0; j < act.n_delta; ++j)
        if (act.delta[j].first < m.V() && act.delta[j].second == -1) consumes_signal = true;
    CHECK(consumes_signal);
}
