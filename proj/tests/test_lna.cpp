#include <doctest.h>

#include "voxmc/lna.hpp"
#include "voxmc/presets.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace voxmc;

namespace {

SystemModel one_voxel_rate(double r, double absorb_fraction = -1, int M = 0) {
    Boundary b;
    if (absorb_fraction >= 0) b = {BoundaryKind::Absorbing, absorb_fraction};
    const SpatialGrid grid = build_grid(1, 1, 1, 1.0 / 3.0, b);
    TransmitterSpec tx;
    tx.voxel = {1, 1, 1};
    tx.symbols = {SymbolDef::poisson(r), SymbolDef::poisson(r)};
    tx.priors = {0.5, 0.5};
    ReceiverSpec rx;
    rx.voxels = {{1, 1, 1}};
    rx.M = M;
    return assemble_model(grid, {1.0}, tx, rx);
}

} // namespace

TEST_CASE("mean system matches the worked three-voxel line example") {
    // line of three voxels, transmitter in voxel 3, mixed two-voxel receiver
    // in voxels 1 and 2
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    TransmitterSpec tx;
    tx.voxel = {3, 1, 1};
    tx.symbols = {SymbolDef::poisson(10), SymbolDef::poisson(40)};
    tx.priors = {0.5, 0.5};
    ReceiverSpec rx;
    rx.voxels = {{1, 1, 1}, {2, 1, 1}};
    rx.config = ReceiverConfig::Mixed;
    rx.dr = 0.3;
    rx.M = 10;
    rx.k_plus_conc = 0.005;
    rx.k_minus = 1.0;
    const SystemModel model = assemble_model(grid, {1.0}, tx, rx);
    const MeanSystem sys = build_mean_system(model);

    REQUIRE(sys.n == 7);
    REQUIRE(sys.m() == 12);

    // reference stoichiometry with rows (n_R1, n_R2, n_3, x_1, x*_1, x_2, x*_2)
    // and columns (S diff 1->2, 2->1, 2->3, 3->2; act/deact in RV1; act/deact
    // in RV2; X diff 1->2, 2->1; X* diff 1->2, 2->1)
    const int S_ref[7][12] = {
        {-1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {1, -1, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, -1, 1, 0, 0, -1, 1, 0, 0},
        {0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 1},
        {0, 0, 0, 0, 0, 0, -1, 1, 1, -1, 0, 0},
        {0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 1, -1},
    };
    // this build's variable order is (S@v1, S@v2, S@v3, X@rv1, X@rv2, X*@rv1,
    // X*@rv2) and its channel order swaps the middle voxel's two hop channels
    const int row_of[7] = {0, 1, 2, 3, 5, 4, 6};
    const int col_of[12] = {0, 2, 1, 3, 4, 5, 6, 7, 8, 9, 10, 11};

    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 12; ++j)
            CHECK(sys.S(row_of[i], col_of[j]) == doctest::Approx(double(S_ref[i][j])));

    // input vector: production lands on the transmitter voxel's signal row
    for (int i = 0; i < 7; ++i)
        CHECK(sys.input[row_of[i]] == doctest::Approx(i == 2 ? 1.0 : 0.0));

    // rate vector at a probe concentration point, entry for entry
    Eigen::VectorXd x(7);
    x << 1, 2, 3, 4, 5, 6, 7; // this build's order
    const Eigen::VectorXd r = eval_rates(sys, x);
    const double d = model.d();
    const double rate_ref[12] = {d * 1,          d * 2,       d * 2,       d * 3,
                                 0.005 * 1 * 4,  1.0 * 6,     0.005 * 2 * 5, 1.0 * 7,
                                 0.3 * 4,        0.3 * 5,     0.3 * 6,     0.3 * 7};
    for (int j = 0; j < 12; ++j) CHECK(r[col_of[j]] == doctest::Approx(rate_ref[j]));
}

TEST_CASE("lyapunov closed forms") {
    const auto zero = [](double) { return Eigen::MatrixXd::Zero(2, 2).eval(); };
    const auto eye = [](double) { return Eigen::MatrixXd::Identity(2, 2).eval(); };

    SUBCASE("A=0, constant B: linear growth") {
        Eigen::MatrixXd s0 = Eigen::MatrixXd::Zero(2, 2);
        s0(0, 0) = 1.0;
        const Eigen::MatrixXd s = solve_lyapunov(zero, eye, s0, 3.0, 1e-3);
        CHECK(s(0, 0) == doctest::Approx(4.0));
        CHECK(s(1, 1) == doctest::Approx(3.0));
        CHECK(s(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("A=-lambda I, B=0: exponential decay") {
        const double lam = 0.7;
        const auto decay = [&](double) { return (-lam * Eigen::MatrixXd::Identity(2, 2)).eval(); };
        const Eigen::MatrixXd s =
            solve_lyapunov(decay, zero, Eigen::MatrixXd::Identity(2, 2), 2.0, 1e-3);
        CHECK(s(0, 0) == doctest::Approx(std::exp(-2.0 * lam * 2.0)).epsilon(1e-6));
    }
    SUBCASE("scalar OU stationary variance") {
        const auto a = [](double) { return (-Eigen::MatrixXd::Identity(1, 1)).eval(); };
        const auto b = [](double) { return Eigen::MatrixXd::Identity(1, 1).eval(); };
        const Eigen::MatrixXd s = solve_lyapunov(a, b, Eigen::MatrixXd::Zero(1, 1), 20.0, 1e-3);
        CHECK(std::abs(s(0, 0) - 0.5) < 1e-6);
    }
}

TEST_CASE("pure emission is Poisson: mean equals variance equals r t") {
    const SystemModel m = one_voxel_rate(7.0);
    LnaOptions opts;
    opts.report_dt = 0.25;
    const LnaMoments mom = lna_analyze(m, 0, 2.0, opts);
    const size_t j = mom.times.size() - 1;
    CHECK(mom.count_mean(0, int(j)) == doctest::Approx(14.0).epsilon(1e-6));
    CHECK(mom.count_variance(0, int(j)) == doctest::Approx(14.0).epsilon(1e-6));
}

TEST_CASE("immigration-death: mean and variance agree (Poisson law)") {
    const SystemModel m = one_voxel_rate(10.0, 1.0 / 54.0);
    LnaOptions opts;
    opts.report_dt = 0.5;
    const LnaMoments mom = lna_analyze(m, 0, 3.0, opts);
    for (size_t j = 1; j < mom.times.size(); ++j) {
        const double expect = 10.0 * (1.0 - std::exp(-mom.times[j]));
        CHECK(mom.count_mean(0, int(j)) == doctest::Approx(expect).epsilon(1e-5));
        CHECK(mom.count_variance(0, int(j)) == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("silent input keeps every mean at zero") {
    const SystemModel m = one_voxel_rate(0.0, -1, 5);
    const MeanSolution sol = solve_mean_system(m, 0, 1.0, {});
    for (size_t j = 0; j < sol.times.size(); ++j) CHECK(sol.x(0, int(j)) == 0.0);
    for (size_t j = 0; j < sol.times.size(); ++j) CHECK(sol.beta(0, int(j)) == 0.0);
}

TEST_CASE("symmetric receivers see symmetric means") {
    const SpatialGrid grid = build_grid(3, 1, 1, 1.0 / 3.0);
    TransmitterSpec tx;
    tx.voxel = {2, 1, 1}; // middle
    tx.symbols = {SymbolDef::poisson(10), SymbolDef::poisson(40)};
    tx.priors = {0.5, 0.5};
    ReceiverSpec rx;
    rx.voxels = {{1, 1, 1}, {3, 1, 1}};
    rx.M = 6;
    const SystemModel m = assemble_model(grid, {1.0}, tx, rx);
    const MeanSolution sol = solve_mean_system(m, 1, 2.0, {});
    for (size_t j = 0; j < sol.times.size(); ++j) {
        CHECK(sol.x(m.output_index(0), int(j)) ==
              doctest::Approx(sol.x(m.output_index(1), int(j))).epsilon(1e-12));
        CHECK(sol.alpha(0, int(j)) == doctest::Approx(sol.alpha(1, int(j))).epsilon(1e-12));
    }
}

TEST_CASE("receptor mass balance under the mean flow") {
    const ScenarioConfig cfg = scenario_lna(0.2);
    const SystemModel m = cfg.build();
    const MeanSolution sol = solve_mean_system(m, 1, 5.0, {});
    const double V = m.voxel_volume();
    const double expect = 2.0 * 10.0 / V; // P * M receptors as concentration
    for (size_t j = 0; j < sol.times.size(); ++j) {
        double total = 0;
        for (int p = 0; p < m.P(); ++p)
            total += sol.x(m.r_index(0, p), int(j)) + sol.x(m.r_index(1, p), int(j));
        CHECK(total == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("burst symbols are rejected by the mean solver") {
    const SpatialGrid grid = build_grid(1, 1, 1, 1.0 / 3.0);
    TransmitterSpec tx;
    tx.voxel = {1, 1, 1};
    tx.symbols = {SymbolDef::bursts({0.0}, {5}), SymbolDef::poisson(0)};
    tx.priors = {0.5, 0.5};
    ReceiverSpec rx;
    rx.voxels = {{1, 1, 1}};
    rx.M = 0;
    const SystemModel m = assemble_model(grid, {1.0}, tx, rx);
    CHECK_THROWS(solve_mean_system(m, 0, 1.0, {}));
}

TEST_CASE("covariance stays symmetric positive semidefinite") {
    const ScenarioConfig cfg = scenario_lna(0.2);
    const SystemModel m = cfg.build();
    LnaOptions opts;
    opts.report_dt = 0.5;
    const LnaMoments mom = lna_analyze(m, 0, 3.0, opts);
    for (size_t j = 0; j < mom.times.size(); ++j) {
        const Eigen::MatrixXd& c = mom.cov[j];
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("halving the step barely moves the covariance") {
    const ScenarioConfig cfg = scenario_lna(0.2);
    const SystemModel m = cfg.build();
    LnaOptions coarse, fine;
    coarse.report_dt = fine.report_dt = 1.0;
    coarse.h = 1e-3;
    fine.h = 5e-4;
    const LnaMoments a = lna_analyze(m, 0, 4.0, coarse);
    const LnaMoments b = lna_analyze(m, 0, 4.0, fine);
    const Eigen::MatrixXd& ca = a.cov.back();
    const Eigen::MatrixXd& cb = b.cov.back();
    const double scale = cb.cwiseAbs().maxCoeff();
    CHECK(((ca - cb).cwiseAbs().maxCoeff() / scale) < 1e-3);
}

TEST_CASE("identical symbols give half error probability") {
    const SystemModel m = one_voxel_rate(10.0, -1, 4);
    LnaOptions opts;
    opts.report_dt = 0.5;
    const LnaBer ber = lna_ber(m, 2.0, opts);
    for (size_t j = 0; j < ber.times.size(); ++j) {
        CHECK(ber.ber[0][j] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(ber.ber[1][j] == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("analytic error rate separates distinguishable symbols") {
    const ScenarioConfig cfg = scenario_lna(0.2);
    const SystemModel m = cfg.build();
    LnaOptions opts;
    opts.report_dt = 1.0;
    const LnaBer ber = lna_ber(m, 8.0, opts);
    // starts uninformed, improves with evidence
    CHECK(ber.ber[0].front() == doctest::Approx(0.5));
    CHECK(ber.ber[0].back() < 0.35);
    CHECK(ber.ber[1].back() < 0.35);
    for (size_t j = 0; j < ber.times.size(); ++j) {
        CHECK(ber.ber[0][j] >= 0.0);
        CHECK(ber.ber[0][j] <= 1.0);
    }
}
