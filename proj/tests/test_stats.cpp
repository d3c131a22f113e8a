#include <doctest.h>

#include "voxmc/stats.hpp"

#include <cmath>

using namespace voxmc;

TEST_CASE("wilson interval basics") {
    const Interval full = wilson_interval(5, 10);
    CHECK(full.contains(0.5));
    CHECK(full.lo > 0.0);
    CHECK(full.hi < 1.0);

    // zero successes still yields a positive upper bound
    const Interval zero = wilson_interval(0, 300);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi > 0.0);
    CHECK(zero.hi < 0.03);

    const Interval one = wilson_interval(300, 300);
    CHECK(one.hi == 1.0);
    CHECK(one.lo > 0.97);

    CHECK_THROWS(wilson_interval(5, 0));
    CHECK_THROWS(wilson_interval(11, 10));
}

TEST_CASE("wilson interval n=1") {
    const Interval i = wilson_interval(1, 1);
    CHECK(i.lo > 0.0);
    CHECK(i.hi == 1.0);
}

TEST_CASE("running stat") {
    RunningStat rs;
    for (double x : {1.0, 2.0, 3.0, 4.0}) rs.add(x);
    CHECK(rs.mean() == doctest::Approx(2.5));
    CHECK(rs.variance() == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("spearman") {
    std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> inc{1, 2, 4, 8, 16};
    CHECK(spearman(x, inc) == doctest::Approx(1.0));
    std::vector<double> dec{5, 4, 3, 2, 1};
    CHECK(spearman(x, dec) == doctest::Approx(-1.0));
    // ties get average ranks
    std::vector<double> tied{1, 1, 2, 2, 3};
    CHECK(spearman(x, tied) > 0.9);
}

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-6));
    // error probability falls as the margin grows
    CHECK(normal_cdf(-3.0) < normal_cdf(-2.0));
}
