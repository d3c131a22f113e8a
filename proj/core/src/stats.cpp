#include "voxmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace voxmc {

Interval wilson_interval(long long successes, long long n, double z) {
    if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
    if (successes < 0 || successes > n)
        throw std::invalid_argument("wilson_interval: successes out of range");
    const double p = double(successes) / double(n);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    Interval ci;
    ci.lo = successes == 0 ? 0.0 : std::max(0.0, (centre - half) / denom);
    ci.hi = successes == n ? 1.0 : std::min(1.0, (centre + half) / denom);
    return ci;
}

void RunningStat::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / double(n_);
    m2_ += d * (x - mean_);
}

double RunningStat::variance() const {
    return n_ > 1 ? m2_ / double(n_ - 1) : 0.0;
}

double RunningStat::stderror() const {
    return n_ > 0 ? std::sqrt(variance() / double(n_)) : 0.0;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * double(i + j) + 1.0; // average rank of the tie block
        for (size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length series of size >= 2");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    double mx = 0, my = 0;
    for (size_t i = 0; i < rx.size(); ++i) { mx += rx[i]; my += ry[i]; }
    mx /= double(rx.size());
    my /= double(ry.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

} // namespace voxmc
