#pragma once

#include <cstddef>
#include <vector>

namespace voxmc {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

// Wilson score interval for a binomial proportion. z defaults to the 95% level.
Interval wilson_interval(long long successes, long long n, double z = 1.959963984540054);

// Running mean/variance (Welford).
class RunningStat {
  public:
    void add(double x);
    long long n() const { return n_; }
    double mean() const { return mean_; }
    double variance() const; // sample variance, n-1 denominator
    double stderror() const; // sqrt(var/n)

  private:
    long long n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Standard normal CDF.
double normal_cdf(double x);

} // namespace voxmc
