#pragma once

#include <cstdint>
#include <random>

namespace voxmc {

// splitmix64; used to decorrelate replicate seeds derived from a base seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic stream seed for replicate `index` of an ensemble. Same
// (base, index) always yields the same stream regardless of scheduling.
inline uint64_t replicate_seed(uint64_t base, uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 1));
}

// Thin wrapper so every stochastic component draws from the same generator
// type (mt19937_64) with documented u in (0,1].
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    // uniform in (0,1]; never returns 0 so -log(u) is finite
    double uniform_pos() {
        double u = std::generate_canonical<double, 53>(gen_);
        return 1.0 - u;
    }

    // uniform in [0,1)
    double uniform() { return std::generate_canonical<double, 53>(gen_); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

} // namespace voxmc
