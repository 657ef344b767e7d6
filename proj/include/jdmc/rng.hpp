#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

namespace jdmc {

/// xoshiro256++ generator with SplitMix64 seeding.
///
/// Streams are derived from (root seed, stream index) by hashing both through
/// SplitMix64, so trial `i` of a batch sees the same numbers no matter which
/// worker runs it.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    static Rng stream(std::uint64_t root_seed, std::uint64_t index) {
        std::uint64_t s = root_seed;
        const std::uint64_t a = splitmix64(s);
        std::uint64_t t = index ^ a;
        const std::uint64_t b = splitmix64(t);
        return Rng(a ^ (b + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    boost::random::normal_distribution<double> normal_;
};

}  // namespace jdmc
