#pragma once

#include <array>
#include <cstdint>

namespace qtomo {

// Eigenbranch of a pointer measurement: Plus is the Gaussian centered at +1
// (outcome |0>), Minus the one centered at -1 (outcome |1>).
enum class Branch { Plus, Minus };

inline double branch_mean(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

// Mean/spread of a pointer Gaussian. sigma = 1/sqrt(epsilon) when derived
// from a measurement strength.
struct GaussianSpec {
    double mu;
    double sigma;

    static GaussianSpec from_strength(double mu, double epsilon);
};

// Deterministic, seedable random source backed by the Philox4x32-10 counter
// cipher. A given (seed, stream) pair yields the same variate sequence on
// every run and platform; distinct streams occupy disjoint counter ranges and
// are statistically independent.
//
// A stream is single-owner: copy it to snapshot state, move it between
// workers, but do not share one instance across threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Next raw 64-bit word.
    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform();

    // Marsaglia polar method. Each acceptance produces an antithetic pair;
    // the second unit normal is cached and consumed by the next call before
    // any new uniforms are drawn. Throws std::invalid_argument if sigma <= 0.
    double gaussian(const GaussianSpec& g);

    // Biased coin: Plus iff the next uniform r satisfies r <= p. p is
    // clamped into [0, 1] within 1e-12 and rejected beyond that
    // (std::domain_error).
    Branch cointoss(double p);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffer_pos_ = 2; // empty
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// One Philox4x32-10 block, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

} // namespace qtomo
