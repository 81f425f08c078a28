#include "qtomo/random.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qtomo {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox_round(
    const std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

constexpr double kProbTol = 1e-12;

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    c = philox_round(c, k);
    for (int round = 1; round < 10; ++round) {
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
        c = philox_round(c, k);
    }
    return c;
}

GaussianSpec GaussianSpec::from_strength(double mu, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("measurement strength epsilon must be > 0");
    }
    return {mu, 1.0 / std::sqrt(epsilon)};
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      seed_(seed),
      stream_(stream) {}

void RandomStream::refill() {
    const std::array<std::uint32_t, 4> counter{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 4> out = philox4x32(counter, key_);
    buffer_[0] = static_cast<std::uint64_t>(out[0]) |
                 (static_cast<std::uint64_t>(out[1]) << 32);
    buffer_[1] = static_cast<std::uint64_t>(out[2]) |
                 (static_cast<std::uint64_t>(out[3]) << 32);
    buffer_pos_ = 0;
    ++block_;
}

std::uint64_t RandomStream::next_u64() {
    if (buffer_pos_ >= 2) refill();
    return buffer_[buffer_pos_++];
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian(const GaussianSpec& g) {
    if (!(g.sigma > 0.0)) {
        throw std::invalid_argument("gaussian spec requires sigma > 0");
    }
    double x;
    if (has_cached_normal_) {
        x = cached_normal_;
        has_cached_normal_ = false;
    } else {
        double v1, v2, s;
        do {
            v1 = 2.0 * uniform() - 1.0;
            v2 = 2.0 * uniform() - 1.0;
            s = v1 * v1 + v2 * v2;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        x = v1 * f;
        cached_normal_ = v2 * f;
        has_cached_normal_ = true;
    }
    return x * g.sigma + g.mu;
}

Branch RandomStream::cointoss(double p) {
    if (p < -kProbTol || p > 1.0 + kProbTol) {
        std::ostringstream msg;
        msg << "cointoss probability outside [0,1]: " << p;
        throw std::domain_error(msg.str());
    }
    p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    return uniform() <= p ? Branch::Plus : Branch::Minus;
}

} // namespace qtomo
