#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace editext {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Full-avalanche 64-bit mixer.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// Counter-based deterministic random stream.
//
// Draw i of a stream with key k is mix64(k + GAMMA*i): values depend only on
// (key, draw index), never on evaluation order elsewhere. Child streams are
// derived by hashing a tag into the key, so independent consumers can be
// handed non-overlapping streams from one seed:
//
//   child(key, tag) = mix64(mix64(key ^ fnv1a64(tag)) + GAMMA)
//   child(key, i)   = mix64(mix64(key) + GAMMA * (i + 1))
//
// This scheme is the single source of randomness in the library; std::random
// distributions are avoided so results are identical across standard library
// implementations.
class RngStream {
  public:
    explicit RngStream(uint64_t seed) : key_(detail::mix64(seed)) {}

    RngStream split(std::string_view tag) const {
        RngStream s(0);
        s.key_ = detail::mix64(detail::mix64(key_ ^ detail::fnv1a64(tag)) + kGamma);
        return s;
    }

    RngStream split(uint64_t index) const {
        RngStream s(0);
        s.key_ = detail::mix64(detail::mix64(key_) + kGamma * (index + 1));
        return s;
    }

    uint64_t next_u64() { return detail::mix64(key_ + kGamma * (++counter_)); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi] inclusive. Modulo reduction; the bias is
    // below 2^-50 for the span sizes used here.
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // Standard normal via Box-Muller. Consumes two draws per value; the
    // second variate of the pair is discarded to keep the stream stateless.
    double normal() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

  private:
    static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace editext
