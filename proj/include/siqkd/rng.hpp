#pragma once

#include <cstdint>
#include <string_view>

namespace siqkd {

// Counter-based stream built on the splitmix64 finalizer (Steele/Lea/Flood;
// Vigna's fixed-increment variant). Output word i is a pure function of
// (key, i), so shots can be split by index and evaluated in any order while
// producing identical values.
class RngStream {
  public:
    RngStream(uint64_t seed, std::string_view label)
        : key_(mix(seed ^ fnv1a(label))) {}

    // Derive an independent stream for a named sub-role ("alice", "eve", ...).
    RngStream substream(std::string_view label) const {
        return RngStream(mix(key_ ^ fnv1a(label)));
    }

    // Derive an independent stream keyed by an index (ensemble, block, shot).
    RngStream split(uint64_t index) const {
        return RngStream(mix(key_ + (index + 1) * GAMMA));
    }

    uint64_t next_u64() { return at(counter_++); }

    // Word at an absolute counter position, without advancing.
    uint64_t at(uint64_t counter) const { return mix(key_ + (counter + 1) * GAMMA); }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // +1 with probability p_plus, else -1.
    int next_sign(double p_plus) { return next_unit() < p_plus ? +1 : -1; }

    bool next_bit() { return (next_u64() & 1u) != 0; }

    uint64_t key() const { return key_; }

  private:
    explicit RngStream(uint64_t key) : key_(key) {}

    static constexpr uint64_t GAMMA = 0x9E3779B97F4A7C15ull;

    static constexpr uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static constexpr uint64_t fnv1a(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ull;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return h;
    }

    uint64_t key_;
    uint64_t counter_ = 0;
};

} // namespace siqkd
