#pragma once

#include <cstdint>

namespace skillops {

/// xorshift64* seeded through SplitMix64, so any 64-bit seed (including 0)
/// gives a non-degenerate state. Reproducible across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) noexcept : m_state(splitmix64(seed))
    {
        if (m_state == 0) {
            m_state = 0x9E3779B97F4A7C15ULL;
        }
    }

    static constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t next() noexcept
    {
        m_state ^= m_state >> 12;
        m_state ^= m_state << 25;
        m_state ^= m_state >> 27;
        return m_state * 0x2545F4914F6CDD1DULL;
    }

    /// Uniform in [0, n), rejection sampled; n must be positive.
    std::uint64_t bounded(std::uint64_t n) noexcept
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next();
        while (x >= limit) {
            x = next();
        }
        return x % n;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t m_state;
};

}  // namespace skillops
