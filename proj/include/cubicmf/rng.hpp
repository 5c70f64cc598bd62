#pragma once

#include <cstdint>

namespace cubicmf {

/// splitmix64 (Steele, Lea & Flood 2014): a constant-increment counter with
/// a 64-bit mixing finalizer. Implemented here rather than through
/// <random> so that seeded streams are bit-identical across compilers and
/// standard libraries; the generator name is recorded in output metadata.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0,n), n > 0, via 128-bit multiply-shift.
    std::uint64_t next_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    static constexpr const char* name() { return "splitmix64"; }

private:
    std::uint64_t state_;
};

}  // namespace cubicmf
