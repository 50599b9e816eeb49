#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spdelab {

// Counter-based generator (Philox4x32-10). A draw is a pure function of
// (seed, stream, block), so trajectories replay bit-identically and parallel
// workers never share state.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        Block c = {static_cast<std::uint32_t>(block),
                   static_cast<std::uint32_t>(block >> 32),
                   static_cast<std::uint32_t>(stream),
                   static_cast<std::uint32_t>(stream >> 32)};
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
                 static_cast<std::uint32_t>(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }
};

// Stream ids carry a purpose tag in the high bits so a (trajectory, purpose)
// pair never collides with another use of the same trajectory index.
namespace stream_purpose {
inline constexpr std::uint64_t dynamics = 1;
inline constexpr std::uint64_t picard = 2;
inline constexpr std::uint64_t reservoir = 3;
inline constexpr std::uint64_t candidate = 4;
inline constexpr std::uint64_t invariance = 5;
inline constexpr std::uint64_t permutation = 6;
inline constexpr std::uint64_t bootstrap = 7;
inline constexpr std::uint64_t sampling = 8;
}  // namespace stream_purpose

inline constexpr std::uint64_t make_stream(std::uint64_t purpose, std::uint64_t index) {
    return (purpose << 48) | (index & 0xFFFFFFFFFFFFull);
}

// Gaussian/uniform view over one Philox stream. normal() consumes one
// counter block per pair (Box-Muller), uniform() one block per draw.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t block() const { return block_; }

    // Random access: position the counter and drop any cached half-pair.
    void seek(std::uint64_t block) {
        block_ = block;
        have_cached_ = false;
    }

    double uniform() {
        const auto w = Philox4x32::generate(seed_, stream_, block_++);
        return to_unit(w[0], w[1]);
    }

    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const auto w = Philox4x32::generate(seed_, stream_, block_++);
        const double u1 = to_unit(w[0], w[1]);
        const double u2 = to_unit(w[2], w[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t v = (std::uint64_t{hi} << 32) | lo;
        // 53-bit mantissa shifted into (0,1); never exactly 0 or 1.
        return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace spdelab
