#pragma once

#include <cstdint>
#include <limits>

namespace sepgl {

/**
 * Counter-based 64-bit generator (keyed SplitMix64).
 *
 * Draw k of stream s under seed z is mix(key(z, s) + k * gamma), so any stream
 * can be reconstructed from (seed, stream id) alone, independently of how
 * many numbers other streams consumed. Stream ids used by the simulators:
 * replicate r draws its design from stream 4r, its coefficients from 4r+1,
 * its noise from 4r+2; stream 4r+3 is reserved.
 *
 * Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix(seed ^ mix(stream + kGamma))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + (++counter_) * kGamma); }

    std::uint64_t draws() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

enum class Stream : std::uint64_t { Design = 0, Coefficients = 1, Noise = 2, Spare = 3 };

inline CounterRng replicate_stream(std::uint64_t seed, std::uint64_t replicate, Stream which) noexcept
{
    return CounterRng(seed, 4 * replicate + static_cast<std::uint64_t>(which));
}

} // namespace sepgl
