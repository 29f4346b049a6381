#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace viciouskit {

// Independent random stream keyed by (seed, stream index, purpose tag).
// Each stream is a separately seeded Mersenne twister, so the values a stream
// produces never depend on how many other streams exist or which thread runs
// them.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t tag = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), tag};
        engine_.seed(seq);
    }

    double gaussian() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    std::uint64_t bits() { return engine_(); }

    void fill_gaussian(std::span<double> out) {
        for (double& v : out) v = normal_(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Purpose tags keep the streams of different engines apart under one seed.
namespace stream_tag {
inline constexpr std::uint32_t walkers = 1;
inline constexpr std::uint32_t sde = 2;
inline constexpr std::uint32_t noncollision = 3;
inline constexpr std::uint32_t matrices = 4;
inline constexpr std::uint32_t quasi_shift = 5;
inline constexpr std::uint32_t exact_draws = 6;
}  // namespace stream_tag

}  // namespace viciouskit
