#pragma once

#include <cstdint>
#include <random>

namespace fjcal {

/// Named random streams. Each stream is seeded independently from the master
/// seed so draws do not depend on the order in which agents are visited.
enum class Stream : std::uint64_t {
    TraderInit = 1,
    PriceNoise = 2,
    ValueNoise = 3,
    Switching = 4,
    Bootstrap = 5,
    Replicate = 6,
    Optimizer = 7,
    Threshold = 8,
};

/// splitmix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for sub-stream (stream, index) of a master seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) noexcept;

/// Thin wrapper over std::mt19937_64 with the two draws the models need.
class RandomStream {
public:
    RandomStream() : engine_(0) {}
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master, Stream stream, std::uint64_t index = 0)
        : engine_(derive_seed(master, stream, index)) {}

    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    /// Standard normal.
    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

    friend bool operator==(const RandomStream& a, const RandomStream& b) {
        return a.engine_ == b.engine_;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, a, b). Used by the simulator so that a trader's draws do not
/// depend on how many other traders exist or in which order they are visited.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    /// Uniform on the open interval (0, 1).
    [[nodiscard]] double uniform(Stream s, std::uint64_t a, std::uint64_t b = 0) const noexcept;
    /// Standard normal (Box-Muller on two independent counters).
    [[nodiscard]] double normal(Stream s, std::uint64_t a, std::uint64_t b = 0) const noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    bool operator==(const CounterRng&) const = default;

private:
    std::uint64_t seed_;
};

}  // namespace fjcal
