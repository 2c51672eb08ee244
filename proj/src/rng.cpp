#include "fjcal/rng.hpp"

#include <cmath>
#include <numbers>

namespace fjcal {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) noexcept {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    return mix64(h ^ (index * 0xd1b54a32d192ed03ULL));
}

double CounterRng::uniform(Stream s, std::uint64_t a, std::uint64_t b) const noexcept {
    const std::uint64_t bits = mix64(derive_seed(seed_, s, a) ^ mix64(b ^ 0x632be59bd9b4e019ULL));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(Stream s, std::uint64_t a, std::uint64_t b) const noexcept {
    const double u1 = uniform(s, a, 2 * b);
    const double u2 = uniform(s, a, 2 * b + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fjcal
