#include "itcb/rng.hpp"

#include <cmath>
#include <numbers>

namespace itcb {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed),
      stream_(stream),
      key_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL))),
      key2_(mix64(key_ + kGolden)) {}

std::uint64_t Rng::next_u64() noexcept {
    ++counter_;
    const std::uint64_t z = mix64(counter_ * kGolden ^ key_);
    return mix64(z + key2_);
}

double Rng::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace itcb
