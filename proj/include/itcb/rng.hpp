#pragma once

#include <cstdint>

namespace itcb {

/// Counter-based pseudo-random generator.
///
/// Output i of a generator is a pure function of (key, i), so a stream is fully
/// described by its seed, its stream index and the number of draws taken. Two
/// generators built from different (seed, stream) pairs never share state, which
/// is what lets replications run on separate threads and still reproduce bit for
/// bit on a single thread.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// Stream for replication `replication` of an experiment seeded with `seed`.
    static Rng derive(std::uint64_t seed, std::uint64_t replication) noexcept {
        return Rng(seed, replication);
    }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform() noexcept;

    /// Standard normal (Box-Muller, one output per two uniforms).
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t key2_;
    std::uint64_t counter_ = 0;
};

}  // namespace itcb
