#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ekman {

namespace detail {

// SplitMix64 finalizer (Stafford mix 13).
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t golden64 = 0x9e3779b97f4a7c15ull;

} // namespace detail

// Counter-based random stream. A draw is a pure function of
// (seed, stream_id, counter), so identical identities replay identical
// sequences and any draw can be addressed by its counter directly.
// Distinct stream_ids give statistically independent streams.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter = 0)
        : seed_(seed), stream_id_(stream_id), counter_(counter) {
        base_ = detail::mix64(detail::mix64(seed + detail::golden64) ^
                              detail::mix64(stream_id + 0x6a09e667f3bcc909ull));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }
    void set_counter(std::uint64_t c) { counter_ = c; }

    std::uint64_t next_u64() { return value_at(counter_++); }

    // Uniform in (0,1); never exactly 0, safe under log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes exactly two counters.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // The normal addressed by slot index: consumes counters 2i and 2i+1,
    // independent of the stream's running counter. Used where two
    // integrations at different step sizes must see the same underlying
    // noise path.
    double normal_at(std::uint64_t index) const {
        const double u1 =
            (static_cast<double>(value_at(2 * index) >> 11) + 0.5) * 0x1.0p-53;
        const double u2 =
            (static_cast<double>(value_at(2 * index + 1) >> 11) + 0.5) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Derived stream, independent of the parent and of other children.
    RngStream substream(std::uint64_t child) const {
        return RngStream(seed_, detail::mix64(stream_id_ + detail::golden64 * (child + 1)) ^
                                    (child + 0x0df1a2b3c4d5e6f7ull));
    }

    bool operator==(const RngStream& o) const {
        return seed_ == o.seed_ && stream_id_ == o.stream_id_ && counter_ == o.counter_;
    }

private:
    std::uint64_t value_at(std::uint64_t c) const {
        return detail::mix64(base_ + (c + 1) * detail::golden64);
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t base_ = 0;
};

} // namespace ekman
