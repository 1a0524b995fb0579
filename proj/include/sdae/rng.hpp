#pragma once

#include <cstdint>

namespace sdae {

// Counter-based randomness. Every draw is a pure function of a 64-bit key
// and a counter, so training loops can key streams by
// (seed, purpose, epoch, example, ...) and get results that are independent
// of thread count and of how work is chunked.

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

constexpr std::uint64_t key_combine(std::uint64_t key, std::uint64_t v) {
    return detail::mix64(key + detail::kGolden + v);
}

template <typename... Rest>
constexpr std::uint64_t key_combine(std::uint64_t key, std::uint64_t v, Rest... rest) {
    return key_combine(key_combine(key, v), rest...);
}

// Stream purposes; combined into keys so distinct uses never collide.
enum class StreamTag : std::uint64_t {
    layer_init = 1,
    shuffle = 2,
    corrupt = 3,
    ga_init = 4,
    ga_select = 5,
    ga_mutate = 6,
    ga_crossover = 7,
    bg_rand = 8,
    rotate = 9,
    bg_patch = 10,
    reconstruct = 11,
};

template <typename... Parts>
constexpr std::uint64_t derive_key(std::uint64_t seed, StreamTag tag, Parts... parts) {
    std::uint64_t k = key_combine(seed, static_cast<std::uint64_t>(tag));
    if constexpr (sizeof...(parts) > 0) k = key_combine(k, static_cast<std::uint64_t>(parts)...);
    return k;
}

// Pure per-element draw: uniform in [0,1).
inline double uniform_at(std::uint64_t key, std::uint64_t element, std::uint64_t draw = 0) {
    const std::uint64_t bits = detail::mix64(key_combine(key, element, draw));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in the open interval (0,1); safe as input to tan(pi*(u-1/2)).
inline double uniform_open_at(std::uint64_t key, std::uint64_t element, std::uint64_t draw = 0) {
    const std::uint64_t bits = detail::mix64(key_combine(key, element, draw));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential stream over the same generator.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + ++counter_ * detail::kGolden); }

    // uniform [0,1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform (0,1)
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // uniform integer in [0, bound)
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // uniform in [-range, range]
    double next_symmetric(double range) { return (2.0 * next_double() - 1.0) * range; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace sdae
