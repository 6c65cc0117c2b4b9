#pragma once

#include <cstdint>
#include <random>

namespace qtrade {

// Deterministic 64-bit generator with derived per-stream instances.
//
// The engine is std::mt19937_64 (bit-exact across conforming platforms);
// uniform, normal and gamma variates are generated here rather than with
// std:: distributions, whose bit streams are implementation-defined.
// Normal draws use Box-Muller (cosine branch, no cache); gamma draws use
// the Marsaglia-Tsang squeeze with the shape<1 boost. Alternate
// implementations reproduce moments, not bit streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    // Independent stream for (master seed, stream id); multi-path runs
    // draw one stream per path so generation order does not matter.
    static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id);

    // Well-mixed child seed for handing to components that seed themselves.
    static std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform01();

    // Standard normal via Box-Muller.
    double normal();

    // Gamma(shape, scale), shape > 0, scale > 0.
    double gamma(double shape, double scale);

private:
    static std::uint64_t mix(std::uint64_t x); // splitmix64 finalizer

    std::mt19937_64 engine_;
};

} // namespace qtrade
