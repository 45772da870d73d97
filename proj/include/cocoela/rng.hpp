#ifndef COCOELA_RNG_HPP
#define COCOELA_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cocoela {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Folds a tuple of integers into one seed. Distinct tuples give
/// statistically independent streams, so per-item streams can be
/// derived from (master seed, item index, purpose tag) without any
/// shared state between items.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// Seed-stable random source: std::mt19937_64 (bit-exact across standard
/// libraries) plus hand-written variate conversions, because the standard
/// distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::initializer_list<std::uint64_t> parts) { return Rng(derive_seed(parts)); }

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cocoela

#endif
