#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dsel {

/// Seedable, splittable random stream.
///
/// Every stream is identified by a root seed plus a path of integers
/// (trial index, antenna entry, purpose tag, ...). Streams with different
/// paths are statistically independent and never share state, so work can
/// be split across workers without changing any realization.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    /// Child stream of this stream's identity, independent of its position.
    [[nodiscard]] Rng substream(std::initializer_list<std::uint64_t> path) const;

    [[nodiscard]] std::uint64_t id() const noexcept { return id_; }

    double normal();
    double uniform();  // [0, 1)
    std::size_t uniform_index(std::size_t n);

    /// CN(0, variance): independent real and imaginary parts, each N(0, variance/2).
    std::complex<double> complex_gaussian(double variance);

    std::mt19937_64& engine() noexcept { return engine_; }

  private:
    std::uint64_t id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to derive stream identities.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace dsel
