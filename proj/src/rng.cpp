#include "dsel/rng.hpp"

#include <cmath>

namespace dsel {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t derive(std::uint64_t id, std::initializer_list<std::uint64_t> path) {
    for (std::uint64_t p : path) {
        id = mix64(id ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return id;
}

std::mt19937_64 make_engine(std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : id_(mix64(seed)), engine_(make_engine(id_)) {}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    : id_(derive(mix64(seed), path)), engine_(make_engine(id_)) {}

Rng Rng::substream(std::initializer_list<std::uint64_t> path) const {
    Rng child(0);
    child.id_ = derive(id_, path);
    child.engine_ = make_engine(child.id_);
    return child;
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return std::generate_canonical<double, 53>(engine_); }

std::size_t Rng::uniform_index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

std::complex<double> Rng::complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
}

}  // namespace dsel
