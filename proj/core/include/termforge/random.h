#ifndef TERMFORGE_RANDOM_H_
#define TERMFORGE_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace termforge {

// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not; these helpers keep every sampled value identical
// across standard library implementations.
using Rng = std::mt19937_64;

Rng make_rng(uint64_t seed);

// Mixes a seed with a stream index (splitmix64 finalizer).
uint64_t derive_seed(uint64_t seed, uint64_t stream);
uint64_t derive_seed(uint64_t seed, std::string_view label);

// Uniform integer in [0, bound) by rejection; bound must be > 0.
uint64_t uniform_below(Rng& rng, uint64_t bound);

// Uniform real in [0, 1) with 53 bits of entropy.
double uniform_unit(Rng& rng);

// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = uniform_below(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Uniform sample of min(k, n) distinct indices from [0, n), ascending.
std::vector<size_t> sample_indices(size_t n, size_t k, Rng& rng);

uint64_t fnv1a64(std::string_view bytes);

}  // namespace termforge

#endif  // TERMFORGE_RANDOM_H_
