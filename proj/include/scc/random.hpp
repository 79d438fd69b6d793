#ifndef SCC_RANDOM_HPP
#define SCC_RANDOM_HPP

#include <bit>
#include <cstddef>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace scc {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to fold labels (method names etc.) into seeds.
inline std::uint64_t hash_label(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent stream seed from a parent seed and a sequence of
/// keys. Order of keys matters; adding a key never perturbs other derivations.
template <class... Keys>
std::uint64_t derive_seed(std::uint64_t parent, Keys... keys)
{
  std::uint64_t h = splitmix64(parent);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(keys))), ...);
  return h;
}

inline std::uint64_t double_bits(double v)
{
  return std::bit_cast<std::uint64_t>(v);
}

/// Seeded generator. Uses mt19937_64 (fully specified by the standard) with
/// hand-rolled variate transforms so sequences are identical across standard
/// library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  Rng split(std::uint64_t key) { return Rng(derive_seed(next_u64(), key)); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scc

#endif  // SCC_RANDOM_HPP
