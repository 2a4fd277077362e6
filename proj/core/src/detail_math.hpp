#pragma once

#include <cstdint>

namespace pinn::detail {

// Integer power by repeated squaring; negative exponents via reciprocal.
inline double powi(double x, int n) {
  if (n < 0) return 1.0 / powi(x, -n);
  double result = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(n);
  while (e != 0) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

}  // namespace pinn::detail
