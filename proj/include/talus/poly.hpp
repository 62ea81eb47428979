#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "talus/params.hpp"

namespace talus {

// Reduce to the canonical representative in [0, q).
inline constexpr int32_t freeze(int64_t x) {
  int64_t r = x % Q;
  return int32_t(r < 0 ? r + Q : r);
}

// Reduce to the centered representative in (-q/2, q/2].
inline constexpr int32_t center(int64_t x) {
  int32_t r = freeze(x);
  return r > Q / 2 ? r - Q : r;
}

// Coefficients of X^0..X^255 in Z_q[X]/(X^256+1). Storage convention:
// "time domain" values are centered, NTT-domain values are in [0, q).
struct Poly {
  std::array<int32_t, N_COEFFS> c{};

  int32_t& operator[](int i) { return c[size_t(i)]; }
  int32_t operator[](int i) const { return c[size_t(i)]; }

  bool operator==(const Poly&) const = default;
};

using PolyVec = std::vector<Poly>;

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly r;
  for (int i = 0; i < N_COEFFS; ++i) r[i] = center(int64_t(a[i]) + b[i]);
  return r;
}

inline Poly poly_sub(const Poly& a, const Poly& b) {
  Poly r;
  for (int i = 0; i < N_COEFFS; ++i) r[i] = center(int64_t(a[i]) - b[i]);
  return r;
}

inline Poly poly_scale(int64_t s, const Poly& a) {
  Poly r;
  for (int i = 0; i < N_COEFFS; ++i) r[i] = center(s * a[i]);
  return r;
}

inline Poly poly_center(const Poly& a) {
  Poly r;
  for (int i = 0; i < N_COEFFS; ++i) r[i] = center(a[i]);
  return r;
}

inline int32_t poly_inf_norm(const Poly& a) {
  int32_t m = 0;
  for (int i = 0; i < N_COEFFS; ++i) {
    int32_t v = std::abs(center(a[i]));
    if (v > m) m = v;
  }
  return m;
}

inline PolyVec vec_add(const PolyVec& a, const PolyVec& b) {
  PolyVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = poly_add(a[i], b[i]);
  return r;
}

inline PolyVec vec_sub(const PolyVec& a, const PolyVec& b) {
  PolyVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = poly_sub(a[i], b[i]);
  return r;
}

inline PolyVec vec_scale(int64_t s, const PolyVec& a) {
  PolyVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = poly_scale(s, a[i]);
  return r;
}

inline int32_t vec_inf_norm(const PolyVec& a) {
  int32_t m = 0;
  for (const Poly& p : a) {
    int32_t v = poly_inf_norm(p);
    if (v > m) m = v;
  }
  return m;
}

inline PolyVec vec_zero(int n) { return PolyVec(size_t(n)); }

}  // namespace talus
