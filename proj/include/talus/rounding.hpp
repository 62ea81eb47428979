#pragma once

#include <utility>

#include "talus/poly.hpp"

namespace talus {

struct Decomposed {
  int32_t r1;  // high part, in [0, stripes)
  int32_t r0;  // low part, centered in (-gamma2, gamma2], or -gamma2-ish at the wrap edge
};

// r = r1 * 2*gamma2 + r0 mod q, with the q-1 wrap folded into r1 = 0.
inline Decomposed decompose(const ParamSet& ps, int64_t r) {
  int32_t rp = freeze(r);
  int32_t alpha = ps.alpha();
  int32_t r0 = rp % alpha;
  if (r0 > ps.gamma2) r0 -= alpha;
  int32_t r1;
  if (rp - r0 == Q - 1) {
    r1 = 0;
    r0 -= 1;
  } else {
    r1 = (rp - r0) / alpha;
  }
  return {r1, r0};
}

inline int32_t high_bits(const ParamSet& ps, int64_t r) {
  return decompose(ps, r).r1;
}

inline int32_t low_bits(const ParamSet& ps, int64_t r) {
  return decompose(ps, r).r0;
}

// r = r1 * 2^13 + r0 with r0 centered in (-2^12, 2^12].
inline std::pair<int32_t, int32_t> power2round(int64_t r) {
  int32_t rp = freeze(r);
  int32_t r0 = rp & ((1 << D_ROUND) - 1);
  if (r0 > (1 << (D_ROUND - 1))) r0 -= 1 << D_ROUND;
  return {(rp - r0) >> D_ROUND, r0};
}

// h = 1 iff adding z changes the high part of r.
inline bool make_hint(const ParamSet& ps, int64_t z, int64_t r) {
  return high_bits(ps, r) != high_bits(ps, r + z);
}

inline int32_t use_hint(const ParamSet& ps, bool h, int64_t r) {
  int32_t m = ps.stripes();
  Decomposed d = decompose(ps, r);
  if (!h) return d.r1;
  if (d.r0 > 0) return (d.r1 + 1) % m;
  return (d.r1 - 1 + m) % m;
}

struct DecomposedPoly {
  Poly r1;
  Poly r0;
};

inline DecomposedPoly decompose_poly(const ParamSet& ps, const Poly& p) {
  DecomposedPoly d;
  for (int i = 0; i < N_COEFFS; ++i) {
    Decomposed x = decompose(ps, p[i]);
    d.r1[i] = x.r1;
    d.r0[i] = x.r0;
  }
  return d;
}

struct DecomposedVec {
  PolyVec r1;
  PolyVec r0;
};

inline DecomposedVec decompose_vec(const ParamSet& ps, const PolyVec& v) {
  DecomposedVec d;
  d.r1.reserve(v.size());
  d.r0.reserve(v.size());
  for (const Poly& p : v) {
    DecomposedPoly x = decompose_poly(ps, p);
    d.r1.push_back(x.r1);
    d.r0.push_back(x.r0);
  }
  return d;
}

inline PolyVec high_bits_vec(const ParamSet& ps, const PolyVec& v) {
  return decompose_vec(ps, v).r1;
}

inline PolyVec use_hint_vec(const ParamSet& ps, const PolyVec& h,
                            const PolyVec& r) {
  PolyVec w1(r.size());
  for (size_t i = 0; i < r.size(); ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      w1[i][j] = use_hint(ps, h[i][j] != 0, r[i][j]);
  return w1;
}

inline int hint_weight(const PolyVec& h) {
  int w = 0;
  for (const Poly& p : h)
    for (int i = 0; i < N_COEFFS; ++i) w += (p[i] != 0);
  return w;
}

}  // namespace talus
