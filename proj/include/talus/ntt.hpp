#pragma once

#include "talus/poly.hpp"

namespace talus {

// In-place negacyclic NTT; input any representatives, output in [0, q).
void ntt(Poly& a);
// In-place inverse NTT; output centered.
void invntt(Poly& a);

// Coefficient-wise product of two NTT-domain polys, output in [0, q).
Poly pointwise(const Poly& a, const Poly& b);

// Product in Z_q[X]/(X^256+1) via the NTT; inputs/outputs time domain.
Poly ntt_mul(const Poly& a, const Poly& b);

// Matrix A is stored row-major as k vectors of l NTT-domain polys.
using NttMatrix = std::vector<PolyVec>;

// w = A * y for time-domain y; result time domain (centered).
PolyVec matvec(const NttMatrix& a_hat, const PolyVec& y);

// Same but y is already in NTT domain.
PolyVec matvec_ntt(const NttMatrix& a_hat, const PolyVec& y_hat);

inline PolyVec vec_ntt(PolyVec v) {
  for (Poly& p : v) ntt(p);
  return v;
}

inline PolyVec vec_invntt(PolyVec v) {
  for (Poly& p : v) invntt(p);
  return v;
}

// c * v for a sparse challenge c; both time domain.
PolyVec challenge_times_vec(const Poly& c, const PolyVec& v);

int64_t modpow(int64_t base, int64_t exp, int64_t mod);

}  // namespace talus
