#include "talus/ntt.hpp"

namespace talus {

int64_t modpow(int64_t base, int64_t exp, int64_t mod) {
  int64_t r = 1 % mod;
  base %= mod;
  if (base < 0) base += mod;
  while (exp > 0) {
    if (exp & 1) r = r * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return r;
}

namespace {

struct ZetaTable {
  int32_t z[256];
  int32_t inv256;
  ZetaTable() {
    auto brv8 = [](int x) {
      int r = 0;
      for (int i = 0; i < 8; ++i) r |= ((x >> i) & 1) << (7 - i);
      return r;
    };
    for (int i = 0; i < 256; ++i) z[i] = int32_t(modpow(ZETA, brv8(i), Q));
    inv256 = int32_t(modpow(256, Q - 2, Q));
  }
};

const ZetaTable& zt() {
  static const ZetaTable t;
  return t;
}

inline int32_t mulmod(int64_t a, int64_t b) { return int32_t(a * b % Q); }

}  // namespace

void ntt(Poly& a) {
  for (int i = 0; i < N_COEFFS; ++i) a[i] = freeze(a[i]);
  int k = 0;
  for (int len = 128; len >= 1; len >>= 1) {
    for (int start = 0; start < N_COEFFS; start += 2 * len) {
      int32_t zeta = zt().z[++k];
      for (int j = start; j < start + len; ++j) {
        int32_t t = mulmod(zeta, a[j + len]);
        int32_t u = a[j];
        a[j + len] = u - t < 0 ? u - t + Q : u - t;
        a[j] = u + t >= Q ? u + t - Q : u + t;
      }
    }
  }
}

void invntt(Poly& a) {
  int k = 256;
  for (int len = 1; len <= 128; len <<= 1) {
    for (int start = 0; start < N_COEFFS; start += 2 * len) {
      int32_t zeta = zt().z[--k];
      for (int j = start; j < start + len; ++j) {
        int32_t t = a[j];
        int32_t s = t + a[j + len];
        a[j] = s >= Q ? s - Q : s;
        int32_t d = t - a[j + len];
        if (d < 0) d += Q;
        // Inverse butterflies multiply by -zeta^{-1}; folding the sign in
        // here and scaling by 256^{-1} at the end matches the forward map.
        a[j + len] = mulmod(Q - zeta, d);
      }
    }
  }
  for (int i = 0; i < N_COEFFS; ++i) a[i] = center(int64_t(zt().inv256) * a[i]);
}

Poly pointwise(const Poly& a, const Poly& b) {
  Poly r;
  for (int i = 0; i < N_COEFFS; ++i) r[i] = mulmod(freeze(a[i]), freeze(b[i]));
  return r;
}

Poly ntt_mul(const Poly& a, const Poly& b) {
  Poly ah = a, bh = b;
  ntt(ah);
  ntt(bh);
  Poly r = pointwise(ah, bh);
  invntt(r);
  return r;
}

PolyVec matvec(const NttMatrix& a_hat, const PolyVec& y) {
  return matvec_ntt(a_hat, vec_ntt(y));
}

PolyVec matvec_ntt(const NttMatrix& a_hat, const PolyVec& y_hat) {
  PolyVec w(a_hat.size());
  for (size_t r = 0; r < a_hat.size(); ++r) {
    Poly acc{};
    for (size_t c = 0; c < y_hat.size(); ++c) {
      Poly t = pointwise(a_hat[r][c], y_hat[c]);
      for (int i = 0; i < N_COEFFS; ++i) {
        acc[i] += t[i];
        if (acc[i] >= Q) acc[i] -= Q;
      }
    }
    invntt(acc);
    w[r] = acc;
  }
  return w;
}

PolyVec challenge_times_vec(const Poly& c, const PolyVec& v) {
  Poly ch = c;
  ntt(ch);
  PolyVec r(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    Poly t = v[i];
    ntt(t);
    t = pointwise(ch, t);
    invntt(t);
    r[i] = t;
  }
  return r;
}

}  // namespace talus
