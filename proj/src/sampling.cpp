#include "talus/sampling.hpp"

namespace talus {

NttMatrix expand_a(const ParamSet& ps, const std::vector<uint8_t>& rho) {
  NttMatrix a(size_t(ps.k), PolyVec(size_t(ps.l)));
  for (int r = 0; r < ps.k; ++r) {
    for (int s = 0; s < ps.l; ++s) {
      Shake sh(Shake::SHAKE128);
      sh.absorb(rho);
      sh.absorb_byte(uint8_t(s));
      sh.absorb_byte(uint8_t(r));
      Poly& p = a[size_t(r)][size_t(s)];
      int i = 0;
      while (i < N_COEFFS) {
        uint8_t b[3];
        sh.squeeze(b, 3);
        int32_t z = b[0] | (int32_t(b[1]) << 8) | (int32_t(b[2] & 0x7f) << 16);
        if (z < Q) p[i++] = z;
      }
    }
  }
  return a;
}

namespace {

Poly rej_bounded_poly(int32_t eta, const std::vector<uint8_t>& rho_prime,
                      uint16_t idx) {
  Shake sh(Shake::SHAKE256);
  sh.absorb(rho_prime);
  sh.absorb_byte(uint8_t(idx & 0xff));
  sh.absorb_byte(uint8_t(idx >> 8));
  Poly p;
  int i = 0;
  while (i < N_COEFFS) {
    uint8_t b = sh.squeeze_byte();
    for (int32_t z : {int32_t(b & 0xf), int32_t(b >> 4)}) {
      if (i >= N_COEFFS) break;
      if (eta == 2) {
        if (z < 15) p[i++] = 2 - z % 5;
      } else {
        if (z < 9) p[i++] = 4 - z;
      }
    }
  }
  return p;
}

}  // namespace

void expand_s(const ParamSet& ps, const std::vector<uint8_t>& rho_prime,
              PolyVec& s1, PolyVec& s2) {
  s1.resize(size_t(ps.l));
  s2.resize(size_t(ps.k));
  for (int r = 0; r < ps.l; ++r)
    s1[size_t(r)] = rej_bounded_poly(ps.eta, rho_prime, uint16_t(r));
  for (int r = 0; r < ps.k; ++r)
    s2[size_t(r)] = rej_bounded_poly(ps.eta, rho_prime, uint16_t(ps.l + r));
}

PolyVec expand_mask(const ParamSet& ps, const std::vector<uint8_t>& rho2,
                    uint16_t kappa) {
  int c = ps.z_bits();
  PolyVec y(size_t(ps.l));
  for (int r = 0; r < ps.l; ++r) {
    Shake sh(Shake::SHAKE256);
    sh.absorb(rho2);
    uint16_t idx = uint16_t(kappa + r);
    sh.absorb_byte(uint8_t(idx & 0xff));
    sh.absorb_byte(uint8_t(idx >> 8));
    std::vector<uint8_t> buf = sh.squeeze(size_t(32 * c));
    uint64_t acc = 0;
    int bits = 0;
    size_t pos = 0;
    for (int i = 0; i < N_COEFFS; ++i) {
      while (bits < c) {
        acc |= uint64_t(buf[pos++]) << bits;
        bits += 8;
      }
      int32_t raw = int32_t(acc & ((1u << c) - 1));
      acc >>= c;
      bits -= c;
      y[size_t(r)][i] = ps.gamma1 - raw;
    }
  }
  return y;
}

Poly sample_in_ball(const ParamSet& ps, const std::vector<uint8_t>& c_tilde) {
  Shake sh(Shake::SHAKE256);
  sh.absorb(c_tilde);
  uint8_t signs[8];
  sh.squeeze(signs, 8);
  uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s |= uint64_t(signs[i]) << (8 * i);
  Poly c{};
  for (int i = N_COEFFS - ps.tau; i < N_COEFFS; ++i) {
    uint8_t j;
    do {
      j = sh.squeeze_byte();
    } while (j > i);
    c[i] = c[j];
    c[j] = (s & 1) ? -1 : 1;
    s >>= 1;
  }
  return c;
}

Poly sample_poly_range(XofRng& rng, int32_t lo, int32_t hi) {
  Poly p;
  for (int i = 0; i < N_COEFFS; ++i) p[i] = int32_t(rng.range(lo, hi));
  return p;
}

PolyVec sample_vec_range(XofRng& rng, int n, int32_t lo, int32_t hi) {
  PolyVec v(static_cast<size_t>(n));
  for (Poly& p : v) p = sample_poly_range(rng, lo, hi);
  return v;
}

Poly sample_poly_zq(XofRng& rng) {
  Poly p;
  for (int i = 0; i < N_COEFFS; ++i) p[i] = center(int64_t(rng.below(Q)));
  return p;
}

PolyVec sample_vec_zq(XofRng& rng, int n) {
  PolyVec v(static_cast<size_t>(n));
  for (Poly& p : v) p = sample_poly_zq(rng);
  return v;
}

}  // namespace talus
