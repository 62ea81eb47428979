#include "talus/mldsa.hpp"

#include <cstring>

#include "talus/keccak.hpp"

namespace talus {

namespace {

Bytes hash_concat(std::initializer_list<const Bytes*> parts, size_t outlen) {
  Shake sh(Shake::SHAKE256);
  for (const Bytes* p : parts) sh.absorb(*p);
  return sh.squeeze(outlen);
}

}  // namespace

KeyPair keygen(const ParamSet& ps, const Seed32& xi) {
  Shake sh(Shake::SHAKE256);
  sh.absorb(xi.data(), xi.size());
  sh.absorb_byte(uint8_t(ps.k));
  sh.absorb_byte(uint8_t(ps.l));
  Bytes expanded = sh.squeeze(128);
  Bytes rho(expanded.begin(), expanded.begin() + 32);
  Bytes rho_prime(expanded.begin() + 32, expanded.begin() + 96);
  Bytes key(expanded.begin() + 96, expanded.end());

  NttMatrix a_hat = expand_a(ps, rho);
  PolyVec s1, s2;
  expand_s(ps, rho_prime, s1, s2);

  PolyVec t = vec_add(matvec(a_hat, s1), s2);
  PolyVec t1(size_t(ps.k)), t0(size_t(ps.k));
  for (int i = 0; i < ps.k; ++i)
    for (int j = 0; j < N_COEFFS; ++j) {
      auto [hi, lo] = power2round(t[size_t(i)][j]);
      t1[size_t(i)][j] = hi;
      t0[size_t(i)][j] = lo;
    }

  KeyPair kp;
  kp.pk.ps = &ps;
  kp.pk.rho = rho;
  kp.pk.t1 = t1;
  kp.pk.raw = pk_encode(ps, rho, t1);
  kp.pk.tr = hash_concat({&kp.pk.raw}, 64);

  kp.sk.ps = &ps;
  kp.sk.rho = rho;
  kp.sk.key = key;
  kp.sk.tr = kp.pk.tr;
  kp.sk.s1 = s1;
  kp.sk.s2 = s2;
  kp.sk.t0 = t0;
  kp.sk.raw = sk_encode(kp.sk);
  return kp;
}

Bytes pk_encode(const ParamSet& ps, const Bytes& rho, const PolyVec& t1) {
  BitWriter w;
  w.put_bytes(rho);
  for (int i = 0; i < ps.k; ++i) simple_pack(w, t1[size_t(i)], 10);
  return w.take();
}

std::optional<PublicKey> pk_decode(const ParamSet& ps, const Bytes& raw) {
  if (raw.size() != ps.pk_bytes()) return std::nullopt;
  PublicKey pk;
  pk.ps = &ps;
  pk.rho.assign(raw.begin(), raw.begin() + 32);
  BitReader r(raw.data() + 32, raw.size() - 32);
  pk.t1.resize(size_t(ps.k));
  for (int i = 0; i < ps.k; ++i) pk.t1[size_t(i)] = simple_unpack(r, 10);
  pk.raw = raw;
  pk.tr = hash_concat({&pk.raw}, 64);
  return pk;
}

Bytes sk_encode(const SecretKey& sk) {
  const ParamSet& ps = *sk.ps;
  BitWriter w;
  w.put_bytes(sk.rho);
  w.put_bytes(sk.key);
  w.put_bytes(sk.tr);
  for (int i = 0; i < ps.l; ++i)
    range_pack(w, sk.s1[size_t(i)], ps.eta, ps.eta_bits());
  for (int i = 0; i < ps.k; ++i)
    range_pack(w, sk.s2[size_t(i)], ps.eta, ps.eta_bits());
  for (int i = 0; i < ps.k; ++i)
    range_pack(w, sk.t0[size_t(i)], 1 << (D_ROUND - 1), 13);
  return w.take();
}

std::optional<SecretKey> sk_decode(const ParamSet& ps, const Bytes& raw) {
  if (raw.size() != ps.sk_bytes()) return std::nullopt;
  SecretKey sk;
  sk.ps = &ps;
  sk.rho.assign(raw.begin(), raw.begin() + 32);
  sk.key.assign(raw.begin() + 32, raw.begin() + 64);
  sk.tr.assign(raw.begin() + 64, raw.begin() + 128);
  BitReader r(raw.data() + 128, raw.size() - 128);
  sk.s1.resize(size_t(ps.l));
  sk.s2.resize(size_t(ps.k));
  sk.t0.resize(size_t(ps.k));
  for (int i = 0; i < ps.l; ++i)
    sk.s1[size_t(i)] = range_unpack(r, ps.eta, ps.eta_bits());
  for (int i = 0; i < ps.k; ++i)
    sk.s2[size_t(i)] = range_unpack(r, ps.eta, ps.eta_bits());
  for (int i = 0; i < ps.k; ++i)
    sk.t0[size_t(i)] = range_unpack(r, 1 << (D_ROUND - 1), 13);
  sk.raw = raw;
  return sk;
}

Bytes w1_encode(const ParamSet& ps, const PolyVec& w1) {
  BitWriter w;
  for (int i = 0; i < ps.k; ++i) simple_pack(w, w1[size_t(i)], ps.w1_bits());
  return w.take();
}

namespace {

Bytes hint_pack(const ParamSet& ps, const PolyVec& h) {
  Bytes out(size_t(ps.omega + ps.k), 0);
  int idx = 0;
  for (int i = 0; i < ps.k; ++i) {
    for (int j = 0; j < N_COEFFS; ++j)
      if (h[size_t(i)][j] != 0) out[size_t(idx++)] = uint8_t(j);
    out[size_t(ps.omega + i)] = uint8_t(idx);
  }
  return out;
}

std::optional<PolyVec> hint_unpack(const ParamSet& ps, const uint8_t* y) {
  PolyVec h(size_t(ps.k));
  int idx = 0;
  for (int i = 0; i < ps.k; ++i) {
    int end = y[ps.omega + i];
    if (end < idx || end > ps.omega) return std::nullopt;
    int first = idx;
    while (idx < end) {
      if (idx > first && y[idx] <= y[idx - 1]) return std::nullopt;
      h[size_t(i)][y[idx]] = 1;
      ++idx;
    }
  }
  for (int j = idx; j < ps.omega; ++j)
    if (y[j] != 0) return std::nullopt;
  return h;
}

}  // namespace

Bytes sig_encode(const ParamSet& ps, const Signature& sig) {
  BitWriter w;
  w.put_bytes(sig.c_tilde);
  for (int i = 0; i < ps.l; ++i)
    range_pack(w, sig.z[size_t(i)], ps.gamma1, ps.z_bits());
  Bytes out = w.take();
  Bytes hints = hint_pack(ps, sig.h);
  out.insert(out.end(), hints.begin(), hints.end());
  return out;
}

std::optional<Signature> sig_decode(const ParamSet& ps, const Bytes& raw) {
  if (raw.size() != ps.sig_bytes()) return std::nullopt;
  Signature sig;
  size_t ct = size_t(ps.ctilde_bytes());
  sig.c_tilde.assign(raw.begin(), raw.begin() + long(ct));
  BitReader r(raw.data() + ct, size_t(ps.l) * 32 * size_t(ps.z_bits()));
  sig.z.resize(size_t(ps.l));
  for (int i = 0; i < ps.l; ++i)
    sig.z[size_t(i)] = range_unpack(r, ps.gamma1, ps.z_bits());
  auto h = hint_unpack(ps, raw.data() + ct + size_t(ps.l) * 32 * size_t(ps.z_bits()));
  if (!h) return std::nullopt;
  sig.h = *h;
  return sig;
}

Bytes message_digest(const Bytes& tr, const Bytes& msg) {
  Shake sh(Shake::SHAKE256);
  sh.absorb(tr);
  sh.absorb_byte(0);  // pure (non-prehashed) mode
  sh.absorb_byte(0);  // empty context string
  sh.absorb(msg);
  return sh.squeeze(64);
}

Bytes challenge_hash(const ParamSet& ps, const Bytes& mu, const PolyVec& w1) {
  Bytes enc = w1_encode(ps, w1);
  Shake sh(Shake::SHAKE256);
  sh.absorb(mu);
  sh.absorb(enc);
  return sh.squeeze(size_t(ps.ctilde_bytes()));
}

Signature sign_single(const SecretKey& sk, const Bytes& msg) {
  const ParamSet& ps = *sk.ps;
  NttMatrix a_hat = expand_a(ps, sk.rho);
  PolyVec s1_hat = vec_ntt(sk.s1);
  PolyVec s2_hat = vec_ntt(sk.s2);
  PolyVec t0_hat = vec_ntt(sk.t0);

  Bytes mu = message_digest(sk.tr, msg);
  Bytes rnd(32, 0);
  Shake sh(Shake::SHAKE256);
  sh.absorb(sk.key);
  sh.absorb(rnd);
  sh.absorb(mu);
  Bytes rho2 = sh.squeeze(64);

  for (uint16_t kappa = 0;; kappa = uint16_t(kappa + ps.l)) {
    PolyVec y = expand_mask(ps, rho2, kappa);
    PolyVec y_hat = vec_ntt(y);
    PolyVec w = matvec_ntt(a_hat, y_hat);
    DecomposedVec dw = decompose_vec(ps, w);

    Bytes c_tilde = challenge_hash(ps, mu, dw.r1);
    Poly c = sample_in_ball(ps, c_tilde);
    Poly c_hat = c;
    ntt(c_hat);

    auto mul_c = [&](const PolyVec& v_hat) {
      PolyVec r(v_hat.size());
      for (size_t i = 0; i < v_hat.size(); ++i) {
        Poly t = pointwise(c_hat, v_hat[i]);
        invntt(t);
        r[i] = t;
      }
      return r;
    };

    PolyVec z = vec_add(y, mul_c(s1_hat));
    if (vec_inf_norm(z) >= ps.gamma1 - ps.beta) continue;

    PolyVec cs2 = mul_c(s2_hat);
    PolyVec w_minus_cs2 = vec_sub(w, cs2);
    PolyVec r0(size_t(ps.k));
    bool r0_ok = true;
    for (int i = 0; i < ps.k && r0_ok; ++i)
      for (int j = 0; j < N_COEFFS; ++j) {
        r0[size_t(i)][j] = low_bits(ps, w_minus_cs2[size_t(i)][j]);
        if (std::abs(r0[size_t(i)][j]) >= ps.gamma2 - ps.beta) {
          r0_ok = false;
          break;
        }
      }
    if (!r0_ok) continue;

    PolyVec ct0 = mul_c(t0_hat);
    if (vec_inf_norm(ct0) >= ps.gamma2) continue;

    PolyVec h(size_t(ps.k));
    int weight = 0;
    for (int i = 0; i < ps.k; ++i)
      for (int j = 0; j < N_COEFFS; ++j) {
        bool hint = make_hint(ps, -int64_t(ct0[size_t(i)][j]),
                              int64_t(w_minus_cs2[size_t(i)][j]) +
                                  ct0[size_t(i)][j]);
        h[size_t(i)][j] = hint ? 1 : 0;
        weight += hint;
      }
    if (weight > ps.omega) continue;

    return Signature{c_tilde, z, h};
  }
}

PolyVec public_w_approx(const PublicKey& pk, const NttMatrix& a_hat,
                        const Poly& c, const PolyVec& z) {
  const ParamSet& ps = *pk.ps;
  PolyVec az = matvec(a_hat, z);
  Poly c_hat = c;
  ntt(c_hat);
  PolyVec r(size_t(ps.k));
  for (int i = 0; i < ps.k; ++i) {
    Poly t1_shifted = pk.t1[size_t(i)];
    for (int j = 0; j < N_COEFFS; ++j)
      t1_shifted[j] = freeze(int64_t(t1_shifted[j]) << D_ROUND);
    ntt(t1_shifted);
    Poly ct1 = pointwise(c_hat, t1_shifted);
    invntt(ct1);
    r[size_t(i)] = poly_sub(az[size_t(i)], ct1);
  }
  return r;
}

bool verify(const PublicKey& pk, const Bytes& msg, const Signature& sig) {
  const ParamSet& ps = *pk.ps;
  if (vec_inf_norm(sig.z) >= ps.gamma1 - ps.beta) return false;
  if (hint_weight(sig.h) > ps.omega) return false;
  NttMatrix a_hat = expand_a(ps, pk.rho);
  Poly c = sample_in_ball(ps, sig.c_tilde);
  PolyVec w_approx = public_w_approx(pk, a_hat, c, sig.z);
  PolyVec w1 = use_hint_vec(ps, sig.h, w_approx);
  Bytes mu = message_digest(pk.tr, msg);
  return challenge_hash(ps, mu, w1) == sig.c_tilde;
}

bool verify_bytes(const ParamSet& ps, const Bytes& pk_raw, const Bytes& msg,
                  const Bytes& sig_raw) {
  auto pk = pk_decode(ps, pk_raw);
  if (!pk) return false;
  auto sig = sig_decode(ps, sig_raw);
  if (!sig) return false;
  return verify(*pk, msg, *sig);
}

}  // namespace talus
