#include "doctest.h"

#include "talus/keccak.hpp"
#include "talus/mldsa.hpp"

#include "oracles.hpp"

using namespace talus;

TEST_CASE("shake256 matches a known vector") {
  // SHAKE256(""), first 32 bytes.
  std::vector<uint8_t> got = shake256(nullptr, 0, 32);
  const uint8_t want[32] = {0x46, 0xb9, 0xdd, 0x2b, 0x0b, 0xa8, 0x8d, 0x13,
                            0x23, 0x3b, 0x3f, 0xeb, 0x74, 0x3e, 0xeb, 0x24,
                            0x3f, 0xcd, 0x52, 0xea, 0x62, 0xb8, 0x1b, 0x82,
                            0xb5, 0x0c, 0x27, 0x64, 0x6e, 0xd5, 0x76, 0x2f};
  for (int i = 0; i < 32; ++i) CHECK(got[size_t(i)] == want[i]);
}

TEST_CASE("ntt_mul agrees with schoolbook negacyclic convolution") {
  XofRng rng(7001);
  for (int trial = 0; trial < 20; ++trial) {
    Poly a = sample_poly_zq(rng);
    Poly b = sample_poly_zq(rng);
    Poly fast = ntt_mul(a, b);
    Poly slow = oracle::schoolbook_negacyclic(a, b);
    REQUIRE(poly_center(fast) == slow);
  }
}

TEST_CASE("ntt round trip is the identity") {
  XofRng rng(7002);
  Poly a = sample_poly_zq(rng);
  Poly b = a;
  ntt(b);
  invntt(b);
  CHECK(poly_center(b) == poly_center(a));
}

TEST_CASE("decompose satisfies its defining properties at every level") {
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    XofRng rng(7100 + ps->level);
    // Boundary grid around every stripe edge plus the q-1 wrap.
    std::vector<int64_t> values;
    for (int32_t s = 0; s <= ps->stripes(); ++s)
      for (int64_t d = -3; d <= 3; ++d)
        values.push_back(int64_t(s) * ps->alpha() + ps->gamma2 + d);
    for (int64_t d = -4; d <= 0; ++d) values.push_back(Q - 1 + d);
    for (int i = 0; i < 5000; ++i) values.push_back(int64_t(rng.below(Q)));

    for (int64_t v : values) {
      Decomposed d = decompose(*ps, v);
      auto props = oracle::check_split(*ps, v, d.r1, d.r0);
      REQUIRE(props.ok());
      // Only the q-1 wrap may push r0 below -gamma2 + 1.
      if (freeze(v) != Q - 1) REQUIRE(std::abs(d.r0) <= ps->gamma2);
    }
  }
}

TEST_CASE("use_hint recovers the shifted high bits") {
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    XofRng rng(7200 + ps->level);
    for (int i = 0; i < 20000; ++i) {
      int64_t r = int64_t(rng.below(Q));
      int64_t z = rng.range(-ps->gamma2, ps->gamma2);
      bool h = make_hint(*ps, z, r);
      int32_t w1 = use_hint(*ps, h, r);
      REQUIRE(w1 == high_bits(*ps, freeze(r + z)));
    }
  }
}

TEST_CASE("high_bits equals the stripe formula away from the wrap") {
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    XofRng rng(7300 + ps->level);
    for (int i = 0; i < 20000; ++i) {
      int32_t r = int32_t(rng.below(Q));
      int32_t expect;
      if (r == Q - 1) {
        expect = 0;
      } else {
        expect = int32_t(((r / ps->alpha()) + (r % ps->alpha() > ps->gamma2)) %
                         ps->stripes());
      }
      REQUIRE(high_bits(*ps, r) == expect);
    }
  }
}

TEST_CASE("keygen shapes and power2round ranges") {
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    Seed32 xi{};
    xi[0] = uint8_t(ps->level);
    KeyPair kp = keygen(*ps, xi);
    CHECK(kp.pk.raw.size() == ps->pk_bytes());
    CHECK(kp.sk.raw.size() == ps->sk_bytes());
    CHECK(vec_inf_norm(kp.sk.s1) <= ps->eta);
    CHECK(vec_inf_norm(kp.sk.s2) <= ps->eta);
    CHECK(vec_inf_norm(kp.sk.t0) <= (1 << (D_ROUND - 1)));
    for (const Poly& p : kp.pk.t1)
      for (int i = 0; i < N_COEFFS; ++i) {
        CHECK(p[i] >= 0);
        CHECK(p[i] < 1024);
      }
    // t reconstructs from (t1, t0).
    NttMatrix a_hat = expand_a(*ps, kp.pk.rho);
    PolyVec t = vec_add(matvec(a_hat, kp.sk.s1), kp.sk.s2);
    for (int i = 0; i < ps->k; ++i)
      for (int j = 0; j < N_COEFFS; ++j)
        CHECK(freeze(t[size_t(i)][j]) ==
              freeze((int64_t(kp.pk.t1[size_t(i)][j]) << D_ROUND) +
                     kp.sk.t0[size_t(i)][j]));
  }
}

TEST_CASE("key encode/decode round trips") {
  Seed32 xi{};
  xi[1] = 0x5a;
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    KeyPair kp = keygen(*ps, xi);
    auto pk = pk_decode(*ps, kp.pk.raw);
    REQUIRE(pk.has_value());
    CHECK(pk->rho == kp.pk.rho);
    CHECK(pk->t1 == kp.pk.t1);
    auto sk = sk_decode(*ps, kp.sk.raw);
    REQUIRE(sk.has_value());
    CHECK(sk->s1 == kp.sk.s1);
    CHECK(sk->s2 == kp.sk.s2);
    CHECK(sk->t0 == kp.sk.t0);
    CHECK(sk->tr == kp.sk.tr);
  }
}

TEST_CASE("sign_single produces verifying signatures at every level") {
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    Seed32 xi{};
    xi[2] = uint8_t(ps->level + 1);
    KeyPair kp = keygen(*ps, xi);
    Bytes msg = to_bytes("unit test message");
    Signature sig = sign_single(kp.sk, msg);
    Bytes raw = sig_encode(*ps, sig);
    CHECK(raw.size() == ps->sig_bytes());
    CHECK(verify(kp.pk, msg, sig));
    CHECK(verify_bytes(*ps, kp.pk.raw, msg, raw));
    // Any tamper must fail.
    Bytes bad = raw;
    bad[bad.size() / 2] ^= 1;
    CHECK_FALSE(verify_bytes(*ps, kp.pk.raw, msg, bad));
    Bytes msg2 = to_bytes("unit test message!");
    CHECK_FALSE(verify_bytes(*ps, kp.pk.raw, msg2, raw));
  }
}

TEST_CASE("signature decode rejects malformed hints") {
  const ParamSet& ps = PARAMS_65;
  Seed32 xi{};
  xi[3] = 9;
  KeyPair kp = keygen(ps, xi);
  Bytes msg = to_bytes("hint canon");
  Signature sig = sign_single(kp.sk, msg);
  Bytes raw = sig_encode(ps, sig);

  // Nonzero padding after the last hint index.
  Bytes bad = raw;
  size_t hint_off = raw.size() - size_t(ps.omega + ps.k);
  int used = hint_weight(sig.h);
  REQUIRE(used < ps.omega);
  bad[hint_off + size_t(ps.omega) - 1] = 7;
  CHECK_FALSE(sig_decode(ps, bad).has_value());

  // Cumulative counts must be nondecreasing.
  Bytes bad2 = raw;
  bad2[hint_off + size_t(ps.omega)] = uint8_t(ps.omega);
  bad2[hint_off + size_t(ps.omega) + 1] = 0;
  CHECK_FALSE(sig_decode(ps, bad2).has_value());

  auto round_trip = sig_decode(ps, raw);
  REQUIRE(round_trip.has_value());
  CHECK(hint_weight(round_trip->h) == used);
}

TEST_CASE("sample_in_ball has tau nonzero +-1 coefficients") {
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    XofRng rng(7400 + ps->level);
    Bytes c_tilde(size_t(ps->ctilde_bytes()));
    rng.bytes(c_tilde.data(), c_tilde.size());
    Poly c = sample_in_ball(*ps, c_tilde);
    int nonzero = 0;
    for (int i = 0; i < N_COEFFS; ++i) {
      if (c[i] != 0) {
        ++nonzero;
        CHECK((c[i] == 1 || c[i] == -1));
      }
    }
    CHECK(nonzero == ps->tau);
  }
}

TEST_CASE("expand_mask stays inside the nonce range") {
  const ParamSet& ps = PARAMS_65;
  Bytes rho2(64, 0x33);
  PolyVec y = expand_mask(ps, rho2, 0);
  REQUIRE(y.size() == size_t(ps.l));
  for (const Poly& p : y)
    for (int i = 0; i < N_COEFFS; ++i) {
      CHECK(p[i] >= -ps.gamma1 + 1);
      CHECK(p[i] <= ps.gamma1);
    }
}
