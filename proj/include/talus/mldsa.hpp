#pragma once

#include <optional>
#include <string>
#include <vector>

#include "talus/encoding.hpp"
#include "talus/ntt.hpp"
#include "talus/params.hpp"
#include "talus/poly.hpp"
#include "talus/prf.hpp"
#include "talus/rounding.hpp"
#include "talus/sampling.hpp"

namespace talus {

using Bytes = std::vector<uint8_t>;

struct PublicKey {
  const ParamSet* ps = nullptr;
  Bytes rho;    // 32 bytes, seed of A
  PolyVec t1;   // k polys, coefficients in [0, 1024)
  Bytes raw;    // encoded form
  Bytes tr;     // H(raw, 64)
};

struct SecretKey {
  const ParamSet* ps = nullptr;
  Bytes rho;
  Bytes key;    // 32 bytes, signing PRF key
  Bytes tr;     // 64 bytes
  PolyVec s1;   // l polys, coefficients in [-eta, eta]
  PolyVec s2;   // k polys
  PolyVec t0;   // k polys, coefficients in (-2^12, 2^12]
  Bytes raw;
};

struct Signature {
  Bytes c_tilde;  // lambda/4 bytes
  PolyVec z;      // l polys, centered
  PolyVec h;      // k polys of 0/1 hints
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

KeyPair keygen(const ParamSet& ps, const Seed32& xi);

Bytes pk_encode(const ParamSet& ps, const Bytes& rho, const PolyVec& t1);
std::optional<PublicKey> pk_decode(const ParamSet& ps, const Bytes& raw);
Bytes sk_encode(const SecretKey& sk);
std::optional<SecretKey> sk_decode(const ParamSet& ps, const Bytes& raw);

Bytes w1_encode(const ParamSet& ps, const PolyVec& w1);
Bytes sig_encode(const ParamSet& ps, const Signature& sig);
std::optional<Signature> sig_decode(const ParamSet& ps, const Bytes& raw);

// mu = H(tr || 0x00 || 0x00 || msg, 64): the pure-mode message digest with
// an empty context string.
Bytes message_digest(const Bytes& tr, const Bytes& msg);

// c_tilde = H(mu || w1Encode(w1), lambda/4).
Bytes challenge_hash(const ParamSet& ps, const Bytes& mu, const PolyVec& w1);

// Deterministic single-signer signing (hedge bytes fixed to zero).
Signature sign_single(const SecretKey& sk, const Bytes& msg);

bool verify(const PublicKey& pk, const Bytes& msg, const Signature& sig);
bool verify_bytes(const ParamSet& ps, const Bytes& pk_raw, const Bytes& msg,
                  const Bytes& sig_raw);

// w_approx = A*z - c*t1*2^d, the public quantity the verifier rounds.
PolyVec public_w_approx(const PublicKey& pk, const NttMatrix& a_hat,
                        const Poly& c, const PolyVec& z);

inline Bytes to_bytes(const std::string& s) {
  return Bytes(s.begin(), s.end());
}

}  // namespace talus
