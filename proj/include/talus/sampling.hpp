#pragma once

#include <cstdint>
#include <vector>

#include "talus/ntt.hpp"
#include "talus/poly.hpp"
#include "talus/prf.hpp"

namespace talus {

// A[r][s] sampled directly in NTT domain from SHAKE128(rho || s || r).
NttMatrix expand_a(const ParamSet& ps, const std::vector<uint8_t>& rho);

// (s1, s2) with coefficients in [-eta, eta] from SHAKE256(rho_prime || idx).
void expand_s(const ParamSet& ps, const std::vector<uint8_t>& rho_prime,
              PolyVec& s1, PolyVec& s2);

// y with coefficients in [-gamma1+1, gamma1] from SHAKE256(rho2 || mu+r).
PolyVec expand_mask(const ParamSet& ps, const std::vector<uint8_t>& rho2,
                    uint16_t kappa);

// Sparse ternary challenge with tau nonzero coefficients.
Poly sample_in_ball(const ParamSet& ps, const std::vector<uint8_t>& c_tilde);

// Uniform coefficient in [lo, hi] per position, from an explicit rng.
Poly sample_poly_range(XofRng& rng, int32_t lo, int32_t hi);
PolyVec sample_vec_range(XofRng& rng, int n, int32_t lo, int32_t hi);

// Uniform in Z_q (centered representatives).
Poly sample_poly_zq(XofRng& rng);
PolyVec sample_vec_zq(XofRng& rng, int n);

}  // namespace talus
