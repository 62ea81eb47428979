#pragma once

#include "talus/poly.hpp"
#include "talus/prf.hpp"
#include "talus/rounding.hpp"

namespace talus {

// Distance of every low-bits coefficient from the rounding boundary.
// A nonce is safe to sign with any challenge iff every budget exceeds beta.
struct BoundaryReport {
  bool pass = false;
  int32_t min_budget = 0;  // min over coefficients of gamma2 - |r0|
  int poly_index = -1;     // first failing coefficient, if any
  int coeff_index = -1;
};

// Check w (time domain) by decomposing each coefficient.
BoundaryReport bcc_check(const ParamSet& ps, const PolyVec& w);

// Check already-decomposed low bits.
BoundaryReport bcc_check_r0(const ParamSet& ps, const PolyVec& r0);

struct BccRateResult {
  uint64_t trials = 0;
  uint64_t accepted = 0;
  double rate() const { return trials ? double(accepted) / double(trials) : 0.0; }
};

// Monte Carlo acceptance rate of the boundary check over fresh nonces
// y ~ uniform [-gamma1+1, gamma1]^{n_l}, w = A*y.
BccRateResult bcc_rate(const ParamSet& ps, uint64_t trials, uint64_t seed);

// Hint recomputed from public data only: r = A*z - c*t1*2^d and the
// broadcast high bits w1. h_j = [high_bits(r_j) != w1_j].
PolyVec public_hint(const ParamSet& ps, const PolyVec& r, const PolyVec& w1);

}  // namespace talus
