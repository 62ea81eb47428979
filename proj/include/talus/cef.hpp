#pragma once

#include <vector>

#include "talus/poly.hpp"
#include "talus/prf.hpp"
#include "talus/rounding.hpp"

namespace talus {

// Multiplicative inverse of alpha mod q. Only defined when 16*alpha + 1 = q
// (the 16-stripe parameter sets); throws otherwise.
int64_t inv_alpha(const ParamSet& ps);

// One party's decomposed share of a single w coefficient.
struct DecomposedShare {
  int32_t w1;  // high part in [0, stripes)
  int32_t r0;  // low part, centered
};

// Exact reconstruction of high_bits(sum lambda_i * w_i mod q) from the
// parties' decomposed shares: w1 = high_bits(alpha*W1 + R mod q) with
// W1 = sum lambda_i w1_i and R = sum lambda_i r0_i over the integers.
int32_t lagrange_cef(const ParamSet& ps, const std::vector<DecomposedShare>& shares,
                     const std::vector<int64_t>& lambda);

// The naive single-pass carry estimate: C = floor((R + gamma2 - 1)/alpha)
// and w1_naive = (W1 + C) mod stripes. Wrong whenever the mod-q wrap of
// alpha*W1 + R shifts the stripe; kept for the statistics it produces.
struct NaiveCarry {
  int64_t carry;
  int32_t w1_naive;
};
NaiveCarry naive_carry(const ParamSet& ps, const std::vector<DecomposedShare>& shares,
                       const std::vector<int64_t>& lambda);

// ---- Additive masked broadcast (the N-of-N path) ----

// Pairwise mask material for one session. mask_h[i][c] is party i's
// additive high-part mask mod stripes at coefficient c (antisymmetric
// pairwise sums, so they cancel across parties); rho[i][c] is party i's
// low-part blind in [0, floor(alpha/N)).
struct MaskSet {
  std::vector<std::vector<int32_t>> mask_h;
  std::vector<std::vector<int64_t>> rho;
};

// Derive masks deterministically from the pairwise session keys, one PRF
// stream per pair covering all `count` coefficients.
// keys[i][j] = keys[j][i] is the key shared by parties i and j (i != j).
MaskSet gen_masks(const ParamSet& ps, const std::vector<std::vector<Seed32>>& keys,
                  uint64_t tau, int count);

// Party-local view of gen_masks: the mask and blind row of position `me`
// among n parties, derived from its own key row alone. Matches row `me` of
// the full MaskSet, which is what lets a blame reveal of one key row
// recompute exactly that party's broadcast.
struct MaskRow {
  std::vector<int32_t> mask_h;
  std::vector<int64_t> rho;
};
MaskRow gen_mask_row(const ParamSet& ps, int n, int me,
                     const std::vector<Seed32>& key_row, uint64_t tau,
                     int count);

// What party i broadcasts for one coefficient. The wire form keeps b_tilde
// reduced mod alpha and folds the wrap bit of b + rho into the masked high
// part, so the pair always packs into log2(stripes) + 19 bits and the
// reconstruction algebra is unchanged.
struct MaskedCoeff {
  int32_t h_tilde;  // (H + mask + wrap) mod stripes
  int64_t b_tilde;  // (b + rho) mod alpha
};

MaskedCoeff mask_coeff(const ParamSet& ps, int32_t w_hat_coeff, int32_t mask_h,
                       int64_t rho, int n_parties);

// Carry-bit recovery: with B = sum of b_tilde and t = B mod alpha,
// floor(sum b / alpha) = floor(B/alpha) - [rho_sum > t] (wrap bits live in
// the masked high parts). Returns the floor given the public B and the
// plaintext rho sum; the MPC path computes the bracket obliviously.
int64_t floor_recover(const ParamSet& ps, int64_t b_sum, int64_t rho_sum);

// The boundary indicator pair used when reassembling high bits:
// delta0 = [rho_sum <= t - gamma2 - 1], delta1 = [rho_sum <= t + alpha - gamma2 - 1],
// delta = c ? delta1 : delta0. Shortcut flags tell which circuit is live:
// t <= gamma2 forces delta0 = 0 and t >= gamma2 forces delta1 = 1.
struct FipsDelta {
  bool delta0;
  bool delta1;
  bool need_delta0;  // only when t > gamma2
  bool need_delta1;  // only when t < gamma2
};
FipsDelta fips_delta(const ParamSet& ps, int64_t t, int64_t rho_sum);

// Full plaintext reassembly of one coefficient from broadcasts: returns
// (sum h_tilde + floor(B/alpha) - c + delta) mod stripes. The (c, delta)
// bits come from the plaintext comparisons; the MPC engine substitutes its
// oblivious versions of the same bits.
int32_t masked_w1(const ParamSet& ps, const std::vector<MaskedCoeff>& bcast,
                  int64_t rho_sum);

}  // namespace talus
