#pragma once

#include <vector>

#include "talus/poly.hpp"
#include "talus/prf.hpp"
#include "talus/sampling.hpp"

namespace talus {

struct Share {
  int id = 0;  // evaluation point, 1-based
  PolyVec value;
};

// Vector polynomial F(x) = sum_k coeffs[k] * x^k over Z_q, used both for
// secret sharing (constant = secret) and nonce generation (constant
// bounded, higher coefficients uniform).
struct VecPolynomial {
  std::vector<PolyVec> coeffs;  // coeffs[k] is the degree-k coefficient

  int degree() const { return int(coeffs.size()) - 1; }
  PolyVec eval(int x) const;
  const PolyVec& constant() const { return coeffs[0]; }
};

// Centered Lagrange multipliers at zero for the given evaluation points:
// reconstruct F(0) = sum_i lambda_i * F(ids[i]) mod q.
std::vector<int64_t> lagrange_coeffs(const std::vector<int>& ids);

// Degree-(t-1) sharing of `secret` for parties 1..n.
std::vector<Share> share_secret(XofRng& rng, const PolyVec& secret, int t,
                                int n);

PolyVec reconstruct(const std::vector<Share>& shares);

// Random degree-(t-1) vector polynomial of `dim` polys whose constant term
// has coefficients uniform in [-bound+1, bound]; higher coefficients are
// uniform over Z_q.
VecPolynomial sample_nonce_poly(XofRng& rng, int dim, int t, int32_t bound);

// Same but with the constant term identically zero (share refresh).
VecPolynomial sample_zero_poly(XofRng& rng, int dim, int t);

// One degree-(t-1) nonce polynomial per party plus the full share matrix
// shares[h][i] = g_h(ids[i]); the aggregate share for party i is
// sum_h shares[h][i]. Any t of the ids reconstruct the aggregate constant.
struct NonceDkg {
  std::vector<VecPolynomial> polys;            // per dealer
  std::vector<std::vector<PolyVec>> shares;    // [dealer][recipient]
  std::vector<int> ids;
};

NonceDkg nonce_dkg(XofRng& rng, int dim, const std::vector<int>& ids, int t,
                   int32_t bound);

}  // namespace talus
