#include "talus/shamir.hpp"

#include <stdexcept>

#include "talus/ntt.hpp"

namespace talus {

PolyVec VecPolynomial::eval(int x) const {
  PolyVec acc = vec_zero(int(coeffs[0].size()));
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = vec_scale(x, acc);
    acc = vec_add(acc, *it);
  }
  return acc;
}

std::vector<int64_t> lagrange_coeffs(const std::vector<int>& ids) {
  std::vector<int64_t> lambda(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    int64_t num = 1, den = 1;
    for (size_t j = 0; j < ids.size(); ++j) {
      if (j == i) continue;
      num = num * ids[j] % Q;
      den = den * ((ids[j] - ids[i]) % Q + Q) % Q;
    }
    lambda[i] = center(num * modpow(den, Q - 2, Q) % Q);
  }
  return lambda;
}

std::vector<Share> share_secret(XofRng& rng, const PolyVec& secret, int t,
                                int n) {
  if (t < 1 || n < t) throw std::invalid_argument("bad threshold");
  VecPolynomial f;
  f.coeffs.push_back(secret);
  for (int k = 1; k < t; ++k)
    f.coeffs.push_back(sample_vec_zq(rng, int(secret.size())));
  std::vector<Share> shares;
  shares.reserve(size_t(n));
  for (int i = 1; i <= n; ++i) shares.push_back({i, f.eval(i)});
  return shares;
}

PolyVec reconstruct(const std::vector<Share>& shares) {
  std::vector<int> ids;
  ids.reserve(shares.size());
  for (const Share& s : shares) ids.push_back(s.id);
  std::vector<int64_t> lambda = lagrange_coeffs(ids);
  PolyVec acc = vec_zero(int(shares[0].value.size()));
  for (size_t i = 0; i < shares.size(); ++i)
    acc = vec_add(acc, vec_scale(lambda[i], shares[i].value));
  return acc;
}

VecPolynomial sample_nonce_poly(XofRng& rng, int dim, int t, int32_t bound) {
  VecPolynomial f;
  f.coeffs.push_back(sample_vec_range(rng, dim, -bound + 1, bound));
  for (int k = 1; k < t; ++k)
    f.coeffs.push_back(sample_vec_zq(rng, dim));
  return f;
}

VecPolynomial sample_zero_poly(XofRng& rng, int dim, int t) {
  VecPolynomial f;
  f.coeffs.push_back(vec_zero(dim));
  for (int k = 1; k < t; ++k)
    f.coeffs.push_back(sample_vec_zq(rng, dim));
  return f;
}

NonceDkg nonce_dkg(XofRng& rng, int dim, const std::vector<int>& ids, int t,
                   int32_t bound) {
  NonceDkg d;
  d.ids = ids;
  int s = int(ids.size());
  d.polys.reserve(size_t(s));
  d.shares.resize(size_t(s));
  for (int h = 0; h < s; ++h) {
    d.polys.push_back(sample_nonce_poly(rng, dim, t, bound));
    d.shares[size_t(h)].reserve(size_t(s));
    for (int i : ids) d.shares[size_t(h)].push_back(d.polys[size_t(h)].eval(i));
  }
  return d;
}

}  // namespace talus
