#pragma once

// Reference implementations used only as test oracles. Each one is written
// from the defining equation of the operation it checks, independently of
// the production code path.

#include <cstdint>
#include <vector>

#include "talus/poly.hpp"

namespace oracle {

// Product in Z_q[X]/(X^256+1) by direct convolution.
inline talus::Poly schoolbook_negacyclic(const talus::Poly& a,
                                         const talus::Poly& b) {
  using namespace talus;
  std::vector<int64_t> acc(2 * N_COEFFS, 0);
  for (int i = 0; i < N_COEFFS; ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      acc[size_t(i + j)] = (acc[size_t(i + j)] + int64_t(a[i]) * b[j]) % Q;
  Poly r;
  for (int i = 0; i < N_COEFFS; ++i)
    r[i] = center(acc[size_t(i)] - acc[size_t(i + N_COEFFS)]);
  return r;
}

// Centered remainder by exhaustive definition: the unique value congruent
// to x mod m inside (-m/2, m/2].
inline int64_t centered_mod(int64_t x, int64_t m) {
  int64_t r = x % m;
  if (r < 0) r += m;
  if (r > m / 2) r -= m;
  return r;
}

// High/low split checked through its defining properties rather than the
// production formula: r == r1*alpha + r0 (mod q), r1 in [0, (q-1)/alpha),
// r0 in [-gamma2 - 1, gamma2].
struct SplitProps {
  bool congruent;
  bool r1_in_range;
  bool r0_in_range;
  bool ok() const { return congruent && r1_in_range && r0_in_range; }
};

inline SplitProps check_split(const talus::ParamSet& ps, int64_t r,
                              int32_t r1, int32_t r0) {
  using namespace talus;
  int64_t alpha = ps.alpha();
  SplitProps p;
  p.congruent = freeze(r) == freeze(int64_t(r1) * alpha + r0);
  p.r1_in_range = r1 >= 0 && r1 < ps.stripes();
  p.r0_in_range = r0 >= -ps.gamma2 - 1 && r0 <= ps.gamma2;
  return p;
}

// Degree-(t-1) polynomial evaluation over Z_q by Horner, for checking
// share/reconstruct against the textbook definition.
inline int64_t horner_eval(const std::vector<int64_t>& coeffs, int64_t x) {
  using namespace talus;
  int64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    acc = (acc * x + *it) % Q;
  return ((acc % Q) + Q) % Q;
}

// Exact pmf of a sum of n iid uniform variables on [lo, hi], by direct
// convolution. Index 0 of the result corresponds to the sum n*lo.
inline std::vector<double> sum_uniform_pmf(int n, int64_t lo, int64_t hi) {
  size_t w = size_t(hi - lo + 1);
  std::vector<double> pmf(w, 1.0 / double(w));
  std::vector<double> acc = pmf;
  for (int step = 1; step < n; ++step) {
    std::vector<double> next(acc.size() + w - 1, 0.0);
    for (size_t i = 0; i < acc.size(); ++i)
      for (size_t j = 0; j < w; ++j) next[i + j] += acc[i] * pmf[j];
    acc = std::move(next);
  }
  return acc;
}

}  // namespace oracle
