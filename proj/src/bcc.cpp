#include "talus/bcc.hpp"

#include <atomic>

#include "talus/parallel.hpp"
#include "talus/sampling.hpp"

namespace talus {

BoundaryReport bcc_check_r0(const ParamSet& ps, const PolyVec& r0) {
  BoundaryReport rep;
  rep.min_budget = ps.gamma2;
  rep.pass = true;
  for (size_t i = 0; i < r0.size(); ++i) {
    for (int j = 0; j < N_COEFFS; ++j) {
      int32_t budget = ps.gamma2 - std::abs(r0[i][j]);
      if (budget < rep.min_budget) rep.min_budget = budget;
      if (budget <= ps.beta && rep.pass) {
        rep.pass = false;
        rep.poly_index = int(i);
        rep.coeff_index = j;
      }
    }
  }
  return rep;
}

BoundaryReport bcc_check(const ParamSet& ps, const PolyVec& w) {
  return bcc_check_r0(ps, decompose_vec(ps, w).r0);
}

BccRateResult bcc_rate(const ParamSet& ps, uint64_t trials, uint64_t seed) {
  XofRng root(seed);
  std::atomic<uint64_t> accepted{0};
  const int shards = 64;
  XofRng setup = root.fork("matrix");
  std::vector<uint8_t> rho(32);
  setup.bytes(rho.data(), rho.size());
  NttMatrix a_hat = expand_a(ps, rho);

  run_sharded(shards, [&](int s) {
    XofRng rng = root.fork(uint64_t(s));
    uint64_t lo = trials * uint64_t(s) / shards;
    uint64_t hi = trials * uint64_t(s + 1) / shards;
    uint64_t local = 0;
    for (uint64_t t = lo; t < hi; ++t) {
      PolyVec y = sample_vec_range(rng, ps.l, -ps.gamma1 + 1, ps.gamma1);
      PolyVec w = matvec(a_hat, y);
      if (bcc_check(ps, w).pass) ++local;
    }
    accepted += local;
  });
  return {trials, accepted.load()};
}

PolyVec public_hint(const ParamSet& ps, const PolyVec& r, const PolyVec& w1) {
  PolyVec h(r.size());
  for (size_t i = 0; i < r.size(); ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      h[i][j] = high_bits(ps, r[i][j]) != w1[i][j] ? 1 : 0;
  return h;
}

}  // namespace talus
