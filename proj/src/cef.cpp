#include "talus/cef.hpp"

#include <stdexcept>

#include "talus/ntt.hpp"

namespace talus {

int64_t inv_alpha(const ParamSet& ps) {
  if (16 * int64_t(ps.alpha()) + 1 != Q)
    throw std::domain_error("inv_alpha needs 16*alpha + 1 = q");
  // alpha * (q - 16) = alpha*q - 16*alpha = alpha*q - (q - 1) = 1 mod q.
  return Q - 16;
}

namespace {

struct LagrangeSums {
  int64_t w1_sum;
  int64_t r0_sum;
};

LagrangeSums lagrange_sums(const std::vector<DecomposedShare>& shares,
                           const std::vector<int64_t>& lambda) {
  LagrangeSums s{0, 0};
  for (size_t i = 0; i < shares.size(); ++i) {
    s.w1_sum += lambda[i] * shares[i].w1;
    s.r0_sum += lambda[i] * shares[i].r0;
  }
  return s;
}

}  // namespace

int32_t lagrange_cef(const ParamSet& ps, const std::vector<DecomposedShare>& shares,
                     const std::vector<int64_t>& lambda) {
  LagrangeSums s = lagrange_sums(shares, lambda);
  // alpha*W1 + R = sum lambda_i * (alpha*w1_i + r0_i) = sum lambda_i w_i mod q.
  int64_t w = freeze((int64_t(ps.alpha()) % Q) * (s.w1_sum % Q) % Q + s.r0_sum % Q);
  return high_bits(ps, w);
}

NaiveCarry naive_carry(const ParamSet& ps, const std::vector<DecomposedShare>& shares,
                       const std::vector<int64_t>& lambda) {
  LagrangeSums s = lagrange_sums(shares, lambda);
  int64_t alpha = ps.alpha();
  int64_t num = s.r0_sum + ps.gamma2 - 1;
  int64_t carry = num >= 0 ? num / alpha : -((-num + alpha - 1) / alpha);
  int64_t m = ps.stripes();
  int32_t w1 = int32_t((((s.w1_sum + carry) % m) + m) % m);
  return {carry, w1};
}

MaskSet gen_masks(const ParamSet& ps, const std::vector<std::vector<Seed32>>& keys,
                  uint64_t tau, int count) {
  int n = int(keys.size());
  int64_t m = ps.stripes();
  int64_t rho_bound = ps.alpha() / n;
  MaskSet out;
  out.mask_h.assign(size_t(n), std::vector<int32_t>(size_t(count), 0));
  out.rho.assign(size_t(n), std::vector<int64_t>(size_t(count), 0));

  // Antisymmetric pairwise high-part masks: the stream value is added by
  // the lower id and subtracted by the higher, so the party sum vanishes
  // mod m at every coefficient.
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      PrfStream p(keys[size_t(a)][size_t(b)]);
      p.add("maskH").add(tau);
      for (int c = 0; c < count; ++c) {
        int32_t r = int32_t(p.squeeze_u64() % uint64_t(m));
        out.mask_h[size_t(a)][size_t(c)] =
            int32_t((out.mask_h[size_t(a)][size_t(c)] + r) % m);
        out.mask_h[size_t(b)][size_t(c)] =
            int32_t(((out.mask_h[size_t(b)][size_t(c)] - r) % m + m) % m);
      }
    }
  }

  // Low-part blinds: each party hashes the XOR of its pairwise streams, so
  // no single counterparty knows the blind (N >= 3).
  for (int i = 0; i < n; ++i) {
    Seed32 x{};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      int a = i < j ? i : j;
      int b = i < j ? j : i;
      PrfStream p(keys[size_t(a)][size_t(b)]);
      p.add("rho").add(tau).add(uint64_t(i));
      Seed32 s = p.squeeze_seed();
      for (size_t k = 0; k < x.size(); ++k) x[k] ^= s[k];
    }
    PrfStream draw(x);
    draw.add("rho-draw").add(tau);
    for (int c = 0; c < count; ++c)
      out.rho[size_t(i)][size_t(c)] = int64_t(draw.squeeze_u64() % uint64_t(rho_bound));
  }
  return out;
}

MaskRow gen_mask_row(const ParamSet& ps, int n, int me,
                     const std::vector<Seed32>& key_row, uint64_t tau,
                     int count) {
  if (me < 0 || me >= n) throw std::invalid_argument("party index out of range");
  if (int(key_row.size()) != n)
    throw std::invalid_argument("key row has the wrong size");
  int64_t m = ps.stripes();
  int64_t rho_bound = ps.alpha() / n;
  MaskRow out;
  out.mask_h.assign(size_t(count), 0);
  out.rho.assign(size_t(count), 0);

  // Same pairwise streams as gen_masks, restricted to the pairs touching
  // `me`: added when me is the lower index, subtracted otherwise.
  for (int j = 0; j < n; ++j) {
    if (j == me) continue;
    PrfStream p(key_row[size_t(j)]);
    p.add("maskH").add(tau);
    int sign = me < j ? 1 : -1;
    for (int c = 0; c < count; ++c) {
      int32_t r = int32_t(p.squeeze_u64() % uint64_t(m));
      out.mask_h[size_t(c)] =
          int32_t(((out.mask_h[size_t(c)] + sign * r) % m + m) % m);
    }
  }

  Seed32 x{};
  for (int j = 0; j < n; ++j) {
    if (j == me) continue;
    PrfStream p(key_row[size_t(j)]);
    p.add("rho").add(tau).add(uint64_t(me));
    Seed32 s = p.squeeze_seed();
    for (size_t k = 0; k < x.size(); ++k) x[k] ^= s[k];
  }
  PrfStream draw(x);
  draw.add("rho-draw").add(tau);
  for (int c = 0; c < count; ++c)
    out.rho[size_t(c)] = int64_t(draw.squeeze_u64() % uint64_t(rho_bound));
  return out;
}

MaskedCoeff mask_coeff(const ParamSet& ps, int32_t w_hat_coeff, int32_t mask_h,
                       int64_t rho, int n_parties) {
  (void)n_parties;
  int64_t alpha = ps.alpha();
  int64_t m = ps.stripes();
  int64_t v = freeze(w_hat_coeff);  // canonical [0, q)
  int64_t h = v / alpha;            // full integer high part
  int64_t b = v % alpha;
  int64_t wrap = (b + rho) / alpha;  // 0 or 1
  MaskedCoeff mc;
  mc.h_tilde = int32_t((h + mask_h + wrap) % m);
  mc.b_tilde = (b + rho) % alpha;
  return mc;
}

int64_t floor_recover(const ParamSet& ps, int64_t b_sum, int64_t rho_sum) {
  int64_t alpha = ps.alpha();
  int64_t t = b_sum % alpha;
  return b_sum / alpha - (rho_sum > t ? 1 : 0);
}

FipsDelta fips_delta(const ParamSet& ps, int64_t t, int64_t rho_sum) {
  int64_t alpha = ps.alpha();
  FipsDelta d;
  d.need_delta0 = t > ps.gamma2;
  d.need_delta1 = t < ps.gamma2;
  d.delta0 = d.need_delta0 ? (rho_sum <= t - ps.gamma2 - 1) : false;
  d.delta1 = d.need_delta1 ? (rho_sum <= t + alpha - ps.gamma2 - 1) : true;
  return d;
}

int32_t masked_w1(const ParamSet& ps, const std::vector<MaskedCoeff>& bcast,
                  int64_t rho_sum) {
  int64_t alpha = ps.alpha();
  int64_t m = ps.stripes();
  int64_t h_sum = 0, b_sum = 0;
  for (const MaskedCoeff& mc : bcast) {
    h_sum += mc.h_tilde;
    b_sum += mc.b_tilde;
  }
  int64_t t = b_sum % alpha;
  bool c = rho_sum > t;
  FipsDelta d = fips_delta(ps, t, rho_sum);
  bool delta = c ? d.delta1 : d.delta0;
  int64_t w1 = h_sum + b_sum / alpha - (c ? 1 : 0) + (delta ? 1 : 0);
  return int32_t(((w1 % m) + m) % m);
}

}  // namespace talus
