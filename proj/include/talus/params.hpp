#pragma once

#include <cstdint>
#include <stdexcept>

namespace talus {

inline constexpr int32_t Q = 8380417;      // 2^23 - 2^13 + 1
inline constexpr int N_COEFFS = 256;
inline constexpr int D_ROUND = 13;         // dropped bits in t -> (t1, t0)
inline constexpr int32_t ZETA = 1753;      // 512th root of unity mod Q

// One ML-DSA parameter set plus the derived quantities the threshold
// protocols need. Sizes follow the standard serialization formats.
struct ParamSet {
  int level;        // 44, 65, 87
  int k;            // rows of A / length of t, s2, w
  int l;            // cols of A / length of s1, y, z
  int32_t eta;      // secret key coefficient bound
  int tau;          // challenge weight
  int32_t beta;     // tau * eta
  int32_t gamma1;   // nonce range bound
  int32_t gamma2;   // low-bits rounding range
  int omega;        // max hint weight
  int lambda;       // collision strength (c_tilde has lambda/4 bytes)

  constexpr int32_t alpha() const { return 2 * gamma2; }
  // Number of high-bits stripes: (q-1) / alpha. 16 for 65/87, 44 for 44.
  constexpr int32_t stripes() const { return (Q - 1) / (2 * gamma2); }
  constexpr int n_k() const { return k * N_COEFFS; }
  constexpr int n_l() const { return l * N_COEFFS; }

  constexpr int z_bits() const { return gamma1 == (1 << 17) ? 18 : 20; }
  constexpr int w1_bits() const { return stripes() == 16 ? 4 : 6; }
  constexpr int eta_bits() const { return eta == 2 ? 3 : 4; }
  constexpr int ctilde_bytes() const { return lambda / 4; }

  constexpr size_t pk_bytes() const { return 32 + size_t(k) * 320; }
  constexpr size_t sk_bytes() const {
    return 128 + size_t(l + k) * 32 * eta_bits() + size_t(k) * 416;
  }
  constexpr size_t sig_bytes() const {
    return size_t(ctilde_bytes()) + size_t(l) * 32 * z_bits() + omega + k;
  }
};

inline constexpr ParamSet PARAMS_44{44, 4, 4, 2, 39, 78,
                                    1 << 17, (Q - 1) / 88, 80, 128};
inline constexpr ParamSet PARAMS_65{65, 6, 5, 4, 49, 196,
                                    1 << 19, (Q - 1) / 32, 55, 192};
inline constexpr ParamSet PARAMS_87{87, 8, 7, 2, 60, 120,
                                    1 << 19, (Q - 1) / 32, 75, 256};

inline const ParamSet& params_for_level(int level) {
  switch (level) {
    case 44: return PARAMS_44;
    case 65: return PARAMS_65;
    case 87: return PARAMS_87;
    default: throw std::invalid_argument("unknown ML-DSA level");
  }
}

}  // namespace talus
