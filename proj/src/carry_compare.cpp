#include "talus/carry_compare.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string_view>
#include <tuple>

namespace talus::cscp {

namespace {

constexpr int kWordBits = 19;
constexpr uint32_t kWordMask = (1u << kWordBits) - 1;

// ---------------------------------------------------------------------------
// Boolean polynomials in algebraic normal form over at most 12 variables.
// Coefficients live in a bitset indexed by monomial subsets; bit V is the
// coefficient of prod_{k in V} x_k.
// ---------------------------------------------------------------------------

struct SubsetVec {
  int m = 0;
  std::vector<uint64_t> w;

  explicit SubsetVec(int vars = 0) : m(vars), w(words_for(vars), 0) {}
  static size_t words_for(int vars) {
    return vars <= 6 ? 1 : (size_t(1) << (vars - 6));
  }
  size_t size_bits() const { return size_t(1) << m; }

  bool get(uint32_t v) const { return (w[v >> 6] >> (v & 63)) & 1; }
  void flip(uint32_t v) { w[v >> 6] ^= uint64_t(1) << (v & 63); }
  void set(uint32_t v) { w[v >> 6] |= uint64_t(1) << (v & 63); }

  SubsetVec& operator^=(const SubsetVec& o) {
    for (size_t i = 0; i < w.size(); ++i) w[i] ^= o.w[i];
    return *this;
  }

  std::vector<uint32_t> monomials() const {
    std::vector<uint32_t> out;
    for (uint32_t v = 0; v < size_bits(); ++v)
      if (get(v)) out.push_back(v);
    return out;
  }
};

SubsetVec anf_const(int m, bool one) {
  SubsetVec p(m);
  if (one) p.set(0);
  return p;
}

SubsetVec anf_var(int m, int k) {
  SubsetVec p(m);
  p.set(1u << k);
  return p;
}

SubsetVec anf_and(const SubsetVec& a, const SubsetVec& b) {
  SubsetVec out(a.m);
  auto ma = a.monomials();
  auto mb = b.monomials();
  for (uint32_t va : ma)
    for (uint32_t vb : mb) out.flip(va | vb);
  return out;
}

SubsetVec anf_xor(const SubsetVec& a, const SubsetVec& b) {
  SubsetVec out = a;
  out ^= b;
  return out;
}

// Intra-word fold masks: bit positions whose index lacks bit k (k < 6).
constexpr uint64_t kFold[6] = {
    0x5555555555555555ull, 0x3333333333333333ull, 0x0f0f0f0f0f0f0f0full,
    0x00ff00ff00ff00ffull, 0x0000ffff0000ffffull, 0x00000000ffffffffull};

// In-place shift of the polynomial basis by the public opening: after the
// transform, bit V holds sum_{M >= V} f[M] * prod_{k in M\V} D_k, which is
// the coefficient of the mask monomial a^V in f(D xor a).
void d_transform(SubsetVec& p, uint32_t d_bits) {
  for (int k = 0; k < p.m; ++k) {
    if (!((d_bits >> k) & 1)) continue;
    if (k < 6) {
      int s = 1 << k;
      for (auto& word : p.w) word ^= (word >> s) & kFold[k];
    } else {
      size_t stride = size_t(1) << (k - 6);
      for (size_t base = 0; base < p.w.size(); base += 2 * stride)
        for (size_t i = 0; i < stride; ++i)
          p.w[base + i] ^= p.w[base + stride + i];
    }
  }
}

bool parity_and(const SubsetVec& p, const std::vector<uint64_t>& prods) {
  uint64_t acc = 0;
  for (size_t i = 0; i < p.w.size(); ++i) acc ^= p.w[i] & prods[i];
  return __builtin_parityll(acc);
}

// ---------------------------------------------------------------------------
// Circuit plan. The structure is identical for every coefficient; only the
// prefix-phase polynomials and the live delta slots depend on the public
// threshold. Slot numbering is fixed so PRF indices never move.
// ---------------------------------------------------------------------------

struct BitRef {
  int word;
  int bit;
};

struct VarRef {
  int open_slot;
  int bit;
};

struct OpenSpec {
  int slot;
  int round;
  int width;
  // src[b] = registry bits XORed into output bit b.
  std::vector<std::vector<BitRef>> src;
  int threshold_slot = -1;  // >= 0 for the three prefix-output openings
};

struct BitDef {
  int round;
  BitRef out;
  std::vector<BitRef> affine;
  int gadget_slot = -1;
  int tag = 0;
  std::vector<VarRef> vars;
  SubsetVec poly;
};

struct GadgetShape {
  int n_vars;
  int tag;
};

struct PrefixGroup {
  int hi, lo, n0;  // bit span and the neighbour position feeding the shifted
                   // majority term; n0 == lo means no neighbour (group 0)
  int key_bits() const { return hi - n0 + 1; }
  int n_vars() const { return 2 * (hi - n0 + 1); }
};

// Indexed bottom-up so group g matches the cascade cell names G_g / P_g.
constexpr PrefixGroup kGroups[4] = {
    {4, 0, 0}, {9, 5, 4}, {14, 10, 9}, {18, 15, 14}};

struct StaticPlan {
  int n = 0;
  int levels = 0;
  int registry_words = 0;
  std::vector<std::vector<int>> level_word_ids;  // [level] -> live word ids
  int s_word = 0, c_word = 0;                    // final carry-save pair
  std::vector<OpenSpec> opens;                   // CSA + B1 + B2 slots
  std::vector<BitDef> csa_bits;
  std::vector<GadgetShape> gadget_shapes;        // by slot
  std::vector<std::vector<VarRef>> gvars;        // window variables by slot
  int prefix_gadget_base = 0;                    // 4 window slots
  int cascade_gadget_base = 0;                   // 3 threshold slots
  int b1_s_slot = 0, b1_c_slot = 0;
  int b2_open_base = 0;   // open slots for the three threshold outputs
  int gp_cell_base = 0;   // registry cells: 7 per threshold slot
  int out_cell_base = 0;  // registry cells: c, delta0, delta1 share bits
  int b1_round = 0, b2_round = 0;
};

// Window variable order inside one prefix group: S then C per position,
// positions ascending from n0.
int group_var(const PrefixGroup& g, int pos, bool c_word) {
  return 2 * (pos - g.n0) + (c_word ? 1 : 0);
}

// Order of the masked prefix outputs inside the final opening and of the
// registry cells: G3 P3 G2 P2 G1 P1 G0.
constexpr int kGpCells = 7;

StaticPlan build_static_plan(int n) {
  if (n < 3) throw std::invalid_argument("prefix circuit needs n >= 3");
  StaticPlan plan;
  plan.n = n;

  std::vector<int> words(n);
  for (int i = 0; i < n; ++i) words[i] = i;
  int next_word = n;
  int next_open = 0;
  int next_gadget = 0;
  plan.level_word_ids.push_back(words);

  auto new_open = [&](int round, int width) {
    OpenSpec o;
    o.slot = next_open++;
    o.round = round;
    o.width = width;
    o.src.resize(width);
    plan.opens.push_back(std::move(o));
    return plan.opens.back().slot;
  };
  auto new_gadget = [&](int vars, int tag) {
    plan.gadget_shapes.push_back({vars, tag});
    return next_gadget++;
  };

  SubsetVec and2 = anf_and(anf_var(2, 0), anf_var(2, 1));
  // Nonlinear part of maj(w, x, y): (w^x)(x^y) over raw bits.
  SubsetVec maj_nl =
      anf_and(anf_xor(anf_var(3, 0), anf_var(3, 1)),
              anf_xor(anf_var(3, 1), anf_var(3, 2)));

  int round = 0;
  while (int(words.size()) > 2) {
    ++round;
    std::vector<int> next;
    size_t idx = 0;
    while (words.size() - idx >= 4) {
      int w = words[idx], x = words[idx + 1], y = words[idx + 2],
          z = words[idx + 3];
      idx += 4;
      // Flattened 4:2 compressor: s2 = w^x^y^z ^ (maj(w,x,y) << 1),
      // c2 = maj(w^x^y, z, maj(w,x,y) << 1) << 1. All four input words are
      // opened masked so both stages evaluate in this single round.
      int ow = new_open(round, kWordBits);
      int ox = new_open(round, kWordBits);
      int oy = new_open(round, kWordBits);
      int oz = new_open(round, kWordBits);
      for (int b = 0; b < kWordBits; ++b) {
        plan.opens[ow].src[b] = {{w, b}};
        plan.opens[ox].src[b] = {{x, b}};
        plan.opens[oy].src[b] = {{y, b}};
        plan.opens[oz].src[b] = {{z, b}};
      }
      int s2 = next_word++, c2 = next_word++;
      next.push_back(s2);
      next.push_back(c2);
      for (int b = 0; b < kWordBits; ++b) {
        BitDef sd;
        sd.round = round;
        sd.out = {s2, b};
        sd.affine = {{w, b}, {x, b}, {y, b}, {z, b}};
        if (b >= 1) {
          sd.affine.push_back({x, b - 1});
          sd.gadget_slot = new_gadget(3, 2);
          sd.tag = 2;
          sd.vars = {{ow, b - 1}, {ox, b - 1}, {oy, b - 1}};
          sd.poly = maj_nl;
        }
        plan.csa_bits.push_back(std::move(sd));
        if (b >= 1) {
          // maj(s1, z, c1) at position b-1 written to bit b, expressed as
          // z ^ (s1^z)(z^c1) with s1, c1 expanded over the opened inputs.
          BitDef cd;
          cd.round = round;
          cd.out = {c2, b};
          cd.affine = {{z, b - 1}};
          cd.tag = 3;
          if (b >= 2) {
            cd.gadget_slot = new_gadget(7, 3);
            cd.vars = {{ow, b - 1}, {ox, b - 1}, {oy, b - 1}, {oz, b - 1},
                       {ow, b - 2}, {ox, b - 2}, {oy, b - 2}};
            SubsetVec lin = anf_xor(anf_xor(anf_var(7, 0), anf_var(7, 1)),
                                    anf_xor(anf_var(7, 2), anf_var(7, 3)));
            SubsetVec c1 = anf_xor(
                anf_var(7, 5),
                anf_and(anf_xor(anf_var(7, 4), anf_var(7, 5)),
                        anf_xor(anf_var(7, 5), anf_var(7, 6))));
            cd.poly = anf_and(lin, anf_xor(anf_var(7, 3), c1));
          } else {
            cd.gadget_slot = new_gadget(4, 3);
            cd.vars = {{ow, 0}, {ox, 0}, {oy, 0}, {oz, 0}};
            SubsetVec lin = anf_xor(anf_xor(anf_var(4, 0), anf_var(4, 1)),
                                    anf_xor(anf_var(4, 2), anf_var(4, 3)));
            cd.poly = anf_and(lin, anf_var(4, 3));
          }
          plan.csa_bits.push_back(std::move(cd));
        }
      }
    }
    if (words.size() - idx == 3) {
      int a = words[idx], b = words[idx + 1], c = words[idx + 2];
      idx += 3;
      // 3:2 compressor with the classic two openings per position:
      // maj(a,b,c) = b ^ (a^b)(b^c).
      int o1 = new_open(round, kWordBits);
      int o2 = new_open(round, kWordBits);
      for (int bb = 0; bb < kWordBits; ++bb) {
        plan.opens[o1].src[bb] = {{a, bb}, {b, bb}};
        plan.opens[o2].src[bb] = {{b, bb}, {c, bb}};
      }
      int s = next_word++, cv = next_word++;
      next.push_back(s);
      next.push_back(cv);
      for (int bb = 0; bb < kWordBits; ++bb) {
        BitDef sd;
        sd.round = round;
        sd.out = {s, bb};
        sd.affine = {{a, bb}, {b, bb}, {c, bb}};
        plan.csa_bits.push_back(std::move(sd));
        if (bb >= 1) {
          BitDef cd;
          cd.round = round;
          cd.out = {cv, bb};
          cd.affine = {{b, bb - 1}};
          cd.gadget_slot = new_gadget(2, 2);
          cd.tag = 2;
          cd.vars = {{o1, bb - 1}, {o2, bb - 1}};
          cd.poly = and2;
          plan.csa_bits.push_back(std::move(cd));
        }
      }
    }
    while (idx < words.size()) next.push_back(words[idx++]);
    words = next;
    plan.level_word_ids.push_back(words);
  }
  plan.levels = round;
  plan.s_word = words[0];
  plan.c_word = words[1];

  plan.b1_round = plan.levels + 1;
  plan.b2_round = plan.levels + 2;
  plan.b1_s_slot = new_open(plan.b1_round, kWordBits);
  plan.b1_c_slot = new_open(plan.b1_round, kWordBits);
  for (int b = 0; b < kWordBits; ++b) {
    plan.opens[plan.b1_s_slot].src[b] = {{plan.s_word, b}};
    plan.opens[plan.b1_c_slot].src[b] = {{plan.c_word, b}};
  }

  plan.gp_cell_base = next_word;
  next_word += 3 * kGpCells;
  plan.out_cell_base = next_word;
  next_word += 3;

  plan.prefix_gadget_base = next_gadget;
  for (int g = 0; g < 4; ++g) new_gadget(kGroups[g].n_vars(), 5);

  plan.b2_open_base = next_open;
  for (int th = 0; th < 3; ++th) {
    int slot = new_open(plan.b2_round, kGpCells);
    plan.opens[slot].threshold_slot = th;
    for (int b = 0; b < kGpCells; ++b)
      plan.opens[slot].src[b] = {{plan.gp_cell_base + th * kGpCells + b, 0}};
  }

  plan.cascade_gadget_base = next_gadget;
  for (int th = 0; th < 3; ++th) new_gadget(kGpCells, 3);

  plan.registry_words = next_word;
  return plan;
}

// Carry cascade over the opened group bits: c = G3 ^ P3 G2 ^ P3 P2 G1 ^
// P3 P2 P1 G0 (var order G3 P3 G2 P2 G1 P1 G0).
const SubsetVec& cascade_poly() {
  static const SubsetVec poly = [] {
    SubsetVec p(kGpCells);
    p.flip(1u << 0);
    p.flip((1u << 1) | (1u << 2));
    p.flip((1u << 1) | (1u << 3) | (1u << 4));
    p.flip((1u << 1) | (1u << 3) | (1u << 5) | (1u << 6));
    return p;
  }();
  return poly;
}

// Group generate/propagate polynomials over the masked (S, C) opening for
// one value of the public addend bits inside the window. The group-3
// generate also folds in the top majority bit so the cascade output is
// exactly bit 19 of S + C + thetabar.
struct PrefixPolys {
  SubsetVec g, p;
};

PrefixPolys build_prefix_polys(int group, uint32_t key) {
  const PrefixGroup& gr = kGroups[group];
  int m = gr.n_vars();
  auto tb = [&](int pos) { return (key >> (pos - gr.n0)) & 1; };

  auto u_poly = [&](int pos) {
    SubsetVec u = anf_xor(anf_var(m, group_var(gr, pos, false)),
                          anf_var(m, group_var(gr, pos, true)));
    if (tb(pos)) u ^= anf_const(m, true);
    return u;
  };
  auto v_poly = [&](int pos) {
    if (pos == 0) return anf_const(m, false);
    int s = group_var(gr, pos - 1, false), c = group_var(gr, pos - 1, true);
    SubsetVec v = anf_and(anf_var(m, s), anf_var(m, c));
    if (tb(pos - 1)) v ^= anf_xor(anf_var(m, s), anf_var(m, c));
    return v;
  };

  SubsetVec g_acc(m), p_acc(m);
  bool first = true;
  for (int pos = gr.hi; pos >= gr.lo; --pos) {
    SubsetVec u = u_poly(pos);
    SubsetVec v = v_poly(pos);
    SubsetVec gen = anf_and(u, v);
    SubsetVec prop = anf_xor(u, v);
    if (first) {
      g_acc = gen;
      p_acc = prop;
      first = false;
    } else {
      g_acc ^= anf_and(p_acc, gen);
      p_acc = anf_and(p_acc, prop);
    }
  }
  if (group == 3) {
    // Fold in the majority carry out of position 18. The cascade's terms
    // stay disjoint because the carry-save total is below 2^19, so plain
    // XOR reconstructs bit 19 of S + C + thetabar exactly.
    int s = group_var(gr, 18, false), c = group_var(gr, 18, true);
    SubsetVec v19 = anf_and(anf_var(m, s), anf_var(m, c));
    if (tb(18)) v19 ^= anf_xor(anf_var(m, s), anf_var(m, c));
    g_acc ^= v19;
  }
  return {std::move(g_acc), std::move(p_acc)};
}

struct PrefixMemo {
  // [group][key]; key = thetabar bits across the window span. Built eagerly
  // so concurrent sessions can share the table without locking.
  std::vector<PrefixPolys> cell[4];
  PrefixMemo() {
    for (int g = 0; g < 4; ++g) {
      size_t keys = size_t(1) << kGroups[g].key_bits();
      cell[g].reserve(keys);
      for (size_t k = 0; k < keys; ++k)
        cell[g].push_back(build_prefix_polys(g, uint32_t(k)));
    }
  }
  const PrefixPolys& get(int group, uint32_t key) const {
    return cell[group][key];
  }
};

const PrefixMemo& prefix_memo() {
  static const PrefixMemo memo;
  return memo;
}

uint32_t group_key(int group, uint32_t thetabar) {
  const PrefixGroup& gr = kGroups[group];
  return (thetabar >> gr.n0) & ((1u << gr.key_bits()) - 1);
}

// Registry cell order for the masked prefix outputs, matching the bit order
// of the final opened word: G3 P3 G2 P2 G1 P1 G0.
int gp_cell(int group, bool p_poly) {
  if (group == 0) return 6;
  return 2 * (3 - group) + (p_poly ? 1 : 0);
}

// Populate plan.gvars after the slot layout is known.
void fill_gadget_vars(StaticPlan& plan) {
  plan.gvars.assign(plan.gadget_shapes.size(), {});
  for (const BitDef& bd : plan.csa_bits)
    if (bd.gadget_slot >= 0) plan.gvars[bd.gadget_slot] = bd.vars;
  for (int g = 0; g < 4; ++g) {
    std::vector<VarRef> vars;
    for (int pos = kGroups[g].n0; pos <= kGroups[g].hi; ++pos) {
      vars.push_back({plan.b1_s_slot, pos});
      vars.push_back({plan.b1_c_slot, pos});
    }
    plan.gvars[plan.prefix_gadget_base + g] = std::move(vars);
  }
  for (int th = 0; th < 3; ++th) {
    std::vector<VarRef> vars;
    for (int b = 0; b < kGpCells; ++b)
      vars.push_back({plan.b2_open_base + th, b});
    plan.gvars[plan.cascade_gadget_base + th] = std::move(vars);
  }
}

const StaticPlan& plan_for(int n) {
  static std::map<int, StaticPlan>* cache = new std::map<int, StaticPlan>;
  static std::mutex* mu = new std::mutex;
  std::lock_guard<std::mutex> lock(*mu);
  auto it = cache->find(n);
  if (it == cache->end()) {
    StaticPlan plan = build_static_plan(n);
    fill_gadget_vars(plan);
    it = cache->emplace(n, std::move(plan)).first;
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// PRF-derived correlated randomness. Every value is index-keyed with a fresh
// stream, so a replay can regenerate any single value without walking a
// sequential stream. Party 0 of the session completes each sharing from its
// dealer view; the other parties expand only their own pairwise key with
// party 0.
// ---------------------------------------------------------------------------

uint32_t prf_word(const Seed32& key, std::string_view label, uint64_t tau,
                  uint64_t a, uint64_t b, int width) {
  PrfStream s(key);
  s.add(label).add(tau).add(a).add(b);
  uint8_t buf[4];
  s.squeeze(buf, 4);
  uint32_t v = uint32_t(buf[0]) | (uint32_t(buf[1]) << 8) |
               (uint32_t(buf[2]) << 16) | (uint32_t(buf[3]) << 24);
  return v & ((1u << width) - 1);
}

uint32_t prf_mod(const Seed32& key, std::string_view label, uint64_t tau,
                 uint64_t a, uint64_t b, uint32_t mod) {
  PrfStream s(key);
  s.add(label).add(tau).add(a).add(b);
  return uint32_t(s.squeeze_u64() % mod);
}

void clear_empty_and_singletons(std::vector<uint64_t>& w, int m) {
  auto clr = [&](uint32_t v) { w[v >> 6] &= ~(uint64_t(1) << (v & 63)); };
  clr(0);
  for (int k = 0; k < m; ++k) clr(1u << k);
}

std::vector<uint64_t> prf_products(const Seed32& key, uint64_t tau, int tag,
                                   uint64_t coeff, uint64_t gslot, int m) {
  PrfStream s(key);
  s.add("carry").add(uint64_t(tag)).add(tau).add(coeff).add(gslot);
  size_t nbits = size_t(1) << m;
  size_t nbytes = (nbits + 7) / 8;
  std::vector<uint8_t> buf(nbytes);
  s.squeeze(buf.data(), nbytes);
  std::vector<uint64_t> w(SubsetVec::words_for(m), 0);
  for (size_t i = 0; i < nbytes; ++i)
    w[i >> 3] |= uint64_t(buf[i]) << (8 * (i & 7));
  if (nbits < 64) w[0] &= (uint64_t(1) << nbits) - 1;
  clear_empty_and_singletons(w, m);
  return w;
}

// All subset products of the given mask bits (bit V = prod_{k in V} a_k,
// empty product = 1).
std::vector<uint64_t> true_products(uint32_t mask_bits, int m) {
  size_t nbits = size_t(1) << m;
  std::vector<uint64_t> w(SubsetVec::words_for(m), 0);
  std::vector<uint8_t> a(nbits, 0);
  a[0] = 1;
  w[0] |= 1;
  for (size_t v = 1; v < nbits; ++v) {
    int k = __builtin_ctz(unsigned(v));
    a[v] = uint8_t(a[v & (v - 1)] & ((mask_bits >> k) & 1));
    if (a[v]) w[v >> 6] |= uint64_t(1) << (v & 63);
  }
  return w;
}

uint32_t window_bits(const std::vector<VarRef>& vars,
                     const std::vector<uint32_t>& words) {
  uint32_t out = 0;
  for (size_t j = 0; j < vars.size(); ++j)
    out |= ((words[vars[j].open_slot] >> vars[j].bit) & 1u) << j;
  return out;
}

struct PartyData {
  std::vector<std::vector<uint32_t>> mask;                // [coeff][open_slot]
  std::vector<std::vector<std::vector<uint64_t>>> prods;  // [coeff][gadget]
};

PartyData derive_party(int n, int n_coeffs, uint64_t tau, int id,
                       const std::vector<Seed32>& keyrow,
                       const StaticPlan& plan) {
  int n_open = int(plan.opens.size());
  int n_gad = int(plan.gadget_shapes.size());
  PartyData pd;
  pd.mask.assign(n_coeffs, std::vector<uint32_t>(n_open, 0));
  pd.prods.assign(n_coeffs, std::vector<std::vector<uint64_t>>(n_gad));

  auto set_singles = [&](std::vector<uint64_t>& w, int coeff, int g) {
    const auto& vars = plan.gvars[g];
    for (size_t j = 0; j < vars.size(); ++j) {
      uint32_t bit =
          (pd.mask[coeff][vars[j].open_slot] >> vars[j].bit) & 1u;
      uint32_t v = 1u << j;
      if (bit) w[v >> 6] |= uint64_t(1) << (v & 63);
    }
  };

  for (int coeff = 0; coeff < n_coeffs; ++coeff) {
    if (id != 0) {
      for (int s = 0; s < n_open; ++s)
        pd.mask[coeff][s] = prf_word(keyrow[0], "and", tau, uint64_t(coeff),
                                     uint64_t(s), plan.opens[s].width);
      for (int g = 0; g < n_gad; ++g) {
        auto w = prf_products(keyrow[0], tau, plan.gadget_shapes[g].tag,
                              uint64_t(coeff), uint64_t(g),
                              plan.gadget_shapes[g].n_vars);
        set_singles(w, coeff, g);
        pd.prods[coeff][g] = std::move(w);
      }
    } else {
      std::vector<uint32_t> full(n_open, 0);
      for (int s = 0; s < n_open; ++s) {
        uint32_t own = 0, others = 0;
        for (int j = 1; j < n; ++j) {
          own ^= prf_word(keyrow[j], "and-anchor", tau, uint64_t(coeff),
                          uint64_t(s), plan.opens[s].width);
          others ^= prf_word(keyrow[j], "and", tau, uint64_t(coeff),
                             uint64_t(s), plan.opens[s].width);
        }
        pd.mask[coeff][s] = own;
        full[s] = own ^ others;
      }
      for (int g = 0; g < n_gad; ++g) {
        int m = plan.gadget_shapes[g].n_vars;
        auto w = true_products(window_bits(plan.gvars[g], full), m);
        clear_empty_and_singletons(w, m);
        for (int j = 1; j < n; ++j) {
          auto o = prf_products(keyrow[j], tau, plan.gadget_shapes[g].tag,
                                uint64_t(coeff), uint64_t(g), m);
          for (size_t i = 0; i < w.size(); ++i) w[i] ^= o[i];
        }
        set_singles(w, coeff, g);
        pd.prods[coeff][g] = std::move(w);
      }
    }
  }
  return pd;
}

std::vector<std::vector<uint32_t>> init_registry(
    int n, int n_coeffs, uint64_t tau, int id,
    const std::vector<Seed32>& keyrow, const std::vector<uint32_t>& rho_own,
    int registry_words) {
  std::vector<std::vector<uint32_t>> regs(
      n_coeffs, std::vector<uint32_t>(registry_words, 0));
  for (int coeff = 0; coeff < n_coeffs; ++coeff) {
    for (int h = 0; h < n; ++h) {
      if (h == id) {
        uint32_t v = rho_own[coeff] & kWordMask;
        for (int j = 0; j < n; ++j)
          if (j != id)
            v ^= prf_word(keyrow[j], "rho-share", tau, uint64_t(id),
                          uint64_t(coeff), kWordBits);
        regs[coeff][h] = v;
      } else {
        regs[coeff][h] = prf_word(keyrow[h], "rho-share", tau, uint64_t(h),
                                  uint64_t(coeff), kWordBits);
      }
    }
  }
  return regs;
}

// ---------------------------------------------------------------------------
// Session engine. Holds the public opened words plus any subset of party
// states: the in-process session instantiates all n parties, a blame replay
// instantiates exactly one and steps it against the recorded broadcasts.
// ---------------------------------------------------------------------------

struct Local {
  int id = 0;
  std::vector<Seed32> keyrow;
  std::vector<uint32_t> rho;
  PartyData td;
  std::vector<std::vector<uint32_t>> regs;  // [coeff][registry word]
};

struct Engine {
  ParamSet ps{};
  int n = 0;
  int n_coeffs = 0;
  uint64_t tau = 0;
  bool two_party = false;
  const StaticPlan* plan = nullptr;

  bool thr_set = false;
  std::vector<uint32_t> t;
  std::vector<std::array<uint32_t, 3>> thetabar;  // [coeff][threshold slot]
  std::vector<std::array<bool, 3>> live;          // [coeff][threshold slot]

  std::vector<std::vector<uint32_t>> d;  // [coeff][open_slot], opened words
  int next_round = 1;
  bool next_sub = false;
  bool have_out = false;
  std::vector<CarryDecision> outs;

  std::vector<Local> locals;

  // two-party state
  std::vector<std::array<uint32_t, 2>> pads;    // [coeff][party]
  std::vector<uint8_t> tagmask;                 // [coeff] bits 0..1
  std::vector<uint64_t> sums;                   // reconstructed rho totals
  std::vector<uint8_t> tag_xor;                 // [coeff] bits 0..1
  bool confirm_ok = true;

  uint32_t alpha() const { return uint32_t(2 * ps.gamma2); }
  uint32_t gamma2() const { return uint32_t(ps.gamma2); }

  void init(const ParamSet& params, int parties, uint64_t session_tau,
            int coeffs) {
    ps = params;
    n = parties;
    n_coeffs = coeffs;
    tau = session_tau;
    if (n < 2) throw std::invalid_argument("need at least two parties");
    if (n_coeffs < 1) throw std::invalid_argument("empty batch");
    if (uint64_t(alpha()) > (uint64_t(1) << kWordBits))
      throw std::invalid_argument("modulus exceeds the word width");
    two_party = n == 2;
    if (!two_party) {
      plan = &plan_for(n);
      d.assign(n_coeffs, std::vector<uint32_t>(plan->opens.size(), 0));
    } else {
      sums.assign(n_coeffs, 0);
      tag_xor.assign(n_coeffs, 0);
    }
  }

  void add_local(int id, const std::vector<Seed32>& keyrow,
                 const std::vector<uint32_t>& rho) {
    if (id < 0 || id >= n) throw std::invalid_argument("party id out of range");
    if (int(keyrow.size()) != n)
      throw std::invalid_argument("session key row has the wrong size");
    if (int(rho.size()) != n_coeffs)
      throw std::invalid_argument("rho batch has the wrong size");
    uint32_t bound = alpha() / uint32_t(n);
    for (uint32_t r : rho)
      if (r >= bound) throw std::invalid_argument("rho share out of range");
    Local l;
    l.id = id;
    l.keyrow = keyrow;
    l.rho = rho;
    if (!two_party) {
      l.td = derive_party(n, n_coeffs, tau, id, keyrow, *plan);
      l.regs = init_registry(n, n_coeffs, tau, id, keyrow, rho,
                             plan->registry_words);
    } else if (pads.empty()) {
      const Seed32& shared = keyrow[id == 0 ? 1 : 0];
      pads.assign(n_coeffs, {});
      tagmask.assign(n_coeffs, 0);
      for (int coeff = 0; coeff < n_coeffs; ++coeff) {
        for (int i = 0; i < 2; ++i)
          pads[coeff][i] = prf_mod(shared, "dcf-pad", tau, uint64_t(i),
                                   uint64_t(coeff), alpha());
        PrfStream s(shared);
        s.add("dcf").add(tau).add(uint64_t(coeff));
        uint8_t b;
        s.squeeze(&b, 1);
        tagmask[coeff] = b & 3;
      }
    }
    locals.push_back(std::move(l));
  }

  Local& local_by_id(int id) {
    for (auto& l : locals)
      if (l.id == id) return l;
    throw std::invalid_argument("party not instantiated in this session");
  }

  void set_thresholds(const std::vector<uint32_t>& thr) {
    if (int(thr.size()) != n_coeffs)
      throw std::invalid_argument("threshold batch has the wrong size");
    for (uint32_t v : thr)
      if (v >= alpha()) throw std::invalid_argument("threshold out of range");
    t = thr;
    if (!two_party) {
      thetabar.assign(n_coeffs, {});
      live.assign(n_coeffs, {});
      uint32_t g2 = gamma2(), a = alpha();
      for (int i = 0; i < n_coeffs; ++i) {
        live[i][0] = true;
        live[i][1] = t[i] > g2;
        live[i][2] = t[i] < g2;
        thetabar[i][0] = kWordMask - t[i];
        if (live[i][1]) thetabar[i][1] = kWordMask - (t[i] - g2 - 1);
        if (live[i][2]) thetabar[i][2] = kWordMask - (t[i] + a - g2 - 1);
      }
    }
    thr_set = true;
  }

  int total_rounds() const { return round_count(n); }
  bool has_substep(int round) const {
    return !two_party && round == plan->b2_round;
  }

  bool open_live(int coeff, const OpenSpec& o) const {
    return o.threshold_slot < 0 || live[coeff][o.threshold_slot];
  }

  void require_thresholds() const {
    if (!thr_set)
      throw std::logic_error("thresholds must be set before this round");
  }

  size_t payload_size(int round, bool sub) const {
    if (two_party) {
      if (round == 1) return size_t(n_coeffs) * 3;
      return (size_t(n_coeffs) * 2 + 7) / 8;
    }
    if (sub) return size_t(n_coeffs);
    size_t bytes = 0;
    for (const OpenSpec& o : plan->opens) {
      if (o.round != round) continue;
      size_t per = size_t((o.width + 7) / 8);
      if (o.threshold_slot < 0) {
        bytes += per * size_t(n_coeffs);
      } else {
        for (int coeff = 0; coeff < n_coeffs; ++coeff)
          if (live[coeff][o.threshold_slot]) bytes += per;
      }
    }
    return bytes;
  }

  Bytes build_payload(Local& l, int round, bool sub) {
    if (round < 1 || round > total_rounds())
      throw std::invalid_argument("round out of range");
    if (two_party) return build_payload_2p(l, round);
    if (round >= plan->b2_round) require_thresholds();
    Bytes out;
    if (sub) {
      if (round != plan->b2_round)
        throw std::invalid_argument("no sub-step in this round");
      out.reserve(size_t(n_coeffs));
      for (int coeff = 0; coeff < n_coeffs; ++coeff) {
        uint8_t b = uint8_t(l.regs[coeff][plan->out_cell_base + 0] & 1);
        if (live[coeff][1])
          b |= uint8_t((l.regs[coeff][plan->out_cell_base + 1] & 1) << 1);
        if (live[coeff][2])
          b |= uint8_t((l.regs[coeff][plan->out_cell_base + 2] & 1) << 2);
        out.push_back(b);
      }
      return out;
    }
    out.reserve(payload_size(round, false));
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      for (const OpenSpec& o : plan->opens) {
        if (o.round != round) continue;
        if (o.threshold_slot >= 0 && !live[coeff][o.threshold_slot]) continue;
        uint32_t word = 0;
        for (int b = 0; b < o.width; ++b) {
          uint32_t bit = 0;
          for (const BitRef& r : o.src[b])
            bit ^= (l.regs[coeff][r.word] >> r.bit) & 1u;
          word |= bit << b;
        }
        word ^= l.td.mask[coeff][o.slot];
        for (int by = 0; by < (o.width + 7) / 8; ++by)
          out.push_back(uint8_t(word >> (8 * by)));
      }
    }
    return out;
  }

  Bytes build_payload_2p(Local& l, int round) {
    Bytes out;
    if (round == 1) {
      out.reserve(size_t(n_coeffs) * 3);
      for (int coeff = 0; coeff < n_coeffs; ++coeff) {
        uint32_t x = (l.rho[coeff] + pads[coeff][l.id]) % alpha();
        out.push_back(uint8_t(x));
        out.push_back(uint8_t(x >> 8));
        out.push_back(uint8_t(x >> 16));
      }
      return out;
    }
    require_thresholds();
    out.assign((size_t(n_coeffs) * 2 + 7) / 8, 0);
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      uint8_t bits;
      if (round == 2) {
        if (next_round < 2)
          throw std::logic_error("round 1 not absorbed yet");
        if (l.id == 0) {
          CarryDecision pd = plain_decision(ps, sums[coeff], t[coeff]);
          bits = uint8_t((pd.c ? 1 : 0) | (pd.delta ? 2 : 0)) ^ tagmask[coeff];
        } else {
          bits = tagmask[coeff];
        }
      } else {
        if (next_round < 3)
          throw std::logic_error("round 2 not absorbed yet");
        bits = tag_xor[coeff];
      }
      size_t idx = size_t(coeff) * 2;
      out[idx >> 3] |= uint8_t((bits & 3) << (idx & 7));
    }
    return out;
  }

  void absorb(int round, bool sub, const std::vector<Bytes>& msgs) {
    if (round != next_round || sub != next_sub)
      throw std::logic_error("rounds must be absorbed in order");
    if (int(msgs.size()) != n)
      throw std::invalid_argument("need one payload per party");
    if (!two_party && round >= plan->b1_round) require_thresholds();
    if (two_party && round >= 2) require_thresholds();
    size_t want = payload_size(round, sub);
    for (const Bytes& m : msgs)
      if (m.size() != want) throw std::runtime_error("malformed payload");

    if (two_party) {
      absorb_2p(round, msgs);
    } else if (sub) {
      absorb_substep(msgs);
    } else {
      absorb_opens(round, msgs);
      eval_csa(round);
      if (round == plan->b1_round) eval_prefix();
      if (round == plan->b2_round) eval_cascade();
    }

    if (has_substep(round) && !sub) {
      next_sub = true;
    } else {
      ++next_round;
      next_sub = false;
    }
  }

  void absorb_opens(int round, const std::vector<Bytes>& msgs) {
    std::vector<size_t> pos(msgs.size(), 0);
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      for (const OpenSpec& o : plan->opens) {
        if (o.round != round) continue;
        if (o.threshold_slot >= 0 && !live[coeff][o.threshold_slot]) continue;
        int nbytes = (o.width + 7) / 8;
        uint32_t acc = 0;
        for (size_t p = 0; p < msgs.size(); ++p) {
          uint32_t w = 0;
          for (int by = 0; by < nbytes; ++by)
            w |= uint32_t(msgs[p][pos[p] + size_t(by)]) << (8 * by);
          pos[p] += size_t(nbytes);
          acc ^= w;
        }
        d[coeff][o.slot] = acc & ((1u << o.width) - 1);
      }
    }
  }

  void put_bit(Local& l, int coeff, BitRef ref, bool v) {
    uint32_t m = 1u << ref.bit;
    if (v)
      l.regs[coeff][ref.word] |= m;
    else
      l.regs[coeff][ref.word] &= ~m;
  }

  bool affine_val(const Local& l, int coeff, const std::vector<BitRef>& refs) {
    uint32_t acc = 0;
    for (const BitRef& r : refs) acc ^= (l.regs[coeff][r.word] >> r.bit) & 1u;
    return acc != 0;
  }

  void eval_gadget_bit(int coeff, int gslot, const SubsetVec& poly,
                       uint32_t dbits, BitRef out,
                       const std::vector<BitRef>* affine, bool negate) {
    SubsetVec cp = poly;
    d_transform(cp, dbits);
    for (Local& l : locals) {
      bool bit = parity_and(cp, l.td.prods[coeff][gslot]);
      if (l.id == 0) bit ^= cp.get(0);
      if (affine) bit ^= affine_val(l, coeff, *affine);
      if (negate && l.id == 0) bit = !bit;
      put_bit(l, coeff, out, bit);
    }
  }

  void eval_csa(int round) {
    for (const BitDef& bd : plan->csa_bits) {
      if (bd.round != round) continue;
      if (bd.gadget_slot < 0) {
        for (int coeff = 0; coeff < n_coeffs; ++coeff)
          for (Local& l : locals)
            put_bit(l, coeff, bd.out, affine_val(l, coeff, bd.affine));
      } else {
        for (int coeff = 0; coeff < n_coeffs; ++coeff) {
          uint32_t dbits = window_bits(bd.vars, d[coeff]);
          eval_gadget_bit(coeff, bd.gadget_slot, bd.poly, dbits, bd.out,
                          &bd.affine, false);
        }
      }
    }
  }

  void eval_prefix() {
    const PrefixMemo& memo = prefix_memo();
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      for (int th = 0; th < 3; ++th) {
        if (!live[coeff][th]) continue;
        for (int g = 0; g < 4; ++g) {
          int gslot = plan->prefix_gadget_base + g;
          uint32_t dbits = window_bits(plan->gvars[gslot], d[coeff]);
          const PrefixPolys& pp =
              memo.get(g, group_key(g, thetabar[coeff][th]));
          int base = plan->gp_cell_base + th * kGpCells;
          eval_gadget_bit(coeff, gslot, pp.g, dbits,
                          {base + gp_cell(g, false), 0}, nullptr, false);
          if (g != 0)
            eval_gadget_bit(coeff, gslot, pp.p, dbits,
                            {base + gp_cell(g, true), 0}, nullptr, false);
        }
      }
    }
  }

  void eval_cascade() {
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      for (int th = 0; th < 3; ++th) {
        if (!live[coeff][th]) continue;
        int gslot = plan->cascade_gadget_base + th;
        uint32_t dbits = window_bits(plan->gvars[gslot], d[coeff]);
        // Thresholds 1 and 2 want "below or equal", the complement of the
        // strict comparison the circuit computes; party 0 flips its share.
        eval_gadget_bit(coeff, gslot, cascade_poly(), dbits,
                        {plan->out_cell_base + th, 0}, nullptr, th != 0);
      }
    }
  }

  void absorb_substep(const std::vector<Bytes>& msgs) {
    outs.assign(size_t(n_coeffs), {});
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      uint8_t acc = 0;
      for (const Bytes& m : msgs) acc ^= m[size_t(coeff)];
      CarryDecision cd;
      cd.c = acc & 1;
      cd.delta0 = live[coeff][1] ? ((acc >> 1) & 1) : false;
      cd.delta1 = live[coeff][2] ? ((acc >> 2) & 1) : true;
      cd.delta = cd.c ? cd.delta1 : cd.delta0;
      outs[size_t(coeff)] = cd;
    }
    have_out = true;
  }

  void absorb_2p(int round, const std::vector<Bytes>& msgs) {
    if (round == 1) {
      for (int coeff = 0; coeff < n_coeffs; ++coeff) {
        uint64_t total = 0;
        for (int p = 0; p < 2; ++p) {
          size_t off = size_t(coeff) * 3;
          uint32_t x = uint32_t(msgs[p][off]) |
                       (uint32_t(msgs[p][off + 1]) << 8) |
                       (uint32_t(msgs[p][off + 2]) << 16);
          total += (x + alpha() - pads[coeff][p]) % alpha();
        }
        sums[coeff] = total;
      }
      return;
    }
    auto bits_at = [&](const Bytes& m, int coeff) {
      size_t idx = size_t(coeff) * 2;
      return uint8_t((m[idx >> 3] >> (idx & 7)) & 3);
    };
    if (round == 2) {
      for (int coeff = 0; coeff < n_coeffs; ++coeff)
        tag_xor[coeff] = uint8_t(bits_at(msgs[0], coeff) ^
                                 bits_at(msgs[1], coeff));
      return;
    }
    outs.assign(size_t(n_coeffs), {});
    for (int coeff = 0; coeff < n_coeffs; ++coeff) {
      uint8_t a = bits_at(msgs[0], coeff), b = bits_at(msgs[1], coeff);
      if (a != b || a != tag_xor[coeff]) confirm_ok = false;
      CarryDecision cd = plain_decision(ps, sums[coeff], t[coeff]);
      cd.c = tag_xor[coeff] & 1;
      cd.delta = (tag_xor[coeff] >> 1) & 1;
      outs[size_t(coeff)] = cd;
    }
    have_out = true;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Public interface.
// ---------------------------------------------------------------------------

SeedMatrix session_keys(const SeedMatrix& master, uint64_t tau) {
  int n = int(master.size());
  SeedMatrix out(size_t(n), std::vector<Seed32>(size_t(n), Seed32{}));
  for (int i = 0; i < n; ++i) {
    if (int(master[size_t(i)].size()) != n)
      throw std::invalid_argument("seed matrix must be square");
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      PrfStream s(master[size_t(i)][size_t(j)]);
      s.add("session").add(tau);
      out[size_t(i)][size_t(j)] = s.squeeze_seed();
    }
  }
  return out;
}

std::vector<Seed32> session_key_row(const std::vector<Seed32>& master_row,
                                    int me, uint64_t tau) {
  int n = int(master_row.size());
  if (me < 0 || me >= n) throw std::invalid_argument("party id out of range");
  std::vector<Seed32> out(size_t(n), Seed32{});
  for (int j = 0; j < n; ++j) {
    if (j == me) continue;
    PrfStream s(master_row[size_t(j)]);
    s.add("session").add(tau);
    out[size_t(j)] = s.squeeze_seed();
  }
  return out;
}

int csa_levels(int n) {
  if (n < 3) return 0;
  int words = n, levels = 0;
  while (words > 2) {
    ++levels;
    int next = 0, idx = 0;
    while (words - idx >= 4) {
      next += 2;
      idx += 4;
    }
    if (words - idx == 3) {
      next += 2;
      idx += 3;
    }
    next += words - idx;
    words = next;
  }
  return levels;
}

int round_count(int n) {
  if (n == 2) return 3;
  return std::max(3, csa_levels(n) + 2);
}

CircuitDescriptor CircuitDescriptor::build(int n, int n_coeffs) {
  CircuitDescriptor d;
  d.n = n;
  d.n_coeffs = n_coeffs;
  if (n == 2) {
    d.opens_per_coeff = 1;
    return d;
  }
  const StaticPlan& plan = plan_for(n);
  d.opens_per_coeff = int(plan.opens.size());
  d.gadgets_per_coeff = int(plan.gadget_shapes.size());
  for (const GadgetShape& g : plan.gadget_shapes) {
    if (g.tag == 2) d.triples_deg2 += n_coeffs;
    if (g.tag == 3) d.triples_deg3 += n_coeffs;
    if (g.tag == 5) d.triples_deg5 += n_coeffs;
  }
  return d;
}

TripleStore derive_triples(const ParamSet& ps, const SeedMatrix& keys,
                           uint64_t tau, const CircuitDescriptor& desc) {
  (void)ps;
  if (desc.n < 3)
    throw std::invalid_argument(
        "two-party sessions use shared-key tags, not triples");
  if (int(keys.size()) != desc.n)
    throw std::invalid_argument("key matrix does not match the descriptor");
  const StaticPlan& plan = plan_for(desc.n);
  if (desc.opens_per_coeff != int(plan.opens.size()) ||
      desc.gadgets_per_coeff != int(plan.gadget_shapes.size()))
    throw std::runtime_error("triple budget exhausted");
  TripleStore store;
  store.n = desc.n;
  store.n_coeffs = desc.n_coeffs;
  store.tau = tau;
  for (int p = 0; p < desc.n; ++p) {
    PartyData pd = derive_party(desc.n, desc.n_coeffs, tau, p,
                                keys[size_t(p)], plan);
    store.mask_share.push_back(std::move(pd.mask));
    store.prod_share.push_back(std::move(pd.prods));
  }
  return store;
}

GadgetOpening reconstruct_gadget(const ParamSet& ps, const TripleStore& store,
                                 const CircuitDescriptor& desc, int coeff,
                                 int gadget_slot) {
  (void)ps;
  if (coeff < 0 || coeff >= store.n_coeffs || gadget_slot < 0 ||
      gadget_slot >= desc.gadgets_per_coeff)
    throw std::runtime_error("triple budget exhausted");
  const StaticPlan& plan = plan_for(store.n);
  GadgetOpening g;
  g.n_vars = plan.gadget_shapes[size_t(gadget_slot)].n_vars;
  std::vector<uint32_t> full(plan.opens.size(), 0);
  for (int p = 0; p < store.n; ++p)
    for (size_t s = 0; s < full.size(); ++s)
      full[s] ^= store.mask_share[size_t(p)][size_t(coeff)][s];
  g.mask_bits = window_bits(plan.gvars[size_t(gadget_slot)], full);
  g.products.assign(SubsetVec::words_for(g.n_vars), 0);
  for (int p = 0; p < store.n; ++p) {
    const auto& w = store.prod_share[size_t(p)][size_t(coeff)]
                                    [size_t(gadget_slot)];
    for (size_t i = 0; i < g.products.size(); ++i) g.products[i] ^= w[i];
  }
  return g;
}

struct Session::Impl {
  Engine eng;
};

Session::Session(const ParamSet& ps, const SeedMatrix& keys, uint64_t tau,
                 const std::vector<std::vector<uint32_t>>& rho)
    : impl_(std::make_unique<Impl>()) {
  int n = int(rho.size());
  if (int(keys.size()) != n)
    throw std::invalid_argument("one key row per party required");
  if (n < 2) throw std::invalid_argument("need at least two parties");
  impl_->eng.init(ps, n, tau, int(rho[0].size()));
  for (int i = 0; i < n; ++i)
    impl_->eng.add_local(i, keys[size_t(i)], rho[size_t(i)]);
}

Session::Session(const ParamSet& ps, int n_parties, int my_id,
                 const std::vector<Seed32>& my_keys, uint64_t tau,
                 const std::vector<uint32_t>& my_rho)
    : impl_(std::make_unique<Impl>()) {
  impl_->eng.init(ps, n_parties, tau, int(my_rho.size()));
  impl_->eng.add_local(my_id, my_keys, my_rho);
}

Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

int Session::total_rounds() const { return impl_->eng.total_rounds(); }
bool Session::round_has_substep(int round) const {
  return impl_->eng.has_substep(round);
}
void Session::set_thresholds(const std::vector<uint32_t>& t) {
  impl_->eng.set_thresholds(t);
}
Bytes Session::round_payload(int party, int round, bool sub) {
  return impl_->eng.build_payload(impl_->eng.local_by_id(party), round, sub);
}
void Session::absorb_round(int round, bool sub,
                           const std::vector<Bytes>& all_payloads) {
  impl_->eng.absorb(round, sub, all_payloads);
}
const std::vector<CarryDecision>& Session::outputs() const {
  if (!impl_->eng.have_out)
    throw std::logic_error("outputs not available before the final round");
  return impl_->eng.outs;
}

std::vector<std::vector<std::vector<uint32_t>>> Session::level_words(
    int level) const {
  const Engine& eng = impl_->eng;
  if (eng.two_party)
    throw std::logic_error("two-party sessions have no compressor levels");
  if (level < 0 || level > eng.plan->levels)
    throw std::invalid_argument("level out of range");
  const auto& ids = eng.plan->level_word_ids[size_t(level)];
  std::vector<std::vector<std::vector<uint32_t>>> out(eng.locals.size());
  for (size_t p = 0; p < eng.locals.size(); ++p) {
    out[p].assign(ids.size(),
                  std::vector<uint32_t>(size_t(eng.n_coeffs), 0));
    for (size_t w = 0; w < ids.size(); ++w)
      for (int coeff = 0; coeff < eng.n_coeffs; ++coeff)
        out[p][w][size_t(coeff)] =
            eng.locals[p].regs[size_t(coeff)][size_t(ids[w])];
  }
  return out;
}

SessionResult carry_compare(const ParamSet& ps, const SeedMatrix& keys,
                            uint64_t tau,
                            const std::vector<std::vector<uint32_t>>& rho,
                            const std::vector<uint32_t>& t,
                            const CorruptionSpec* corrupt) {
  Session s(ps, keys, tau, rho);
  s.set_thresholds(t);
  int n = int(rho.size());
  Transcript tr;
  tr.level = ps.level;
  tr.n = n;
  tr.n_coeffs = int(rho[0].size());
  tr.tau = tau;
  tr.t = t;
  tr.rounds_used = s.total_rounds();
  for (int r = 1; r <= s.total_rounds(); ++r) {
    size_t round_bytes = 0;
    int phases = s.round_has_substep(r) ? 2 : 1;
    for (int phase = 0; phase < phases; ++phase) {
      bool sub = phase == 1;
      auto msgs = std::vector<Bytes>(size_t(n));
      for (int p = 0; p < n; ++p) {
        msgs[size_t(p)] = s.round_payload(p, r, sub);
        if (corrupt && corrupt->party == p && corrupt->round == r &&
            corrupt->sub == sub && !msgs[size_t(p)].empty())
          msgs[size_t(p)][corrupt->byte_index % msgs[size_t(p)].size()] ^=
              corrupt->bit_mask;
      }
      round_bytes += msgs[0].size();
      for (int p = 0; p < n; ++p)
        tr.messages.push_back({r, sub, p, msgs[size_t(p)]});
      s.absorb_round(r, sub, msgs);
    }
    tr.bytes_per_round.push_back(round_bytes);
  }
  return {s.outputs(), std::move(tr)};
}

SessionResult dcf_compare(const ParamSet& ps, const SeedMatrix& keys,
                          uint64_t tau,
                          const std::vector<std::vector<uint32_t>>& rho,
                          const std::vector<uint32_t>& t,
                          const CorruptionSpec* corrupt) {
  if (rho.size() != 2)
    throw std::invalid_argument("two-party comparison needs exactly two rows");
  return carry_compare(ps, keys, tau, rho, t, corrupt);
}

FastResult carry_compare_fast(const ParamSet& ps,
                              const std::vector<std::vector<uint32_t>>& rho,
                              const std::vector<uint32_t>& t) {
  int n = int(rho.size());
  if (n < 2) throw std::invalid_argument("need at least two parties");
  int n_coeffs = int(rho[0].size());
  if (int(t.size()) != n_coeffs)
    throw std::invalid_argument("threshold batch has the wrong size");
  FastResult res;
  res.rounds = round_count(n);
  res.out.reserve(size_t(n_coeffs));
  for (int coeff = 0; coeff < n_coeffs; ++coeff) {
    uint64_t sum = 0;
    for (int p = 0; p < n; ++p) sum += rho[size_t(p)][size_t(coeff)];
    res.out.push_back(plain_decision(ps, sum, t[coeff]));
  }
  uint32_t g2 = uint32_t(ps.gamma2);
  if (n == 2) {
    res.bytes_per_round = {size_t(n_coeffs) * 3,
                           (size_t(n_coeffs) * 2 + 7) / 8,
                           (size_t(n_coeffs) * 2 + 7) / 8};
    return res;
  }
  const StaticPlan& plan = plan_for(n);
  res.bytes_per_round.assign(size_t(res.rounds), 0);
  for (const OpenSpec& o : plan.opens) {
    size_t per = size_t((o.width + 7) / 8);
    if (o.threshold_slot < 0) {
      res.bytes_per_round[size_t(o.round - 1)] += per * size_t(n_coeffs);
    } else {
      for (int coeff = 0; coeff < n_coeffs; ++coeff) {
        bool is_live = o.threshold_slot == 0 ||
                       (o.threshold_slot == 1 && t[coeff] > g2) ||
                       (o.threshold_slot == 2 && t[coeff] < g2);
        if (is_live) res.bytes_per_round[size_t(o.round - 1)] += per;
      }
    }
  }
  res.bytes_per_round[size_t(res.rounds - 1)] += size_t(n_coeffs);
  return res;
}

CarryDecision plain_decision(const ParamSet& ps, uint64_t rho_sum,
                             uint32_t t) {
  uint64_t g2 = uint64_t(ps.gamma2);
  uint64_t alpha = 2 * g2;
  CarryDecision d;
  d.c = rho_sum > t;
  d.delta0 = (t > g2) ? (rho_sum + g2 + 1 <= t) : false;
  d.delta1 = (t < g2) ? (rho_sum <= uint64_t(t) + alpha - g2 - 1) : true;
  d.delta = d.c ? d.delta1 : d.delta0;
  return d;
}

ReplayVerdict replay_party(const ParamSet& ps, const Transcript& transcript,
                           int accused, const std::vector<Seed32>& accused_keys,
                           const std::vector<uint32_t>& accused_rho) {
  Engine eng;
  eng.init(ps, transcript.n, transcript.tau, transcript.n_coeffs);
  eng.add_local(accused, accused_keys, accused_rho);
  eng.set_thresholds(transcript.t);
  Local& me = eng.local_by_id(accused);

  std::map<std::tuple<int, int, int>, const Bytes*> by_slot;
  for (const TranscriptMessage& m : transcript.messages)
    by_slot[{m.round, m.sub ? 1 : 0, m.party}] = &m.payload;

  for (int r = 1; r <= eng.total_rounds(); ++r) {
    int phases = eng.has_substep(r) ? 2 : 1;
    for (int phase = 0; phase < phases; ++phase) {
      bool sub = phase == 1;
      Bytes expected = eng.build_payload(me, r, sub);
      auto it = by_slot.find({r, sub ? 1 : 0, accused});
      if (it == by_slot.end() || *it->second != expected)
        return {true, r, sub};
      auto msgs = std::vector<Bytes>(size_t(transcript.n));
      for (int p = 0; p < transcript.n; ++p) {
        auto pit = by_slot.find({r, sub ? 1 : 0, p});
        if (pit == by_slot.end())
          throw std::runtime_error("transcript is missing a broadcast");
        msgs[size_t(p)] = *pit->second;
      }
      eng.absorb(r, sub, msgs);
    }
  }
  return {false, 0, false};
}

Bytes export_gate_transcript(const Transcript& transcript) {
  Bytes out;
  auto put8 = [&](uint8_t v) { out.push_back(v); };
  auto put16 = [&](uint16_t v) {
    put8(uint8_t(v >> 8));
    put8(uint8_t(v));
  };
  auto put32 = [&](uint32_t v) {
    put16(uint16_t(v >> 16));
    put16(uint16_t(v));
  };
  auto put64 = [&](uint64_t v) {
    put32(uint32_t(v >> 32));
    put32(uint32_t(v));
  };
  const char magic[8] = {'C', 'S', 'C', 'P', 'G', 'T', '0', '1'};
  out.insert(out.end(), magic, magic + 8);
  put32(uint32_t(transcript.n));
  put32(uint32_t(transcript.n_coeffs));
  put64(transcript.tau);
  put32(uint32_t(transcript.rounds_used));

  auto frame = [&](uint32_t gate_id, int party, const uint8_t* data,
                   size_t len) {
    put32(gate_id);
    put16(uint16_t(party));
    put16(uint16_t(len));
    out.insert(out.end(), data, data + len);
  };

  if (transcript.n == 2) {
    for (const TranscriptMessage& m : transcript.messages) {
      uint32_t id = (uint32_t(m.round) << 28) | (m.sub ? 1u << 27 : 0);
      frame(id, m.party, m.payload.data(), m.payload.size());
    }
    return out;
  }

  const StaticPlan& plan = plan_for(transcript.n);
  uint32_t g2 = 0;
  for (const ParamSet* p : {&PARAMS_44, &PARAMS_65, &PARAMS_87})
    if (p->level == transcript.level) g2 = uint32_t(p->gamma2);
  if (g2 == 0) throw std::invalid_argument("unknown parameter level");

  for (const TranscriptMessage& m : transcript.messages) {
    uint32_t rid = (uint32_t(m.round) << 28) | (m.sub ? 1u << 27 : 0);
    if (m.sub) {
      for (int coeff = 0; coeff < transcript.n_coeffs; ++coeff)
        frame(rid | (uint32_t(coeff) << 12) | 0xfffu, m.party,
              &m.payload[size_t(coeff)], 1);
      continue;
    }
    size_t pos = 0;
    for (int coeff = 0; coeff < transcript.n_coeffs; ++coeff) {
      uint32_t t = transcript.t[size_t(coeff)];
      for (const OpenSpec& o : plan.opens) {
        if (o.round != m.round) continue;
        bool is_live = o.threshold_slot < 0 || o.threshold_slot == 0 ||
                       (o.threshold_slot == 1 && t > g2) ||
                       (o.threshold_slot == 2 && t < g2);
        if (!is_live) continue;
        size_t nbytes = size_t((o.width + 7) / 8);
        frame(rid | (uint32_t(coeff) << 12) | uint32_t(o.slot), m.party,
              &m.payload[pos], nbytes);
        pos += nbytes;
      }
    }
  }
  return out;
}

}  // namespace talus::cscp
