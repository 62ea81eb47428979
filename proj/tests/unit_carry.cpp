#include "doctest.h"

#include <algorithm>
#include <cstring>

#include "talus/carry_compare.hpp"

using namespace talus;
using namespace talus::cscp;

namespace {

SeedMatrix random_pair_keys(XofRng& rng, int n) {
  SeedMatrix keys{size_t(n), std::vector<Seed32>(size_t(n))};
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Seed32 k = rng.seed32();
      keys[size_t(a)][size_t(b)] = k;
      keys[size_t(b)][size_t(a)] = k;
    }
  return keys;
}

std::vector<std::vector<uint32_t>> random_rho(XofRng& rng, const ParamSet& ps,
                                              int n, int coeffs) {
  uint32_t bound = uint32_t(ps.alpha()) / uint32_t(n);
  std::vector<std::vector<uint32_t>> rho{size_t(n),
                                         std::vector<uint32_t>(size_t(coeffs))};
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < coeffs; ++c)
      rho[size_t(i)][size_t(c)] = uint32_t(rng.below(bound));
  return rho;
}

// Splits a target total into n in-range addends, largest first.
std::vector<uint32_t> split_sum(const ParamSet& ps, int n, uint64_t total) {
  uint32_t bound = uint32_t(ps.alpha()) / uint32_t(n);
  std::vector<uint32_t> parts(size_t(n), 0);
  for (int i = 0; i < n; ++i) {
    uint32_t take = uint32_t(std::min<uint64_t>(total, bound - 1));
    parts[size_t(i)] = take;
    total -= take;
  }
  REQUIRE(total == 0);
  return parts;
}

// Signed-arithmetic reference, straight from the definition of the carry and
// the two wrap candidates. No shortcut branches: the dead cases fall out of
// the inequalities on their own.
struct RefDecision {
  bool c, d0, d1, d;
};
RefDecision ref_decision(const ParamSet& ps, uint64_t sum, uint32_t t) {
  int64_t s = int64_t(sum), tt = int64_t(t);
  int64_t g2 = ps.gamma2, al = ps.alpha();
  RefDecision r{};
  r.c = s > tt;
  r.d0 = s < tt - g2;
  r.d1 = s < tt - g2 + al;
  r.d = r.c ? r.d1 : r.d0;
  return r;
}

void check_against_ref(const ParamSet& ps, const CarryDecision& got,
                       uint64_t sum, uint32_t t) {
  RefDecision want = ref_decision(ps, sum, t);
  REQUIRE(got.c == want.c);
  REQUIRE(got.delta0 == want.d0);
  REQUIRE(got.delta1 == want.d1);
  REQUIRE(got.delta == want.d);
}

// Threshold values that exercise every prefix group window and both delta
// liveness sides, including the exact boundary where both are dead.
std::vector<uint32_t> boundary_thresholds(const ParamSet& ps) {
  uint32_t g2 = uint32_t(ps.gamma2), al = uint32_t(ps.alpha());
  return {0,      1,          31,         32,     1023,   1024,
          32767,  32768,      g2 - 1,     g2,     g2 + 1, al - 1,
          al / 2, al / 2 + 1, g2 / 2 + 5, al - 7};
}

}  // namespace

TEST_CASE("round count follows the compressor depth") {
  CHECK(csa_levels(2) == 0);
  CHECK(round_count(2) == 3);
  CHECK(round_count(3) == 3);
  CHECK(round_count(8) == 4);
  CHECK(round_count(16) == 5);
  for (int n = 3; n <= 64; ++n) {
    int depth = 0;
    while ((2 << depth) < n) ++depth;  // smallest d with 2^d >= n/2
    CHECK(csa_levels(n) == std::max(1, depth));
    CHECK(round_count(n) == std::max(3, depth + 2));
  }
}

TEST_CASE("session keys are symmetric and change with the counter") {
  XofRng rng(4101);
  auto master = random_pair_keys(rng, 4);
  auto k1 = session_keys(master, 9);
  auto k2 = session_keys(master, 10);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      CHECK(k1[size_t(i)][size_t(j)] == k1[size_t(j)][size_t(i)]);
      CHECK(k1[size_t(i)][size_t(j)] != k2[size_t(i)][size_t(j)]);
    }
}

TEST_CASE("derived products reconstruct to exact subset products") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4202);
  for (int n : {3, 5}) {
    auto keys = session_keys(random_pair_keys(rng, n), 77);
    auto desc = CircuitDescriptor::build(n, 4);
    CHECK(desc.triples_deg2 > 0);
    CHECK(desc.triples_deg3 > 0);
    CHECK(desc.triples_deg5 > 0);
    auto store = derive_triples(ps, keys, 77, desc);
    auto again = derive_triples(ps, keys, 77, desc);
    REQUIRE(store.mask_share == again.mask_share);
    REQUIRE(store.prod_share == again.prod_share);
    long products_checked = 0;
    for (int coeff = 0; coeff < desc.n_coeffs; ++coeff) {
      for (int g = 0; g < desc.gadgets_per_coeff; ++g) {
        GadgetOpening go = reconstruct_gadget(ps, store, desc, coeff, g);
        REQUIRE(go.n_vars >= 2);
        REQUIRE(go.n_vars <= 12);
        for (uint32_t v = 0; v < (1u << go.n_vars); ++v) {
          bool expect = v != 0;
          for (int k = 0; k < go.n_vars && expect; ++k)
            if (((v >> k) & 1) && !((go.mask_bits >> k) & 1)) expect = false;
          bool got = (go.products[v >> 6] >> (v & 63)) & 1;
          REQUIRE(got == expect);
          ++products_checked;
        }
      }
    }
    CHECK(products_checked > 10000);
    CHECK_THROWS_AS(reconstruct_gadget(ps, store, desc, desc.n_coeffs, 0),
                    std::runtime_error);
    CHECK_THROWS_AS(
        reconstruct_gadget(ps, store, desc, 0, desc.gadgets_per_coeff),
        std::runtime_error);
  }
  CHECK_THROWS(derive_triples(ps, session_keys(random_pair_keys(rng, 2), 1), 1,
                              CircuitDescriptor::build(2, 1)));
}

TEST_CASE("compressor levels preserve the share total") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4303);
  for (int n : {3, 4, 5, 8}) {
    const int coeffs = 6;
    auto keys = session_keys(random_pair_keys(rng, n), 5);
    auto rho = random_rho(rng, ps, n, coeffs);
    std::vector<uint32_t> t(coeffs);
    for (auto& v : t) v = uint32_t(rng.below(uint64_t(ps.alpha())));
    Session s(ps, keys, 5, rho);
    s.set_thresholds(t);
    int levels = csa_levels(n);

    auto check_level = [&](int level) {
      auto words = s.level_words(level);
      REQUIRE(int(words.size()) == n);
      for (int c = 0; c < coeffs; ++c) {
        uint64_t total = 0;
        for (size_t w = 0; w < words[0].size(); ++w) {
          uint32_t value = 0;
          for (int p = 0; p < n; ++p) value ^= words[size_t(p)][w][size_t(c)];
          total += value;
        }
        uint64_t expect = 0;
        for (int p = 0; p < n; ++p) expect += rho[size_t(p)][size_t(c)];
        REQUIRE(total == expect);
      }
      return words[0].size();
    };

    REQUIRE(check_level(0) == size_t(n));
    for (int r = 1; r <= s.total_rounds(); ++r) {
      int phases = s.round_has_substep(r) ? 2 : 1;
      for (int phase = 0; phase < phases; ++phase) {
        std::vector<Bytes> msgs;
        for (int p = 0; p < n; ++p)
          msgs.push_back(s.round_payload(p, r, phase == 1));
        s.absorb_round(r, phase == 1, msgs);
      }
      if (r <= levels) {
        size_t live_words = check_level(r);
        if (r == levels) REQUIRE(live_words == 2);
      }
    }
    for (int c = 0; c < coeffs; ++c) {
      uint64_t sum = 0;
      for (int p = 0; p < n; ++p) sum += rho[size_t(p)][size_t(c)];
      check_against_ref(ps, s.outputs()[size_t(c)], sum, t[size_t(c)]);
    }
  }
}

TEST_CASE("sessions match the signed-arithmetic definition") {
  XofRng rng(4404);
  for (const ParamSet* ps : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    for (int n : {3, 5}) {
      auto keys = session_keys(random_pair_keys(rng, n), 21);
      for (int trial = 0; trial < 150; ++trial) {
        auto rho = random_rho(rng, *ps, n, 1);
        std::vector<uint32_t> t = {
            uint32_t(rng.below(uint64_t(ps->alpha())))};
        auto res = carry_compare(*ps, keys, uint64_t(trial), rho, t);
        uint64_t sum = 0;
        for (int p = 0; p < n; ++p) sum += rho[size_t(p)][0];
        check_against_ref(*ps, res.out[0], sum, t[0]);
        REQUIRE(res.transcript.rounds_used == round_count(n));
        REQUIRE(res.transcript.bytes_per_round.size() ==
                size_t(round_count(n)));
      }
    }
  }
}

TEST_CASE("sessions hit every window and liveness boundary") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4505);
  const int n = 3;
  auto keys = session_keys(random_pair_keys(rng, n), 88);
  uint64_t tau = 0;
  for (uint32_t t : boundary_thresholds(ps)) {
    std::vector<uint64_t> sums = {0, 1, t, uint64_t(t) + 1,
                                  uint64_t(ps.alpha()) - 3};
    if (t >= 2) sums.push_back(t - 1);
    for (uint64_t sum : sums) {
      if (sum > uint64_t(n) * (uint64_t(ps.alpha()) / uint64_t(n) - 1))
        continue;
      std::vector<std::vector<uint32_t>> rho;
      auto parts = split_sum(ps, n, sum);
      for (uint32_t p : parts) rho.push_back({p});
      auto res = carry_compare(ps, keys, tau++, rho, {t});
      check_against_ref(ps, res.out[0], sum, t);
    }
  }
  // The all-zero corner: no shares, threshold zero, carry must stay clear.
  std::vector<std::vector<uint32_t>> zero{3, std::vector<uint32_t>{0}};
  auto res = carry_compare(ps, keys, tau, zero, {0});
  REQUIRE(res.out[0].c == false);
  REQUIRE(res.out[0].delta == false);
}

TEST_CASE("two-party comparison agrees with the definition and the circuit") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4606);
  auto keys2 = session_keys(random_pair_keys(rng, 2), 3);
  auto keys3 = session_keys(random_pair_keys(rng, 3), 3);
  uint32_t third = uint32_t(ps.alpha()) / 3;
  for (int trial = 0; trial < 400; ++trial) {
    uint32_t r0 = uint32_t(rng.below(third));
    uint32_t r1 = uint32_t(rng.below(third));
    uint32_t t = uint32_t(rng.below(uint64_t(ps.alpha())));
    auto res2 = dcf_compare(ps, keys2, uint64_t(trial), {{r0}, {r1}}, {t});
    check_against_ref(ps, res2.out[0], uint64_t(r0) + r1, t);
    REQUIRE(res2.transcript.rounds_used == 3);
    auto res3 =
        carry_compare(ps, keys3, uint64_t(trial), {{r0}, {r1}, {0}}, {t});
    REQUIRE(res2.out[0].c == res3.out[0].c);
    REQUIRE(res2.out[0].delta == res3.out[0].delta);
  }
  // Sum landing exactly on the threshold keeps the carry clear.
  uint32_t t = 2 * third - 2;
  auto res = dcf_compare(ps, keys2, 900, {{third - 1}, {third - 1}}, {t});
  REQUIRE(res.out[0].c == false);
  CHECK_THROWS(dcf_compare(ps, keys3, 1, {{0}, {0}, {0}}, {0}));
}

TEST_CASE("two-party tag broadcast packs a full batch into 384 bytes") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4707);
  auto keys = session_keys(random_pair_keys(rng, 2), 12);
  const int coeffs = ps.n_k();
  auto rho = random_rho(rng, ps, 2, coeffs);
  std::vector<uint32_t> t(static_cast<size_t>(coeffs));
  for (auto& v : t) v = uint32_t(rng.below(uint64_t(ps.alpha())));
  auto res = dcf_compare(ps, keys, 12, rho, t);
  REQUIRE(coeffs == 1536);
  CHECK(res.transcript.bytes_per_round[0] == 3 * 1536);
  CHECK(res.transcript.bytes_per_round[1] == 384);
  CHECK(res.transcript.bytes_per_round[2] == 384);
  for (int c = 0; c < coeffs; ++c)
    check_against_ref(ps, res.out[size_t(c)],
                      uint64_t(rho[0][size_t(c)]) + rho[1][size_t(c)],
                      t[size_t(c)]);
  auto fast = carry_compare_fast(ps, rho, t);
  REQUIRE(fast.bytes_per_round == res.transcript.bytes_per_round);
  REQUIRE(fast.rounds == res.transcript.rounds_used);
  for (int c = 0; c < coeffs; ++c) {
    REQUIRE(fast.out[size_t(c)].c == res.out[size_t(c)].c);
    REQUIRE(fast.out[size_t(c)].delta == res.out[size_t(c)].delta);
  }
}

TEST_CASE("fast path mirrors the genuine wire accounting") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4808);
  for (int n : {3, 5}) {
    auto keys = session_keys(random_pair_keys(rng, n), 44);
    auto rho = random_rho(rng, ps, n, 5);
    std::vector<uint32_t> t(5);
    for (auto& v : t) v = uint32_t(rng.below(uint64_t(ps.alpha())));
    auto res = carry_compare(ps, keys, 44, rho, t);
    auto fast = carry_compare_fast(ps, rho, t);
    REQUIRE(fast.rounds == res.transcript.rounds_used);
    REQUIRE(fast.bytes_per_round == res.transcript.bytes_per_round);
    for (size_t c = 0; c < res.out.size(); ++c) {
      REQUIRE(fast.out[c].c == res.out[c].c);
      REQUIRE(fast.out[c].delta == res.out[c].delta);
      REQUIRE(fast.out[c].delta0 == res.out[c].delta0);
      REQUIRE(fast.out[c].delta1 == res.out[c].delta1);
    }
  }
}

TEST_CASE("honest transcripts replay clean for every party") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(4909);
  for (int n : {2, 3, 5}) {
    auto keys = session_keys(random_pair_keys(rng, n), 61);
    auto rho = random_rho(rng, ps, n, 4);
    std::vector<uint32_t> t(4);
    for (auto& v : t) v = uint32_t(rng.below(uint64_t(ps.alpha())));
    auto res = carry_compare(ps, keys, 61, rho, t);
    for (int accused = 0; accused < n; ++accused) {
      auto verdict = replay_party(ps, res.transcript, accused,
                                  keys[size_t(accused)], rho[size_t(accused)]);
      REQUIRE(verdict.deviated == false);
    }
    auto gates1 = export_gate_transcript(res.transcript);
    auto gates2 = export_gate_transcript(res.transcript);
    REQUIRE(gates1 == gates2);
    REQUIRE(gates1.size() > 32);
    REQUIRE(std::memcmp(gates1.data(), "CSCPGT01", 8) == 0);
  }
}

TEST_CASE("replay pins a corrupted broadcast to the offender only") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(5010);
  for (int n : {2, 3}) {
    auto keys = session_keys(random_pair_keys(rng, n), 97);
    auto rho = random_rho(rng, ps, n, 3);
    std::vector<uint32_t> t(3);
    for (auto& v : t) v = uint32_t(rng.below(uint64_t(ps.alpha())));
    int rounds = round_count(n);
    for (int offender = 0; offender < n; ++offender) {
      for (int round = 1; round <= rounds; ++round) {
        for (int sub = 0; sub < 2; ++sub) {
          if (sub == 1 && !(n > 2 && round == rounds)) continue;
          CorruptionSpec spec;
          spec.party = offender;
          spec.round = round;
          spec.sub = sub == 1;
          spec.byte_index = 2;
          spec.bit_mask = 0x10;
          if (n == 2 && round > 1) spec.bit_mask = 0x01;
          auto res = carry_compare(ps, keys, uint64_t(100 + round), rho, t,
                                   &spec);
          for (int accused = 0; accused < n; ++accused) {
            auto verdict =
                replay_party(ps, res.transcript, accused,
                             keys[size_t(accused)], rho[size_t(accused)]);
            if (accused == offender) {
              REQUIRE(verdict.deviated == true);
              REQUIRE(verdict.first_round == round);
              REQUIRE(verdict.sub == spec.sub);
            } else {
              REQUIRE(verdict.deviated == false);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("input contracts are enforced") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(5111);
  auto keys = session_keys(random_pair_keys(rng, 3), 7);
  std::vector<std::vector<uint32_t>> rho{{1}, {2}, {3}};
  CHECK_THROWS(carry_compare(ps, keys, 7, rho, {uint32_t(ps.alpha())}));
  std::vector<std::vector<uint32_t>> big{
      {uint32_t(ps.alpha()) / 3}, {0}, {0}};
  CHECK_THROWS(carry_compare(ps, keys, 7, big, {5}));
  Session s(ps, keys, 7, rho);
  CHECK_THROWS(s.outputs());
  CHECK_THROWS(s.round_payload(0, 9, false));
  std::vector<Bytes> empty_msgs(3);
  CHECK_THROWS(s.absorb_round(2, false, empty_msgs));
}
