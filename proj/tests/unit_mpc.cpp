#include "doctest.h"

#include <algorithm>
#include <set>

#include "talus/carry_compare.hpp"
#include "talus/cef.hpp"
#include "talus/rounding.hpp"
#include "talus/shamir.hpp"
#include "talus/sim_network.hpp"
#include "talus/talus_mpc.hpp"

using namespace talus;

namespace {

std::vector<MpcParty*> ptrs(std::vector<MpcParty>& v) {
  std::vector<MpcParty*> p;
  for (MpcParty& x : v) p.push_back(&x);
  return p;
}

std::vector<MpcParty*> ptrs(std::vector<MpcParty>& v, const std::vector<int>& ids) {
  std::vector<MpcParty*> p;
  for (MpcParty& x : v)
    if (std::find(ids.begin(), ids.end(), x.id) != ids.end()) p.push_back(&x);
  return p;
}

bool vec_eq_q(const PolyVec& a, const PolyVec& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      if (freeze(a[i][j]) != freeze(b[i][j])) return false;
  return true;
}

// The committee's joint nonce is the sum of the dealt constants, which the
// all-local tests can read straight out of the stored sessions.
PolyVec joint_nonce(const std::vector<MpcParty*>& local, uint64_t tau) {
  PolyVec y = vec_zero(local.front()->ps->l);
  for (const MpcParty* p : local) y = vec_add(y, p->sessions.at(tau).y_const);
  return y;
}

int w1_mismatches(const ParamSet& ps, const NttMatrix& a_hat, const PolyVec& y,
                  const PolyVec& w1) {
  PolyVec w = matvec(a_hat, y);
  int bad = 0;
  for (int i = 0; i < ps.k; ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      if (high_bits(ps, freeze(w[size_t(i)][j])) != w1[size_t(i)][j]) ++bad;
  return bad;
}

}  // namespace

TEST_CASE("mpc session key row matches the pairwise matrix") {
  XofRng rng(0x5e55a);
  int n = 4;
  cscp::SeedMatrix master(size_t(n), std::vector<Seed32>(size_t(n), Seed32{}));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) master[size_t(i)][size_t(j)] =
        master[size_t(j)][size_t(i)] = rng.seed32();

  cscp::SeedMatrix full = cscp::session_keys(master, 77);
  for (int i = 0; i < n; ++i) {
    std::vector<Seed32> row = cscp::session_key_row(master[size_t(i)], i, 77);
    CHECK(row == full[size_t(i)]);
  }
  // a different session id produces a disjoint key set
  std::vector<Seed32> other = cscp::session_key_row(master[0], 0, 78);
  CHECK(other != full[0]);
}

TEST_CASE("mpc mask row matches the joint mask table") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x3a5c);
  int n = 3, count = 96;
  cscp::SeedMatrix keys(size_t(n), std::vector<Seed32>(size_t(n), Seed32{}));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      keys[size_t(i)][size_t(j)] = keys[size_t(j)][size_t(i)] = rng.seed32();

  MaskSet all = gen_masks(ps, keys, 9, count);
  for (int i = 0; i < n; ++i) {
    MaskRow row = gen_mask_row(ps, n, i, keys[size_t(i)], 9, count);
    CHECK(row.mask_h == all.mask_h[size_t(i)]);
    CHECK(row.rho == all.rho[size_t(i)]);
  }
}

TEST_CASE("mpc keygen: committee guards, share algebra, pk decodes") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x6b3);

  CHECK_THROWS_AS(mpc_keygen(ps, 1, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(mpc_keygen(ps, 3, 2, rng), std::invalid_argument);
  // blame needs an honest majority of dealers once t exceeds two
  CHECK_THROWS_AS(mpc_keygen(ps, 3, 4, rng), std::invalid_argument);
  CHECK_NOTHROW(mpc_keygen(ps, 2, 2, rng));

  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);
  REQUIRE(kg.parties.size() == 5);
  CHECK(kg.pk.raw.size() == ps.pk_bytes());
  CHECK(pk_decode(ps, kg.pk.raw).has_value());

  // the published share images are exactly the images of the shares
  for (const MpcParty& p : kg.parties) {
    REQUIRE(p.a_s1.size() == 5);
    CHECK(vec_eq_q(p.a_s1[size_t(p.id - 1)], matvec(p.a_hat, p.s1_share)));
  }

  // any t shares reconstruct the same low-norm key
  std::vector<Share> sub1, sub2;
  for (int id : {1, 2, 3}) sub1.push_back({id, kg.parties[size_t(id - 1)].s1_share});
  for (int id : {2, 4, 5}) sub2.push_back({id, kg.parties[size_t(id - 1)].s1_share});
  PolyVec s1a = reconstruct(sub1), s1b = reconstruct(sub2);
  CHECK(vec_eq_q(s1a, s1b));
  CHECK(vec_inf_norm(s1a) <= ps.eta);

  // pairwise seeds agree across the pair and stay off the diagonal
  for (int i = 0; i < 5; ++i) {
    CHECK(kg.parties[size_t(i)].master_seeds[size_t(i)] == Seed32{});
    for (int j = i + 1; j < 5; ++j) {
      CHECK(kg.parties[size_t(i)].master_seeds[size_t(j)] ==
            kg.parties[size_t(j)].master_seeds[size_t(i)]);
      CHECK(kg.parties[size_t(i)].master_seeds[size_t(j)] != Seed32{});
    }
  }
}

TEST_CASE("mpc keygen is deterministic in the seed") {
  const ParamSet& ps = PARAMS_44;
  XofRng a(42), b(42), c(43);
  CHECK(mpc_keygen(ps, 2, 3, a).pk.raw == mpc_keygen(ps, 2, 3, b).pk.raw);
  CHECK(mpc_keygen(ps, 2, 3, a).pk.raw != mpc_keygen(ps, 2, 3, c).pk.raw);
}

TEST_CASE("mpc preprocess: honest session matches the direct decomposition") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x71);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);
  std::vector<int> signers = {1, 2, 4};
  auto local = ptrs(kg.parties, signers);

  net::SimNetwork bus(5);
  MpcPreprocessResult res = mpc_preprocess(bus, local, signers, 1);
  REQUIRE(res.ok);
  CHECK(res.blamed.empty());
  CHECK(res.rounds == cscp::round_count(3));

  // every signer derives the same public stripe vector
  for (MpcParty* p : local) CHECK(p->sessions.at(1).w1 == res.w1);

  // and it is the decomposition of the joint nonce image, up to the rare
  // mod-q wrap the protocol resolves by retrying
  CHECK(w1_mismatches(ps, kg.parties[0].a_hat, joint_nonce(local, 1), res.w1) <= 2);

  // wire ledger: dense 23-bit vectors and the packed masked pair
  for (int id : signers) {
    CHECK(bus.sent_bytes(id, 1, net::MsgType::MaskedBroadcast) == 4416);
    CHECK(bus.sent_bytes(id, 1, net::MsgType::FeldmanCommit) == 3 * 4416);
    CHECK(bus.sent_bytes(id, 1, net::MsgType::NonceShare) == 2 * 3680);
    CHECK(bus.record_count(id, 1, net::MsgType::NonceShare) == 2);
  }
}

TEST_CASE("mpc preprocess rejects malformed sessions") {
  const ParamSet& ps = PARAMS_44;
  XofRng rng(0x72);
  MpcKeygenResult kg = mpc_keygen(ps, 2, 3, rng);

  {
    net::SimNetwork bus(3);
    auto local = ptrs(kg.parties, {1, 2});
    CHECK_THROWS_AS(mpc_preprocess(bus, local, {1, 2, 3}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(mpc_preprocess(bus, local, {2, 2}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(mpc_preprocess(bus, local, {1, 9}, 1),
                    std::invalid_argument);
  }

  auto local = ptrs(kg.parties, {1, 2});
  {
    net::SimNetwork bus(3);
    REQUIRE(mpc_preprocess(bus, local, {1, 2}, 5).ok);
  }
  // reused and rewound session ids die before any derivation
  net::SimNetwork bus2(3);
  CHECK_THROWS_AS(mpc_preprocess(bus2, local, {1, 2}, 5), std::runtime_error);
  net::SimNetwork bus3(3);
  CHECK_THROWS_AS(mpc_preprocess(bus3, local, {1, 2}, 3), std::runtime_error);
}

TEST_CASE("mpc preprocess: fast mode matches the circuit") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x73);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);

  std::vector<MpcParty> a = kg.parties, b = kg.parties;
  net::SimNetwork ba(5), bb(5);
  auto la = ptrs(a, {2, 3, 5}), lb = ptrs(b, {2, 3, 5});
  MpcPreprocessResult ra =
      mpc_preprocess(ba, la, {2, 3, 5}, 4, CarryMode::circuit);
  MpcPreprocessResult rb = mpc_preprocess(bb, lb, {2, 3, 5}, 4, CarryMode::fast);
  REQUIRE(ra.ok);
  REQUIRE(rb.ok);
  CHECK(ra.w1 == rb.w1);
  CHECK(ra.transcript.circuit);
  CHECK(!rb.transcript.circuit);
}

TEST_CASE("mpc preprocess: a corrupted nonce share is pinned to its dealer") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x74);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);
  auto local = ptrs(kg.parties, {1, 3, 4});

  MpcFault fault;
  fault.kind = MpcFaultKind::nonce_share;
  fault.party = 3;
  net::SimNetwork bus(5);
  MpcPreprocessResult res =
      mpc_preprocess(bus, local, {1, 3, 4}, 1, CarryMode::circuit, &fault);
  CHECK(!res.ok);
  CHECK(res.blamed == std::vector<int>{3});
}

TEST_CASE("mpc sign: honest signatures verify at every level") {
  for (const ParamSet* psp : {&PARAMS_44, &PARAMS_65, &PARAMS_87}) {
    const ParamSet& ps = *psp;
    XofRng rng(0x9000 + ps.level);
    MpcKeygenResult kg = mpc_keygen(ps, 2, 3, rng);
    auto local = ptrs(kg.parties, {1, 3});
    Bytes msg = {'l', 'v', uint8_t(ps.level)};

    // attempts abort and retry on a fresh nonce like any rejection sampler
    MpcSignResult out;
    uint64_t tau = 0;
    for (int tries = 0; tries < 40; ++tries) {
      ++tau;
      net::SimNetwork bus(3);
      MpcPreprocessResult pre =
          mpc_preprocess(bus, local, {1, 3}, tau, CarryMode::fast);
      REQUIRE(pre.ok);
      out = mpc_sign(bus, local, tau, msg);
      CHECK(kg.parties[0].sessions.at(tau).spent);
      CHECK(kg.parties[0].sessions.at(tau).y_share.empty());
      if (out.status == MpcSignStatus::ok) {
        size_t z_bytes = size_t(ps.l) * N_COEFFS * 23 / 8;
        CHECK(bus.record_count(1, int(bus.last_round()),
                               net::MsgType::Response) == 1);
        CHECK(bus.record_count(3, int(bus.last_round()),
                               net::MsgType::Response) == 1);
        CHECK(bus.sent_bytes(1, int(bus.last_round()),
                             net::MsgType::Response) == z_bytes);
        break;
      }
      CHECK(out.sig_bytes.empty());
    }
    REQUIRE(out.status == MpcSignStatus::ok);
    CHECK(verify_bytes(ps, kg.pk.raw, msg, out.sig_bytes));

    // the nonce is gone: the same session cannot sign twice
    net::SimNetwork bus2(3);
    CHECK_THROWS_AS(mpc_sign(bus2, local, tau, msg), std::logic_error);
    CHECK_THROWS_AS(mpc_sign(bus2, local, tau + 999, msg), std::invalid_argument);
  }
}

TEST_CASE("mpc sign: a corrupted response is pinned to the signer") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x75);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);
  auto local = ptrs(kg.parties, {2, 4, 5});

  net::SimNetwork bus(5);
  REQUIRE(mpc_preprocess(bus, local, {2, 4, 5}, 1, CarryMode::fast).ok);
  MpcFault fault;
  fault.kind = MpcFaultKind::response;
  fault.party = 4;
  fault.coeff = 300;
  MpcSignResult out = mpc_sign(bus, local, 1, {'x'}, &fault);
  CHECK(out.status == MpcSignStatus::blame);
  CHECK(out.blamed == std::vector<int>{4});
  CHECK(out.sig_bytes.empty());
}

TEST_CASE("mpc blame attributes every broadcast fault class") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x76);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);
  std::vector<int> signers = {1, 2, 3};

  struct Case {
    MpcFaultKind kind;
    int round;
  };
  for (Case fc : {Case{MpcFaultKind::masked_h, 1},
                  Case{MpcFaultKind::masked_b, 1},
                  Case{MpcFaultKind::carry_gate, 1},
                  Case{MpcFaultKind::carry_gate, 2}}) {
    std::vector<MpcParty> fresh = kg.parties;
    auto local = ptrs(fresh, signers);
    MpcFault fault;
    fault.kind = fc.kind;
    fault.party = 2;
    fault.coeff = 37;
    fault.round = fc.round;
    net::SimNetwork bus(5);
    MpcPreprocessResult pre =
        mpc_preprocess(bus, local, signers, 1, CarryMode::circuit, &fault);
    // nothing in round one flags a lie that is consistent with the dealing
    REQUIRE(pre.ok);

    std::vector<int> verdict = mpc_blame(local, 1, pre.transcript);
    CHECK(verdict == std::vector<int>{2});
  }
}

TEST_CASE("mpc blame stays empty on honest aborts") {
  // five summands make the mod-q wrap frequent enough to hunt down, and a
  // two-stripe wrap can never heal through the one-step hint
  const ParamSet& ps = PARAMS_44;
  XofRng rng(0x77);
  MpcKeygenResult kg = mpc_keygen(ps, 5, 9, rng);
  std::vector<int> signers = {1, 2, 3, 4, 5};
  auto local = ptrs(kg.parties, signers);

  bool wrap_fail = false, bound_abort = false;
  for (uint64_t tau = 1; tau <= 2500 && !wrap_fail; ++tau) {
    net::SimNetwork bus(9);
    MpcPreprocessResult pre =
        mpc_preprocess(bus, local, signers, tau, CarryMode::fast);
    REQUIRE(pre.ok);
    bool wrapped = w1_mismatches(ps, kg.parties[0].a_hat,
                                 joint_nonce(local, tau), pre.w1) > 0;
    if (!wrapped && bound_abort) continue;
    MpcSignResult out = mpc_sign(bus, local, tau, {'w'});
    if (out.status == MpcSignStatus::ok) continue;
    CHECK(out.sig_bytes.empty());
    // whatever the abort reason, an honest transcript clears everyone
    CHECK(mpc_blame(local, tau, pre.transcript).empty());
    if (out.status == MpcSignStatus::z_bound_abort) bound_abort = true;
    if (wrapped && out.status == MpcSignStatus::verify_failed_abort)
      wrap_fail = true;
  }
  CHECK(bound_abort);
  CHECK(wrap_fail);
}

TEST_CASE("mpc transcript replay reproduces the exchange") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x78);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);
  std::vector<int> signers = {1, 4, 5};

  std::vector<MpcParty> live = kg.parties;
  auto ll = ptrs(live, signers);
  net::SimNetwork bus(5);
  MpcPreprocessResult first = mpc_preprocess(bus, ll, signers, 2);
  REQUIRE(first.ok);

  std::vector<MpcParty> again = kg.parties;
  auto la = ptrs(again, signers);
  net::ReplayBus replay(bus);
  MpcPreprocessResult second = mpc_preprocess(replay, la, signers, 2);
  REQUIRE(second.ok);
  CHECK(second.w1 == first.w1);
  CHECK(!replay.diverged());
}

TEST_CASE("mpc refresh preserves the key and rotates the seeds") {
  const ParamSet& ps = PARAMS_65;
  XofRng rng(0x79);
  MpcKeygenResult kg = mpc_keygen(ps, 3, 5, rng);

  std::vector<Share> before;
  for (int id : {1, 2, 3})
    before.push_back({id, kg.parties[size_t(id - 1)].s1_share});
  PolyVec s1_before = reconstruct(before);
  auto seeds_before = kg.parties[0].master_seeds;

  XofRng rrng(0x80);
  CHECK(mpc_refresh(kg.parties, rrng).empty());

  std::vector<Share> after;
  for (int id : {1, 2, 3})
    after.push_back({id, kg.parties[size_t(id - 1)].s1_share});
  CHECK(vec_eq_q(reconstruct(after), s1_before));

  // every pairwise seed rotated, symmetry intact
  for (int j = 1; j < 5; ++j) {
    CHECK(kg.parties[0].master_seeds[size_t(j)] != seeds_before[size_t(j)]);
    for (int i = 0; i < j; ++i)
      CHECK(kg.parties[size_t(i)].master_seeds[size_t(j)] ==
            kg.parties[size_t(j)].master_seeds[size_t(i)]);
  }

  // the public image table tracks the refreshed shares
  for (const MpcParty& p : kg.parties)
    CHECK(vec_eq_q(p.a_s1[size_t(p.id - 1)], matvec(p.a_hat, p.s1_share)));

  // refreshed shares still sign under the original public key
  auto local = ptrs(kg.parties, {1, 2, 3});
  MpcSignResult out;
  uint64_t tau = 0;
  for (int tries = 0; tries < 40; ++tries) {
    ++tau;
    net::SimNetwork bus(5);
    REQUIRE(mpc_preprocess(bus, local, {1, 2, 3}, tau, CarryMode::fast).ok);
    out = mpc_sign(bus, local, tau, {'r'});
    if (out.status == MpcSignStatus::ok) break;
  }
  REQUIRE(out.status == MpcSignStatus::ok);
  CHECK(verify_bytes(ps, kg.pk.raw, {'r'}, out.sig_bytes));
}

TEST_CASE("mpc refresh: a nonzero dealing constant is pinned and discarded") {
  const ParamSet& ps = PARAMS_44;
  XofRng rng(0x81);
  MpcKeygenResult kg = mpc_keygen(ps, 2, 4, rng);
  std::vector<MpcParty> saved = kg.parties;

  MpcFault fault;
  fault.kind = MpcFaultKind::refresh_constant;
  fault.party = 3;
  XofRng rrng(0x82);
  std::vector<int> verdict = mpc_refresh(kg.parties, rrng, &fault);
  CHECK(verdict == std::vector<int>{3});

  // a blamed refresh must leave every share and seed untouched
  for (size_t i = 0; i < kg.parties.size(); ++i) {
    CHECK(vec_eq_q(kg.parties[i].s1_share, saved[i].s1_share));
    CHECK(kg.parties[i].master_seeds == saved[i].master_seeds);
  }
}

TEST_CASE("mpc zz probe wrap statistics") {
  const ParamSet& ps = PARAMS_44;
  XofRng rng(0x77);
  MpcKeygenResult kg = mpc_keygen(ps, 5, 9, rng);
  std::vector<int> signers = {1, 2, 3, 4, 5};
  auto local = ptrs(kg.parties, signers);
  int wrapped_attempts = 0, statuses[5] = {0, 0, 0, 0, 0};
  for (uint64_t tau = 1; tau <= 400; ++tau) {
    net::SimNetwork bus(9);
    MpcPreprocessResult pre =
        mpc_preprocess(bus, local, signers, tau, CarryMode::fast);
    REQUIRE(pre.ok);
    int mm = w1_mismatches(ps, kg.parties[0].a_hat, joint_nonce(local, tau), pre.w1);
    if (mm > 0) ++wrapped_attempts;
    MpcSignResult out = mpc_sign(bus, local, tau, {'w'});
    statuses[int(out.status)]++;
  }
  MESSAGE("wrapped=" << wrapped_attempts << " ok=" << statuses[0]
          << " blame=" << statuses[1] << " zbound=" << statuses[2]
          << " hint=" << statuses[3] << " vfail=" << statuses[4]);
  CHECK(false);
}
