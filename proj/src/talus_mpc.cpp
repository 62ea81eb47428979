#include "talus/talus_mpc.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

#include "talus/bcc.hpp"
#include "talus/cef.hpp"
#include "talus/encoding.hpp"
#include "talus/ntt.hpp"
#include "talus/shamir.hpp"

namespace talus {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// ---- wire encodings ----

// Full Z_q vectors (nonce shares, responses, A-images): 23 bits per
// coefficient, canonical representatives.
Bytes pack_zq_vec(const PolyVec& v) {
  BitWriter w;
  for (const Poly& p : v)
    for (int i = 0; i < N_COEFFS; ++i) w.put(uint32_t(freeze(p[i])), 23);
  return w.take();
}

size_t zq_vec_bytes(int dim) { return (size_t(dim) * N_COEFFS * 23 + 7) / 8; }

PolyVec unpack_zq_vec(const Bytes& raw, int dim) {
  if (raw.size() != zq_vec_bytes(dim))
    throw std::runtime_error("malformed share payload");
  BitReader r(raw);
  PolyVec v = vec_zero(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < N_COEFFS; ++j) {
      uint32_t x = r.get(23);
      if (x >= uint32_t(Q)) throw std::runtime_error("share coefficient out of range");
      v[size_t(i)][j] = int32_t(center(int64_t(x)));
    }
  return v;
}

int stripe_bits(const ParamSet& ps) {
  return std::bit_width(uint32_t(ps.stripes() - 1));
}
int low_bits(const ParamSet& ps) {
  return std::bit_width(uint64_t(ps.alpha() - 1));
}

// Masked broadcast row: per coefficient the masked high part followed by
// the blinded low part, so one row packs into
// n_k * (stripe_bits + low_bits) bits.
Bytes pack_masked(const ParamSet& ps, const std::vector<int32_t>& h,
                  const std::vector<int64_t>& b) {
  BitWriter w;
  int hb = stripe_bits(ps), lb = low_bits(ps);
  for (size_t i = 0; i < h.size(); ++i) {
    w.put(uint32_t(h[i]), hb);
    w.put(uint32_t(b[i]), lb);
  }
  return w.take();
}

size_t masked_bytes(const ParamSet& ps) {
  return (size_t(ps.n_k()) * size_t(stripe_bits(ps) + low_bits(ps)) + 7) / 8;
}

void unpack_masked(const ParamSet& ps, const Bytes& raw,
                   std::vector<int32_t>& h, std::vector<int64_t>& b) {
  if (raw.size() != masked_bytes(ps))
    throw std::runtime_error("malformed masked broadcast");
  int hb = stripe_bits(ps), lb = low_bits(ps);
  int count = ps.n_k();
  h.assign(size_t(count), 0);
  b.assign(size_t(count), 0);
  BitReader r(raw);
  for (int i = 0; i < count; ++i) {
    uint32_t hv = r.get(hb);
    uint32_t bv = r.get(lb);
    if (hv >= uint32_t(ps.stripes()) || int64_t(bv) >= ps.alpha())
      throw std::runtime_error("masked coefficient out of range");
    h[size_t(i)] = int32_t(hv);
    b[size_t(i)] = int64_t(bv);
  }
}

// Degree-ordered A-images of one dealing, t vectors of k polynomials each.
Bytes pack_feldman(const std::vector<PolyVec>& phi) {
  BitWriter w;
  for (const PolyVec& vec : phi)
    for (const Poly& p : vec)
      for (int i = 0; i < N_COEFFS; ++i) w.put(uint32_t(freeze(p[i])), 23);
  return w.take();
}

std::vector<PolyVec> unpack_feldman(const ParamSet& ps, const Bytes& raw,
                                    int t) {
  if (raw.size() != (size_t(t) * size_t(ps.k) * N_COEFFS * 23 + 7) / 8)
    throw std::runtime_error("malformed commitment payload");
  BitReader r(raw);
  std::vector<PolyVec> phi;
  phi.reserve(size_t(t));
  for (int d = 0; d < t; ++d) {
    PolyVec v = vec_zero(ps.k);
    for (int i = 0; i < ps.k; ++i)
      for (int j = 0; j < N_COEFFS; ++j) {
        uint32_t x = r.get(23);
        if (x >= uint32_t(Q))
          throw std::runtime_error("commitment coefficient out of range");
        v[size_t(i)][j] = int32_t(center(int64_t(x)));
      }
    phi.push_back(std::move(v));
  }
  return phi;
}

// ---- small algebra helpers ----

bool vec_eq_mod_q(const PolyVec& a, const PolyVec& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      if (freeze(a[i][j]) != freeze(b[i][j])) return false;
  return true;
}

// sum_k phi[k] * x^k mod q, powers reduced as they grow.
PolyVec eval_images(const std::vector<PolyVec>& phi, int x) {
  PolyVec acc = vec_zero(int(phi[0].size()));
  int64_t pw = 1;
  for (const PolyVec& p : phi) {
    acc = vec_add(acc, vec_scale(pw, p));
    pw = (pw * x) % Q;
  }
  return acc;
}

int pos_of(const std::vector<int>& signers, int id) {
  for (size_t i = 0; i < signers.size(); ++i)
    if (signers[i] == id) return int(i);
  return -1;
}

struct FlatIndex {
  int poly;
  int coeff;
};
FlatIndex split_flat(int flat) { return {flat / N_COEFFS, flat % N_COEFFS}; }

bool fault_hits(const MpcFault* fault, MpcFaultKind kind, int party) {
  return fault && fault->kind == kind && fault->party == party;
}

}  // namespace

// ---------------------------------------------------------------------------
// Key generation.
// ---------------------------------------------------------------------------

MpcKeygenResult mpc_keygen(const ParamSet& ps, int t, int n, XofRng& rng) {
  require(t >= 2, "threshold must be at least 2");
  require(n >= t, "need at least t parties");
  require(t < 3 || n >= 2 * t - 1, "blame attribution needs n >= 2t - 1");

  Bytes rho_a(32);
  rng.bytes(rho_a.data(), rho_a.size());
  NttMatrix a_hat = expand_a(ps, rho_a);

  // Bounded contributions: the min(n, eta) lowest ids each sample within
  // floor(eta / m); everyone else deals a zero contribution. The aggregate
  // secrets then stay within the signing norm bound for any committee size.
  int m = std::min(n, int(ps.eta));
  int32_t bound = int32_t(ps.eta) / int32_t(m);

  std::vector<XofRng> prng;
  prng.reserve(size_t(n));
  for (int i = 1; i <= n; ++i) prng.push_back(rng.fork(uint64_t(i)));

  std::vector<PolyVec> v, u;
  auto salt = std::vector<Seed32>(size_t(n));
  for (int i = 0; i < n; ++i) {
    bool active = i < m;
    v.push_back(active ? sample_vec_range(prng[size_t(i)], ps.l, -bound, bound)
                       : vec_zero(ps.l));
    u.push_back(active ? sample_vec_range(prng[size_t(i)], ps.k, -bound, bound)
                       : vec_zero(ps.k));
    salt[size_t(i)] = prng[size_t(i)].seed32();
  }

  // Commit-then-open binding on the contribution images.
  auto av = std::vector<PolyVec>(size_t(n));
  auto commits = std::vector<Seed32>(size_t(n));
  for (int i = 0; i < n; ++i) {
    av[size_t(i)] = matvec(a_hat, v[size_t(i)]);
    PrfStream c(salt[size_t(i)]);
    c.add("keygen-commit").add(pack_zq_vec(av[size_t(i)]));
    commits[size_t(i)] = c.squeeze_seed();
  }
  for (int i = 0; i < n; ++i) {
    PrfStream c(salt[size_t(i)]);
    c.add("keygen-commit").add(pack_zq_vec(av[size_t(i)]));
    if (c.squeeze_seed() != commits[size_t(i)])
      throw std::runtime_error("contribution opening does not match its commitment");
  }

  // Degree-(t-1) sharings of every contribution; party j's key share is the
  // column sum.
  std::vector<std::vector<Share>> dealt;
  dealt.reserve(size_t(n));
  for (int i = 0; i < n; ++i)
    dealt.push_back(share_secret(prng[size_t(i)], v[size_t(i)], t, n));

  auto s1_share = std::vector<PolyVec>(size_t(n));
  for (int j = 0; j < n; ++j) {
    PolyVec acc = vec_zero(ps.l);
    for (int i = 0; i < n; ++i)
      acc = vec_add(acc, dealt[size_t(i)][size_t(j)].value);
    s1_share[size_t(j)] = std::move(acc);
  }

  auto a_s1 = std::vector<PolyVec>(size_t(n));
  for (int j = 0; j < n; ++j)
    a_s1[size_t(j)] = matvec(a_hat, s1_share[size_t(j)]);

  // Structural invariant of the bounded-contribution rule.
  PolyVec s1_sum = vec_zero(ps.l), s2_sum = vec_zero(ps.k);
  for (int i = 0; i < n; ++i) {
    s1_sum = vec_add(s1_sum, v[size_t(i)]);
    s2_sum = vec_add(s2_sum, u[size_t(i)]);
  }
  if (vec_inf_norm(s1_sum) > ps.eta || vec_inf_norm(s2_sum) > ps.eta)
    throw std::logic_error("aggregate secret exceeded the norm bound");

  // Public key assembly from the share images and the revealed low-norm
  // pieces: interpolation over all n points reproduces A*s1 because the
  // share polynomial has degree t-1 < n.
  auto all_ids = std::vector<int>(size_t(n));
  for (int j = 0; j < n; ++j) all_ids[size_t(j)] = j + 1;
  std::vector<int64_t> lam = lagrange_coeffs(all_ids);
  PolyVec t_vec = s2_sum;
  for (int j = 0; j < n; ++j)
    t_vec = vec_add(t_vec, vec_scale(lam[size_t(j)], a_s1[size_t(j)]));

  PolyVec t1 = vec_zero(ps.k);
  for (int i = 0; i < ps.k; ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      t1[size_t(i)][j] = power2round(freeze(t_vec[size_t(i)][j])).first;

  Bytes pk_raw = pk_encode(ps, rho_a, t1);
  auto pk = pk_decode(ps, pk_raw);
  if (!pk) throw std::logic_error("assembled public key failed to decode");

  MpcKeygenResult res;
  res.pk = *pk;
  res.parties.reserve(size_t(n));
  for (int j = 0; j < n; ++j) {
    MpcParty p;
    p.id = j + 1;
    p.ps = &params_for_level(ps.level);
    p.t = t;
    p.n = n;
    p.pk = *pk;
    p.a_hat = a_hat;
    p.s1_share = s1_share[size_t(j)];
    p.master_seeds.assign(size_t(n), Seed32{});
    p.a_s1 = a_s1;
    p.self_seed = prng[size_t(j)].seed32();
    res.parties.push_back(std::move(p));
  }
  // Pairwise long-lived seeds, one per unordered pair.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Seed32 s = rng.seed32();
      res.parties[size_t(i)].master_seeds[size_t(j)] = s;
      res.parties[size_t(j)].master_seeds[size_t(i)] = s;
    }
  return res;
}

// ---------------------------------------------------------------------------
// Preprocessing.
// ---------------------------------------------------------------------------

namespace {

// Everything one driven party accumulates during a preprocessing session.
struct PreLocal {
  MpcParty* me = nullptr;
  int pos = 0;
  VecPolynomial g;
  std::vector<Seed32> skeys;
  MaskRow masks;
  std::vector<uint32_t> rho32;
  std::optional<cscp::Session> sess;
  // round-one views, indexed by signer position
  std::vector<std::vector<int32_t>> h_rows;
  std::vector<std::vector<int64_t>> b_rows;
  std::vector<std::vector<PolyVec>> feldman;
  PolyVec y_acc;
};

}  // namespace

MpcPreprocessResult mpc_preprocess(net::Bus& bus,
                                   const std::vector<MpcParty*>& local,
                                   const std::vector<int>& signers,
                                   uint64_t tau, CarryMode mode,
                                   const MpcFault* fault) {
  require(!local.empty(), "no local parties to drive");
  const MpcParty& head = *local.front();
  const ParamSet& ps = *head.ps;
  int t = head.t;
  int C = ps.n_k();

  std::vector<int> s = signers;
  std::sort(s.begin(), s.end());
  require(int(s.size()) == t, "signer set must have exactly t members");
  for (size_t i = 0; i < s.size(); ++i) {
    require(s[i] >= 1 && s[i] <= head.n, "signer id out of range");
    require(i == 0 || s[i] != s[i - 1], "signer ids must be distinct");
  }
  for (MpcParty* p : local)
    require(pos_of(s, p->id) >= 0, "local party is not in the signer set");
  if (mode == CarryMode::fast)
    require(int(local.size()) == t, "fast mode drives every signer in-process");

  // Session ids only move forward; a reused id would reuse one-time PRF
  // material, so it is rejected before any key derivation.
  for (MpcParty* p : local)
    if (tau <= p->last_tau)
      throw std::runtime_error("session id reused or rewound");
  for (MpcParty* p : local) p->last_tau = tau;

  std::vector<PreLocal> locs(local.size());
  int32_t y_bound = int32_t(ps.gamma1 / t);

  // ---- round 1: posts ----
  for (size_t li = 0; li < local.size(); ++li) {
    PreLocal& L = locs[li];
    L.me = local[li];
    MpcParty& me = *L.me;
    L.pos = pos_of(s, me.id);

    XofRng srng = XofRng(me.self_seed).fork(tau);
    XofRng nonce_rng = srng.fork("nonce");
    L.g = sample_nonce_poly(nonce_rng, ps.l, t, y_bound);

    std::vector<Seed32> master_row(size_t(t), Seed32{});
    for (int j = 0; j < t; ++j)
      if (s[size_t(j)] != me.id)
        master_row[size_t(j)] = me.master_seeds[size_t(s[size_t(j)] - 1)];
    L.skeys = cscp::session_key_row(master_row, L.pos, tau);
    L.masks = gen_mask_row(ps, t, L.pos, L.skeys, tau, C);
    L.rho32.reserve(size_t(C));
    for (int64_t r : L.masks.rho) L.rho32.push_back(uint32_t(r));

    // nonce shares, point-to-point
    int tamper_pos = -1;
    if (fault_hits(fault, MpcFaultKind::nonce_share, me.id))
      for (int j = 0; j < t; ++j)
        if (s[size_t(j)] != me.id) { tamper_pos = j; break; }
    for (int j = 0; j < t; ++j) {
      if (s[size_t(j)] == me.id) continue;
      Bytes raw = pack_zq_vec(L.g.eval(s[size_t(j)]));
      if (j == tamper_pos) raw[0] ^= 1;
      bus.post(me.id, s[size_t(j)], net::MsgType::NonceShare, 1, 0,
               std::move(raw));
    }

    // dealing images
    std::vector<PolyVec> phi;
    phi.reserve(L.g.coeffs.size());
    for (const PolyVec& cf : L.g.coeffs) phi.push_back(matvec(me.a_hat, cf));
    bus.post(me.id, 0, net::MsgType::FeldmanCommit, 1, 0, pack_feldman(phi));

    // masked broadcast of the decomposed nonce image
    const PolyVec& w = phi[0];
    auto h = std::vector<int32_t>(size_t(C));
    auto b = std::vector<int64_t>(size_t(C));
    for (int c = 0; c < C; ++c) {
      FlatIndex fi = split_flat(c);
      MaskedCoeff mc =
          mask_coeff(ps, w[size_t(fi.poly)][fi.coeff],
                     L.masks.mask_h[size_t(c)], L.masks.rho[size_t(c)], t);
      h[size_t(c)] = mc.h_tilde;
      b[size_t(c)] = mc.b_tilde;
    }
    if (fault_hits(fault, MpcFaultKind::masked_h, me.id)) {
      int c = fault->coeff % C;
      h[size_t(c)] = int32_t((h[size_t(c)] + 1) % ps.stripes());
    }
    if (fault_hits(fault, MpcFaultKind::masked_b, me.id)) {
      int c = fault->coeff % C;
      b[size_t(c)] = (b[size_t(c)] + 1) % ps.alpha();
    }
    bus.post(me.id, 0, net::MsgType::MaskedBroadcast, 1, 0, pack_masked(ps, h, b));

    if (mode == CarryMode::circuit) {
      L.sess.emplace(ps, t, L.pos, L.skeys, tau, L.rho32);
      Bytes pay = L.sess->round_payload(L.pos, 1, false);
      if (fault_hits(fault, MpcFaultKind::carry_gate, me.id) &&
          fault->round == 1 && !fault->sub && !pay.empty())
        pay[fault->byte_index % pay.size()] ^= fault->bit_mask;
      bus.post(me.id, 0, net::MsgType::CsaGates, 1, 0, std::move(pay));
    }
  }

  // ---- round 1: receive, check, absorb ----
  MpcPreprocessResult res;
  res.tau = tau;
  std::set<int> blamed;

  for (PreLocal& L : locs) {
    MpcParty& me = *L.me;
    L.h_rows.resize(size_t(t));
    L.b_rows.resize(size_t(t));
    L.feldman.resize(size_t(t));
    for (int j = 0; j < t; ++j) {
      // a syntactically broken broadcast is as provable as a wrong one
      try {
        L.feldman[size_t(j)] = unpack_feldman(
            ps,
            bus.fetch(me.id, s[size_t(j)], net::MsgType::FeldmanCommit, 1, 0),
            t);
        unpack_masked(
            ps,
            bus.fetch(me.id, s[size_t(j)], net::MsgType::MaskedBroadcast, 1, 0),
            L.h_rows[size_t(j)], L.b_rows[size_t(j)]);
      } catch (const std::runtime_error&) {
        blamed.insert(s[size_t(j)]);
      }
    }
    L.y_acc = L.g.eval(me.id);
    for (int j = 0; j < t; ++j) {
      if (s[size_t(j)] == me.id) continue;
      if (L.feldman[size_t(j)].empty()) continue;  // already blamed
      PolyVec share;
      try {
        share = unpack_zq_vec(
            bus.fetch(me.id, s[size_t(j)], net::MsgType::NonceShare, 1, 0),
            ps.l);
      } catch (const std::runtime_error&) {
        blamed.insert(s[size_t(j)]);
        continue;
      }
      // dealing check against the broadcast images
      if (!vec_eq_mod_q(matvec(me.a_hat, share),
                        eval_images(L.feldman[size_t(j)], me.id)))
        blamed.insert(s[size_t(j)]);
      else
        L.y_acc = vec_add(L.y_acc, share);
    }
  }
  if (!blamed.empty()) {
    res.ok = false;
    res.blamed.assign(blamed.begin(), blamed.end());
    return res;
  }

  int R = cscp::round_count(t);
  int L_csa = cscp::csa_levels(t);

  // per-local threshold and carry state
  std::vector<std::vector<uint32_t>> thr(locs.size());
  std::vector<std::vector<int64_t>> b_sum(locs.size()), h_sum(locs.size());
  for (size_t li = 0; li < locs.size(); ++li) {
    PreLocal& L = locs[li];
    thr[li].assign(size_t(C), 0);
    b_sum[li].assign(size_t(C), 0);
    h_sum[li].assign(size_t(C), 0);
    for (int c = 0; c < C; ++c) {
      int64_t bs = 0, hs = 0;
      for (int j = 0; j < t; ++j) {
        bs += L.b_rows[size_t(j)][size_t(c)];
        hs += L.h_rows[size_t(j)][size_t(c)];
      }
      b_sum[li][size_t(c)] = bs;
      h_sum[li][size_t(c)] = hs;
      thr[li][size_t(c)] = uint32_t(bs % ps.alpha());
    }
    if (mode == CarryMode::circuit) {
      L.sess->set_thresholds(thr[li]);
      auto pays = std::vector<net::Bytes>(size_t(t));
      for (int j = 0; j < t; ++j)
        pays[size_t(j)] =
            bus.fetch(L.me->id, s[size_t(j)], net::MsgType::CsaGates, 1, 0);
      L.sess->absorb_round(1, false, pays);
    }
  }

  // ---- carry rounds 2..R ----
  if (mode == CarryMode::circuit) {
    for (int r = 2; r <= R; ++r) {
      net::MsgType type = (t >= 3 && r <= L_csa) ? net::MsgType::CsaGates
                                                 : net::MsgType::PrefixGates;
      int phases = locs.front().sess->round_has_substep(r) ? 2 : 1;
      for (int phase = 0; phase < phases; ++phase) {
        bool sub = phase == 1;
        for (PreLocal& L : locs) {
          Bytes pay = L.sess->round_payload(L.pos, r, sub);
          if (fault_hits(fault, MpcFaultKind::carry_gate, L.me->id) &&
              fault->round == r && fault->sub == sub && !pay.empty())
            pay[fault->byte_index % pay.size()] ^= fault->bit_mask;
          bus.post(L.me->id, 0, type, r, phase, std::move(pay));
        }
        for (PreLocal& L : locs) {
          auto pays = std::vector<net::Bytes>(size_t(t));
          for (int j = 0; j < t; ++j)
            pays[size_t(j)] = bus.fetch(L.me->id, s[size_t(j)], type, r, phase);
          L.sess->absorb_round(r, sub, pays);
        }
      }
    }
  }

  // fast-path decisions need every blind, which is why that mode is
  // restricted to fully local simulation
  std::vector<cscp::CarryDecision> fast_out;
  if (mode == CarryMode::fast) {
    fast_out.resize(size_t(C));
    for (int c = 0; c < C; ++c) {
      uint64_t rho_total = 0;
      for (const PreLocal& L : locs) rho_total += uint64_t(L.rho32[size_t(c)]);
      fast_out[size_t(c)] =
          cscp::plain_decision(ps, rho_total, thr.front()[size_t(c)]);
    }
  }

  // ---- assemble the public results per driven party ----
  for (size_t li = 0; li < locs.size(); ++li) {
    PreLocal& L = locs[li];
    const std::vector<cscp::CarryDecision>& outs =
        mode == CarryMode::circuit ? L.sess->outputs() : fast_out;

    PolyVec w1 = vec_zero(ps.k);
    int64_t M = ps.stripes();
    for (int c = 0; c < C; ++c) {
      int64_t val = h_sum[li][size_t(c)] + b_sum[li][size_t(c)] / ps.alpha() -
                    (outs[size_t(c)].c ? 1 : 0) + (outs[size_t(c)].delta ? 1 : 0);
      FlatIndex fi = split_flat(c);
      w1[size_t(fi.poly)][fi.coeff] = int32_t(((val % M) + M) % M);
    }

    std::vector<PolyVec> a_y(size_t(t), vec_zero(ps.k));
    for (int i = 0; i < t; ++i)
      for (int hh = 0; hh < t; ++hh)
        a_y[size_t(i)] = vec_add(
            a_y[size_t(i)], eval_images(L.feldman[size_t(hh)], s[size_t(i)]));

    MpcSessionState st;
    st.tau = tau;
    st.signers = s;
    st.w1 = w1;
    st.y_share = L.y_acc;
    st.a_y = std::move(a_y);
    st.y_const = L.g.constant();
    st.poly_coeffs.assign(L.g.coeffs.begin() + 1, L.g.coeffs.end());
    st.rho = L.rho32;
    st.session_keys = L.skeys;
    st.bundle_present = true;
    L.me->sessions[tau] = std::move(st);
  }

  // ---- public transcript, as seen on the wire ----
  MpcPreprocessTranscript& tr = res.transcript;
  tr.level = ps.level;
  tr.tau = tau;
  tr.signers = s;
  tr.circuit = mode == CarryMode::circuit;
  tr.h_tilde = locs.front().h_rows;
  tr.b_tilde = locs.front().b_rows;
  tr.feldman = locs.front().feldman;
  if (tr.circuit) {
    cscp::Transcript& ct = tr.carry;
    ct.level = ps.level;
    ct.n = t;
    ct.n_coeffs = C;
    ct.tau = tau;
    ct.t = thr.front();
    ct.rounds_used = R;
    int viewer = locs.front().me->id;
    for (int r = 1; r <= R; ++r) {
      net::MsgType type = r == 1 ? net::MsgType::CsaGates
                          : (t >= 3 && r <= L_csa) ? net::MsgType::CsaGates
                                                   : net::MsgType::PrefixGates;
      int phases = locs.front().sess->round_has_substep(r) ? 2 : 1;
      size_t round_bytes = 0;
      for (int phase = 0; phase < phases; ++phase) {
        for (int j = 0; j < t; ++j) {
          Bytes pay = bus.fetch(viewer, s[size_t(j)], type, r, phase);
          if (j == 0) round_bytes += pay.size();
          ct.messages.push_back({r, phase == 1, j, std::move(pay)});
        }
      }
      ct.bytes_per_round.push_back(round_bytes);
    }
  }

  res.ok = true;
  res.rounds = R;
  res.w1 = locs.front().me->sessions[tau].w1;
  return res;
}

// ---------------------------------------------------------------------------
// Online signing.
// ---------------------------------------------------------------------------

MpcSignResult mpc_sign(net::Bus& bus, const std::vector<MpcParty*>& local,
                       uint64_t tau, const Bytes& msg, const MpcFault* fault) {
  require(!local.empty(), "no local parties to drive");
  const MpcParty& head = *local.front();
  const ParamSet& ps = *head.ps;

  for (MpcParty* p : local) {
    auto it = p->sessions.find(tau);
    if (it == p->sessions.end())
      throw std::invalid_argument("unknown session id");
    if (it->second.spent)
      throw std::logic_error("nonce session already consumed");
  }

  MpcSessionState& s0 = local.front()->sessions.at(tau);
  const std::vector<int> signers = s0.signers;
  int t = int(signers.size());
  int coord = signers.front();
  int round = bus.last_round() + 1;

  Bytes mu = message_digest(head.pk.tr, msg);

  for (MpcParty* p : local)
    if (p->id == coord)
      bus.post(coord, 0, net::MsgType::Challenge, round, 0,
               challenge_hash(ps, mu, p->sessions.at(tau).w1));

  // one response broadcast per signer; the nonce share is gone afterwards
  for (MpcParty* p : local) {
    MpcSessionState& st = p->sessions.at(tau);
    Bytes ct = bus.fetch(p->id, coord, net::MsgType::Challenge, round, 0);
    if (ct != challenge_hash(ps, mu, st.w1))
      throw std::runtime_error("challenge does not match the session");
    Poly c = sample_in_ball(ps, ct);
    PolyVec z = vec_add(st.y_share, challenge_times_vec(c, p->s1_share));
    if (fault_hits(fault, MpcFaultKind::response, p->id)) {
      FlatIndex fi = split_flat(fault->coeff % (ps.l * N_COEFFS));
      z[size_t(fi.poly)][fi.coeff] += 1;
    }
    bus.post(p->id, 0, net::MsgType::Response, round, 1, pack_zq_vec(z));
    st.y_share.clear();
    st.spent = true;
  }

  // assembly: check every response against the public images first
  MpcSignResult res;
  MpcSessionState& st = local.front()->sessions.at(tau);
  Bytes ct = bus.fetch(head.id, coord, net::MsgType::Challenge, round, 0);
  Poly c = sample_in_ball(ps, ct);

  auto z_i = std::vector<PolyVec>(size_t(t));
  for (int i = 0; i < t; ++i)
    z_i[size_t(i)] = unpack_zq_vec(
        bus.fetch(head.id, signers[size_t(i)], net::MsgType::Response, round, 1),
        ps.l);

  for (int i = 0; i < t; ++i) {
    PolyVec want = vec_add(
        st.a_y[size_t(i)],
        challenge_times_vec(c, head.a_s1[size_t(signers[size_t(i)] - 1)]));
    if (!vec_eq_mod_q(matvec(head.a_hat, z_i[size_t(i)]), want))
      res.blamed.push_back(signers[size_t(i)]);
  }
  if (!res.blamed.empty()) {
    res.status = MpcSignStatus::blame;
    return res;
  }

  std::vector<int64_t> lam = lagrange_coeffs(signers);
  PolyVec z = vec_zero(ps.l);
  for (int i = 0; i < t; ++i)
    z = vec_add(z, vec_scale(lam[size_t(i)], z_i[size_t(i)]));

  res.z_norm = vec_inf_norm(z);
  if (res.z_norm >= ps.gamma1 - ps.beta) {
    res.status = MpcSignStatus::z_bound_abort;
    return res;
  }

  PolyVec r = public_w_approx(head.pk, head.a_hat, c, z);
  PolyVec h = public_hint(ps, r, st.w1);
  int weight = 0;
  for (const Poly& p : h)
    for (int i = 0; i < N_COEFFS; ++i) weight += p[i];
  res.hint_weight = weight;
  if (weight > ps.omega) {
    res.status = MpcSignStatus::hint_weight_abort;
    return res;
  }

  Signature sig{ct, z, h};
  if (!verify(head.pk, msg, sig)) {
    res.status = MpcSignStatus::verify_failed_abort;
    return res;
  }

  res.status = MpcSignStatus::ok;
  res.sig = std::move(sig);
  res.sig_bytes = sig_encode(ps, res.sig);
  // resolved: the reveal bundles are no longer needed
  for (MpcParty* p : local) {
    MpcSessionState& done = p->sessions.at(tau);
    done.y_const.clear();
    done.poly_coeffs.clear();
    done.rho.clear();
    done.session_keys.clear();
    done.bundle_present = false;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Blame.
// ---------------------------------------------------------------------------

std::vector<int> mpc_blame(const std::vector<MpcParty*>& parties, uint64_t tau,
                           const MpcPreprocessTranscript& tr) {
  const ParamSet& ps = params_for_level(tr.level);
  int t = int(tr.signers.size());
  int C = ps.n_k();

  std::vector<const MpcSessionState*> rv(size_t(t), nullptr);
  std::vector<const MpcParty*> who(size_t(t), nullptr);
  for (int i = 0; i < t; ++i) {
    for (const MpcParty* p : parties)
      if (p->id == tr.signers[size_t(i)]) who[size_t(i)] = p;
    require(who[size_t(i)] != nullptr, "missing a signer's state");
    auto it = who[size_t(i)]->sessions.find(tau);
    require(it != who[size_t(i)]->sessions.end(), "unknown session id");
    require(it->second.bundle_present, "reveal bundle unavailable");
    rv[size_t(i)] = &it->second;
  }

  std::set<int> blamed;

  // Pairwise session keys are mutually held; a mismatch implicates the pair.
  for (int a = 0; a < t; ++a)
    for (int b = a + 1; b < t; ++b)
      if (rv[size_t(a)]->session_keys[size_t(b)] !=
          rv[size_t(b)]->session_keys[size_t(a)]) {
        blamed.insert(tr.signers[size_t(a)]);
        blamed.insert(tr.signers[size_t(b)]);
      }

  for (int h = 0; h < t; ++h) {
    const MpcSessionState& reveal = *rv[size_t(h)];
    const NttMatrix& a_hat = who[size_t(h)]->a_hat;

    // dealing images
    bool bad = !vec_eq_mod_q(matvec(a_hat, reveal.y_const),
                             tr.feldman[size_t(h)][0]);
    for (size_t k = 0; !bad && k < reveal.poly_coeffs.size(); ++k)
      bad = !vec_eq_mod_q(matvec(a_hat, reveal.poly_coeffs[k]),
                          tr.feldman[size_t(h)][k + 1]);

    // masked broadcast, recomputed from the revealed key row
    if (!bad) {
      MaskRow row = gen_mask_row(ps, t, h, reveal.session_keys, tau, C);
      PolyVec w = matvec(a_hat, reveal.y_const);
      for (int cidx = 0; !bad && cidx < C; ++cidx) {
        if (reveal.rho[size_t(cidx)] != uint32_t(row.rho[size_t(cidx)])) {
          bad = true;
          break;
        }
        FlatIndex fi = split_flat(cidx);
        MaskedCoeff mc =
            mask_coeff(ps, w[size_t(fi.poly)][fi.coeff],
                       row.mask_h[size_t(cidx)], row.rho[size_t(cidx)], t);
        bad = mc.h_tilde != tr.h_tilde[size_t(h)][size_t(cidx)] ||
              mc.b_tilde != tr.b_tilde[size_t(h)][size_t(cidx)];
      }
    }

    // comparison circuit replay
    if (!bad && tr.circuit) {
      std::vector<uint32_t> rho32(reveal.rho.begin(), reveal.rho.end());
      bad = cscp::replay_party(ps, tr.carry, h, reveal.session_keys, rho32)
                .deviated;
    }

    if (bad) blamed.insert(tr.signers[size_t(h)]);
  }
  return {blamed.begin(), blamed.end()};
}

// ---------------------------------------------------------------------------
// Share refresh.
// ---------------------------------------------------------------------------

std::vector<int> mpc_refresh(std::vector<MpcParty>& parties, XofRng& rng,
                             const MpcFault* fault) {
  require(!parties.empty(), "no parties to refresh");
  const ParamSet& ps = *parties.front().ps;
  int n = int(parties.size());
  int t = parties.front().t;

  // zero-constant dealings
  auto f = std::vector<VecPolynomial>(size_t(n));
  for (int i = 0; i < n; ++i) {
    XofRng r = rng.fork(uint64_t(i + 1));
    f[size_t(i)] = sample_zero_poly(r, ps.l, t);
    if (fault_hits(fault, MpcFaultKind::refresh_constant, i + 1))
      f[size_t(i)].coeffs[0][0][0] = 1;
  }

  // broadcast images; a cheating dealer publishes the all-zero constant
  // image a valid dealing would have
  auto F = std::vector<std::vector<PolyVec>>(size_t(n));
  for (int i = 0; i < n; ++i) {
    for (const PolyVec& cf : f[size_t(i)].coeffs)
      F[size_t(i)].push_back(matvec(parties.front().a_hat, cf));
    if (fault_hits(fault, MpcFaultKind::refresh_constant, i + 1))
      F[size_t(i)][0] = vec_zero(ps.k);
  }

  std::set<int> blamed;
  PolyVec zero = vec_zero(ps.k);
  for (int i = 0; i < n; ++i) {
    // the constant image is publicly checkable
    if (!vec_eq_mod_q(F[size_t(i)][0], zero)) blamed.insert(i + 1);
  }
  for (int j = 1; j <= n && blamed.empty(); ++j)
    for (int i = 0; i < n; ++i) {
      if (!vec_eq_mod_q(matvec(parties.front().a_hat, f[size_t(i)].eval(j)),
                        eval_images(F[size_t(i)], j)))
        blamed.insert(i + 1);
    }
  if (!blamed.empty()) return {blamed.begin(), blamed.end()};

  // apply: shares, public share images, pairwise seeds
  for (int j = 0; j < n; ++j) {
    PolyVec add = vec_zero(ps.l);
    for (int i = 0; i < n; ++i)
      add = vec_add(add, f[size_t(i)].eval(j + 1));
    parties[size_t(j)].s1_share = vec_add(parties[size_t(j)].s1_share, add);
  }
  for (int x = 1; x <= n; ++x) {
    PolyVec delta = vec_zero(ps.k);
    for (int i = 0; i < n; ++i)
      delta = vec_add(delta, eval_images(F[size_t(i)], x));
    for (MpcParty& p : parties)
      p.a_s1[size_t(x - 1)] = vec_add(p.a_s1[size_t(x - 1)], delta);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      PrfStream p(nullptr, 0);
      p.add("talus-refresh")
          .add(uint64_t(i + 1))
          .add(uint64_t(j + 1))
          .add(pack_zq_vec(f[size_t(i)].eval(j + 1)))
          .add(pack_zq_vec(f[size_t(j)].eval(i + 1)));
      Seed32 s = p.squeeze_seed();
      parties[size_t(i)].master_seeds[size_t(j)] = s;
      parties[size_t(j)].master_seeds[size_t(i)] = s;
    }
  return {};
}

}  // namespace talus
