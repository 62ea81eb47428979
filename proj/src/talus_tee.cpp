#include "talus/talus_tee.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "talus/bcc.hpp"
#include "talus/ntt.hpp"
#include "talus/rounding.hpp"

namespace talus {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Signing-set sanity: 1-based ids, in range, no duplicates, at least T.
void check_signers(const std::vector<int>& ids, int t, int n) {
  require(int(ids.size()) >= t, "signing set smaller than the threshold");
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    require(sorted[i] >= 1 && sorted[i] <= n, "signer id out of range");
    require(i == 0 || sorted[i] != sorted[i - 1], "duplicate signer id");
  }
}

int hint_weight_of(const PolyVec& h) {
  int w = 0;
  for (const Poly& p : h)
    for (int i = 0; i < N_COEFFS; ++i) w += (p[i] != 0);
  return w;
}

bool vec_eq_mod_q(const PolyVec& a, const PolyVec& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    for (int j = 0; j < N_COEFFS; ++j)
      if (freeze(a[i][j]) != freeze(b[i][j])) return false;
  return true;
}

// ---- binary image helpers -------------------------------------------------

void put_u32(Bytes& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(uint8_t(v >> (8 * i)));
}

void put_u64(Bytes& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(uint8_t(v >> (8 * i)));
}

void put_poly(Bytes& b, const Poly& p) {
  for (int i = 0; i < N_COEFFS; ++i) put_u32(b, uint32_t(p[i]));
}

void put_vec(Bytes& b, const PolyVec& v) {
  put_u32(b, uint32_t(v.size()));
  for (const Poly& p : v) put_poly(b, p);
}

struct ImageReader {
  const Bytes& raw;
  size_t off = 0;

  void need(size_t n) const {
    if (off + n > raw.size())
      throw std::runtime_error("coordinator image truncated");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(raw[off + size_t(i)]) << (8 * i);
    off += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(raw[off + size_t(i)]) << (8 * i);
    off += 8;
    return v;
  }
  Poly poly() {
    Poly p;
    for (int i = 0; i < N_COEFFS; ++i) p[i] = int32_t(u32());
    return p;
  }
  PolyVec vec(size_t max_len = 64) {
    size_t n = u32();
    if (n > max_len) throw std::runtime_error("coordinator image corrupt");
    PolyVec v(n);
    for (size_t i = 0; i < n; ++i) v[i] = poly();
    return v;
  }
  Bytes bytes() {
    size_t n = u32();
    need(n);
    Bytes b(raw.begin() + long(off), raw.begin() + long(off + n));
    off += n;
    return b;
  }
};

constexpr char kImageMagic[8] = {'T', 'L', 'T', 'C', '0', '0', '0', '1'};

}  // namespace

// ---- coordinator state ----------------------------------------------------

const NonceSession* TeeCoordinatorState::session(uint64_t tau) const {
  for (const PoolEntry& e : pool_)
    if (e.pub.tau == tau) return &e.pub;
  return nullptr;
}

std::optional<uint64_t> TeeCoordinatorState::next_unconsumed() const {
  for (const PoolEntry& e : pool_)
    if (!e.pub.consumed) return e.pub.tau;
  return std::nullopt;
}

TeeCoordinatorState::PoolEntry& TeeCoordinatorState::entry(uint64_t tau) {
  for (PoolEntry& e : pool_)
    if (e.pub.tau == tau) return e;
  throw std::invalid_argument("unknown nonce session");
}

const TeeCoordinatorState::PoolEntry& TeeCoordinatorState::entry(
    uint64_t tau) const {
  for (const PoolEntry& e : pool_)
    if (e.pub.tau == tau) return e;
  throw std::invalid_argument("unknown nonce session");
}

Bytes TeeCoordinatorState::serialize() const {
  Bytes b;
  b.insert(b.end(), kImageMagic, kImageMagic + 8);
  put_u32(b, uint32_t(ps_->level));
  put_u32(b, uint32_t(t_));
  put_u32(b, uint32_t(n_));
  put_u64(b, next_tau_);
  put_u32(b, uint32_t(pk_.raw.size()));
  b.insert(b.end(), pk_.raw.begin(), pk_.raw.end());
  put_vec(b, s2_);
  put_vec(b, t0_);
  put_u32(b, uint32_t(a_s1_.size()));
  for (const PolyVec& v : a_s1_) put_vec(b, v);
  put_u32(b, uint32_t(pool_.size()));
  for (const PoolEntry& e : pool_) {
    put_u64(b, e.pub.tau);
    put_u32(b, uint32_t(e.pub.signers.size()));
    for (int id : e.pub.signers) put_u32(b, uint32_t(id));
    put_u32(b, uint32_t(e.pub.attempts));
    b.push_back(e.pub.consumed ? 1 : 0);
    put_vec(b, e.pub.w1);
    for (const PolyVec& v : e.pub.y_shares) put_vec(b, v);
    for (const PolyVec& v : e.a_y) put_vec(b, v);
  }
  return b;
}

TeeCoordinatorState TeeCoordinatorState::deserialize(const Bytes& raw) {
  ImageReader r{raw};
  r.need(8);
  if (std::memcmp(raw.data(), kImageMagic, 8) != 0)
    throw std::runtime_error("not a coordinator image");
  r.off = 8;

  TeeCoordinatorState st;
  st.ps_ = &params_for_level(int(r.u32()));
  st.t_ = int(r.u32());
  st.n_ = int(r.u32());
  st.next_tau_ = r.u64();
  Bytes pk_raw = r.bytes();
  auto pk = pk_decode(*st.ps_, pk_raw);
  if (!pk) throw std::runtime_error("coordinator image corrupt");
  st.pk_ = *pk;
  st.a_hat_ = expand_a(*st.ps_, st.pk_.rho);
  st.s2_ = r.vec();
  st.t0_ = r.vec();
  size_t n_parties = r.u32();
  if (n_parties != size_t(st.n_))
    throw std::runtime_error("coordinator image corrupt");
  st.a_s1_.reserve(n_parties);
  for (size_t i = 0; i < n_parties; ++i) st.a_s1_.push_back(r.vec());
  size_t n_pool = r.u32();
  if (n_pool > (size_t(1) << 24))
    throw std::runtime_error("coordinator image corrupt");
  st.pool_.reserve(n_pool);
  for (size_t i = 0; i < n_pool; ++i) {
    PoolEntry e;
    e.pub.tau = r.u64();
    size_t n_signers = r.u32();
    if (n_signers > size_t(st.n_))
      throw std::runtime_error("coordinator image corrupt");
    e.pub.signers.reserve(n_signers);
    for (size_t j = 0; j < n_signers; ++j) e.pub.signers.push_back(int(r.u32()));
    e.pub.attempts = int(r.u32());
    r.need(1);
    e.pub.consumed = raw[r.off++] != 0;
    e.pub.w1 = r.vec();
    e.pub.y_shares.reserve(n_signers);
    for (size_t j = 0; j < n_signers; ++j) e.pub.y_shares.push_back(r.vec());
    e.a_y.reserve(n_signers);
    for (size_t j = 0; j < n_signers; ++j) e.a_y.push_back(r.vec());
    st.pool_.push_back(std::move(e));
  }
  return st;
}

// ---- key generation -------------------------------------------------------

TeeKeygenResult tee_keygen(const ParamSet& ps, int t, int n,
                           const Seed32& seed) {
  require(t >= 1 && n >= t, "need 1 <= T <= N");

  KeyPair kp = keygen(ps, seed);
  XofRng share_rng = XofRng(seed).fork("tee-shamir");
  std::vector<Share> shares = share_secret(share_rng, kp.sk.s1, t, n);

  TeeKeygenResult out;
  out.pk = kp.pk;
  out.shares = shares;
  out.state.ps_ = &ps;
  out.state.t_ = t;
  out.state.n_ = n;
  out.state.pk_ = kp.pk;
  out.state.a_hat_ = expand_a(ps, kp.pk.rho);
  out.state.s2_ = kp.sk.s2;
  out.state.t0_ = kp.sk.t0;
  out.state.a_s1_.reserve(size_t(n));
  for (const Share& sh : shares)
    out.state.a_s1_.push_back(matvec(out.state.a_hat_, sh.value));
  return out;
}

// ---- nonce preprocessing --------------------------------------------------

std::optional<uint64_t> tee_preprocess_attempt(TeeCoordinatorState& st,
                                               const std::vector<int>& signers,
                                               XofRng& rng) {
  const ParamSet& ps = *st.ps_;
  check_signers(signers, st.t_, st.n_);

  int32_t bound = ps.gamma1 / int32_t(signers.size());
  NonceDkg dkg = nonce_dkg(rng, ps.l, signers, st.t_, bound);

  PolyVec y0 = vec_zero(ps.l);
  for (const VecPolynomial& g : dkg.polys) y0 = vec_add(y0, g.constant());
  PolyVec w = matvec(st.a_hat_, y0);
  if (!bcc_check(ps, w).pass) return std::nullopt;

  TeeCoordinatorState::PoolEntry e;
  e.pub.tau = st.next_tau_++;
  e.pub.signers = signers;
  e.pub.w1 = decompose_vec(ps, w).r1;
  e.pub.attempts = 1;
  for (size_t i = 0; i < signers.size(); ++i) {
    PolyVec y_i = vec_zero(ps.l);
    for (size_t h = 0; h < signers.size(); ++h)
      y_i = vec_add(y_i, dkg.shares[h][i]);
    e.a_y.push_back(matvec(st.a_hat_, y_i));
    e.pub.y_shares.push_back(std::move(y_i));
  }
  st.pool_.push_back(std::move(e));
  return st.pool_.back().pub.tau;
}

NonceSession tee_preprocess(TeeCoordinatorState& st,
                            const std::vector<int>& signers, XofRng& rng) {
  for (int attempt = 1;; ++attempt) {
    auto tau = tee_preprocess_attempt(st, signers, rng);
    if (tau) {
      NonceSession& s = st.entry(*tau).pub;
      s.attempts = attempt;
      return s;
    }
  }
}

// ---- signing --------------------------------------------------------------

Bytes tee_challenge(const TeeCoordinatorState& st, uint64_t tau,
                    const Bytes& msg) {
  const NonceSession& s = st.entry(tau).pub;
  Bytes mu = message_digest(st.public_key().tr, msg);
  return challenge_hash(st.params(), mu, s.w1);
}

PolyVec tee_response(const ParamSet& ps, const Share& key_share,
                     const PolyVec& y_share, const Bytes& c_tilde) {
  Poly c = sample_in_ball(ps, c_tilde);
  return vec_add(y_share, challenge_times_vec(c, key_share.value));
}

TeeSignResult TeeCoordinatorState::assemble(
    PoolEntry& e, const std::vector<int>& ids, const Bytes& msg,
    const std::vector<PolyVec>& responses) {
  const ParamSet& ps = *ps_;
  Bytes mu = message_digest(pk_.tr, msg);
  Bytes c_tilde = challenge_hash(ps, mu, e.pub.w1);
  Poly c = sample_in_ball(ps, c_tilde);

  std::vector<int64_t> lam = lagrange_coeffs(ids);
  PolyVec z = vec_zero(ps.l);
  for (size_t i = 0; i < ids.size(); ++i)
    z = vec_add(z, vec_scale(lam[i], responses[i]));

  TeeSignResult res;
  res.z_norm = vec_inf_norm(z);
  if (res.z_norm >= ps.gamma1 - ps.beta) {
    res.status = TeeSignStatus::z_bound_abort;
    return res;
  }

  PolyVec r = public_w_approx(pk_, a_hat_, c, z);
  PolyVec h = public_hint(ps, r, e.pub.w1);
  res.hint_weight = hint_weight_of(h);
  if (res.hint_weight > ps.omega) {
    res.status = TeeSignStatus::hint_weight_abort;
    return res;
  }

  res.sig = Signature{c_tilde, z, h};
  res.sig_bytes = sig_encode(ps, res.sig);
  if (!verify(pk_, msg, res.sig))
    throw std::runtime_error("assembled signature failed self-verification");
  res.status = TeeSignStatus::ok;
  return res;
}

TeeSignResult tee_sign(TeeCoordinatorState& st, uint64_t tau, const Bytes& msg,
                       const std::vector<PolyVec>& responses) {
  TeeCoordinatorState::PoolEntry& e = st.entry(tau);
  if (e.pub.consumed)
    throw std::logic_error("nonce session already consumed");
  require(responses.size() == e.pub.signers.size(),
          "one response per session signer expected");
  e.pub.consumed = true;  // one-time use, aborts included
  return st.assemble(e, e.pub.signers, msg, responses);
}

TeeSignResult tee_sign_reduced(TeeCoordinatorState& st, uint64_t tau,
                               const Bytes& msg, const std::vector<int>& keep,
                               const std::vector<PolyVec>& responses,
                               bool allow_nonce_reuse) {
  if (!allow_nonce_reuse)
    throw std::logic_error(
        "reduced-set retry reuses a consumed nonce; enable it explicitly");
  TeeCoordinatorState::PoolEntry& e = st.entry(tau);
  check_signers(keep, st.t_, st.n_);
  for (int id : keep)
    require(std::find(e.pub.signers.begin(), e.pub.signers.end(), id) !=
                e.pub.signers.end(),
            "kept signer not in the session's signing set");
  require(responses.size() == keep.size(), "one response per kept signer");
  e.pub.consumed = true;
  return st.assemble(e, keep, msg, responses);
}

TeeSignResult tee_sign_round(TeeCoordinatorState& st, uint64_t tau,
                             const Bytes& msg,
                             const std::vector<Share>& key_shares) {
  const NonceSession* s = st.session(tau);
  require(s != nullptr, "unknown nonce session");
  Bytes c_tilde = tee_challenge(st, tau, msg);

  std::vector<PolyVec> responses;
  responses.reserve(s->signers.size());
  for (size_t i = 0; i < s->signers.size(); ++i) {
    auto it = std::find_if(key_shares.begin(), key_shares.end(),
                           [&](const Share& sh) { return sh.id == s->signers[i]; });
    require(it != key_shares.end(), "missing key share for a session signer");
    responses.push_back(tee_response(st.params(), *it, s->y_shares[i], c_tilde));
  }
  return tee_sign(st, tau, msg, responses);
}

// ---- blame ----------------------------------------------------------------

std::vector<int> tee_blame(const TeeCoordinatorState& st, uint64_t tau,
                           const std::vector<PolyVec>& responses,
                           const Bytes& c_tilde) {
  const TeeCoordinatorState::PoolEntry& e = st.entry(tau);
  require(responses.size() == e.pub.signers.size(),
          "one response per session signer expected");
  Poly c = sample_in_ball(st.params(), c_tilde);

  std::vector<int> offenders;
  for (size_t i = 0; i < e.pub.signers.size(); ++i) {
    int id = e.pub.signers[i];
    PolyVec lhs = matvec(st.a_hat_, responses[i]);
    PolyVec rhs =
        vec_add(e.a_y[i], challenge_times_vec(c, st.a_s1_[size_t(id - 1)]));
    if (!vec_eq_mod_q(lhs, rhs)) offenders.push_back(id);
  }
  return offenders;
}

// ---- proactive refresh ----------------------------------------------------

bool tee_refresh_contribution_ok(int t, const std::vector<int>& ids,
                                 const std::vector<PolyVec>& dealt) {
  if (t < 1 || dealt.size() != ids.size() || int(ids.size()) < t) return false;

  // Interpolate through the first t points and check that the remaining
  // points and the constant term agree with that polynomial mod q.
  auto weights_at = [&](int64_t x) {
    auto w = std::vector<int64_t>(size_t(t), 0);
    for (int m = 0; m < t; ++m) {
      int64_t num = 1, den = 1;
      for (int u = 0; u < t; ++u) {
        if (u == m) continue;
        num = num * freeze(x - ids[size_t(u)]) % Q;
        den = den * freeze(ids[size_t(m)] - ids[size_t(u)]) % Q;
      }
      w[size_t(m)] = num * modpow(den, Q - 2, Q) % Q;
    }
    return w;
  };
  auto predicted = [&](const std::vector<int64_t>& w, size_t poly, int coeff) {
    int64_t acc = 0;
    for (int m = 0; m < t; ++m)
      acc = (acc + w[size_t(m)] * freeze(dealt[size_t(m)][poly][coeff])) % Q;
    return int32_t(acc);
  };

  size_t dim = dealt[0].size();
  for (const PolyVec& v : dealt)
    if (v.size() != dim) return false;

  std::vector<int64_t> w0 = weights_at(0);
  for (size_t p = 0; p < dim; ++p)
    for (int j = 0; j < N_COEFFS; ++j)
      if (predicted(w0, p, j) != 0) return false;

  for (size_t i = size_t(t); i < ids.size(); ++i) {
    std::vector<int64_t> wi = weights_at(ids[i]);
    for (size_t p = 0; p < dim; ++p)
      for (int j = 0; j < N_COEFFS; ++j)
        if (predicted(wi, p, j) != freeze(dealt[i][p][j])) return false;
  }
  return true;
}

TeeRefreshResult tee_refresh(const ParamSet& ps, int t,
                             const std::vector<Share>& shares, XofRng& rng) {
  int n = int(shares.size());
  require(n >= t && t >= 1, "need at least T shares to refresh");

  std::vector<int> ids;
  ids.reserve(size_t(n));
  for (const Share& sh : shares) ids.push_back(sh.id);

  TeeRefreshResult out;
  out.shares = shares;
  out.messages = n * (n - 1);
  for (int dealer = 0; dealer < n; ++dealer) {
    VecPolynomial delta = sample_zero_poly(rng, ps.l, t);
    std::vector<PolyVec> dealt;
    dealt.reserve(size_t(n));
    for (int id : ids) dealt.push_back(delta.eval(id));
    if (!tee_refresh_contribution_ok(t, ids, dealt))
      throw std::runtime_error(
          "degree/constant-term violations detected via zero-reconstruction "
          "check");
    for (int i = 0; i < n; ++i)
      out.shares[size_t(i)].value =
          vec_add(out.shares[size_t(i)].value, dealt[size_t(i)]);
  }
  return out;
}

}  // namespace talus
