#pragma once

#include <optional>
#include <vector>

#include "talus/mldsa.hpp"
#include "talus/shamir.hpp"

namespace talus {

// Coordinator-based threshold signing. The coordinator is a logical trusted
// role: its secrets live inside TeeCoordinatorState and are reachable only
// through the operations declared here. Signers hold Shamir shares of s1 and
// answer challenge broadcasts with a single response message.

struct NonceSession {
  uint64_t tau = 0;
  std::vector<int> signers;       // signing set S, 1-based evaluation points
  PolyVec w1;                     // broadcast nonce commitment (high parts)
  std::vector<PolyVec> y_shares;  // per signer, same order as `signers`;
                                  // signer-held in a distributed deployment
  bool consumed = false;
  int attempts = 0;               // nonce DKGs run until the boundary check
                                  // accepted this session
};

enum class TeeSignStatus { ok, z_bound_abort, hint_weight_abort };

struct TeeKeygenResult;

struct TeeSignResult {
  TeeSignStatus status = TeeSignStatus::ok;
  Signature sig;        // populated iff status == ok
  Bytes sig_bytes;      // FIPS 204 encoding, iff status == ok
  int32_t z_norm = 0;
  int hint_weight = 0;  // meaningful unless the z bound already failed
};

struct TeeRefreshResult {
  std::vector<Share> shares;
  int messages = 0;  // pairwise share deliveries in the one refresh round
};

class TeeCoordinatorState {
 public:
  TeeCoordinatorState() = default;

  const ParamSet& params() const { return *ps_; }
  const PublicKey& public_key() const { return pk_; }
  int threshold() const { return t_; }
  int parties() const { return n_; }

  const NonceSession* session(uint64_t tau) const;
  std::optional<uint64_t> next_unconsumed() const;
  size_t pool_size() const { return pool_.size(); }

  // Versioned binary image of the whole coordinator (keys, commitments,
  // nonce pool with consumed flags), for the CLI's persisted state.
  Bytes serialize() const;
  static TeeCoordinatorState deserialize(const Bytes& raw);

 private:
  struct PoolEntry {
    NonceSession pub;
    std::vector<PolyVec> a_y;  // A*y_i per signer, kept for blame
  };

  const ParamSet* ps_ = nullptr;
  int t_ = 0, n_ = 0;
  PublicKey pk_;
  NttMatrix a_hat_;
  PolyVec s2_, t0_;               // never leave the coordinator
  std::vector<PolyVec> a_s1_;     // A*s1_i per party id, captured at keygen
  std::vector<PoolEntry> pool_;
  uint64_t next_tau_ = 1;

  PoolEntry& entry(uint64_t tau);
  const PoolEntry& entry(uint64_t tau) const;
  TeeSignResult assemble(PoolEntry& e, const std::vector<int>& ids,
                         const Bytes& msg,
                         const std::vector<PolyVec>& responses);

  friend struct TeeKeygenResult;
  friend TeeKeygenResult tee_keygen(const ParamSet& ps, int t, int n,
                                    const Seed32& seed);
  friend std::optional<uint64_t> tee_preprocess_attempt(
      TeeCoordinatorState& st, const std::vector<int>& signers, XofRng& rng);
  friend NonceSession tee_preprocess(TeeCoordinatorState& st,
                                     const std::vector<int>& signers,
                                     XofRng& rng);
  friend Bytes tee_challenge(const TeeCoordinatorState& st, uint64_t tau,
                             const Bytes& msg);
  friend TeeSignResult tee_sign(TeeCoordinatorState& st, uint64_t tau,
                                const Bytes& msg,
                                const std::vector<PolyVec>& responses);
  friend TeeSignResult tee_sign_reduced(TeeCoordinatorState& st, uint64_t tau,
                                        const Bytes& msg,
                                        const std::vector<int>& keep,
                                        const std::vector<PolyVec>& responses,
                                        bool allow_nonce_reuse);
  friend std::vector<int> tee_blame(const TeeCoordinatorState& st,
                                    uint64_t tau,
                                    const std::vector<PolyVec>& responses,
                                    const Bytes& c_tilde);
};

struct TeeKeygenResult {
  PublicKey pk;
  std::vector<Share> shares;  // s1 shares for parties 1..N
  TeeCoordinatorState state;
};

// Standard key generation from `seed` (pk is bit-identical to single-party
// keygen on the same seed), followed by a threshold-T Shamir sharing of s1.
// Any N >= T is accepted; there is no honest-majority gate in this profile.
TeeKeygenResult tee_keygen(const ParamSet& ps, int t, int n,
                           const Seed32& seed);

// One nonce-DKG attempt for the signing set: deals per-party bounded nonce
// polynomials, aggregates w = A*y, and pools a session only when the
// boundary check accepts. Returns the new session id, or nullopt.
std::optional<uint64_t> tee_preprocess_attempt(TeeCoordinatorState& st,
                                               const std::vector<int>& signers,
                                               XofRng& rng);

// Repeats attempts until one is accepted; the returned session records how
// many were needed.
NonceSession tee_preprocess(TeeCoordinatorState& st,
                            const std::vector<int>& signers, XofRng& rng);

// Challenge broadcast for a pooled session: c_tilde binding msg and the
// session's w1. Pure; does not consume the session.
Bytes tee_challenge(const TeeCoordinatorState& st, uint64_t tau,
                    const Bytes& msg);

// Signer-side response z_i = y_i + c * s1_i.
PolyVec tee_response(const ParamSet& ps, const Share& key_share,
                     const PolyVec& y_share, const Bytes& c_tilde);

// Coordinator assembly: aggregates the responses with Lagrange weights,
// enforces the z bound and the hint weight, and emits the encoded
// signature. The session is consumed on entry, aborts included; a second
// call on the same tau throws before any aggregation.
TeeSignResult tee_sign(TeeCoordinatorState& st, uint64_t tau, const Bytes& msg,
                       const std::vector<PolyVec>& responses);

// Retry of a consumed session with a reduced signing set (|keep| >= T,
// keep a subset of the session's signers) after blame excluded an offender.
// Nonce reuse is disabled unless the caller opts in explicitly.
TeeSignResult tee_sign_reduced(TeeCoordinatorState& st, uint64_t tau,
                               const Bytes& msg, const std::vector<int>& keep,
                               const std::vector<PolyVec>& responses,
                               bool allow_nonce_reuse = false);

// Full honest round for tests and the CLI: challenge, responses from the
// listed key shares, assembly.
TeeSignResult tee_sign_round(TeeCoordinatorState& st, uint64_t tau,
                             const Bytes& msg,
                             const std::vector<Share>& key_shares);

// Flags every signer whose response violates A*z_i = A*y_i + c*A*s1_i,
// using the commitments captured at keygen and preprocessing.
std::vector<int> tee_blame(const TeeCoordinatorState& st, uint64_t tau,
                           const std::vector<PolyVec>& responses,
                           const Bytes& c_tilde);

// True iff the dealt values lie on one degree <= t-1 polynomial with a zero
// constant term (the proactive-refresh contribution contract).
bool tee_refresh_contribution_ok(int t, const std::vector<int>& ids,
                                 const std::vector<PolyVec>& dealt);

// One proactive refresh round: every party deals a zero-secret polynomial,
// contributions are checked, and shares are updated in place. The
// reconstructed secret and the public key are unchanged.
TeeRefreshResult tee_refresh(const ParamSet& ps, int t,
                             const std::vector<Share>& shares, XofRng& rng);

}  // namespace talus
