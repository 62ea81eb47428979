#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "talus/carry_compare.hpp"
#include "talus/mldsa.hpp"
#include "talus/sim_network.hpp"

namespace talus {

// ---------------------------------------------------------------------------
// Party state.
// ---------------------------------------------------------------------------

// Per-session material one party keeps between preprocessing and signing.
// The nonce share is erased the moment it is used (success and aborts
// alike); the dealer-side reveal bundle survives until the session
// resolves so a failed signature can still be attributed. Master seeds
// never appear in the bundle: a reveal burns exactly one session.
struct MpcSessionState {
  uint64_t tau = 0;
  std::vector<int> signers;  // ascending 1-based ids
  PolyVec w1;                // public stripe indices, k polys
  PolyVec y_share;           // my aggregate nonce share, l polys
  bool spent = false;
  std::vector<PolyVec> a_y;  // public A*y_i per signer position

  PolyVec y_const;                   // my dealt constant
  std::vector<PolyVec> poly_coeffs;  // my degree 1..t-1 coefficients
  std::vector<uint32_t> rho;         // my low-part blinds per coefficient
  std::vector<Seed32> session_keys;  // my session key row, by position
  bool bundle_present = false;
};

struct MpcParty {
  int id = 0;  // 1-based
  const ParamSet* ps = nullptr;
  int t = 0;
  int n = 0;
  PublicKey pk;
  NttMatrix a_hat;
  PolyVec s1_share;                  // l polys, Shamir share of s1
  std::vector<Seed32> master_seeds;  // pairwise, by party; own slot zero
  std::vector<PolyVec> a_s1;         // public A*s1_j commitments, all parties
  Seed32 self_seed{};                // private sampling seed
  uint64_t last_tau = 0;             // monotone session-id watermark
  std::map<uint64_t, MpcSessionState> sessions;
};

struct MpcKeygenResult {
  PublicKey pk;
  std::vector<MpcParty> parties;
};

// Distributed key generation. Bounded per-party contributions keep the
// aggregate secrets within the signing norm bound, hash commitments bind
// the contribution images before they open, and every party stores the
// public A*s1_j share commitments consumed by the online response check.
// Requires t >= 2; t >= 3 additionally requires n >= 2t - 1 so the blame
// machinery retains an honest majority of reveal witnesses.
MpcKeygenResult mpc_keygen(const ParamSet& ps, int t, int n, XofRng& rng);

// ---------------------------------------------------------------------------
// Fault injection.
// ---------------------------------------------------------------------------

enum class MpcFaultKind {
  none,
  masked_h,          // +1 on one masked high coefficient of the broadcast
  masked_b,          // +1 on one blinded low coefficient
  carry_gate,        // flip wire bits of one comparison payload
  nonce_share,       // tamper one dealt nonce share (share-check target)
  response,          // corrupt the online z_i
  refresh_constant,  // deal a refresh polynomial with nonzero constant
};

struct MpcFault {
  MpcFaultKind kind = MpcFaultKind::none;
  int party = 0;  // offender id, 1-based
  int coeff = 0;  // flat coefficient index for masked/response faults
  int round = 2;  // carry_gate target round
  bool sub = false;
  size_t byte_index = 0;
  uint8_t bit_mask = 1;
};

// ---------------------------------------------------------------------------
// Preprocessing.
// ---------------------------------------------------------------------------

enum class CarryMode {
  circuit,  // run the shared comparison circuit on the wire
  fast,     // plaintext decisions; simulation-only bulk statistics path
};

// Public record of one preprocessing session: enough to re-check every
// broadcast and replay the comparison circuit message by message.
struct MpcPreprocessTranscript {
  int level = 0;
  uint64_t tau = 0;
  std::vector<int> signers;
  std::vector<std::vector<int32_t>> h_tilde;  // [position][coeff]
  std::vector<std::vector<int64_t>> b_tilde;  // [position][coeff]
  std::vector<std::vector<PolyVec>> feldman;  // [position][degree], k polys
  cscp::Transcript carry;                     // empty in fast mode
  bool circuit = true;
};

struct MpcPreprocessResult {
  bool ok = false;
  std::vector<int> blamed;  // immediate share-check verdicts
  uint64_t tau = 0;
  PolyVec w1;
  int rounds = 0;
  MpcPreprocessTranscript transcript;
};

// One preprocessing session for the signer set over the bus. `local` holds
// the parties this process drives: all of them in simulation, one per
// process over a transport. A session id at or below a party's watermark
// is rejected before any session key is derived. The boundary condition is
// deliberately not checked here; nobody holds the aggregate nonce, so bad
// nonces surface as verification casualties and cost one retry.
MpcPreprocessResult mpc_preprocess(net::Bus& bus,
                                   const std::vector<MpcParty*>& local,
                                   const std::vector<int>& signers,
                                   uint64_t tau,
                                   CarryMode mode = CarryMode::circuit,
                                   const MpcFault* fault = nullptr);

// ---------------------------------------------------------------------------
// Online signing.
// ---------------------------------------------------------------------------

enum class MpcSignStatus {
  ok,
  blame,             // a response failed its commitment check
  z_bound_abort,
  hint_weight_abort,
  verify_failed_abort,  // boundary casualty: retry with a fresh session
};

struct MpcSignResult {
  MpcSignStatus status = MpcSignStatus::verify_failed_abort;
  Signature sig;
  Bytes sig_bytes;  // empty unless status == ok
  std::vector<int> blamed;
  int32_t z_norm = 0;
  int hint_weight = 0;
};

// The one-round online phase: challenge broadcast, one response broadcast
// per signer, local assembly. Every response is checked against the public
// A*y and A*s1 commitments before aggregation, and no signature leaves
// unless it verifies. The session is consumed either way.
MpcSignResult mpc_sign(net::Bus& bus, const std::vector<MpcParty*>& local,
                       uint64_t tau, const Bytes& msg,
                       const MpcFault* fault = nullptr);

// ---------------------------------------------------------------------------
// Blame.
// ---------------------------------------------------------------------------

// Reveal-and-replay attribution for a failed session: recompute each
// party's round-one broadcasts from its revealed session material, replay
// its comparison messages, and report every deviation. An empty verdict
// means the failure was an honest modular wrap and the session is simply
// retried with a fresh nonce.
std::vector<int> mpc_blame(const std::vector<MpcParty*>& parties, uint64_t tau,
                           const MpcPreprocessTranscript& transcript);

// ---------------------------------------------------------------------------
// Share refresh.
// ---------------------------------------------------------------------------

// Proactive rerandomization: zero-constant dealings verified against their
// broadcast A-images, share update, public A*s1_j table update, pairwise
// seed rotation. Returns the blamed dealers; on any blame nothing changes.
std::vector<int> mpc_refresh(std::vector<MpcParty>& parties, XofRng& rng,
                             const MpcFault* fault = nullptr);

}  // namespace talus
