#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "talus/params.hpp"
#include "talus/prf.hpp"

namespace talus::cscp {

using Bytes = std::vector<uint8_t>;
// master[i][j] = master[j][i]: long-lived pairwise seed of parties i and j.
using SeedMatrix = std::vector<std::vector<Seed32>>;

// Per-session keys K_{ij} = PRF(seed_ij, "session" || tau). Never the master
// seed itself, so a blame reveal burns only one session.
SeedMatrix session_keys(const SeedMatrix& master, uint64_t tau);

// Row view for a party holding only its own master seeds: out[j] is the
// session key shared with party j, own slot left zero. Matches row `me` of
// session_keys on the full matrix.
std::vector<Seed32> session_key_row(const std::vector<Seed32>& master_row,
                                    int me, uint64_t tau);

// Number of 4:2/3:2 compressor levels needed to reduce n words to two.
int csa_levels(int n);
// Total simulated broadcast rounds: max(3, ceil(log2(n/2)) + 2). Level 1 of
// the CSA shares a round with the share distribution, the prefix comparison
// takes two more, and the two-party path always uses three.
int round_count(int n);

// Static shape of one session's circuits: opened-word and gadget slot counts
// per coefficient, plus the per-degree triple budget. Slot layouts are fixed
// (dead threshold slots stay reserved) so PRF indexing never depends on the
// public thresholds.
struct CircuitDescriptor {
  int n = 0;
  int n_coeffs = 0;
  int opens_per_coeff = 0;    // masked word openings, including dead slots
  int gadgets_per_coeff = 0;  // windowed AND gadgets, including dead slots
  int triples_deg2 = 0;       // compressor carry gadgets (session total)
  int triples_deg3 = 0;       // flattened 4:2 outputs + final cascades
  int triples_deg5 = 0;       // prefix group windows
  static CircuitDescriptor build(int n, int n_coeffs);
};

// One party's PRF-derived correlated randomness for a whole session: a mask
// share per opened word and subset-product shares per gadget window. Party 0
// (the lowest session index) completes every sharing from its dealer view,
// which is what lets a blame reveal of any single party regenerate that
// party's exact shares.
struct TripleStore {
  int n = 0;
  int n_coeffs = 0;
  uint64_t tau = 0;
  // mask_share[party][coeff][open_slot]: width-bit mask share word.
  std::vector<std::vector<std::vector<uint32_t>>> mask_share;
  // prod_share[party][coeff][gadget_slot]: bitset over variable subsets,
  // bit V = share of the product of the window masks indexed by V.
  std::vector<std::vector<std::vector<std::vector<uint64_t>>>> prod_share;
};

TripleStore derive_triples(const ParamSet& ps, const SeedMatrix& keys,
                           uint64_t tau, const CircuitDescriptor& desc);

// Test view of one gadget window: reconstructed mask bits and reconstructed
// subset products (bit V of `products`).
struct GadgetOpening {
  int n_vars = 0;
  uint32_t mask_bits = 0;
  std::vector<uint64_t> products;
};
GadgetOpening reconstruct_gadget(const ParamSet& ps, const TripleStore& store,
                                 const CircuitDescriptor& desc, int coeff,
                                 int gadget_slot);

// Outputs for one coefficient. delta collapses the two candidates with the
// public shortcut rules; the raw bits are kept for the statistics reports.
struct CarryDecision {
  bool c = false;
  bool delta = false;
  bool delta0 = false;
  bool delta1 = false;
};

struct TranscriptMessage {
  int round = 0;
  bool sub = false;  // output-share sub-step riding on the final round
  int party = 0;
  Bytes payload;
};

// Everything a verifier needs to replay one session: public context plus the
// ordered broadcast messages.
struct Transcript {
  int level = 0;
  int n = 0;
  int n_coeffs = 0;
  uint64_t tau = 0;
  std::vector<uint32_t> t;  // public per-coefficient thresholds
  std::vector<TranscriptMessage> messages;
  int rounds_used = 0;
  // bytes_per_round[r-1] = bytes broadcast by one party in round r (sub-steps
  // included in their carrying round).
  std::vector<size_t> bytes_per_round;
};

// Flip `bit_mask` into byte `byte_index` of the accused party's broadcast in
// (round, sub). Models a corrupted gate output on the wire.
struct CorruptionSpec {
  int party = -1;
  int round = 1;
  bool sub = false;
  size_t byte_index = 0;
  uint8_t bit_mask = 1;
};

// Stepwise multi-party evaluator. Drives either the prefix-tree circuit
// (n >= 3) or the two-party comparison (n == 2); both present the same
// round/payload interface so the host protocol can merge round 1 into its
// own first broadcast.
class Session {
 public:
  Session(const ParamSet& ps, const SeedMatrix& keys, uint64_t tau,
          const std::vector<std::vector<uint32_t>>& rho);
  // Single-party view: holds only `my_id`'s key row and inputs, so each
  // protocol participant can run its own session object. round_payload then
  // works for my_id alone; absorb_round still takes every party's wire
  // bytes, which the host protocol exchanges itself.
  Session(const ParamSet& ps, int n_parties, int my_id,
          const std::vector<Seed32>& my_keys, uint64_t tau,
          const std::vector<uint32_t>& my_rho);
  ~Session();
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  int total_rounds() const;
  bool round_has_substep(int round) const;
  // Thresholds must be set before any round that consumes them (every round
  // after the CSA phase; round 2 for n == 2).
  void set_thresholds(const std::vector<uint32_t>& t);

  Bytes round_payload(int party, int round, bool sub);
  void absorb_round(int round, bool sub, const std::vector<Bytes>& all_payloads);

  const std::vector<CarryDecision>& outputs() const;
  // Share words after each CSA level, for the reduction invariant tests:
  // level_words(L)[party][word][coeff].
  std::vector<std::vector<std::vector<uint32_t>>> level_words(int level) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SessionResult {
  std::vector<CarryDecision> out;
  Transcript transcript;
};

// One-shot driver: runs the full session over an in-process lockstep bus,
// recording the transcript. `corrupt`, when set, mangles that party's wire
// bytes exactly once.
SessionResult carry_compare(const ParamSet& ps, const SeedMatrix& keys,
                            uint64_t tau,
                            const std::vector<std::vector<uint32_t>>& rho,
                            const std::vector<uint32_t>& t,
                            const CorruptionSpec* corrupt = nullptr);

// Explicit two-party entry point; throws unless exactly two rho rows.
SessionResult dcf_compare(const ParamSet& ps, const SeedMatrix& keys,
                          uint64_t tau,
                          const std::vector<std::vector<uint32_t>>& rho,
                          const std::vector<uint32_t>& t,
                          const CorruptionSpec* corrupt = nullptr);

// Plaintext decisions plus the exact wire accounting of the genuine path,
// for bulk statistics runs that do not need the circuit itself.
struct FastResult {
  std::vector<CarryDecision> out;
  int rounds = 0;
  std::vector<size_t> bytes_per_round;  // per party, same convention as above
};
FastResult carry_compare_fast(const ParamSet& ps,
                              const std::vector<std::vector<uint32_t>>& rho,
                              const std::vector<uint32_t>& t);

// Plaintext reference for one coefficient.
CarryDecision plain_decision(const ParamSet& ps, uint64_t rho_sum, uint32_t t);

// Blame replay: regenerate every message the accused should have broadcast,
// given its session key row and its private rho inputs, and compare against
// the recorded transcript. Honest parties replay clean even when someone
// else corrupted the wire, because expected messages are recomputed from the
// transcript as received.
struct ReplayVerdict {
  bool deviated = false;
  int first_round = 0;
  bool sub = false;
};
ReplayVerdict replay_party(const ParamSet& ps, const Transcript& transcript,
                           int accused, const std::vector<Seed32>& accused_keys,
                           const std::vector<uint32_t>& accused_rho);

// Binary gate-transcript export: one frame per (gate id, party, masked bits)
// in deterministic order, as consumed by the audit tooling.
Bytes export_gate_transcript(const Transcript& transcript);

}  // namespace talus::cscp
