#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

namespace talus::net {

using Bytes = std::vector<uint8_t>;

// Wire frame types shared by the in-process fabric and the TCP transport.
enum class MsgType : uint8_t {
  NonceShare = 1,
  MaskedBroadcast = 2,
  FeldmanCommit = 3,
  CsaGates = 4,
  PrefixGates = 5,
  Challenge = 6,
  Response = 7,
  BlameReveal = 8,
};
const char* msg_type_name(MsgType t);

// 64-bit FNV-1a, the digest stored in transcript indexes.
uint64_t payload_digest(const Bytes& payload);

struct MessageRecord {
  int round = 0;
  int phase = 0;  // sub-steps that share a round get consecutive phases
  MsgType type = MsgType::NonceShare;
  int sender = 0;    // 1-based party id
  int receiver = 0;  // 0 = broadcast
  size_t bytes = 0;
  uint64_t digest = 0;
};

// Lockstep message fabric. Senders post into an explicit (round, phase)
// slot; receivers fetch by full address. The in-process implementation
// resolves immediately and throws when the protocol reads a slot nobody
// filled; transports block until the frame arrives.
class Bus {
 public:
  virtual ~Bus() = default;
  // to == 0 broadcasts. Each (round, phase, type, from, to) slot is
  // single-use.
  virtual void post(int from, int to, MsgType type, int round, int phase,
                    Bytes payload) = 0;
  // Fetch the payload `from` addressed to `receiver` (or broadcast) in the
  // given slot. Broadcasts may be fetched by any party, own posts included.
  virtual Bytes fetch(int receiver, int from, MsgType type, int round,
                      int phase) = 0;
  // Highest round this endpoint has posted or observed.
  virtual int last_round() const = 0;
};

// In-process bus: every post lands in an append-only ledger with its full
// payload retained, so a finished run doubles as a replayable transcript.
// The round watermark only moves forward, which keeps the schedule honest.
class SimNetwork : public Bus {
 public:
  explicit SimNetwork(int parties);

  void post(int from, int to, MsgType type, int round, int phase,
            Bytes payload) override;
  Bytes fetch(int receiver, int from, MsgType type, int round,
              int phase) override;

  int parties() const { return parties_; }
  int last_round() const override { return last_round_; }
  const std::vector<MessageRecord>& ledger() const { return ledger_; }

  // Bytes posted, filtered by sender (0 = anyone), round (0 = all rounds)
  // and optionally frame type.
  size_t sent_bytes(int sender, int round,
                    std::optional<MsgType> type = {}) const;
  // Number of ledger records matching the same filters.
  size_t record_count(int sender, int round,
                      std::optional<MsgType> type = {}) const;

  // Stored payload lookup (throws if the slot was never posted).
  const Bytes& payload(int from, int to, MsgType type, int round,
                       int phase) const;

 private:
  friend class ReplayBus;
  using Key = std::tuple<int, int, uint8_t, int, int>;  // round,phase,type,from,to
  static Key key(int from, int to, MsgType type, int round, int phase);

  int parties_ = 0;
  int last_round_ = 0;
  std::vector<MessageRecord> ledger_;
  std::map<Key, Bytes> slots_;
};

// Serves a finished SimNetwork exchange back to the same party logic.
// fetch returns the recorded payloads; post checks the replayed bytes
// against the record and flags any divergence instead of delivering.
class ReplayBus : public Bus {
 public:
  explicit ReplayBus(const SimNetwork& base) : base_(base) {}

  void post(int from, int to, MsgType type, int round, int phase,
            Bytes payload) override;
  Bytes fetch(int receiver, int from, MsgType type, int round,
              int phase) override;
  int last_round() const override { return last_round_; }

  bool diverged() const { return diverged_; }

 private:
  const SimNetwork& base_;
  bool diverged_ = false;
  int last_round_ = 0;
};

}  // namespace talus::net
