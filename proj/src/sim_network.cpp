#include "talus/sim_network.hpp"

#include <sstream>
#include <stdexcept>

namespace talus::net {

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::NonceShare: return "NonceShare";
    case MsgType::MaskedBroadcast: return "MaskedBroadcast";
    case MsgType::FeldmanCommit: return "FeldmanCommit";
    case MsgType::CsaGates: return "CsaGates";
    case MsgType::PrefixGates: return "PrefixGates";
    case MsgType::Challenge: return "Challenge";
    case MsgType::Response: return "Response";
    case MsgType::BlameReveal: return "BlameReveal";
  }
  return "unknown";
}

uint64_t payload_digest(const Bytes& payload) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : payload) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

SimNetwork::SimNetwork(int parties) : parties_(parties) {
  if (parties < 1) throw std::invalid_argument("need at least one party");
}

SimNetwork::Key SimNetwork::key(int from, int to, MsgType type, int round,
                                int phase) {
  return {round, phase, uint8_t(type), from, to};
}

void SimNetwork::post(int from, int to, MsgType type, int round, int phase,
                      Bytes payload) {
  if (from < 1 || from > parties_)
    throw std::invalid_argument("sender id out of range");
  if (to < 0 || to > parties_)
    throw std::invalid_argument("receiver id out of range");
  if (round < last_round_)
    throw std::logic_error("posting into a past round");
  last_round_ = round;

  MessageRecord rec;
  rec.round = round;
  rec.phase = phase;
  rec.type = type;
  rec.sender = from;
  rec.receiver = to;
  rec.bytes = payload.size();
  rec.digest = payload_digest(payload);
  ledger_.push_back(rec);

  auto [it, fresh] = slots_.emplace(key(from, to, type, round, phase),
                                    std::move(payload));
  (void)it;
  if (!fresh) throw std::logic_error("slot posted twice");
}

Bytes SimNetwork::fetch(int receiver, int from, MsgType type, int round,
                        int phase) {
  auto it = slots_.find(key(from, receiver, type, round, phase));
  if (it == slots_.end())
    it = slots_.find(key(from, 0, type, round, phase));
  if (it == slots_.end()) {
    std::ostringstream os;
    os << "no " << msg_type_name(type) << " from party " << from
       << " in round " << round << "." << phase;
    throw std::logic_error(os.str());
  }
  return it->second;
}

const Bytes& SimNetwork::payload(int from, int to, MsgType type, int round,
                                 int phase) const {
  auto it = slots_.find(key(from, to, type, round, phase));
  if (it == slots_.end())
    throw std::logic_error("slot was never posted");
  return it->second;
}

size_t SimNetwork::sent_bytes(int sender, int round,
                              std::optional<MsgType> type) const {
  size_t total = 0;
  for (const MessageRecord& r : ledger_) {
    if (sender != 0 && r.sender != sender) continue;
    if (round != 0 && r.round != round) continue;
    if (type && r.type != *type) continue;
    total += r.bytes;
  }
  return total;
}

size_t SimNetwork::record_count(int sender, int round,
                                std::optional<MsgType> type) const {
  size_t total = 0;
  for (const MessageRecord& r : ledger_) {
    if (sender != 0 && r.sender != sender) continue;
    if (round != 0 && r.round != round) continue;
    if (type && r.type != *type) continue;
    ++total;
  }
  return total;
}

void ReplayBus::post(int from, int to, MsgType type, int round, int phase,
                     Bytes payload) {
  if (round > last_round_) last_round_ = round;
  auto it = base_.slots_.find(SimNetwork::key(from, to, type, round, phase));
  if (it == base_.slots_.end() || it->second != payload) diverged_ = true;
}

Bytes ReplayBus::fetch(int receiver, int from, MsgType type, int round,
                       int phase) {
  if (round > last_round_) last_round_ = round;
  auto it = base_.slots_.find(SimNetwork::key(from, receiver, type, round, phase));
  if (it == base_.slots_.end())
    it = base_.slots_.find(SimNetwork::key(from, 0, type, round, phase));
  if (it == base_.slots_.end())
    throw std::logic_error("replayed slot was never recorded");
  return it->second;
}

}  // namespace talus::net
