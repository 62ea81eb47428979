#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "talus/keccak.hpp"

namespace talus {

using Seed32 = std::array<uint8_t, 32>;

// Domain-separated PRF stream: every field is length-prefixed before
// absorption so distinct label/argument sequences can never collide.
class PrfStream {
 public:
  explicit PrfStream(const uint8_t* key, size_t len) : sh_(Shake::SHAKE256) {
    sh_.absorb_u64(len);
    sh_.absorb(key, len);
  }
  explicit PrfStream(const Seed32& key) : PrfStream(key.data(), key.size()) {}
  explicit PrfStream(const std::vector<uint8_t>& key)
      : PrfStream(key.data(), key.size()) {}

  PrfStream& add(std::string_view label) {
    sh_.absorb_u64(label.size());
    sh_.absorb(label);
    return *this;
  }
  PrfStream& add(uint64_t x) {
    sh_.absorb_u64(sizeof x);
    sh_.absorb_u64(x);
    return *this;
  }
  PrfStream& add(const std::vector<uint8_t>& v) {
    sh_.absorb_u64(v.size());
    sh_.absorb(v);
    return *this;
  }
  PrfStream& add(const Seed32& v) {
    sh_.absorb_u64(v.size());
    sh_.absorb(v.data(), v.size());
    return *this;
  }

  void squeeze(uint8_t* out, size_t len) { sh_.squeeze(out, len); }
  std::vector<uint8_t> squeeze(size_t len) { return sh_.squeeze(len); }
  Seed32 squeeze_seed() {
    Seed32 s;
    sh_.squeeze(s.data(), s.size());
    return s;
  }
  uint64_t squeeze_u64() { return sh_.squeeze_u64(); }

 private:
  Shake sh_;
};

// Deterministic RNG over a SHAKE256 stream. Forking derives independent
// child streams, which keeps multi-threaded Monte Carlo runs reproducible.
class XofRng {
 public:
  explicit XofRng(uint64_t seed) {
    PrfStream p(nullptr, 0);
    p.add("talus-rng").add(seed);
    seed_ = p.squeeze_seed();
    reset_stream();
  }
  explicit XofRng(const Seed32& seed) : seed_(seed) { reset_stream(); }

  XofRng fork(uint64_t index) const {
    PrfStream p(seed_);
    p.add("fork").add(index);
    return XofRng(p.squeeze_seed());
  }
  XofRng fork(std::string_view label) const {
    PrfStream p(seed_);
    p.add("fork-label").add(label);
    return XofRng(p.squeeze_seed());
  }

  uint64_t u64() { return sh_.squeeze_u64(); }
  uint32_t u32() {
    if (buf_left_ == 0) {
      buf_ = sh_.squeeze_u64();
      buf_left_ = 2;
    }
    uint32_t v = uint32_t(buf_);
    buf_ >>= 32;
    --buf_left_;
    return v;
  }
  bool bit() { return (u32() & 1) != 0; }

  // Uniform value in [0, bound), bound >= 1.
  uint64_t below(uint64_t bound) {
    if (bound <= 1) return 0;
    if ((bound & (bound - 1)) == 0) return u64() & (bound - 1);
    uint64_t mask = bound - 1;
    mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
    mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
    for (;;) {
      uint64_t v = (bound <= (1ull << 32)) ? (u64() & mask) : (u64() & mask);
      if (v < bound) return v;
    }
  }
  // Uniform integer in [lo, hi], inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + int64_t(below(uint64_t(hi - lo + 1)));
  }
  void bytes(uint8_t* out, size_t len) { sh_.squeeze(out, len); }
  Seed32 seed32() {
    Seed32 s;
    sh_.squeeze(s.data(), s.size());
    return s;
  }

 private:
  void reset_stream() {
    sh_ = Shake(Shake::SHAKE256);
    sh_.absorb(seed_.data(), seed_.size());
  }

  Seed32 seed_{};
  Shake sh_{Shake::SHAKE256};
  uint64_t buf_ = 0;
  int buf_left_ = 0;
};

}  // namespace talus
