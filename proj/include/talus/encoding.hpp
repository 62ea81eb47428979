#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "talus/poly.hpp"

namespace talus {

// LSB-first bit packing, the convention used by all ML-DSA byte formats.
class BitWriter {
 public:
  void put(uint32_t v, int width) {
    acc_ |= uint64_t(v & ((width == 32 ? 0xffffffffu : (1u << width) - 1))) << bits_;
    bits_ += width;
    while (bits_ >= 8) {
      buf_.push_back(uint8_t(acc_));
      acc_ >>= 8;
      bits_ -= 8;
    }
  }
  void put_bytes(const std::vector<uint8_t>& v) {
    for (uint8_t b : v) put(b, 8);
  }
  std::vector<uint8_t> take() {
    if (bits_ > 0) {
      buf_.push_back(uint8_t(acc_));
      acc_ = 0;
      bits_ = 0;
    }
    return std::move(buf_);
  }

 private:
  std::vector<uint8_t> buf_;
  uint64_t acc_ = 0;
  int bits_ = 0;
};

class BitReader {
 public:
  BitReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}
  explicit BitReader(const std::vector<uint8_t>& v)
      : BitReader(v.data(), v.size()) {}

  uint32_t get(int width) {
    while (bits_ < width) {
      acc_ |= uint64_t(pos_ < len_ ? data_[pos_] : 0) << bits_;
      ++pos_;
      bits_ += 8;
    }
    uint32_t v = uint32_t(acc_ & ((width == 32 ? 0xffffffffull : (1ull << width) - 1)));
    acc_ >>= width;
    bits_ -= width;
    return v;
  }

 private:
  const uint8_t* data_;
  size_t len_;
  size_t pos_ = 0;
  uint64_t acc_ = 0;
  int bits_ = 0;
};

// Coefficients in [0, 2^width); 32*width bytes per poly.
inline void simple_pack(BitWriter& w, const Poly& p, int width) {
  for (int i = 0; i < N_COEFFS; ++i) w.put(uint32_t(p[i]), width);
}

inline Poly simple_unpack(BitReader& r, int width) {
  Poly p;
  for (int i = 0; i < N_COEFFS; ++i) p[i] = int32_t(r.get(width));
  return p;
}

// Coefficients in [-a, b] encoded as b - coeff in bitlen(a+b) bits.
inline void range_pack(BitWriter& w, const Poly& p, int32_t b, int width) {
  for (int i = 0; i < N_COEFFS; ++i) w.put(uint32_t(b - p[i]), width);
}

inline Poly range_unpack(BitReader& r, int32_t b, int width) {
  Poly p;
  for (int i = 0; i < N_COEFFS; ++i) p[i] = b - int32_t(r.get(width));
  return p;
}

}  // namespace talus
