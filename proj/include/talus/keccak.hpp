#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

namespace talus {

void keccak_f1600(uint64_t state[25]);

// Incremental sponge for SHAKE128/SHAKE256. absorb() may be called any
// number of times before the first squeeze(); after that the state is
// squeeze-only.
class Shake {
 public:
  enum Kind { SHAKE128 = 168, SHAKE256 = 136 };

  explicit Shake(Kind kind) : rate_(size_t(kind)) { std::memset(st_, 0, sizeof st_); }

  void absorb(const uint8_t* data, size_t len);
  void absorb(std::string_view s) {
    absorb(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  }
  void absorb(const std::vector<uint8_t>& v) { absorb(v.data(), v.size()); }
  void absorb_byte(uint8_t b) { absorb(&b, 1); }
  void absorb_u64(uint64_t x);  // little-endian

  void squeeze(uint8_t* out, size_t len);
  std::vector<uint8_t> squeeze(size_t len) {
    std::vector<uint8_t> out(len);
    squeeze(out.data(), len);
    return out;
  }
  uint8_t squeeze_byte() {
    uint8_t b;
    squeeze(&b, 1);
    return b;
  }
  uint64_t squeeze_u64();  // little-endian

 private:
  void finalize();

  uint64_t st_[25];
  size_t rate_;
  size_t pos_ = 0;
  bool squeezing_ = false;
};

std::vector<uint8_t> shake256(const uint8_t* in, size_t inlen, size_t outlen);
std::vector<uint8_t> shake256(const std::vector<uint8_t>& in, size_t outlen);

}  // namespace talus
