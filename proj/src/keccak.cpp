#include "talus/keccak.hpp"

#include <stdexcept>

namespace talus {

namespace {

constexpr uint64_t kRc[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr int kRho[25] = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                          25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

inline uint64_t rotl(uint64_t x, int s) {
  return s == 0 ? x : (x << s) | (x >> (64 - s));
}

}  // namespace

void keccak_f1600(uint64_t a[25]) {
  for (int round = 0; round < 24; ++round) {
    uint64_t c[5], d[5];
    for (int x = 0; x < 5; ++x)
      c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      d[x] = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 5; ++y) a[x + 5 * y] ^= d[x];
    }
    uint64_t b[25];
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y)
        b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(a[x + 5 * y], kRho[x + 5 * y]);
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y)
        a[x + 5 * y] =
            b[x + 5 * y] ^ (~b[(x + 1) % 5 + 5 * y] & b[(x + 2) % 5 + 5 * y]);
    a[0] ^= kRc[round];
  }
}

void Shake::absorb(const uint8_t* data, size_t len) {
  // Absorbing after a squeeze would silently corrupt the stream.
  if (squeezing_) throw std::logic_error("Shake: absorb after squeeze");
  while (len > 0) {
    size_t take = rate_ - pos_;
    if (take > len) take = len;
    for (size_t i = 0; i < take; ++i)
      st_[(pos_ + i) / 8] ^= uint64_t(data[i]) << (8 * ((pos_ + i) % 8));
    pos_ += take;
    data += take;
    len -= take;
    if (pos_ == rate_) {
      keccak_f1600(st_);
      pos_ = 0;
    }
  }
}

void Shake::absorb_u64(uint64_t x) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = uint8_t(x >> (8 * i));
  absorb(b, 8);
}

void Shake::finalize() {
  st_[pos_ / 8] ^= uint64_t(0x1f) << (8 * (pos_ % 8));
  st_[(rate_ - 1) / 8] ^= uint64_t(0x80) << (8 * ((rate_ - 1) % 8));
  keccak_f1600(st_);
  pos_ = 0;
  squeezing_ = true;
}

void Shake::squeeze(uint8_t* out, size_t len) {
  if (!squeezing_) finalize();
  while (len > 0) {
    if (pos_ == rate_) {
      keccak_f1600(st_);
      pos_ = 0;
    }
    size_t take = rate_ - pos_;
    if (take > len) take = len;
    for (size_t i = 0; i < take; ++i)
      out[i] = uint8_t(st_[(pos_ + i) / 8] >> (8 * ((pos_ + i) % 8)));
    pos_ += take;
    out += take;
    len -= take;
  }
}

uint64_t Shake::squeeze_u64() {
  uint8_t b[8];
  squeeze(b, 8);
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= uint64_t(b[i]) << (8 * i);
  return x;
}

std::vector<uint8_t> shake256(const uint8_t* in, size_t inlen, size_t outlen) {
  Shake s(Shake::SHAKE256);
  s.absorb(in, inlen);
  return s.squeeze(outlen);
}

std::vector<uint8_t> shake256(const std::vector<uint8_t>& in, size_t outlen) {
  return shake256(in.data(), in.size(), outlen);
}

}  // namespace talus
