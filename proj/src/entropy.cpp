#include "apcc/entropy.hpp"

#include <bit>

namespace apcc {

namespace {

constexpr uint32_t kTopValue = 1u << 24;

void adapt(BinState& s, int bit) {
  if (bit == 0) {
    s.probZero = uint16_t(s.probZero + ((0x10000u - s.probZero) >> s.adaptShift));
    if (s.probZero == 0)  // cannot happen with shift >= 1, keep the bound anyway
      s.probZero = 0xFFFF;
  } else {
    s.probZero = uint16_t(s.probZero - (s.probZero >> s.adaptShift));
    if (s.probZero == 0)
      s.probZero = 1;
  }
}

}  // namespace

//============================================================================
// Encoder

void RangeEncoder::shiftLow() {
  if (uint32_t(_low) < 0xFF000000u || (_low >> 32) != 0) {
    uint8_t carry = uint8_t(_low >> 32);
    do {
      _bytes.push_back(uint8_t(_cache + carry));
      _cache = 0xFF;
    } while (--_cacheSize);
    _cache = uint8_t(_low >> 24);
  }
  _cacheSize++;
  _low = (_low << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::renormalize() {
  while (_range < kTopValue) {
    shiftLow();
    _range <<= 8;
  }
}

void RangeEncoder::encodeBit(BinState& s, int bit) {
  uint32_t bound = (_range >> 16) * s.probZero;
  if (bit == 0) {
    _range = bound;
  } else {
    _low += bound;
    _range -= bound;
  }
  adapt(s, bit);
  renormalize();
}

void RangeEncoder::encodeBypass(int bit) {
  _range >>= 1;
  if (bit)
    _low += _range;
  renormalize();
}

void RangeEncoder::encodeBypassBits(uint64_t value, int count) {
  for (int i = count - 1; i >= 0; i--)
    encodeBypass(int((value >> i) & 1));
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; i++)
    shiftLow();
  return std::move(_bytes);
}

//============================================================================
// Decoder

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : _bytes(bytes) {
  readByte();  // matches the encoder's initial cache byte
  for (int i = 0; i < 4; i++)
    _code = (_code << 8) | readByte();
}

uint8_t RangeDecoder::readByte() {
  if (_pos >= _bytes.size())
    throw BitstreamUnderrun("decode past end of entropy payload");
  return _bytes[_pos++];
}

void RangeDecoder::renormalize() {
  while (_range < kTopValue) {
    _code = (_code << 8) | readByte();
    _range <<= 8;
  }
}

int RangeDecoder::decodeBit(BinState& s) {
  uint32_t bound = (_range >> 16) * s.probZero;
  int bit;
  if (_code < bound) {
    bit = 0;
    _range = bound;
  } else {
    bit = 1;
    _code -= bound;
    _range -= bound;
  }
  adapt(s, bit);
  renormalize();
  return bit;
}

int RangeDecoder::decodeBypass() {
  _range >>= 1;
  int bit = 0;
  if (_code >= _range) {
    bit = 1;
    _code -= _range;
  }
  renormalize();
  return bit;
}

uint64_t RangeDecoder::decodeBypassBits(int count) {
  uint64_t v = 0;
  for (int i = 0; i < count; i++)
    v = (v << 1) | uint64_t(decodeBypass());
  return v;
}

//============================================================================
// Unsigned binarization

void ContextEncoder::encodeUint(uint32_t value, size_t ctxBase) {
  uint64_t vp1 = uint64_t(value) + 1;
  int nbits = std::bit_width(vp1);
  for (int i = 0; i < nbits - 1; i++)
    encodeBin(ctxBase + size_t(std::min(i, 7)), 1);
  encodeBin(ctxBase + size_t(std::min(nbits - 1, 7)), 0);
  if (nbits > 1)
    encodeBypassBits(vp1 & ((uint64_t(1) << (nbits - 1)) - 1), nbits - 1);
}

uint32_t ContextDecoder::decodeUint(size_t ctxBase) {
  int prefix = 0;
  while (decodeBin(ctxBase + size_t(std::min(prefix, 7))) == 1) {
    if (++prefix > 33)
      throw CorruptStream("unsigned prefix exceeds 32-bit range");
  }
  uint64_t vp1 = uint64_t(1) << prefix;
  if (prefix > 0)
    vp1 |= decodeBypassBits(prefix);
  return uint32_t(vp1 - 1);
}

}  // namespace apcc
