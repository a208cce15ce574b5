#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apcc/common.hpp"

namespace apcc {

// Context-adaptive binary arithmetic coder shared by every coding branch.
// The core is a range coder with 32-bit low/range registers, byte-wise
// renormalization and carry handling through a cache byte plus a pending
// counter. Probabilities are 16-bit fixed point, adapted by shift and
// saturated inside (0, 1) so no context can lock up.

constexpr int kDefaultAdaptShift = 5;
constexpr uint16_t kProbHalf = 0x8000;

struct BinState {
  uint16_t probZero = kProbHalf;  // P(next bin == 0) in 1/65536 units
  uint8_t adaptShift = kDefaultAdaptShift;
};

struct ContextModel {
  explicit ContextModel(size_t size) : states(size) {}

  BinState& at(size_t idx) {
    if (idx >= states.size())
      throw ContextIndexError("context index " + std::to_string(idx) + " out of range");
    return states[idx];
  }

  std::vector<BinState> states;
};

//============================================================================

class RangeEncoder {
public:
  void encodeBit(BinState& s, int bit);
  void encodeBypass(int bit);
  void encodeBypassBits(uint64_t value, int count);  // most significant first
  std::vector<uint8_t> finish();

private:
  void shiftLow();
  void renormalize();

  std::vector<uint8_t> _bytes;
  uint64_t _low = 0;
  uint32_t _range = 0xFFFFFFFFu;
  uint8_t _cache = 0;
  uint64_t _cacheSize = 1;
};

class RangeDecoder {
public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  int decodeBit(BinState& s);
  int decodeBypass();
  uint64_t decodeBypassBits(int count);

private:
  uint8_t readByte();
  void renormalize();

  std::span<const uint8_t> _bytes;
  size_t _pos = 0;
  uint32_t _range = 0xFFFFFFFFu;
  uint32_t _code = 0;
};

//============================================================================
// Coder facades binding a range coder to a context bank with a fixed index
// space. encodeUint/decodeUint implement the exp-Golomb-style binarization:
// a unary prefix of context-coded bins (contexts base+min(i,7)) followed by
// bypass suffix bits.

class ContextEncoder {
public:
  explicit ContextEncoder(size_t contextCount) : _model(contextCount) {}

  void encodeBin(size_t ctx, int bit) { _rc.encodeBit(_model.at(ctx), bit); }
  void encodeBypass(int bit) { _rc.encodeBypass(bit); }
  void encodeBypassBits(uint64_t v, int n) { _rc.encodeBypassBits(v, n); }
  void encodeUint(uint32_t value, size_t ctxBase);
  void setAdaptShift(size_t first, size_t last, uint8_t shift) {
    for (size_t i = first; i < last; i++)
      _model.at(i).adaptShift = shift;
  }
  std::vector<uint8_t> finish() { return _rc.finish(); }

private:
  RangeEncoder _rc;
  ContextModel _model;
};

class ContextDecoder {
public:
  ContextDecoder(size_t contextCount, std::span<const uint8_t> bytes)
    : _rc(bytes), _model(contextCount) {}

  int decodeBin(size_t ctx) { return _rc.decodeBit(_model.at(ctx)); }
  int decodeBypass() { return _rc.decodeBypass(); }
  uint64_t decodeBypassBits(int n) { return _rc.decodeBypassBits(n); }
  uint32_t decodeUint(size_t ctxBase);
  void setAdaptShift(size_t first, size_t last, uint8_t shift) {
    for (size_t i = first; i < last; i++)
      _model.at(i).adaptShift = shift;
  }

private:
  RangeDecoder _rc;
  ContextModel _model;
};

}  // namespace apcc
