#include "apcc/curves.hpp"

#include <algorithm>
#include <array>
#include <bit>

namespace apcc {

namespace {

//============================================================================
// Morton tables: 8-bit spread tables for encoding, 9-bit compact tables for
// decoding. Built once, derived from the same bit layout.

struct MortonTables {
  std::array<uint32_t, 256> spread{};    // byte -> bits at stride 3
  std::array<uint8_t, 512> compactX{};   // 9 code bits -> 3 x bits
  std::array<uint8_t, 512> compactY{};
  std::array<uint8_t, 512> compactZ{};

  MortonTables() {
    for (uint32_t b = 0; b < 256; b++) {
      uint32_t s = 0;
      for (int i = 0; i < 8; i++)
        s |= ((b >> i) & 1u) << (3 * i);
      spread[b] = s;
    }
    for (uint32_t c = 0; c < 512; c++) {
      uint8_t x = 0, y = 0, z = 0;
      for (int i = 0; i < 3; i++) {
        x |= ((c >> (3 * i + 0)) & 1u) << i;
        y |= ((c >> (3 * i + 1)) & 1u) << i;
        z |= ((c >> (3 * i + 2)) & 1u) << i;
      }
      compactX[c] = x;
      compactY[c] = y;
      compactZ[c] = z;
    }
  }
};

const MortonTables& mortonTables() {
  static const MortonTables t;
  return t;
}

uint64_t spreadAxis(uint32_t v) {
  const auto& t = mortonTables();
  return uint64_t(t.spread[v & 0xFF]) | (uint64_t(t.spread[(v >> 8) & 0xFF]) << 24)
    | (uint64_t(t.spread[(v >> 16) & 0xFF]) << 48);
}

//============================================================================
// Hilbert state tables. A state is the pair (entry point e, direction d) of
// the Gray-code construction; for 3 dimensions there are 8*3 = 24 states.
// digit[s][octant] gives the 3-bit index digit, next[s][octant] the state of
// the sub-cube.

constexpr int kDims = 3;

uint8_t grayCode(uint8_t i) { return i ^ (i >> 1); }

uint8_t grayCodeInverse(uint8_t g) {
  uint8_t b = g;
  b ^= b >> 1;
  b ^= b >> 2;
  return uint8_t(b & 7);
}

uint8_t rotr3(uint8_t b, int r) {
  r %= kDims;
  return uint8_t(((b >> r) | (b << (kDims - r))) & 7);
}

uint8_t rotl3(uint8_t b, int r) { return rotr3(b, kDims - r % kDims); }

int trailingSetBits(uint8_t i) { return std::countr_one(i); }

// Entry point of sub-cube w along the canonical curve.
uint8_t entryPoint(uint8_t w) {
  return w == 0 ? 0 : grayCode(uint8_t(2 * ((w - 1) / 2)));
}

// Intra sub-cube direction of sub-cube w.
int intraDirection(uint8_t w) {
  if (w == 0)
    return 0;
  if (w & 1)
    return trailingSetBits(w) % kDims;
  return trailingSetBits(uint8_t(w - 1)) % kDims;
}

struct HilbertTables {
  // state = e * 3 + d
  uint8_t digit[24][8];
  uint8_t next[24][8];

  HilbertTables() {
    for (int e = 0; e < 8; e++) {
      for (int d = 0; d < kDims; d++) {
        int s = e * kDims + d;
        for (int l = 0; l < 8; l++) {
          uint8_t t = rotr3(uint8_t(l ^ e), d + 1);
          uint8_t w = grayCodeInverse(t);
          uint8_t e2 = uint8_t(e ^ rotl3(entryPoint(w), d + 1));
          int d2 = (d + intraDirection(w) + 1) % kDims;
          digit[s][l] = w;
          next[s][l] = uint8_t(e2 * kDims + d2);
        }
      }
    }
  }
};

const HilbertTables& hilbertTables() {
  static const HilbertTables t;
  return t;
}

uint64_t hilbertIndex(uint32_t x, uint32_t y, uint32_t z, int depth) {
  const auto& t = hilbertTables();
  uint64_t h = 0;
  uint8_t s = 0;
  for (int i = depth - 1; i >= 0; i--) {
    int l = int((x >> i) & 1u) | (int((y >> i) & 1u) << 1) | (int((z >> i) & 1u) << 2);
    h = (h << 3) | t.digit[s][l];
    s = t.next[s][l];
  }
  return h;
}

}  // namespace

//============================================================================

uint64_t mortonEncode(const Vec3i& v, int depth) {
  if (depth < 1 || depth > 21)
    throw RangeError("morton depth out of [1,21]");
  const int64_t lim = int64_t(1) << depth;
  if (v.x < 0 || v.y < 0 || v.z < 0 || v.x >= lim || v.y >= lim || v.z >= lim)
    throw RangeError("coordinate out of range for morton depth " + std::to_string(depth));
  return spreadAxis(uint32_t(v.x)) | (spreadAxis(uint32_t(v.y)) << 1)
    | (spreadAxis(uint32_t(v.z)) << 2);
}

Vec3i mortonDecode(uint64_t code, int depth) {
  if (depth < 1 || depth > 21)
    throw RangeError("morton depth out of [1,21]");
  if (depth < 21 && (code >> (3 * depth)) != 0)
    throw RangeError("code out of range for morton depth " + std::to_string(depth));
  const auto& t = mortonTables();
  uint32_t x = 0, y = 0, z = 0;
  for (int c = 0; 9 * c < 3 * depth; c++) {
    uint32_t chunk = (code >> (9 * c)) & 0x1FF;
    x |= uint32_t(t.compactX[chunk]) << (3 * c);
    y |= uint32_t(t.compactY[chunk]) << (3 * c);
    z |= uint32_t(t.compactZ[chunk]) << (3 * c);
  }
  return {int32_t(x), int32_t(y), int32_t(z)};
}

uint64_t hilbertEncode(const Vec3i& v, const CurveConfig& cfg) {
  if (cfg.bitDepth < 1 || cfg.bitDepth > 21)
    throw RangeError("hilbert depth out of [1,21]");
  if (v.x < 0 || v.y < 0 || v.z < 0)
    throw RangeError("negative coordinate");
  int64_t zb = roundHalfAway(cfg.hilbertTheta * double(v.z));
  const int64_t lim = int64_t(1) << cfg.bitDepth;
  if (v.x >= lim || v.y >= lim || zb < 0 || zb >= lim)
    throw RangeError("coordinate out of range after theta scaling");
  return hilbertIndex(uint32_t(v.x), uint32_t(v.y), uint32_t(zb), cfg.bitDepth);
}

std::vector<uint32_t> sortByCode(const std::vector<Vec3i>& voxels,
                                 CurveOrder order, const CurveConfig& cfg) {
  std::vector<uint64_t> codes(voxels.size());
  for (size_t i = 0; i < voxels.size(); i++)
    codes[i] = order == CurveOrder::Morton ? mortonEncode(voxels[i], cfg.bitDepth)
                                           : hilbertEncode(voxels[i], cfg);
  std::vector<uint32_t> perm(voxels.size());
  for (size_t i = 0; i < perm.size(); i++)
    perm[i] = uint32_t(i);
  // theta scaling can collide distinct z values onto one code, so break code
  // ties by coordinates to keep the order independent of the input order
  std::stable_sort(perm.begin(), perm.end(), [&](uint32_t a, uint32_t b) {
    if (codes[a] != codes[b])
      return codes[a] < codes[b];
    const Vec3i &va = voxels[a], &vb = voxels[b];
    if (va.z != vb.z)
      return va.z < vb.z;
    if (va.y != vb.y)
      return va.y < vb.y;
    return va.x < vb.x;
  });
  return perm;
}

}  // namespace apcc
