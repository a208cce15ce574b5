#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "apcc/curves.hpp"

using namespace apcc;

namespace {

// Independent bit-interleave oracle (per-bit loop, x lowest).
uint64_t mortonOracle(const Vec3i& v, int depth) {
  uint64_t code = 0;
  for (int i = 0; i < depth; i++) {
    code |= uint64_t((v.x >> i) & 1) << (3 * i);
    code |= uint64_t((v.y >> i) & 1) << (3 * i + 1);
    code |= uint64_t((v.z >> i) & 1) << (3 * i + 2);
  }
  return code;
}

// Independent Hilbert oracle: the Gray-code construction evaluated
// arithmetically per level (no tables).
namespace oracle {

uint8_t gc(uint8_t i) { return i ^ (i >> 1); }

uint8_t gcInv(uint8_t g) {
  uint8_t b = g;
  b ^= b >> 1;
  b ^= b >> 2;
  return b & 7;
}

uint8_t rotr(uint8_t b, int r) {
  r %= 3;
  return uint8_t(((b >> r) | (b << (3 - r))) & 7);
}

uint8_t rotl(uint8_t b, int r) { return rotr(b, 3 - r % 3); }

int tsb(uint8_t i) {
  int n = 0;
  while (i & 1) {
    n++;
    i >>= 1;
  }
  return n;
}

uint8_t entry(uint8_t w) { return w == 0 ? 0 : gc(uint8_t(2 * ((w - 1) / 2))); }

int direction(uint8_t w) {
  if (w == 0)
    return 0;
  return (w & 1) ? tsb(w) % 3 : tsb(uint8_t(w - 1)) % 3;
}

uint64_t index(uint32_t x, uint32_t y, uint32_t z, int depth) {
  uint64_t h = 0;
  uint8_t e = 0;
  int d = 0;
  for (int i = depth - 1; i >= 0; i--) {
    uint8_t l = uint8_t(((x >> i) & 1) | (((y >> i) & 1) << 1) | (((z >> i) & 1) << 2));
    uint8_t t = rotr(uint8_t(l ^ e), d + 1);
    uint8_t w = gcInv(t);
    h = (h << 3) | w;
    e = uint8_t(e ^ rotl(entry(w), d + 1));
    d = (d + direction(w) + 1) % 3;
  }
  return h;
}

}  // namespace oracle

}  // namespace

//============================================================================

TEST_CASE("morton encodes the documented axis order") {
  CHECK(mortonEncode({0, 0, 0}, 1) == 0);
  CHECK(mortonEncode({1, 1, 1}, 1) == 7);
  CHECK(mortonEncode({1, 0, 0}, 1) == 1);
  CHECK(mortonEncode({0, 1, 0}, 1) == 2);
  CHECK(mortonEncode({0, 0, 1}, 1) == 4);
}

TEST_CASE("morton matches the bit-interleave oracle exhaustively") {
  for (int depth : {1, 2, 3, 4}) {
    const int32_t lim = 1 << depth;
    for (int32_t z = 0; z < lim; z++)
      for (int32_t y = 0; y < lim; y++)
        for (int32_t x = 0; x < lim; x++) {
          Vec3i v{x, y, z};
          uint64_t code = mortonEncode(v, depth);
          CHECK(code == mortonOracle(v, depth));
          CHECK(mortonDecode(code, depth) == v);
        }
  }
}

TEST_CASE("morton round-trips exhaustively at depth 7") {
  const int32_t lim = 1 << 7;
  for (int32_t z = 0; z < lim; z++)
    for (int32_t y = 0; y < lim; y++)
      for (int32_t x = 0; x < lim; x++) {
        Vec3i v{x, y, z};
        if (mortonDecode(mortonEncode(v, 7), 7) != v)
          FAIL("mismatch at ", x, ",", y, ",", z);
      }
}

TEST_CASE("morton round-trips random samples at depth 21") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int32_t> dist(0, (1 << 21) - 1);
  for (int i = 0; i < 20000; i++) {
    Vec3i v{dist(rng), dist(rng), dist(rng)};
    uint64_t code = mortonEncode(v, 21);
    CHECK(code == mortonOracle(v, 21));
    CHECK(mortonDecode(code, 21) == v);
  }
}

TEST_CASE("morton rejects out-of-range coordinates") {
  CHECK_THROWS_AS(mortonEncode({2, 0, 0}, 1), RangeError);
  CHECK_THROWS_AS(mortonEncode({-1, 0, 0}, 5), RangeError);
  CHECK_THROWS_AS(mortonEncode({0, 0, 0}, 25), RangeError);
}

//============================================================================

TEST_CASE("hilbert depth 1 is a bijection on the corners") {
  CurveConfig cfg;
  cfg.bitDepth = 1;
  std::set<uint64_t> seen;
  for (int c = 0; c < 8; c++) {
    uint64_t h = hilbertEncode({c & 1, (c >> 1) & 1, (c >> 2) & 1}, cfg);
    CHECK(h < 8);
    seen.insert(h);
  }
  CHECK(seen.size() == 8);
}

TEST_CASE("hilbert consecutive indices differ by one unit step") {
  for (int depth : {1, 2, 3, 4}) {
    CurveConfig cfg;
    cfg.bitDepth = depth;
    const int32_t lim = 1 << depth;
    std::vector<Vec3i> byIndex(size_t(lim) * lim * lim);
    for (int32_t z = 0; z < lim; z++)
      for (int32_t y = 0; y < lim; y++)
        for (int32_t x = 0; x < lim; x++) {
          uint64_t h = hilbertEncode({x, y, z}, cfg);
          REQUIRE(h < byIndex.size());
          byIndex[h] = {x, y, z};
        }
    for (size_t i = 1; i < byIndex.size(); i++) {
      int64_t d = manhattanDistance(byIndex[i - 1], byIndex[i]);
      if (d != 1)
        FAIL("non-unit step at index ", i, " depth ", depth);
    }
  }
}

TEST_CASE("hilbert is injective at small depths") {
  for (int depth : {2, 3, 4}) {
    CurveConfig cfg;
    cfg.bitDepth = depth;
    const int32_t lim = 1 << depth;
    std::set<uint64_t> seen;
    for (int32_t z = 0; z < lim; z++)
      for (int32_t y = 0; y < lim; y++)
        for (int32_t x = 0; x < lim; x++)
          seen.insert(hilbertEncode({x, y, z}, cfg));
    CHECK(seen.size() == size_t(lim) * lim * lim);
  }
}

TEST_CASE("hilbert matches the Gray-code oracle") {
  for (int depth : {1, 2, 3, 4}) {
    CurveConfig cfg;
    cfg.bitDepth = depth;
    const int32_t lim = 1 << depth;
    for (int32_t z = 0; z < lim; z++)
      for (int32_t y = 0; y < lim; y++)
        for (int32_t x = 0; x < lim; x++) {
          uint64_t got = hilbertEncode({x, y, z}, cfg);
          uint64_t want = oracle::index(uint32_t(x), uint32_t(y), uint32_t(z), depth);
          if (got != want)
            FAIL("oracle mismatch at ", x, ",", y, ",", z, " depth ", depth);
        }
  }
}

TEST_CASE("hilbert theta biases z before encoding") {
  CurveConfig plain;
  plain.bitDepth = 5;

  CurveConfig doubled = plain;
  doubled.hilbertTheta = 2.0;
  CHECK(hilbertEncode({3, 4, 5}, doubled) == hilbertEncode({3, 4, 10}, plain));

  CurveConfig halved = plain;
  halved.hilbertTheta = 0.5;
  // round half away from zero: 0.5 * 1 -> 1, 0.5 * 3 -> 2
  CHECK(hilbertEncode({3, 4, 1}, halved) == hilbertEncode({3, 4, 1}, plain));
  CHECK(hilbertEncode({3, 4, 3}, halved) == hilbertEncode({3, 4, 2}, plain));

  CurveConfig tight;
  tight.bitDepth = 3;
  tight.hilbertTheta = 4.0;
  CHECK_THROWS_AS(hilbertEncode({0, 0, 7}, tight), RangeError);
}

//============================================================================

TEST_CASE("sortByCode identity cases") {
  CurveConfig cfg;
  cfg.bitDepth = 8;
  std::vector<Vec3i> single{{5, 6, 7}};
  CHECK(sortByCode(single, CurveOrder::Morton, cfg) == std::vector<uint32_t>{0});

  std::vector<Vec3i> sorted{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 1}, {0, 0, 2}};
  auto perm = sortByCode(sorted, CurveOrder::Morton, cfg);
  for (uint32_t i = 0; i < perm.size(); i++)
    CHECK(perm[i] == i);
}

TEST_CASE("sortByCode yields non-decreasing codes") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int32_t> dist(0, 255);
  std::vector<Vec3i> cloud;
  for (int i = 0; i < 1000; i++)
    cloud.push_back({dist(rng), dist(rng), dist(rng)});
  CurveConfig cfg;
  cfg.bitDepth = 8;
  for (CurveOrder order : {CurveOrder::Morton, CurveOrder::Hilbert}) {
    auto perm = sortByCode(cloud, order, cfg);
    uint64_t prev = 0;
    for (uint32_t idx : perm) {
      uint64_t code = order == CurveOrder::Morton ? mortonEncode(cloud[idx], 8)
                                                  : hilbertEncode(cloud[idx], cfg);
      CHECK(code >= prev);
      prev = code;
    }
  }
}
