#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "apcc/entropy.hpp"

using namespace apcc;

TEST_CASE("all-zero stream compresses far below a bit per bin") {
  ContextEncoder ce(1);
  for (int i = 0; i < 10000; i++)
    ce.encodeBin(0, 0);
  auto bytes = ce.finish();
  CHECK(bytes.size() < 100);

  ContextDecoder cd(1, bytes);
  for (int i = 0; i < 10000; i++)
    CHECK(cd.decodeBin(0) == 0);
}

TEST_CASE("alternating bins stay near one bit per bin") {
  ContextEncoder ce(1);
  const int n = 10000;
  for (int i = 0; i < n; i++)
    ce.encodeBin(0, i & 1);
  auto bytes = ce.finish();
  CHECK(double(bytes.size()) * 8 >= 0.99 * n);
}

TEST_CASE("monotone learning on an all-zero stream") {
  RangeEncoder rc;
  BinState s;
  uint16_t prev = s.probZero;
  for (int i = 0; i < 5000; i++) {
    rc.encodeBit(s, 0);
    CHECK(s.probZero >= prev);
    prev = s.probZero;
  }
  CHECK(s.probZero >= 0xFFE0);
}

TEST_CASE("probabilities stay strictly inside (0, 1)") {
  RangeEncoder rc;
  BinState s;
  for (int i = 0; i < 100000; i++)
    rc.encodeBit(s, 1);
  CHECK(s.probZero >= 1);
  RangeEncoder rc2;
  BinState s2;
  for (int i = 0; i < 100000; i++)
    rc2.encodeBit(s2, 0);
  CHECK(s2.probZero <= 0xFFFF);
}

TEST_CASE("random bin/context/bypass interleavings round-trip") {
  std::mt19937_64 rng(42);
  const size_t kContexts = 37;
  ContextEncoder ce(kContexts);
  struct Op {
    int kind;  // 0 ctx bin, 1 bypass, 2 uint
    size_t ctx;
    uint32_t value;
  };
  std::vector<Op> ops;
  std::uniform_int_distribution<int> kindDist(0, 2);
  std::uniform_int_distribution<size_t> ctxDist(0, kContexts - 9);
  std::geometric_distribution<uint32_t> geo(0.3);
  for (int i = 0; i < 200000; i++) {
    Op op;
    op.kind = kindDist(rng);
    op.ctx = ctxDist(rng);
    op.value = op.kind == 2 ? geo(rng) : uint32_t(rng() & 1);
    ops.push_back(op);
    switch (op.kind) {
      case 0: ce.encodeBin(op.ctx, int(op.value)); break;
      case 1: ce.encodeBypass(int(op.value)); break;
      case 2: ce.encodeUint(op.value, op.ctx); break;
    }
  }
  auto bytes = ce.finish();
  ContextDecoder cd(kContexts, bytes);
  for (const Op& op : ops) {
    switch (op.kind) {
      case 0: CHECK(cd.decodeBin(op.ctx) == int(op.value)); break;
      case 1: CHECK(cd.decodeBypass() == int(op.value)); break;
      case 2: CHECK(cd.decodeUint(op.ctx) == op.value); break;
    }
  }
}

TEST_CASE("bypass bits cost one range bit each") {
  ContextEncoder empty(1);
  size_t flushSize = empty.finish().size();
  CHECK(flushSize <= 5);

  std::mt19937_64 rng(3);
  ContextEncoder ce(1);
  for (int i = 0; i < 64; i++)
    ce.encodeBypass(int(rng() & 1));
  auto bytes = ce.finish();
  CHECK(bytes.size() <= flushSize + 64 / 8 + 1);
  CHECK(bytes.size() + 1 >= 64 / 8);
}

TEST_CASE("random bypass payload round-trips") {
  std::mt19937_64 rng(5);
  std::vector<int> bits(10000);
  ContextEncoder ce(1);
  for (auto& b : bits) {
    b = int(rng() & 1);
    ce.encodeBypass(b);
  }
  auto bytes = ce.finish();
  ContextDecoder cd(1, bytes);
  for (int b : bits)
    CHECK(cd.decodeBypass() == b);
}

TEST_CASE("unsigned binarization round-trips 0..255 and beyond") {
  ContextEncoder ce(8);
  for (uint32_t v = 0; v < 256; v++)
    ce.encodeUint(v, 0);
  for (uint32_t v : {1000u, 65536u, 1u << 30, 0xFFFFFFFFu})
    ce.encodeUint(v, 0);
  auto bytes = ce.finish();
  ContextDecoder cd(8, bytes);
  for (uint32_t v = 0; v < 256; v++)
    CHECK(cd.decodeUint(0) == v);
  for (uint32_t v : {1000u, 65536u, 1u << 30, 0xFFFFFFFFu})
    CHECK(cd.decodeUint(0) == v);
}

TEST_CASE("geometric source codes within 10% of empirical entropy") {
  std::mt19937_64 rng(9);
  std::geometric_distribution<uint32_t> geo(0.5);
  const int n = 200000;
  std::vector<uint32_t> values(n);
  for (auto& v : values)
    v = geo(rng);

  // empirical entropy of the sample
  std::vector<size_t> counts;
  for (uint32_t v : values) {
    if (v >= counts.size())
      counts.resize(v + 1, 0);
    counts[v]++;
  }
  double entropyBits = 0;
  for (size_t c : counts)
    if (c > 0) {
      double p = double(c) / n;
      entropyBits += -double(c) * std::log2(p);
    }

  ContextEncoder ce(8);
  for (uint32_t v : values)
    ce.encodeUint(v, 0);
  double codedBits = double(ce.finish().size()) * 8;
  CHECK(codedBits <= entropyBits * 1.10);
}

TEST_CASE("skewed binary source codes within 10% of entropy") {
  std::mt19937_64 rng(13);
  std::bernoulli_distribution coin(0.05);
  const int n = 1000000;
  int ones = 0;
  ContextEncoder ce(1);
  for (int i = 0; i < n; i++) {
    int b = coin(rng);
    ones += b;
    ce.encodeBin(0, b);
  }
  double p = double(ones) / n;
  double entropyBits = n * (-p * std::log2(p) - (1 - p) * std::log2(1 - p));
  double codedBits = double(ce.finish().size()) * 8;
  CHECK(codedBits <= entropyBits * 1.10);
}

TEST_CASE("decoding past the end raises BitstreamUnderrun") {
  std::vector<uint8_t> empty;
  CHECK_THROWS_AS(ContextDecoder(1, empty), BitstreamUnderrun);

  ContextEncoder ce(1);
  ce.encodeBin(0, 1);
  auto bytes = ce.finish();
  ContextDecoder cd(1, bytes);
  CHECK(cd.decodeBin(0) == 1);
  CHECK_THROWS_AS(
    [&] {
      for (int i = 0; i < 1000000; i++)
        cd.decodeBypass();
    }(),
    BitstreamUnderrun);
}

TEST_CASE("context index bounds are enforced") {
  ContextEncoder ce(4);
  CHECK_THROWS_AS(ce.encodeBin(4, 0), ContextIndexError);
  ContextModel m(4);
  CHECK_THROWS_AS(m.at(17), ContextIndexError);
}
