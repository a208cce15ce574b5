#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "apcc/curves.hpp"
#include "apcc/predtree.hpp"
#include "test_util.hpp"

using namespace apcc;
using namespace testutil;

namespace {

std::vector<uint8_t> encodeBytes(const std::vector<Vec3i>& voxels,
                                 const std::vector<uint32_t>& chain,
                                 Vec3<int> depths) {
  ContextEncoder ce(kPredTreeContextCount);
  encodeChain(voxels, chain, depths, ce);
  return ce.finish();
}

double chainLength(const std::vector<Vec3i>& voxels,
                   const std::vector<uint32_t>& order) {
  double sum = 0;
  for (size_t i = 1; i < order.size(); i++)
    sum += std::sqrt(double(squaredDistance(voxels[order[i - 1]], voxels[order[i]])));
  return sum;
}

}  // namespace

TEST_CASE("collinear points chain in coordinate order") {
  std::vector<Vec3i> voxels{{2, 0, 0}, {0, 0, 0}, {3, 0, 0}, {1, 0, 0}};
  auto chain = buildChain(voxels, {});
  REQUIRE(chain.size() == 4);
  for (size_t i = 0; i < chain.size(); i++)
    CHECK(voxels[chain[i]].x == int32_t(i));
}

TEST_CASE("two points make a root and one child") {
  std::vector<Vec3i> voxels{{9, 4, 4}, {1, 2, 3}};
  auto chain = buildChain(voxels, {});
  REQUIRE(chain.size() == 2);
  CHECK(voxels[chain[0]] == Vec3i{1, 2, 3});  // smaller Morton code is the root
  CHECK(voxels[chain[1]] == Vec3i{9, 4, 4});
}

TEST_CASE("chain is a permutation and deterministic under input shuffles") {
  std::mt19937_64 rng(21);
  auto voxels = randomVoxels(rng, 400, 7);
  auto chain = buildChain(voxels, {});
  std::set<uint32_t> seen(chain.begin(), chain.end());
  CHECK(seen.size() == voxels.size());

  std::vector<Vec3i> shuffled = voxels;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto chain2 = buildChain(shuffled, {});
  for (size_t i = 0; i < chain.size(); i++)
    CHECK(voxels[chain[i]] == shuffled[chain2[i]]);
}

TEST_CASE("greedy chain never loses to the reverse-Morton baseline") {
  std::mt19937_64 rng(31);
  auto voxels = randomVoxels(rng, 500, 8);
  auto chain = buildChain(voxels, {});

  CurveConfig cc;
  cc.bitDepth = 8;
  auto morton = sortByCode(voxels, CurveOrder::Morton, cc);
  std::reverse(morton.begin(), morton.end());
  CHECK(chainLength(voxels, chain) <= chainLength(voxels, morton));
}

TEST_CASE("collinear chain codes far below raw cost") {
  std::vector<Vec3i> voxels;
  for (int32_t x = 0; x < 512; x++)
    voxels.push_back({x, 0, 0});
  auto depths = depthsOf(voxels);
  auto chain = buildChain(voxels, {});
  auto bytes = encodeBytes(voxels, chain, depths);
  size_t rawBits = voxels.size() * size_t(depths.x + depths.y + depths.z);
  CHECK(bytes.size() * 8 * 4 < rawBits);  // at least 4x below raw

  std::vector<Vec3i> decoded;
  ContextDecoder cd(kPredTreeContextCount, bytes);
  decodeChain(uint32_t(voxels.size()), depths, cd, decoded);
  CHECK(asSet(decoded) == asSet(voxels));
}

TEST_CASE("random clouds round-trip exactly") {
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 8; iter++) {
    auto voxels = randomVoxels(rng, 200 + 150 * iter, 5 + iter % 5);
    auto depths = depthsOf(voxels);
    auto chain = buildChain(voxels, {});
    auto bytes = encodeBytes(voxels, chain, depths);
    std::vector<Vec3i> decoded;
    ContextDecoder cd(kPredTreeContextCount, bytes);
    decodeChain(uint32_t(voxels.size()), depths, cd, decoded);
    CHECK(asSet(decoded) == asSet(voxels));
  }
}

TEST_CASE("a stream prefix decodes a chain prefix") {
  std::mt19937_64 rng(51);
  auto voxels = randomVoxels(rng, 300, 7);
  auto depths = depthsOf(voxels);
  auto chain = buildChain(voxels, {});
  auto bytes = encodeBytes(voxels, chain, depths);

  std::vector<uint8_t> truncated(bytes.begin(),
                                 bytes.begin() + std::ptrdiff_t(bytes.size() / 2));
  std::vector<Vec3i> partial;
  try {
    ContextDecoder cd(kPredTreeContextCount, truncated);
    decodeChain(uint32_t(voxels.size()), depths, cd, partial);
    FAIL("expected underrun");
  } catch (const BitstreamUnderrun&) {
  }
  CHECK(partial.size() > 0);
  CHECK(partial.size() < voxels.size());
  for (size_t i = 0; i < partial.size(); i++)
    CHECK(partial[i] == voxels[chain[i]]);
}

TEST_CASE("corrupt residuals are caught by the bounding box") {
  std::vector<Vec3i> voxels{{0, 0, 0}, {1, 1, 1}, {2, 3, 1}};
  auto depths = depthsOf(voxels);
  auto chain = buildChain(voxels, {});
  auto bytes = encodeBytes(voxels, chain, depths);
  // decode while lying about the bounding box
  std::vector<Vec3i> out;
  ContextDecoder cd(kPredTreeContextCount, bytes);
  CHECK_THROWS_AS(decodeChain(uint32_t(voxels.size()), {1, 1, 1}, cd, out),
                  CorruptStream);
}
