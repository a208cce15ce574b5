#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "apcc/octree.hpp"
#include "test_util.hpp"

using namespace apcc;
using namespace testutil;

namespace {

std::vector<uint8_t> encodeBytes(const std::vector<Vec3i>& voxels,
                                 const OctreeConfig& cfg, bool planarActive = false,
                                 OctreeStats* stats = nullptr,
                                 std::vector<uint32_t>* trace = nullptr) {
  ContextEncoder ce(kOctreeContextCount);
  auto depths = depthsOf(voxels);
  OctreeStats s = encodeOctreeGeometry(voxels, depths, cfg, planarActive, ce, trace);
  if (stats)
    *stats = s;
  return ce.finish();
}

std::vector<Vec3i> decodeBytes(const std::vector<uint8_t>& bytes, size_t count,
                               Vec3<int> depths, const OctreeConfig& cfg,
                               bool planarActive = false) {
  ContextDecoder cd(kOctreeContextCount, bytes);
  return decodeOctreeGeometry(uint32_t(count), depths, cfg, planarActive, cd);
}

void checkRoundTrip(const std::vector<Vec3i>& voxels, const OctreeConfig& cfg,
                    bool planarActive = false) {
  auto bytes = encodeBytes(voxels, cfg, planarActive);
  auto decoded =
    decodeBytes(bytes, voxels.size(), depthsOf(voxels), cfg, planarActive);
  CHECK(asSet(decoded) == asSet(voxels));
}

}  // namespace

//============================================================================

TEST_CASE("partition plan: equal cube is pure octree") {
  OctreeConfig cfg;
  auto plan = buildPartitionPlan({5, 5, 5}, cfg);
  REQUIRE(plan.size() == 5);
  for (const auto& lev : plan) {
    CHECK(lev.splitMask == 7);
    CHECK(lev.occupancyBits == 8);
  }
}

TEST_CASE("partition plan: K equalizes the largest axis first") {
  OctreeConfig cfg;
  cfg.kLayers = 1;
  auto plan = buildPartitionPlan({3, 2, 2}, cfg);
  REQUIRE(plan.size() == 3);
  CHECK(plan[0].stage == 1);
  CHECK(plan[0].splitMask == 1);  // binary split on x
  CHECK(plan[0].occupancyBits == 2);
  CHECK(plan[1].splitMask == 7);
  CHECK(plan[1].occupancyBits == 8);
  CHECK(plan[2].occupancyBits == 8);
}

TEST_CASE("partition plan: two tied largest axes give a quadtree level") {
  OctreeConfig cfg;
  cfg.kLayers = 2;
  auto plan = buildPartitionPlan({2, 2, 1}, cfg);
  CHECK(plan[0].splitMask == 3);  // x and y
  CHECK(plan[0].occupancyBits == 4);
}

TEST_CASE("partition plan: trailing M layers split every live axis") {
  OctreeConfig cfg;
  cfg.mLayers = 2;
  auto plan = buildPartitionPlan({4, 3, 2}, cfg);
  // stage 3 equalizes down to max == M, stage 4 splits everything left
  size_t total = 0;
  for (const auto& lev : plan)
    total += size_t(std::popcount(lev.splitMask));
  CHECK(total == 4 + 3 + 2);
  CHECK(plan.back().stage == 4);
  // an axis of size 1 is never split
  for (const auto& lev : plan)
    CHECK(lev.occupancyBits == (1 << std::popcount(lev.splitMask)));
}

TEST_CASE("partition plan never splits an exhausted axis") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dd(1, 10), kk(0, 4);
  for (int iter = 0; iter < 50; iter++) {
    OctreeConfig cfg;
    cfg.kLayers = kk(rng);
    cfg.mLayers = kk(rng);
    Vec3<int> depths{dd(rng), dd(rng), dd(rng)};
    auto plan = buildPartitionPlan(depths, cfg);
    Vec3<int> left = depths;
    for (const auto& lev : plan)
      for (int a = 0; a < 3; a++)
        if (lev.splitMask >> a & 1) {
          CHECK(left[a] > 0);
          left[a]--;
        }
    CHECK(left == Vec3<int>{0, 0, 0});
  }
}

//============================================================================

TEST_CASE("eight corners of a 2x2x2 box code as one full node") {
  std::vector<Vec3i> voxels;
  for (int c = 0; c < 8; c++)
    voxels.push_back({c & 1, (c >> 1) & 1, (c >> 2) & 1});
  OctreeConfig cfg;
  OctreeStats stats;
  auto bytes = encodeBytes(voxels, cfg, false, &stats);
  CHECK(stats.nodeCount == 1);
  auto decoded = decodeBytes(bytes, 8, {1, 1, 1}, cfg);
  CHECK(asSet(decoded) == asSet(voxels));
}

TEST_CASE("a single point yields one node per level") {
  std::vector<Vec3i> voxels{{37, 12, 250}};
  OctreeConfig cfg;
  OctreeStats stats;
  auto bytes = encodeBytes(voxels, cfg, false, &stats);
  CHECK(stats.nodeCount == 8);  // depth is 8 for coordinate 250
  auto decoded = decodeBytes(bytes, 1, depthsOf(voxels), cfg);
  CHECK(asSet(decoded) == asSet(voxels));
}

TEST_CASE("a lone max-corner point uses the all-empty context throughout") {
  const int depth = 6;
  std::vector<Vec3i> voxels{{(1 << depth) - 1, (1 << depth) - 1, (1 << depth) - 1}};
  OctreeConfig cfg;
  for (auto set : {OctreeConfig::ContextSet::Sparse, OctreeConfig::ContextSet::Dense}) {
    cfg.contextSet = set;
    std::vector<uint32_t> trace;
    encodeBytes(voxels, cfg, false, nullptr, &trace);
    REQUIRE(trace.size() == size_t(depth) * 8);
    for (uint32_t ctx : trace)
      CHECK(ctx == 0);
  }
}

TEST_CASE("random cloud round-trips below raw cost") {
  std::mt19937_64 rng(101);
  auto voxels = randomVoxels(rng, 4096, 8);
  OctreeConfig cfg;
  auto bytes = encodeBytes(voxels, cfg);
  double bpp = double(bytes.size()) * 8 / double(voxels.size());
  CHECK(bpp < 24.0);
  auto decoded = decodeBytes(bytes, voxels.size(), depthsOf(voxels), cfg);
  CHECK(asSet(decoded) == asSet(voxels));
}

TEST_CASE("lossless round trip across plans and context sets") {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> kk(0, 3);
  for (int iter = 0; iter < 12; iter++) {
    auto voxels = randomVoxels(rng, 500 + iter * 97, 4 + iter % 6);
    OctreeConfig cfg;
    cfg.kLayers = kk(rng);
    cfg.mLayers = kk(rng);
    cfg.contextSet = iter % 2 ? OctreeConfig::ContextSet::Sparse
                              : OctreeConfig::ContextSet::Dense;
    checkRoundTrip(voxels, cfg);
  }
}

TEST_CASE("anisotropic boxes round-trip") {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int32_t> dx(0, 255), dy(0, 15), dz(0, 3);
  std::set<std::array<int32_t, 3>> uniq;
  while (uniq.size() < 600)
    uniq.insert({dx(rng), dy(rng), dz(rng)});
  std::vector<Vec3i> voxels;
  for (const auto& p : uniq)
    voxels.push_back({p[0], p[1], p[2]});
  for (int k : {0, 2}) {
    OctreeConfig cfg;
    cfg.kLayers = k;
    cfg.mLayers = 1;
    checkRoundTrip(voxels, cfg);
  }
}

TEST_CASE("the two context sets are genuinely different models") {
  std::mt19937_64 rng(77);
  auto voxels = randomVoxels(rng, 6000, 7);
  OctreeConfig sparse, dense;
  sparse.contextSet = OctreeConfig::ContextSet::Sparse;
  dense.contextSet = OctreeConfig::ContextSet::Dense;
  auto a = encodeBytes(voxels, sparse);
  auto b = encodeBytes(voxels, dense);
  CHECK(a.size() != b.size());
  checkRoundTrip(voxels, sparse);
  checkRoundTrip(voxels, dense);
}

TEST_CASE("context coding beats the fixed half-probability baseline") {
  std::mt19937_64 rng(88);
  auto voxels = randomVoxels(rng, 2000, 7);
  OctreeConfig cfg;
  auto contexted = encodeBytes(voxels, cfg);
  OctreeConfig raw = cfg;
  raw.contextFree = true;
  auto baseline = encodeBytes(voxels, raw);
  CHECK(contexted.size() < baseline.size());
}

//============================================================================

TEST_CASE("isolated mode shrinks a cloud with distant outliers") {
  std::mt19937_64 rng(99);
  // tight cluster in a corner of a deep box plus far-away outliers
  std::set<std::array<int32_t, 3>> uniq;
  std::uniform_int_distribution<int32_t> c(0, 31);
  while (uniq.size() < 500)
    uniq.insert({c(rng), c(rng), c(rng)});
  std::uniform_int_distribution<int32_t> far(1 << 10, (1 << 11) - 1);
  for (int i = 0; i < 10; i++)
    uniq.insert({far(rng), far(rng), far(rng)});
  std::vector<Vec3i> voxels;
  for (const auto& p : uniq)
    voxels.push_back({p[0], p[1], p[2]});

  OctreeConfig off;
  OctreeConfig on;
  on.isolatedMode = true;
  auto offBytes = encodeBytes(voxels, off);
  OctreeStats stats;
  auto onBytes = encodeBytes(voxels, on, false, &stats);
  CHECK(stats.isolatedPoints > 0);
  CHECK(onBytes.size() < offBytes.size());
  checkRoundTrip(voxels, on);
}

TEST_CASE("isolated points decode to their exact coordinates") {
  std::vector<Vec3i> voxels{{0, 0, 0}, {1023, 517, 213}};
  OctreeConfig cfg;
  cfg.isolatedMode = true;
  OctreeStats stats;
  auto bytes = encodeBytes(voxels, cfg, false, &stats);
  CHECK(stats.isolatedPoints > 0);  // two single-point nodes, sparse layers
  auto decoded = decodeBytes(bytes, 2, depthsOf(voxels), cfg);
  CHECK(asSet(decoded) == asSet(voxels));
}

TEST_CASE("isolated mode never fires on a dense cloud") {
  // a fully occupied 16^3 grid keeps every layer at 8 points per node
  std::vector<Vec3i> voxels;
  for (int32_t z = 0; z < 16; z++)
    for (int32_t y = 0; y < 16; y++)
      for (int32_t x = 0; x < 16; x++)
        voxels.push_back({x, y, z});
  OctreeConfig off;
  OctreeConfig on;
  on.isolatedMode = true;
  OctreeStats stats;
  auto onBytes = encodeBytes(voxels, on, false, &stats);
  auto offBytes = encodeBytes(voxels, off);
  CHECK(stats.isolatedPoints == 0);
  CHECK(onBytes == offBytes);  // payloads identical; only the header flag differs
}

//============================================================================

namespace {

std::vector<Vec3i> planeCloud(int depth, int32_t zPlane) {
  std::vector<Vec3i> voxels;
  const int32_t lim = 1 << depth;
  for (int32_t y = 0; y < lim; y++)
    for (int32_t x = 0; x < lim; x++)
      voxels.push_back({x, y, zPlane});
  return voxels;
}

}  // namespace

TEST_CASE("planar mode shrinks a planar cloud and stays lossless") {
  auto voxels = planeCloud(6, 21);
  OctreeConfig cfg;
  cfg.planarMode = true;
  CHECK(planarSliceEligible(voxels.size(), voxels, cfg));
  auto off = encodeBytes(voxels, cfg, false);
  auto on = encodeBytes(voxels, cfg, true);
  CHECK(on.size() < off.size());
  checkRoundTrip(voxels, cfg, true);
  checkRoundTrip(voxels, cfg, false);
}

TEST_CASE("uniform random clouds are not slice-eligible for planar mode") {
  std::mt19937_64 rng(55);
  auto voxels = randomVoxels(rng, 20000, 9);
  OctreeConfig cfg;
  cfg.planarMode = true;
  CHECK_FALSE(planarSliceEligible(voxels.size(), voxels, cfg));
}

TEST_CASE("decode is exact whatever the planar flag") {
  auto voxels = planeCloud(5, 7);
  OctreeConfig cfg;
  cfg.planarMode = true;
  for (bool planar : {false, true})
    checkRoundTrip(voxels, cfg, planar);
}

TEST_CASE("single voxel at the origin round-trips with an empty plan") {
  std::vector<Vec3i> voxels{{0, 0, 0}};
  OctreeConfig cfg;
  auto bytes = encodeBytes(voxels, cfg);
  auto decoded = decodeBytes(bytes, 1, {0, 0, 0}, cfg);
  CHECK(asSet(decoded) == asSet(voxels));
}
