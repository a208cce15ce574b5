#include "apcc/predtree.hpp"

#include <algorithm>

#include "apcc/curves.hpp"
#include "apcc/kdtree.hpp"

namespace apcc {

std::vector<uint32_t> buildChain(const std::vector<Vec3i>& voxels,
                                 const PredTreeConfig&) {
  if (voxels.empty())
    throw EmptyInput("predtree: empty cloud");

  uint32_t root = 0;
  uint64_t rootCode = UINT64_MAX;
  for (uint32_t i = 0; i < voxels.size(); i++) {
    uint64_t code = mortonEncode(voxels[i], 21);
    if (code < rootCode) {
      rootCode = code;
      root = i;
    }
  }

  std::vector<uint32_t> chain;
  chain.reserve(voxels.size());
  chain.push_back(root);

  KdTree tree(voxels);
  tree.remove(int32_t(root));
  Vec3i cur = voxels[root];
  while (tree.aliveCount() > 0) {
    int32_t nxt = tree.nearest(cur);
    chain.push_back(uint32_t(nxt));
    tree.remove(nxt);
    cur = voxels[nxt];
  }
  return chain;
}

//============================================================================

namespace {

size_t signCtx(int axis, int prevPositive) {
  return kPredSignCtxBase + size_t(axis) * 2 + size_t(prevPositive);
}

}  // namespace

void encodeChain(const std::vector<Vec3i>& voxels,
                 const std::vector<uint32_t>& chain, Vec3<int> bitDepths,
                 ContextEncoder& ce) {
  const Vec3i& root = voxels[chain[0]];
  for (int a = 0; a < 3; a++)
    if (bitDepths[a] > 0)
      ce.encodeBypassBits(uint64_t(root[a]), bitDepths[a]);

  int prevPositive[3] = {1, 1, 1};
  for (size_t i = 1; i < chain.size(); i++) {
    const Vec3i& parent = voxels[chain[i - 1]];
    const Vec3i& cur = voxels[chain[i]];
    for (int a = 0; a < 3; a++) {
      int32_t r = cur[a] - parent[a];
      ce.encodeUint(uint32_t(std::abs(r)), kPredMagCtxBase + size_t(a) * 8);
      if (r != 0) {
        int positive = r > 0;
        ce.encodeBin(signCtx(a, prevPositive[a]), positive);
        prevPositive[a] = positive;
      }
    }
  }
}

void decodeChain(uint32_t pointCount, Vec3<int> bitDepths, ContextDecoder& cd,
                 std::vector<Vec3i>& out) {
  if (pointCount == 0)
    throw CorruptStream("predtree: zero point count");

  Vec3i cur{0, 0, 0};
  for (int a = 0; a < 3; a++)
    if (bitDepths[a] > 0)
      cur[a] = int32_t(cd.decodeBypassBits(bitDepths[a]));
  out.push_back(cur);

  int prevPositive[3] = {1, 1, 1};
  for (uint32_t i = 1; i < pointCount; i++) {
    Vec3i nxt = cur;
    for (int a = 0; a < 3; a++) {
      auto mag = int32_t(cd.decodeUint(kPredMagCtxBase + size_t(a) * 8));
      if (mag != 0) {
        int positive = cd.decodeBin(signCtx(a, prevPositive[a]));
        prevPositive[a] = positive;
        nxt[a] += positive ? mag : -mag;
      }
      if (nxt[a] < 0 || nxt[a] >= (int64_t(1) << bitDepths[a]))
        throw CorruptStream("predtree: coordinate out of bounding box");
    }
    out.push_back(nxt);
    cur = nxt;
  }
}

}  // namespace apcc
