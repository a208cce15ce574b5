#include "apcc/octree.hpp"

#include <algorithm>
#include <bit>

namespace apcc {

namespace {

uint64_t packKey(const Vec3i& v) {
  return uint64_t(uint32_t(v.x)) | (uint64_t(uint32_t(v.y)) << 21)
    | (uint64_t(uint32_t(v.z)) << 42);
}

bool packable(const Vec3i& v) {
  const int32_t lim = 1 << 21;
  return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < lim && v.y < lim && v.z < lim;
}

// Open-addressing hash over packed coordinates; this sits on the innermost
// coding path, where unordered_map is several times slower.
class FlatCoordMap {
public:
  void reset(size_t expected) {
    size_t cap = 16;
    while (cap < expected * 2)
      cap <<= 1;
    _mask = cap - 1;
    _keys.assign(cap, 0);
    _vals.assign(cap, 0);
  }

  void put(uint64_t key, uint8_t val) {
    if (_filled * 2 >= _mask + 1)
      grow();
    key++;  // reserve 0 for empty slots
    size_t i = mix(key);
    while (_keys[i] != 0 && _keys[i] != key)
      i = (i + 1) & _mask;
    if (_keys[i] == 0) {
      _keys[i] = key;
      _filled++;
    }
    _vals[i] = val;
  }

  const uint8_t* find(uint64_t key) const {
    key++;
    size_t i = mix(key);
    while (_keys[i] != 0) {
      if (_keys[i] == key)
        return &_vals[i];
      i = (i + 1) & _mask;
    }
    return nullptr;
  }

private:
  size_t mix(uint64_t key) const {
    key *= 0x9E3779B97F4A7C15ull;
    return size_t(key >> 32) & _mask;
  }

  void grow() {
    std::vector<uint64_t> oldKeys = std::move(_keys);
    std::vector<uint8_t> oldVals = std::move(_vals);
    size_t cap = (_mask + 1) * 2;
    _mask = cap - 1;
    _keys.assign(cap, 0);
    _vals.assign(cap, 0);
    _filled = 0;
    for (size_t i = 0; i < oldKeys.size(); i++)
      if (oldKeys[i] != 0) {
        size_t j = mix(oldKeys[i]);
        while (_keys[j] != 0)
          j = (j + 1) & _mask;
        _keys[j] = oldKeys[i];
        _vals[j] = oldVals[i];
        _filled++;
      }
  }

  std::vector<uint64_t> _keys{16, 0};
  std::vector<uint8_t> _vals{16, 0};
  size_t _mask = 15;
  size_t _filled = 0;
};

// Children with bit==0 on the given axis (child index packs x in bit 0).
constexpr uint8_t kHalfMask[3][2] = {
  {0x55, 0xAA},
  {0x33, 0xCC},
  {0x0F, 0xF0},
};

constexpr Vec3i kPlanarNeighborOffsets[5] = {
  {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}, {-1, -1, 0}, {-1, 0, -1}};

//============================================================================
// Per-level coding state shared by encoder and decoder. The child map holds
// child-grid cells coded occupied so far (coding order), the pattern map the
// finished occupancy of same-layer nodes, and the exists set every node of
// the layer (known to both sides once the parent layer is done).

struct LevelMaps {
  FlatCoordMap nodeExists;
  FlatCoordMap childOccupied;
  FlatCoordMap nodePattern;

  void reset(size_t nodeCount) {
    nodeExists.reset(nodeCount);
    childOccupied.reset(nodeCount * 4);
    nodePattern.reset(nodeCount);
  }

  bool nodeAt(const Vec3i& p) const {
    return packable(p) && nodeExists.find(packKey(p)) != nullptr;
  }
  bool childAt(const Vec3i& q) const {
    return packable(q) && childOccupied.find(packKey(q)) != nullptr;
  }
  const uint8_t* patternAt(const Vec3i& p) const {
    return packable(p) ? nodePattern.find(packKey(p)) : nullptr;
  }
};

// Packs the sub-layer child neighborhood (3 coplanar, 3 co-edge, 1 co-point)
// plus the same-layer parent bits into the occupancy context index.
uint32_t occupancyContext(const LevelMaps& maps, const Vec3i& nodePos,
                          const Vec3i& childPos, uint8_t octant,
                          OctreeConfig::ContextSet set) {
  static constexpr Vec3i kChildOffsets[7] = {
    {-1, 0, 0}, {0, -1, 0}, {0, 0, -1},
    {-1, -1, 0}, {-1, 0, -1}, {0, -1, -1},
    {-1, -1, -1}};
  uint32_t idx = 0;
  for (int i = 0; i < 7; i++)
    idx |= uint32_t(maps.childAt(childPos + kChildOffsets[i])) << i;

  for (int a = 0; a < 3; a++) {
    int sign = (octant >> a) & 1 ? 1 : -1;
    Vec3i near = nodePos;
    near[a] += sign;
    if (set == OctreeConfig::ContextSet::Sparse) {
      idx |= uint32_t(maps.nodeAt(near)) << (7 + a);
    } else {
      Vec3i far = nodePos;
      far[a] -= sign;
      idx |= uint32_t(maps.nodeAt(near) ^ maps.nodeAt(far)) << (7 + a);
    }
  }
  return idx;
}

// Planar reference scan: first of the 5 coded same-layer neighbors with more
// than 3 occupied children and a fully empty half along some axis.
bool findPlanarReference(const LevelMaps& maps, const Vec3i& nodePos, int& axis,
                         int& emptyHalf) {
  for (const Vec3i& off : kPlanarNeighborOffsets) {
    const uint8_t* pat = maps.patternAt(nodePos + off);
    if (!pat || std::popcount(*pat) <= 3)
      continue;
    for (int a = 0; a < 3; a++)
      for (int h = 0; h < 2; h++)
        if ((*pat & kHalfMask[a][h]) == 0) {
          axis = a;
          emptyHalf = h;
          return true;
        }
  }
  return false;
}

// The planar bank is indexed by (axis, empty half of the reference, half of
// the child). It is applied to the bins lying in the predicted-empty half;
// bins in the occupied half keep the regular neighborhood context, which
// models the in-plane structure far better than a 12-state bank could.
size_t planarContext(int axis, int emptyHalf, int childHalf) {
  return kOctreePlanarCtxBase
    + (size_t(axis) * 2 + size_t(emptyHalf)) * 2 + size_t(childHalf);
}

struct LevelGeometry {
  PartitionPlan plan;
  // sizeLog[l][a] = per-axis log2 node size at level l (sizeLog[0] = depths)
  std::vector<Vec3<int>> sizeLog;
};

LevelGeometry levelGeometry(Vec3<int> bitDepths, const OctreeConfig& cfg) {
  LevelGeometry g;
  g.plan = buildPartitionPlan(bitDepths, cfg);
  g.sizeLog.resize(g.plan.size() + 1);
  g.sizeLog[0] = bitDepths;
  for (size_t l = 0; l < g.plan.size(); l++) {
    Vec3<int> s = g.sizeLog[l];
    for (int a = 0; a < 3; a++)
      if (g.plan[l].splitMask >> a & 1)
        s[a]--;
    g.sizeLog[l + 1] = s;
  }
  return g;
}

// Child index inside a node: one bit per split axis, x lowest.
int childIndexOf(const Vec3i& v, const Vec3<int>& childLog, uint8_t splitMask) {
  int idx = 0, rank = 0;
  for (int a = 0; a < 3; a++)
    if (splitMask >> a & 1)
      idx |= ((v[a] >> childLog[a]) & 1) << rank++;
  return idx;
}

// Octant mask over all three axes (0 on non-split axes), used for the
// same-layer neighbor orientation.
uint8_t octantOf(int childIdx, uint8_t splitMask) {
  uint8_t oct = 0;
  int rank = 0;
  for (int a = 0; a < 3; a++)
    if (splitMask >> a & 1)
      oct |= uint8_t(((childIdx >> rank++) & 1) << a);
  return oct;
}

Vec3i childPosOf(const Vec3i& nodePos, uint8_t octant, uint8_t splitMask) {
  Vec3i q = nodePos;
  for (int a = 0; a < 3; a++)
    if (splitMask >> a & 1)
      q[a] = q[a] * 2 + ((octant >> a) & 1);
  return q;
}

}  // namespace

//============================================================================

PartitionPlan buildPartitionPlan(Vec3<int> bitDepths, const OctreeConfig& cfg) {
  Vec3<int> l = bitDepths;
  PartitionPlan plan;

  auto emit = [&](int stage, uint8_t mask) {
    for (int a = 0; a < 3; a++)
      if (mask >> a & 1)
        l[a]--;
    plan.push_back({stage, mask, 1 << std::popcount(mask)});
  };
  auto equalizeMask = [&]() {
    int mx = l.maxComponent();
    uint8_t mask = 0;
    for (int a = 0; a < 3; a++)
      if (l[a] == mx)
        mask |= uint8_t(1 << a);
    return mask;
  };
  auto allMask = [&]() {
    uint8_t mask = 0;
    for (int a = 0; a < 3; a++)
      if (l[a] > 0)
        mask |= uint8_t(1 << a);
    return mask;
  };

  const int m = std::max(0, cfg.mLayers);
  for (int i = 0; i < cfg.kLayers && l.maxComponent() > 0; i++)
    emit(1, equalizeMask());
  while (l.minComponent() > m)
    emit(2, allMask());
  while (l.maxComponent() > m)
    emit(3, equalizeMask());
  while (l.maxComponent() > 0)
    emit(4, allMask());
  return plan;
}

bool planarSliceEligible(size_t pointCount, const std::vector<Vec3i>& voxels,
                         const OctreeConfig& cfg) {
  if (voxels.empty())
    return false;
  Vec3i lo = voxels[0], hi = voxels[0];
  for (const auto& v : voxels)
    for (int a = 0; a < 3; a++) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  double volume = 1.0;
  for (int a = 0; a < 3; a++)
    volume *= double(hi[a] - lo[a] + 1);
  return 8.0 * double(pointCount) / volume >= cfg.planarDensityThreshold;
}

//============================================================================
// Encoder

OctreeStats encodeOctreeGeometry(const std::vector<Vec3i>& voxels,
                                 Vec3<int> bitDepths, const OctreeConfig& cfg,
                                 bool planarActive, ContextEncoder& ce,
                                 std::vector<uint32_t>* ctxTrace) {
  if (voxels.empty())
    throw EmptyInput("octree: empty cloud");

  const LevelGeometry g = levelGeometry(bitDepths, cfg);
  const size_t n = voxels.size();

  auto bin = [&](size_t ctx, int b) {
    if (cfg.contextFree)
      ce.encodeBypass(b);
    else
      ce.encodeBin(ctx, b);
  };
  ce.setAdaptShift(kOctreePlanarCtxBase, kOctreeContextCount, 4);

  // Generalized Morton keys following the plan's level order, so node spans
  // stay contiguous through mixed BT/QT/OT levels. keyShift[l] recovers the
  // child index at level l from a key.
  std::vector<int> keyShift(g.plan.size());
  {
    int total = 0;
    for (size_t l = g.plan.size(); l-- > 0;) {
      keyShift[l] = total;
      total += std::popcount(g.plan[l].splitMask);
    }
  }
  std::vector<uint64_t> keys(n);
  for (size_t i = 0; i < n; i++) {
    uint64_t key = 0;
    for (size_t l = 0; l < g.plan.size(); l++) {
      int bits = std::popcount(g.plan[l].splitMask);
      key = (key << bits)
        | uint64_t(childIndexOf(voxels[i], g.sizeLog[l + 1], g.plan[l].splitMask));
    }
    keys[i] = key;
  }
  std::vector<uint32_t> order(n);
  for (size_t i = 0; i < n; i++)
    order[i] = uint32_t(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](uint32_t a, uint32_t b) { return keys[a] < keys[b]; });

  struct Node {
    uint32_t begin, end;
    Vec3i pos;
  };
  std::vector<Node> nodes{{0, uint32_t(n), {0, 0, 0}}};
  std::vector<Node> next;
  LevelMaps maps;
  OctreeStats stats;
  uint64_t pointsRemaining = n;

  for (size_t l = 0; l < g.plan.size(); l++) {
    const PartitionLevel& lev = g.plan[l];
    const bool isolatedEligible = cfg.isolatedMode && !nodes.empty()
      && double(pointsRemaining)
        < (1.0 + cfg.isolatedLayerRatio) * double(nodes.size());

    maps.reset(nodes.size());
    for (const Node& nd : nodes)
      maps.nodeExists.put(packKey(nd.pos), 1);

    next.clear();
    uint64_t isolatedThisLayer = 0;
    stats.nodeCount += nodes.size();

    for (const Node& nd : nodes) {
      if (isolatedEligible) {
        const bool single = nd.end - nd.begin == 1;
        bin(kOctreeIsolatedCtx, single);
        if (single) {
          const Vec3i& v = voxels[order[nd.begin]];
          for (int a = 0; a < 3; a++) {
            int rem = g.sizeLog[l][a];
            if (rem > 0)
              ce.encodeBypassBits(uint64_t(v[a]) & ((uint64_t(1) << rem) - 1), rem);
          }
          isolatedThisLayer++;
          continue;
        }
      }

      // occupancy pattern and child spans, from the sort keys
      uint8_t pattern = 0;
      uint32_t childBegin[9] = {};
      {
        const int shift = keyShift[l];
        const uint64_t mask = uint64_t(lev.occupancyBits) - 1;
        uint32_t i = nd.begin;
        childBegin[0] = nd.begin;
        for (int c = 0; c < lev.occupancyBits; c++) {
          while (i < nd.end && int((keys[order[i]] >> shift) & mask) == c)
            i++;
          childBegin[c + 1] = i;
          if (childBegin[c + 1] > childBegin[c])
            pattern |= uint8_t(1 << c);
        }
      }

      int planarAxis = 0, planarHalf = 0;
      const bool planar = planarActive && lev.occupancyBits == 8
        && findPlanarReference(maps, nd.pos, planarAxis, planarHalf);

      for (int c = 0; c < lev.occupancyBits; c++) {
        uint8_t octant = octantOf(c, lev.splitMask);
        Vec3i q = childPosOf(nd.pos, octant, lev.splitMask);
        int b = pattern >> c & 1;
        uint32_t ctx = occupancyContext(maps, nd.pos, q, octant, cfg.contextSet);
        size_t ctxIdx = ctx;
        if (planar) {
          int childHalf = (octant >> planarAxis) & 1;
          if (childHalf == planarHalf)
            ctxIdx = planarContext(planarAxis, planarHalf, childHalf);
        }
        if (ctxTrace)
          ctxTrace->push_back(uint32_t(ctxIdx));
        bin(ctxIdx, b);
        if (b) {
          maps.childOccupied.put(packKey(q), 1);
          if (l + 1 < g.plan.size())
            next.push_back({childBegin[c], childBegin[c + 1], q});
        }
      }
      maps.nodePattern.put(packKey(nd.pos), pattern);
    }

    pointsRemaining -= isolatedThisLayer;
    stats.isolatedPoints += isolatedThisLayer;
    nodes.swap(next);
  }
  return stats;
}

//============================================================================
// Decoder

std::vector<Vec3i> decodeOctreeGeometry(uint32_t pointCount, Vec3<int> bitDepths,
                                        const OctreeConfig& cfg, bool planarActive,
                                        ContextDecoder& cd) {
  const LevelGeometry g = levelGeometry(bitDepths, cfg);
  std::vector<Vec3i> out;
  out.reserve(std::min<uint32_t>(pointCount, 1u << 20));
  if (pointCount == 0)
    throw CorruptStream("octree: zero point count");
  if (g.plan.empty()) {
    // degenerate 1x1x1 box; the root is the voxel
    if (pointCount != 1)
      throw CorruptStream("octree: empty plan with multiple points");
    out.push_back({0, 0, 0});
    return out;
  }

  cd.setAdaptShift(kOctreePlanarCtxBase, kOctreeContextCount, 4);
  std::vector<Vec3i> nodes{{0, 0, 0}};
  std::vector<Vec3i> next;
  LevelMaps maps;
  uint64_t pointsRemaining = pointCount;

  for (size_t l = 0; l < g.plan.size(); l++) {
    const PartitionLevel& lev = g.plan[l];
    if (nodes.size() > pointsRemaining)
      throw CorruptStream("octree: more nodes than points");
    const bool isolatedEligible = cfg.isolatedMode && !nodes.empty()
      && double(pointsRemaining)
        < (1.0 + cfg.isolatedLayerRatio) * double(nodes.size());

    maps.reset(nodes.size());
    for (const Vec3i& p : nodes)
      maps.nodeExists.put(packKey(p), 1);

    next.clear();
    uint64_t isolatedThisLayer = 0;
    const bool lastLevel = l + 1 == g.plan.size();

    for (const Vec3i& p : nodes) {
      if (isolatedEligible && cd.decodeBin(kOctreeIsolatedCtx)) {
        Vec3i v = p;
        for (int a = 0; a < 3; a++) {
          int rem = g.sizeLog[l][a];
          v[a] <<= rem;
          if (rem > 0)
            v[a] |= int32_t(cd.decodeBypassBits(rem));
        }
        out.push_back(v);
        isolatedThisLayer++;
        continue;
      }

      int planarAxis = 0, planarHalf = 0;
      const bool planar = planarActive && lev.occupancyBits == 8
        && findPlanarReference(maps, p, planarAxis, planarHalf);

      uint8_t pattern = 0;
      for (int c = 0; c < lev.occupancyBits; c++) {
        uint8_t octant = octantOf(c, lev.splitMask);
        Vec3i q = childPosOf(p, octant, lev.splitMask);
        uint32_t ctx = occupancyContext(maps, p, q, octant, cfg.contextSet);
        size_t ctxIdx = ctx;
        if (planar) {
          int childHalf = (octant >> planarAxis) & 1;
          if (childHalf == planarHalf)
            ctxIdx = planarContext(planarAxis, planarHalf, childHalf);
        }
        if (cd.decodeBin(ctxIdx)) {
          pattern |= uint8_t(1 << c);
          maps.childOccupied.put(packKey(q), 1);
          if (lastLevel)
            out.push_back(q);
          else
            next.push_back(q);
        }
      }
      if (pattern == 0)
        throw CorruptStream("octree: empty occupancy pattern");
      maps.nodePattern.put(packKey(p), pattern);
    }

    pointsRemaining -= isolatedThisLayer;
    nodes.swap(next);
  }

  if (out.size() != pointCount)
    throw CorruptStream("octree: decoded point count mismatch");
  return out;
}

}  // namespace apcc
