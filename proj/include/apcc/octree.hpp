#pragma once

#include <cstdint>
#include <vector>

#include "apcc/common.hpp"
#include "apcc/entropy.hpp"

namespace apcc {

// Octree geometry branch: implicit BT/QT/OT partition controlled by (K, M),
// occupancy coding with sparse/dense neighbor context sets, single-point
// direct mode and planar mode. Decoding is lossless: it reproduces the
// encoded voxel set exactly.

struct OctreeConfig {
  int kLayers = 0;  // K: leading layers using the equalizing partition logic
  int mLayers = 0;  // M: trailing layers splitting every remaining axis
  bool isolatedMode = false;
  // A layer may terminate single-point nodes when the average number of
  // points per node exceeds one by less than this threshold.
  double isolatedLayerRatio = 0.25;
  enum class ContextSet : uint8_t { Sparse = 0, Dense = 1 };
  ContextSet contextSet = ContextSet::Dense;
  bool planarMode = false;
  double planarDensityThreshold = 3.0;  // points per 2^3 of tight-box volume
  // Measurement baseline: code every bin as a bypass bit (fixed 1/2 model).
  // Never serialized; streams written with it are not meant to be decoded.
  bool contextFree = false;
};

struct PartitionLevel {
  int stage = 0;          // 1..4
  uint8_t splitMask = 0;  // bit 0 = x, 1 = y, 2 = z
  int occupancyBits = 0;  // 2^popcount(splitMask)
};
using PartitionPlan = std::vector<PartitionLevel>;

// Derived deterministically from (d_x, d_y, d_z, K, M); the decoder rebuilds
// the identical plan from the header. An axis of size 1 is never split.
PartitionPlan buildPartitionPlan(Vec3<int> bitDepths, const OctreeConfig& cfg);

// Slice-level planar eligibility (the decision is carried in the header since
// the decoder cannot derive it before decoding the geometry).
bool planarSliceEligible(size_t pointCount, const std::vector<Vec3i>& voxels,
                         const OctreeConfig& cfg);

// Context bank layout of the geometry data unit.
constexpr size_t kOctreeOccupancyContexts = 1024;
constexpr size_t kOctreeIsolatedCtx = kOctreeOccupancyContexts;
constexpr size_t kOctreePlanarCtxBase = kOctreeIsolatedCtx + 1;
constexpr size_t kOctreePlanarContexts = 3 * 2 * 2;
constexpr size_t kOctreeContextCount = kOctreePlanarCtxBase + kOctreePlanarContexts;

struct OctreeStats {
  uint64_t nodeCount = 0;
  uint64_t isolatedPoints = 0;
};

OctreeStats encodeOctreeGeometry(const std::vector<Vec3i>& voxels,
                                 Vec3<int> bitDepths, const OctreeConfig& cfg,
                                 bool planarActive, ContextEncoder& ce,
                                 std::vector<uint32_t>* ctxTrace = nullptr);

std::vector<Vec3i> decodeOctreeGeometry(uint32_t pointCount, Vec3<int> bitDepths,
                                        const OctreeConfig& cfg, bool planarActive,
                                        ContextDecoder& cd);

}  // namespace apcc
