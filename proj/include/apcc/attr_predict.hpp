#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "apcc/common.hpp"
#include "apcc/curves.hpp"
#include "apcc/entropy.hpp"

namespace apcc {

// Attribute branch 2: interpolation prediction over a curve-sorted cloud.
// Candidates come from a bounded cache of recently coded points viewed in
// two Morton orders (plain and offset by C), LoD levels code coarse to fine,
// and a small reference set keeps geometrically near reconstructions alive.
// The prediction loop is closed: both sides predict from reconstructed
// values.

struct PredictConfig {
  CurveOrder order = CurveOrder::Hilbert;
  uint32_t cacheSizeM = 128;  // size of the coded-point cache
  uint32_t offsetC = 1;       // coordinate offset of the second Morton order
  int lodShiftK = 0;          // right shifts per LoD step; 0 = auto-select
  int lodLevelsN = 3;
  bool intraLayer = true;
  int maxNeighbors = 3;
  double samplingTarget = 0.6;
  double crossAttrLambda = 0.5;  // weight of attribute distance, 2nd pass on
};

constexpr size_t kMaxAttrChannels = 4;

struct AttrChannelGroup {
  std::vector<std::vector<int32_t>> values;  // [channel][point], sorted order
  std::vector<int32_t> midpoints;            // fallback prediction per channel
};

//============================================================================
// Reusable pieces (each is also exercised directly by tests).

// Smallest K >= 1 whose 2^K-sided blocks keep at least `target` of the points
// as sampled neighbors of the promoted ones; maxShift when none qualifies.
int autoSelectLodShift(const std::vector<uint64_t>& mortonCodes, double target,
                       int maxShift);

// Level per point in [1, N]; input codes follow the coding sort order.
std::vector<uint8_t> buildLod(const std::vector<uint64_t>& mortonCodes, int shiftK,
                              int levelsN);

// Union of the 2*maxNeighbors cache entries nearest to the current point's
// code in each of the two Morton orders. `cache` holds indices of coded
// points, oldest first.
std::vector<uint32_t> doubleMortonCandidates(std::span<const uint32_t> cache,
                                             const std::vector<uint64_t>& m1,
                                             const std::vector<uint64_t>& m2,
                                             uint64_t curM1, uint64_t curM2,
                                             int maxNeighbors);

struct PredictorCandidate {
  Vec3i pos;
  std::array<double, kMaxAttrChannels> recon{};
  double attrDist = 0;     // cross-attribute term, already summed
  uint32_t codingIndex = 0;
};

// Weighted interpolation from the maxNeighbors nearest candidates by
// comprehensive distance d = L1 + lambda * attrDist, weights 1/(1+d).
std::array<double, kMaxAttrChannels> predictPoint(
  const Vec3i& current, std::span<const PredictorCandidate> candidates,
  size_t channelCount, const PredictConfig& cfg, double lambda,
  std::span<const int32_t> midpoints);

struct ReferenceEntry {
  Vec3i pos;
  std::array<double, kMaxAttrChannels> recon{};
  uint8_t level = 1;
  uint32_t codingIndex = 0;
};

// Insert when below capacity; otherwise replace the member farthest (L1)
// from the query, and only when the new entry is nearer. Distance ties pick
// the oldest member as farthest.
void updateReferenceSet(std::vector<ReferenceEntry>& set, size_t capacity,
                        const ReferenceEntry& entry, const Vec3i& query);

//============================================================================

size_t predictAttrContextCount(size_t totalChannels);

// Encoder-side observation hook: per coded point (in coding order) the point
// index and the real-valued channel predictions, before rounding.
struct PredictTrace {
  std::vector<uint32_t> codingOrder;
  std::vector<double> predictions;  // channelCount entries per point per group
};

void encodePredictAttributes(const std::vector<Vec3i>& sortedVoxels,
                             const std::vector<AttrChannelGroup>& groups, int qp,
                             const PredictConfig& cfg, ContextEncoder& ce,
                             PredictTrace* trace = nullptr);

std::vector<AttrChannelGroup> decodePredictAttributes(
  const std::vector<Vec3i>& sortedVoxels, std::span<const size_t> groupChannels,
  std::span<const std::vector<int32_t>> groupMidpoints, int qp,
  const PredictConfig& cfg, ContextDecoder& cd);

}  // namespace apcc
