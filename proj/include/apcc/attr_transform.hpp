#pragma once

#include <cstdint>
#include <vector>

#include "apcc/common.hpp"
#include "apcc/entropy.hpp"

namespace apcc {

// Attribute branch 1: pairwise-merge hierarchy over the Hilbert-sorted cloud
// with a weighted two-point orthonormal transform; points left unmerged in a
// layer are coded by 3-neighbor prediction with inverse-Manhattan weights.
// Both sides rebuild the hierarchy from the (already decoded) geometry, so
// only coefficients and residuals travel in the stream.

struct TransformConfig {
  double initialDistanceThreshold = 2.0;
  double thresholdGrowth = 2.0;  // per-layer multiplier
  int smallLayerCutoff = 128;
  double forceMergeFraction = 0.5;
};

enum class HierRole : uint8_t { Transformation = 0, Prediction = 1 };

struct HierNode {
  Vec3d pos{};          // weighted mean of children positions
  uint32_t weight = 1;  // number of original points covered
  int32_t child0 = -1;  // indices into the layer below; child1 < 0 for singles
  int32_t child1 = -1;
  HierRole role = HierRole::Transformation;

  bool isPair() const { return child1 >= 0; }
};

struct AttributeHierarchy {
  // layers[0] holds one node per input point; the last layer has one node.
  std::vector<std::vector<HierNode>> layers;
};

AttributeHierarchy buildHierarchy(const std::vector<Vec3i>& sortedVoxels,
                                  const TransformConfig& cfg);

// Structure fingerprint used to verify encoder/decoder rebuild identity.
uint64_t hierarchyStructuralHash(const AttributeHierarchy& h);

//============================================================================
// Two-point weighted orthonormal transform.
//   dc = (sqrt(wa)*a + sqrt(wb)*b) / sqrt(wa+wb)
//   ac = (-sqrt(wb)*a + sqrt(wa)*b) / sqrt(wa+wb)

void pairTransform(double a, double b, uint32_t wa, uint32_t wb, double& dc,
                   double& ac);
void pairInverse(double dc, double ac, uint32_t wa, uint32_t wb, double& a,
                 double& b);

//============================================================================
// Uniform quantizer shared by both attribute branches.
// step = 2^((qp-4)/6), clamped to at least 1/256. qp = 0 is the lossless
// mode: the branches bypass the quantizer and code integers exactly.

double quantStep(int qp);
int64_t quantize(double coeff, int qp);
double dequantize(int64_t q, int qp);

//============================================================================

size_t transformContextCount(size_t channelCount);

// channels[c][i] is channel c of the i-th point in hierarchy (sorted) order.
void encodeTransformAttributes(const AttributeHierarchy& h,
                               const std::vector<std::vector<int32_t>>& channels,
                               int qp, ContextEncoder& ce);

std::vector<std::vector<int32_t>> decodeTransformAttributes(
  const AttributeHierarchy& h, size_t channelCount, int qp, ContextDecoder& cd);

}  // namespace apcc
