#pragma once

#include <cstdint>
#include <vector>

#include "apcc/common.hpp"
#include "apcc/entropy.hpp"

namespace apcc {

// Predictive-tree geometry branch: the tree is a linear linked list built by
// repeated nearest-neighbor extraction from a KD-tree, and every non-root
// node is coded as a per-axis residual against its predecessor (sign bin
// conditioned on the previous nonzero sign per axis, magnitude via the
// unsigned binarization).

struct PredTreeConfig {
  int kdLeafSize = 8;  // kept for tuning; the KD-tree stores one point per node
};

// Chain order: a permutation of the input. chain[0] is the voxel with the
// smallest Morton code; chain[i+1] is the nearest unplaced neighbor of
// chain[i] (squared Euclidean, ties by smaller Morton code).
std::vector<uint32_t> buildChain(const std::vector<Vec3i>& voxels,
                                 const PredTreeConfig& cfg);

// Context bank layout of the predictive-tree data unit.
constexpr size_t kPredMagCtxBase = 0;        // 3 axes * 8 prefix contexts
constexpr size_t kPredSignCtxBase = 24;      // 3 axes * {prev -, prev +}
constexpr size_t kPredTreeContextCount = 30;

void encodeChain(const std::vector<Vec3i>& voxels,
                 const std::vector<uint32_t>& chain, Vec3<int> bitDepths,
                 ContextEncoder& ce);

// Appends decoded positions to `out` as they become available so that a
// stream prefix yields a chain prefix; throws on underrun or when a decoded
// coordinate escapes the bounding box.
void decodeChain(uint32_t pointCount, Vec3<int> bitDepths, ContextDecoder& cd,
                 std::vector<Vec3i>& out);

}  // namespace apcc
