#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apcc/attr_predict.hpp"
#include "apcc/attr_transform.hpp"
#include "apcc/cloud.hpp"
#include "apcc/octree.hpp"
#include "apcc/predtree.hpp"

namespace apcc {

enum class GeomBranch : uint8_t { Octree = 0, PredTree = 1 };
enum class AttrBranch : uint8_t { None = 0, Transform = 1, Predict = 2 };

struct CodecConfig {
  GeomBranch geomBranch = GeomBranch::Octree;
  AttrBranch attrBranch = AttrBranch::Transform;
  double scale = 1.0;
  int qp = 0;  // 0 = lossless attributes
  bool colorTransformEnabled = true;
  double hilbertTheta = 1.0;
  OctreeConfig octree;
  PredTreeConfig predtree;
  TransformConfig transform;
  PredictConfig predict;
};

struct EncodeStats {
  size_t points = 0;     // voxel count actually coded
  uint64_t geomBits = 0;
  uint64_t attrBits = 0;
};

struct EncodedStream {
  std::vector<uint8_t> bytes;
  EncodeStats stats;
};

// Encodes an already voxelized cloud; the .apc stream is self-contained.
EncodedStream encodeVoxelCloud(const VoxelCloud& cloud, const CodecConfig& cfg);

// Voxelizes at cfg.scale first (the usual entry point from PLY data).
EncodedStream encodeCloud(const RawPointCloud& cloud, const CodecConfig& cfg);

// Full decode from stream bytes alone. Voxels come out in curve order.
VoxelCloud decodeStream(std::span<const uint8_t> bytes);

}  // namespace apcc
