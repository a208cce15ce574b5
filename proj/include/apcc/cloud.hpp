#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "apcc/common.hpp"

namespace apcc {

// Canonical in-memory point cloud forms. RawPointCloud mirrors the PLY
// contents; VoxelCloud is the deduplicated integer-grid form every coding
// branch operates on. Attribute channel order is fixed as red, green, blue
// [, reflectance].

using Color3 = std::array<uint8_t, 3>;

struct RawPointCloud {
  std::vector<Vec3d> positions;
  std::vector<Color3> colors;          // empty when absent
  std::vector<uint16_t> reflectances;  // empty when absent

  bool hasColors() const { return !colors.empty(); }
  bool hasReflectances() const { return !reflectances.empty(); }
  size_t size() const { return positions.size(); }
};

struct VoxelCloud {
  Vec3d origin{0, 0, 0};  // minimum corner removed during normalization
  double scale = 1.0;     // quantization scale (voxel = (p - origin) * scale)
  std::vector<Vec3i> voxels;
  std::vector<Color3> colors;
  std::vector<uint16_t> reflectances;
  Vec3<int> bitDepths{0, 0, 0};  // smallest d with every coordinate < 2^d

  bool hasColors() const { return !colors.empty(); }
  bool hasReflectances() const { return !reflectances.empty(); }
  bool hasAttributes() const { return hasColors() || hasReflectances(); }
  size_t size() const { return voxels.size(); }

  void recomputeBitDepths();
};

//============================================================================

// Quantizes to the integer grid: v = round((p - min) * scale), merging
// duplicate voxels with per-channel arithmetic-mean attributes.
VoxelCloud voxelize(const RawPointCloud& cloud, double scale);

// Inverse mapping p = v / scale + origin; attributes pass through.
RawPointCloud devoxelize(const VoxelCloud& v);

// Transfers attributes from `original` onto `reconstructed` geometry by
// nearest neighbor (squared Euclidean, ties by smallest Morton code).
VoxelCloud recolor(const VoxelCloud& reconstructed, const VoxelCloud& original);

// Integer-reversible YCoCg-R lifting transform; exact inverse on all of the
// 24-bit RGB cube. Luma stays in [0,255], chroma offsets span [-255,255].
std::array<int32_t, 3> colorForward(const Color3& rgb);
Color3 colorInverse(const std::array<int32_t, 3>& ycocg);

}  // namespace apcc
