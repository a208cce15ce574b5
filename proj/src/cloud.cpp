#include "apcc/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "apcc/curves.hpp"
#include "apcc/kdtree.hpp"

namespace apcc {

namespace {

uint64_t packKey(const Vec3i& v) {
  return uint64_t(uint32_t(v.x)) | (uint64_t(uint32_t(v.y)) << 21)
    | (uint64_t(uint32_t(v.z)) << 42);
}

int bitDepthOf(int32_t maxCoord) {
  int d = 0;
  while ((int64_t(1) << d) <= maxCoord)
    d++;
  return d;
}

}  // namespace

void VoxelCloud::recomputeBitDepths() {
  Vec3i mx{0, 0, 0};
  for (const auto& v : voxels)
    for (int a = 0; a < 3; a++)
      mx[a] = std::max(mx[a], v[a]);
  for (int a = 0; a < 3; a++)
    bitDepths[a] = voxels.empty() ? 0 : bitDepthOf(mx[a]);
}

//============================================================================

VoxelCloud voxelize(const RawPointCloud& cloud, double scale) {
  if (cloud.positions.empty())
    throw EmptyInput("voxelize: empty cloud");
  if (!(scale > 0))
    throw ConfigError("voxelize: scale must be positive");

  Vec3d mn = cloud.positions[0];
  for (const auto& p : cloud.positions)
    for (int a = 0; a < 3; a++)
      mn[a] = std::min(mn[a], p[a]);

  VoxelCloud out;
  out.origin = mn;
  out.scale = scale;

  struct Accum {
    uint32_t index;       // position in out.voxels
    uint32_t count = 0;
    int64_t color[3] = {0, 0, 0};
    int64_t refl = 0;
  };
  std::unordered_map<uint64_t, Accum> cells;
  cells.reserve(cloud.size() * 2);

  const bool hasCol = cloud.hasColors();
  const bool hasRef = cloud.hasReflectances();

  for (size_t i = 0; i < cloud.positions.size(); i++) {
    Vec3i v;
    for (int a = 0; a < 3; a++) {
      int64_t q = roundHalfAway((cloud.positions[i][a] - mn[a]) * scale);
      if (q < 0 || q >= (int64_t(1) << 21))
        throw RangeError("voxelize: coordinate exceeds 21-bit grid");
      v[a] = int32_t(q);
    }
    auto [it, inserted] = cells.try_emplace(packKey(v));
    Accum& acc = it->second;
    if (inserted) {
      acc.index = uint32_t(out.voxels.size());
      out.voxels.push_back(v);
      if (hasCol)
        out.colors.push_back({});
      if (hasRef)
        out.reflectances.push_back(0);
    }
    acc.count++;
    if (hasCol)
      for (int c = 0; c < 3; c++)
        acc.color[c] += cloud.colors[i][c];
    if (hasRef)
      acc.refl += cloud.reflectances[i];
  }

  for (const auto& [key, acc] : cells) {
    if (hasCol)
      for (int c = 0; c < 3; c++)
        out.colors[acc.index][c] =
          uint8_t(roundHalfAway(double(acc.color[c]) / acc.count));
    if (hasRef)
      out.reflectances[acc.index] =
        uint16_t(roundHalfAway(double(acc.refl) / acc.count));
  }

  out.recomputeBitDepths();
  return out;
}

RawPointCloud devoxelize(const VoxelCloud& v) {
  RawPointCloud out;
  out.positions.reserve(v.size());
  for (const auto& p : v.voxels)
    out.positions.push_back({p.x / v.scale + v.origin.x, p.y / v.scale + v.origin.y,
                             p.z / v.scale + v.origin.z});
  out.colors = v.colors;
  out.reflectances = v.reflectances;
  return out;
}

VoxelCloud recolor(const VoxelCloud& reconstructed, const VoxelCloud& original) {
  if (reconstructed.voxels.empty() || original.voxels.empty())
    throw EmptyInput("recolor: empty cloud");
  if (!original.hasAttributes())
    throw MissingAttributes("recolor: original cloud has no attributes");

  VoxelCloud out = reconstructed;
  out.colors.clear();
  out.reflectances.clear();
  if (original.hasColors())
    out.colors.resize(out.size());
  if (original.hasReflectances())
    out.reflectances.resize(out.size());

  KdTree tree(original.voxels);
  for (size_t i = 0; i < out.voxels.size(); i++) {
    int32_t src = tree.nearest(out.voxels[i]);
    if (original.hasColors())
      out.colors[i] = original.colors[src];
    if (original.hasReflectances())
      out.reflectances[i] = original.reflectances[src];
  }
  return out;
}

//============================================================================
// YCoCg-R lifting; shifts on negatives are arithmetic (floor), which the
// inverse replays exactly.

std::array<int32_t, 3> colorForward(const Color3& rgb) {
  int32_t r = rgb[0], g = rgb[1], b = rgb[2];
  int32_t co = r - b;
  int32_t t = b + (co >> 1);
  int32_t cg = g - t;
  int32_t y = t + (cg >> 1);
  return {y, co, cg};
}

Color3 colorInverse(const std::array<int32_t, 3>& ycocg) {
  int32_t y = ycocg[0], co = ycocg[1], cg = ycocg[2];
  int32_t t = y - (cg >> 1);
  int32_t g = cg + t;
  int32_t b = t - (co >> 1);
  int32_t r = b + co;
  return {uint8_t(r), uint8_t(g), uint8_t(b)};
}

}  // namespace apcc
