#pragma once

#include <random>
#include <set>
#include <vector>

#include "apcc/cloud.hpp"
#include "apcc/common.hpp"

namespace testutil {

inline std::vector<apcc::Vec3i> randomVoxels(std::mt19937_64& rng, size_t count,
                                             int depth) {
  std::uniform_int_distribution<int32_t> d(0, (1 << depth) - 1);
  std::set<std::array<int32_t, 3>> uniq;
  while (uniq.size() < count)
    uniq.insert({d(rng), d(rng), d(rng)});
  std::vector<apcc::Vec3i> out;
  out.reserve(count);
  for (const auto& p : uniq)
    out.push_back({p[0], p[1], p[2]});
  // shuffle so input order carries no structure
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

inline std::set<std::array<int32_t, 3>> asSet(const std::vector<apcc::Vec3i>& v) {
  std::set<std::array<int32_t, 3>> s;
  for (const auto& p : v)
    s.insert({p.x, p.y, p.z});
  return s;
}

inline apcc::VoxelCloud voxelCloudOf(std::vector<apcc::Vec3i> voxels) {
  apcc::VoxelCloud c;
  c.voxels = std::move(voxels);
  c.recomputeBitDepths();
  return c;
}

inline apcc::Vec3<int> depthsOf(const std::vector<apcc::Vec3i>& voxels) {
  return voxelCloudOf(voxels).bitDepths;
}

}  // namespace testutil
