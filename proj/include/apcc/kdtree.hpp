#pragma once

#include <cstdint>
#include <vector>

#include "apcc/common.hpp"

namespace apcc {

// KD-tree over integer voxel coordinates with tombstone deletion. Nearest
// neighbor uses squared Euclidean distance with ties broken by the smaller
// Morton code of the candidate, so queries are deterministic.
//
// Deletions mark points dead and decrement per-subtree alive counters; the
// tree rebuilds itself once half the points are gone.

class KdTree {
public:
  explicit KdTree(const std::vector<Vec3i>& points);

  // Index of the nearest alive point, or -1 when the tree is empty.
  int32_t nearest(const Vec3i& query) const;

  void remove(int32_t pointIndex);
  size_t aliveCount() const { return _alive; }

private:
  struct Node {
    int32_t point = -1;       // index into _points
    int32_t left = -1, right = -1;
    int32_t parent = -1;
    uint32_t aliveInSubtree = 0;
    uint8_t axis = 0;
  };

  int32_t build(std::vector<int32_t>& idx, int begin, int end, int32_t parent);
  void rebuild();
  void search(int32_t nodeId, const Vec3i& q, int64_t& bestD2, uint64_t& bestCode,
              int32_t& bestIdx) const;

  std::vector<Vec3i> _points;
  std::vector<uint64_t> _codes;  // full-depth Morton code per point
  std::vector<bool> _dead;
  std::vector<Node> _nodes;
  std::vector<int32_t> _nodeOfPoint;
  int32_t _root = -1;
  size_t _alive = 0;
  size_t _deletedSinceBuild = 0;
};

}  // namespace apcc
