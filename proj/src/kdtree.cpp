#include "apcc/kdtree.hpp"

#include <algorithm>

#include "apcc/curves.hpp"

namespace apcc {

KdTree::KdTree(const std::vector<Vec3i>& points) : _points(points) {
  _codes.resize(points.size());
  for (size_t i = 0; i < points.size(); i++)
    _codes[i] = mortonEncode(points[i], 21);
  _dead.assign(points.size(), false);
  _alive = points.size();
  rebuild();
}

int32_t KdTree::build(std::vector<int32_t>& idx, int begin, int end, int32_t parent) {
  if (begin >= end)
    return -1;
  // split along the widest axis of the range
  Vec3i lo = _points[idx[begin]], hi = lo;
  for (int i = begin; i < end; i++) {
    const Vec3i& p = _points[idx[i]];
    for (int a = 0; a < 3; a++) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; a++)
    if (hi[a] - lo[a] > hi[axis] - lo[axis])
      axis = a;

  int mid = (begin + end) / 2;
  std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                   [&](int32_t a, int32_t b) {
                     if (_points[a][axis] != _points[b][axis])
                       return _points[a][axis] < _points[b][axis];
                     return a < b;
                   });

  int32_t nodeId = int32_t(_nodes.size());
  _nodes.push_back({});
  _nodes[nodeId].point = idx[mid];
  _nodes[nodeId].axis = uint8_t(axis);
  _nodes[nodeId].parent = parent;
  _nodeOfPoint[idx[mid]] = nodeId;

  int32_t l = build(idx, begin, mid, nodeId);
  int32_t r = build(idx, mid + 1, end, nodeId);
  _nodes[nodeId].left = l;
  _nodes[nodeId].right = r;
  uint32_t alive = 1;
  if (l >= 0)
    alive += _nodes[l].aliveInSubtree;
  if (r >= 0)
    alive += _nodes[r].aliveInSubtree;
  _nodes[nodeId].aliveInSubtree = alive;
  return nodeId;
}

void KdTree::rebuild() {
  _nodes.clear();
  _nodeOfPoint.assign(_points.size(), -1);
  std::vector<int32_t> idx;
  idx.reserve(_alive);
  for (size_t i = 0; i < _points.size(); i++)
    if (!_dead[i])
      idx.push_back(int32_t(i));
  _nodes.reserve(idx.size());
  _root = build(idx, 0, int(idx.size()), -1);
  _deletedSinceBuild = 0;
}

void KdTree::remove(int32_t pointIndex) {
  if (_dead[pointIndex])
    return;
  _dead[pointIndex] = true;
  _alive--;
  _deletedSinceBuild++;
  for (int32_t n = _nodeOfPoint[pointIndex]; n >= 0; n = _nodes[n].parent)
    _nodes[n].aliveInSubtree--;
  if (_alive > 0 && _deletedSinceBuild * 2 >= _alive + _deletedSinceBuild)
    rebuild();
}

void KdTree::search(int32_t nodeId, const Vec3i& q, int64_t& bestD2,
                    uint64_t& bestCode, int32_t& bestIdx) const {
  if (nodeId < 0 || _nodes[nodeId].aliveInSubtree == 0)
    return;
  const Node& n = _nodes[nodeId];
  if (!_dead[n.point]) {
    int64_t d2 = squaredDistance(q, _points[n.point]);
    if (d2 < bestD2 || (d2 == bestD2 && _codes[n.point] < bestCode)) {
      bestD2 = d2;
      bestCode = _codes[n.point];
      bestIdx = n.point;
    }
  }
  int64_t delta = int64_t(q[n.axis]) - _points[n.point][n.axis];
  int32_t near = delta < 0 ? n.left : n.right;
  int32_t far = delta < 0 ? n.right : n.left;
  search(near, q, bestD2, bestCode, bestIdx);
  // an equal-distance candidate with a smaller Morton code may sit exactly on
  // the splitting plane, so only prune when strictly farther
  if (delta * delta <= bestD2)
    search(far, q, bestD2, bestCode, bestIdx);
}

int32_t KdTree::nearest(const Vec3i& query) const {
  int64_t bestD2 = INT64_MAX;
  uint64_t bestCode = UINT64_MAX;
  int32_t bestIdx = -1;
  search(_root, query, bestD2, bestCode, bestIdx);
  return bestIdx;
}

}  // namespace apcc
