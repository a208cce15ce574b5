#include "apcc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "apcc/kdtree.hpp"

namespace apcc {

namespace {

double psnrFrom(double peak, double mse) {
  if (mse <= 0)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

struct DirectedStats {
  double sumD2 = 0;
  int64_t maxD2 = 0;
};

DirectedStats directed(const std::vector<Vec3i>& from, const KdTree& toTree,
                       const std::vector<Vec3i>& to) {
  DirectedStats s;
  for (const auto& p : from) {
    int32_t j = toTree.nearest(p);
    int64_t d2 = squaredDistance(p, to[j]);
    s.sumD2 += double(d2);
    s.maxD2 = std::max(s.maxD2, d2);
  }
  return s;
}

}  // namespace

QualityMetrics computeMetrics(const VoxelCloud& reference,
                              const VoxelCloud& distorted) {
  if (reference.voxels.empty() || distorted.voxels.empty())
    throw EmptyInput("metrics: empty cloud");

  QualityMetrics m;

  Vec3i lo = reference.voxels[0], hi = reference.voxels[0];
  for (const auto& v : reference.voxels)
    for (int a = 0; a < 3; a++) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  double peak = 0;
  for (int a = 0; a < 3; a++)
    peak = std::max(peak, double(hi[a] - lo[a]));

  KdTree refTree(reference.voxels);
  KdTree distTree(distorted.voxels);
  DirectedStats ab = directed(reference.voxels, distTree, distorted.voxels);
  DirectedStats ba = directed(distorted.voxels, refTree, reference.voxels);

  m.d1Mse = 0.5
    * (ab.sumD2 / double(reference.size()) + ba.sumD2 / double(distorted.size()));
  m.d1Psnr = psnrFrom(peak, m.d1Mse);
  m.hausdorff = std::sqrt(double(std::max(ab.maxD2, ba.maxD2)));

  const bool colors = reference.hasColors() && distorted.hasColors();
  const bool refl = reference.hasReflectances() && distorted.hasReflectances();
  if (colors || refl) {
    double colorSse[3] = {0, 0, 0};
    double reflSse = 0;
    for (size_t i = 0; i < distorted.size(); i++) {
      int32_t j = refTree.nearest(distorted.voxels[i]);
      if (colors) {
        auto a = colorForward(reference.colors[j]);
        auto b = colorForward(distorted.colors[i]);
        for (int c = 0; c < 3; c++) {
          double d = double(a[c] - b[c]);
          colorSse[c] += d * d;
        }
      }
      if (refl) {
        double d = double(reference.reflectances[j]) - double(distorted.reflectances[i]);
        reflSse += d * d;
      }
    }
    if (colors) {
      m.hasColorPsnr = true;
      for (int c = 0; c < 3; c++)
        m.colorPsnr[c] = psnrFrom(255.0, colorSse[c] / double(distorted.size()));
    }
    if (refl) {
      m.hasReflectancePsnr = true;
      m.reflectancePsnr = psnrFrom(65535.0, reflSse / double(distorted.size()));
    }
  }
  return m;
}

}  // namespace apcc
