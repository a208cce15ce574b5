#pragma once

#include <array>
#include <limits>

#include "apcc/cloud.hpp"

namespace apcc {

// Rate/quality measurement. D1 is the symmetric mean of squared
// nearest-neighbor distances with peak = the largest bounding-box dimension
// of the reference; attribute PSNR is computed per channel (luma/chroma)
// after nearest-neighbor correspondence; identical clouds report infinity.

struct QualityMetrics {
  double d1Psnr = std::numeric_limits<double>::infinity();
  double d1Mse = 0;
  double hausdorff = 0;
  bool hasColorPsnr = false;
  std::array<double, 3> colorPsnr{};  // Y, Co, Cg
  bool hasReflectancePsnr = false;
  double reflectancePsnr = 0;
};

QualityMetrics computeMetrics(const VoxelCloud& reference,
                              const VoxelCloud& distorted);

}  // namespace apcc
