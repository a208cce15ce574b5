#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "apcc/metrics.hpp"
#include "test_util.hpp"

using namespace apcc;
using namespace testutil;

TEST_CASE("identical clouds report infinite PSNR and zero hausdorff") {
  std::mt19937_64 rng(111);
  VoxelCloud c = voxelCloudOf(randomVoxels(rng, 500, 7));
  c.colors.assign(c.size(), Color3{12, 34, 56});
  QualityMetrics m = computeMetrics(c, c);
  CHECK(std::isinf(m.d1Psnr));
  CHECK(m.d1Mse == 0.0);
  CHECK(m.hausdorff == 0.0);
  REQUIRE(m.hasColorPsnr);
  for (int ch = 0; ch < 3; ch++)
    CHECK(std::isinf(m.colorPsnr[ch]));
}

TEST_CASE("hand-computed two-point example") {
  VoxelCloud ref, dist;
  ref.voxels = {{0, 0, 0}, {1023, 0, 0}};
  dist.voxels = {{0, 0, 0}, {1022, 0, 0}};
  ref.recomputeBitDepths();
  dist.recomputeBitDepths();
  QualityMetrics m = computeMetrics(ref, dist);
  // each side pairs one exact and one off-by-one point: mse = 0.5
  CHECK(m.d1Mse == doctest::Approx(0.5));
  // peak is the reference box extent, 1023
  CHECK(m.d1Psnr == doctest::Approx(10.0 * std::log10(1023.0 * 1023.0 / 0.5)));
  CHECK(m.d1Psnr == doctest::Approx(63.2078).epsilon(1e-4));
  CHECK(m.hausdorff == doctest::Approx(1.0));
}

TEST_CASE("the symmetric term really is symmetric") {
  std::mt19937_64 rng(112);
  VoxelCloud a = voxelCloudOf(randomVoxels(rng, 400, 7));
  VoxelCloud b = voxelCloudOf(randomVoxels(rng, 300, 7));
  QualityMetrics ab = computeMetrics(a, b);
  QualityMetrics ba = computeMetrics(b, a);
  CHECK(std::abs(ab.d1Mse - ba.d1Mse) < 1e-9);
  CHECK(ab.hausdorff == ba.hausdorff);
}

TEST_CASE("luma PSNR matches a constructed offset") {
  std::mt19937_64 rng(113);
  VoxelCloud ref = voxelCloudOf(randomVoxels(rng, 600, 7));
  ref.colors.assign(ref.size(), Color3{100, 100, 100});
  VoxelCloud dist = ref;
  dist.colors.assign(dist.size(), Color3{104, 104, 104});  // gray: luma shift 4
  QualityMetrics m = computeMetrics(ref, dist);
  REQUIRE(m.hasColorPsnr);
  CHECK(m.colorPsnr[0] == doctest::Approx(10.0 * std::log10(255.0 * 255.0 / 16.0)));
  CHECK(std::isinf(m.colorPsnr[1]));  // chroma untouched on gray
  CHECK(std::isinf(m.colorPsnr[2]));
}

TEST_CASE("empty inputs are rejected") {
  VoxelCloud c;
  c.voxels = {{0, 0, 0}};
  c.recomputeBitDepths();
  CHECK_THROWS_AS(computeMetrics(c, VoxelCloud{}), EmptyInput);
  CHECK_THROWS_AS(computeMetrics(VoxelCloud{}, c), EmptyInput);
}
