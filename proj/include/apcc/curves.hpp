#pragma once

#include <cstdint>
#include <vector>

#include "apcc/common.hpp"

namespace apcc {

// Space-filling-curve codes over voxel coordinates. Morton interleaves with
// x in the lowest bit (bit 3k = x bit k, 3k+1 = y, 3k+2 = z); this order is
// shared with the bitstream so encoder and decoder agree. The Hilbert index
// follows the Gray-code construction, evaluated by per-level state-table
// lookup; tables are generated once at startup.

struct CurveConfig {
  int bitDepth = 21;         // per axis, in [1, 21] so 3*depth fits 64 bits
  double hilbertTheta = 1.0; // bias applied to z as round(theta * z)
};

enum class CurveOrder { Morton, Hilbert };

uint64_t mortonEncode(const Vec3i& v, int depth);
Vec3i mortonDecode(uint64_t code, int depth);

uint64_t hilbertEncode(const Vec3i& v, const CurveConfig& cfg);

// Stable argsort of the cloud's voxels by curve code. The permutation is
// applied by callers to positions and attributes alike.
std::vector<uint32_t> sortByCode(const std::vector<Vec3i>& voxels,
                                 CurveOrder order, const CurveConfig& cfg);

}  // namespace apcc
