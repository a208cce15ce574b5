#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apcc/cloud.hpp"

namespace apcc {

// PLY reader/writer covering ASCII and binary-little-endian files with
// float/double x,y,z, optional uchar red/green/blue and optional ushort
// reflectance (or intensity). Unknown properties and trailing elements are
// skipped.

RawPointCloud loadPly(std::span<const uint8_t> bytes);
RawPointCloud loadPlyFile(const std::string& path);

std::vector<uint8_t> savePly(const RawPointCloud& cloud, bool binary = true);
void savePlyFile(const RawPointCloud& cloud, const std::string& path,
                 bool binary = true);

}  // namespace apcc
