#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apcc/common.hpp"

namespace apcc {

// Container format (.apc), little-endian throughout:
//
//   magic   "APCC"                       4 bytes
//   version                              1 byte
//   crc32 of every following byte        4 bytes
//   origin                               3 x f64
//   scale                                f64
//   bit depths (d_x, d_y, d_z)           3 x u8
//   flags                                1 byte
//     bit 0 color transform, bit 1 colors present, bit 2 reflectance
//     present, bits 3-4 attribute branch (0 none / 1 transform /
//     2 predict), bit 5 geometry branch (0 octree / 1 predtree)
//   hilbert theta                        f64
//   geometry parameter block             u32 length + bytes
//   attribute parameter block            u32 length + bytes
//   data units                           type u8 + u32 length + payload
//
// Units appear geometry-first. The decoder needs nothing beyond the stream.

struct SequenceHeader {
  uint8_t version = 1;
  Vec3d origin{0, 0, 0};
  double scale = 1.0;
  Vec3<int> bitDepths{0, 0, 0};
  bool colorTransform = false;
  bool hasColors = false;
  bool hasReflectances = false;
  uint8_t attrBranch = 0;  // 0 none, 1 transform, 2 predict
  uint8_t geomBranch = 0;  // 0 octree, 1 predtree
  double hilbertTheta = 1.0;
  std::vector<uint8_t> geomParams;
  std::vector<uint8_t> attrParams;
};

struct DataUnit {
  uint8_t type = 0;  // 1 = geometry, 2 = attribute
  std::vector<uint8_t> payload;
};

std::vector<uint8_t> writeStream(const SequenceHeader& header,
                                 const std::vector<DataUnit>& units);

struct ParsedStream {
  SequenceHeader header;
  std::vector<DataUnit> units;
};

ParsedStream readStream(std::span<const uint8_t> bytes);

//============================================================================
// Little-endian scratch buffers used for the parameter blocks.

class ByteWriter {
public:
  void u8(uint8_t v) { _bytes.push_back(v); }
  void u32(uint32_t v);
  void f64(double v);
  std::vector<uint8_t> take() { return std::move(_bytes); }

private:
  std::vector<uint8_t> _bytes;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const uint8_t> bytes) : _bytes(bytes) {}
  uint8_t u8();
  uint32_t u32();
  double f64();
  bool atEnd() const { return _pos == _bytes.size(); }

private:
  std::span<const uint8_t> _bytes;
  size_t _pos = 0;
};

uint32_t crc32(std::span<const uint8_t> bytes);

}  // namespace apcc
