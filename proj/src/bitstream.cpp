#include "apcc/bitstream.hpp"

#include <array>
#include <cstring>

namespace apcc {

namespace {

constexpr char kMagic[4] = {'A', 'P', 'C', 'C'};
constexpr uint8_t kVersion = 1;
constexpr size_t kMaxParamBlock = 1u << 20;

std::array<uint32_t, 256> makeCrcTable() {
  std::array<uint32_t, 256> t{};
  for (uint32_t i = 0; i < 256; i++) {
    uint32_t c = i;
    for (int k = 0; k < 8; k++)
      c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    t[i] = c;
  }
  return t;
}

}  // namespace

uint32_t crc32(std::span<const uint8_t> bytes) {
  static const auto table = makeCrcTable();
  uint32_t c = 0xFFFFFFFFu;
  for (uint8_t b : bytes)
    c = table[(c ^ b) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

//============================================================================

void ByteWriter::u32(uint32_t v) {
  for (int i = 0; i < 4; i++)
    _bytes.push_back(uint8_t(v >> (8 * i)));
}

void ByteWriter::f64(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; i++)
    _bytes.push_back(uint8_t(bits >> (8 * i)));
}

uint8_t ByteReader::u8() {
  if (_pos + 1 > _bytes.size())
    throw CorruptStream("parameter block truncated");
  return _bytes[_pos++];
}

uint32_t ByteReader::u32() {
  if (_pos + 4 > _bytes.size())
    throw CorruptStream("parameter block truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; i++)
    v |= uint32_t(_bytes[_pos++]) << (8 * i);
  return v;
}

double ByteReader::f64() {
  if (_pos + 8 > _bytes.size())
    throw CorruptStream("parameter block truncated");
  uint64_t bits = 0;
  for (int i = 0; i < 8; i++)
    bits |= uint64_t(_bytes[_pos++]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

//============================================================================

std::vector<uint8_t> writeStream(const SequenceHeader& header,
                                 const std::vector<DataUnit>& units) {
  ByteWriter body;
  body.f64(header.origin.x);
  body.f64(header.origin.y);
  body.f64(header.origin.z);
  body.f64(header.scale);
  for (int a = 0; a < 3; a++)
    body.u8(uint8_t(header.bitDepths[a]));
  uint8_t flags = uint8_t(header.colorTransform) | uint8_t(header.hasColors) << 1
    | uint8_t(header.hasReflectances) << 2 | uint8_t(header.attrBranch & 3) << 3
    | uint8_t(header.geomBranch & 1) << 5;
  body.u8(flags);
  body.f64(header.hilbertTheta);
  body.u32(uint32_t(header.geomParams.size()));
  auto bytes = body.take();
  bytes.insert(bytes.end(), header.geomParams.begin(), header.geomParams.end());
  ByteWriter attrLen;
  attrLen.u32(uint32_t(header.attrParams.size()));
  auto al = attrLen.take();
  bytes.insert(bytes.end(), al.begin(), al.end());
  bytes.insert(bytes.end(), header.attrParams.begin(), header.attrParams.end());

  for (const DataUnit& u : units) {
    bytes.push_back(u.type);
    ByteWriter len;
    len.u32(uint32_t(u.payload.size()));
    auto lb = len.take();
    bytes.insert(bytes.end(), lb.begin(), lb.end());
    bytes.insert(bytes.end(), u.payload.begin(), u.payload.end());
  }

  std::vector<uint8_t> out;
  out.reserve(bytes.size() + 9);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  ByteWriter crc;
  crc.u32(crc32(bytes));
  auto cb = crc.take();
  out.insert(out.end(), cb.begin(), cb.end());
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

ParsedStream readStream(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw NotApccStream("missing APCC magic");
  if (bytes.size() < 5)
    throw CorruptStream("stream truncated before version");
  if (bytes[4] != kVersion)
    throw VersionError("unsupported stream version " + std::to_string(bytes[4]));
  if (bytes.size() < 9)
    throw CorruptStream("stream truncated before checksum");

  uint32_t storedCrc = 0;
  for (int i = 0; i < 4; i++)
    storedCrc |= uint32_t(bytes[5 + i]) << (8 * i);
  std::span<const uint8_t> body = bytes.subspan(9);
  if (crc32(body) != storedCrc)
    throw CorruptStream("checksum mismatch");

  ParsedStream ps;
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > body.size())
      throw CorruptStream("stream truncated");
  };
  auto readU8 = [&]() {
    need(1);
    return body[pos++];
  };
  auto readU32 = [&]() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; i++)
      v |= uint32_t(body[pos++]) << (8 * i);
    return v;
  };
  auto readF64 = [&]() {
    need(8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; i++)
      bits |= uint64_t(body[pos++]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  };

  SequenceHeader& h = ps.header;
  h.version = kVersion;
  h.origin = {readF64(), readF64(), readF64()};
  h.scale = readF64();
  for (int a = 0; a < 3; a++) {
    h.bitDepths[a] = readU8();
    if (h.bitDepths[a] > 21)
      throw CorruptStream("bit depth exceeds 21");
  }
  uint8_t flags = readU8();
  h.colorTransform = flags & 1;
  h.hasColors = flags >> 1 & 1;
  h.hasReflectances = flags >> 2 & 1;
  h.attrBranch = flags >> 3 & 3;
  h.geomBranch = flags >> 5 & 1;
  if (h.attrBranch > 2)
    throw CorruptStream("unknown attribute branch");
  h.hilbertTheta = readF64();

  uint32_t glen = readU32();
  if (glen > kMaxParamBlock)
    throw CorruptStream("geometry parameter block too large");
  need(glen);
  h.geomParams.assign(body.begin() + std::ptrdiff_t(pos),
                      body.begin() + std::ptrdiff_t(pos + glen));
  pos += glen;

  uint32_t alen = readU32();
  if (alen > kMaxParamBlock)
    throw CorruptStream("attribute parameter block too large");
  need(alen);
  h.attrParams.assign(body.begin() + std::ptrdiff_t(pos),
                      body.begin() + std::ptrdiff_t(pos + alen));
  pos += alen;

  while (pos < body.size()) {
    DataUnit u;
    u.type = readU8();
    if (u.type != 1 && u.type != 2)
      throw CorruptStream("unknown data unit type");
    uint32_t len = readU32();
    need(len);
    u.payload.assign(body.begin() + std::ptrdiff_t(pos),
                     body.begin() + std::ptrdiff_t(pos + len));
    pos += len;
    ps.units.push_back(std::move(u));
  }

  if (ps.units.empty())
    throw CorruptStream("stream has no data units");
  if (ps.units[0].type != 1)
    throw CorruptStream("first data unit is not geometry");
  for (size_t i = 1; i < ps.units.size(); i++)
    if (ps.units[i].type != 2)
      throw CorruptStream("data units out of order");
  return ps;
}

}  // namespace apcc
