#include "apcc/ply.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace apcc {

namespace {

enum class PlyType : uint8_t {
  Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64
};

int typeSize(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

bool parseType(const std::string& s, PlyType& out) {
  if (s == "char" || s == "int8") out = PlyType::Int8;
  else if (s == "uchar" || s == "uint8") out = PlyType::UInt8;
  else if (s == "short" || s == "int16") out = PlyType::Int16;
  else if (s == "ushort" || s == "uint16") out = PlyType::UInt16;
  else if (s == "int" || s == "int32") out = PlyType::Int32;
  else if (s == "uint" || s == "uint32") out = PlyType::UInt32;
  else if (s == "float" || s == "float32") out = PlyType::Float32;
  else if (s == "double" || s == "float64") out = PlyType::Float64;
  else return false;
  return true;
}

struct Property {
  std::string name;
  PlyType type = PlyType::Float32;
  bool isList = false;
  PlyType countType = PlyType::UInt8;
};

struct Element {
  std::string name;
  size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
  size_t dataOffset = 0;
};

[[noreturn]] void parseFail(int line, const std::string& what) {
  throw ParseError("ply header line " + std::to_string(line) + ": " + what);
}

Header parseHeader(std::span<const uint8_t> bytes) {
  Header h;
  size_t pos = 0;
  int lineNo = 0;
  bool sawFormat = false, done = false;

  auto nextLine = [&]() -> std::string {
    if (pos >= bytes.size())
      parseFail(lineNo + 1, "unexpected end of header");
    size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n')
      pos++;
    std::string line(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
    if (pos < bytes.size())
      pos++;  // consume '\n'
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lineNo++;
    return line;
  };

  if (nextLine() != "ply")
    parseFail(1, "missing 'ply' magic");

  while (!done) {
    std::string line = nextLine();
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) {
      continue;
    } else if (kw == "format") {
      std::string fmt, ver;
      ss >> fmt >> ver;
      if (fmt == "ascii")
        h.binary = false;
      else if (fmt == "binary_little_endian")
        h.binary = true;
      else
        parseFail(lineNo, "unsupported format '" + fmt + "'");
      if (ver != "1.0")
        parseFail(lineNo, "unsupported version '" + ver + "'");
      sawFormat = true;
    } else if (kw == "element") {
      std::string name;
      long long cnt = -1;
      ss >> name >> cnt;
      if (name.empty() || cnt < 0)
        parseFail(lineNo, "malformed element declaration");
      h.elements.push_back({name, size_t(cnt), {}});
    } else if (kw == "property") {
      if (h.elements.empty())
        parseFail(lineNo, "property before any element");
      Property p;
      std::string t1;
      ss >> t1;
      if (t1 == "list") {
        std::string ct, vt;
        ss >> ct >> vt >> p.name;
        p.isList = true;
        if (!parseType(ct, p.countType) || !parseType(vt, p.type) || p.name.empty())
          parseFail(lineNo, "malformed list property");
      } else {
        ss >> p.name;
        if (!parseType(t1, p.type) || p.name.empty())
          parseFail(lineNo, "malformed property");
      }
      h.elements.back().properties.push_back(p);
    } else if (kw == "end_header") {
      done = true;
    } else {
      parseFail(lineNo, "unknown keyword '" + kw + "'");
    }
  }
  if (!sawFormat)
    parseFail(lineNo, "missing format line");
  h.dataOffset = pos;
  return h;
}

double readScalarLE(const uint8_t* p, PlyType t) {
  switch (t) {
    case PlyType::Int8: return double(int8_t(p[0]));
    case PlyType::UInt8: return double(p[0]);
    case PlyType::Int16: {
      int16_t v;
      std::memcpy(&v, p, 2);
      return double(v);
    }
    case PlyType::UInt16: {
      uint16_t v;
      std::memcpy(&v, p, 2);
      return double(v);
    }
    case PlyType::Int32: {
      int32_t v;
      std::memcpy(&v, p, 4);
      return double(v);
    }
    case PlyType::UInt32: {
      uint32_t v;
      std::memcpy(&v, p, 4);
      return double(v);
    }
    case PlyType::Float32: {
      float v;
      std::memcpy(&v, p, 4);
      return double(v);
    }
    case PlyType::Float64: {
      double v;
      std::memcpy(&v, p, 8);
      return v;
    }
  }
  return 0;
}

struct VertexLayout {
  int xi = -1, yi = -1, zi = -1;
  int red = -1, green = -1, blue = -1;
  int refl = -1;
};

VertexLayout mapVertexProperties(const Element& e) {
  VertexLayout m;
  for (int i = 0; i < int(e.properties.size()); i++) {
    const Property& p = e.properties[i];
    if (p.isList)
      continue;
    if (p.name == "x") m.xi = i;
    else if (p.name == "y") m.yi = i;
    else if (p.name == "z") m.zi = i;
    else if (p.name == "red") m.red = i;
    else if (p.name == "green") m.green = i;
    else if (p.name == "blue") m.blue = i;
    else if (p.name == "reflectance" || p.name == "intensity") m.refl = i;
  }
  if (m.xi < 0 || m.yi < 0 || m.zi < 0)
    throw ParseError("ply: vertex element lacks x/y/z properties");
  return m;
}

}  // namespace

//============================================================================

RawPointCloud loadPly(std::span<const uint8_t> bytes) {
  Header h = parseHeader(bytes);

  RawPointCloud cloud;
  size_t pos = h.dataOffset;

  auto asciiTokens = [&](size_t needAtLeast) -> std::vector<std::string> {
    // one data row = one line
    while (pos < bytes.size() && (bytes[pos] == '\n' || bytes[pos] == '\r'))
      pos++;
    if (pos >= bytes.size())
      throw TruncatedInput("ply: fewer data rows than declared");
    size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n')
      pos++;
    std::string line(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t)
      toks.push_back(t);
    if (toks.size() < needAtLeast)
      throw TruncatedInput("ply: short data row");
    return toks;
  };

  for (const Element& elem : h.elements) {
    bool isVertex = elem.name == "vertex";
    VertexLayout layout;
    if (isVertex) {
      layout = mapVertexProperties(elem);
      cloud.positions.reserve(elem.count);
      if (layout.red >= 0 && layout.green >= 0 && layout.blue >= 0)
        cloud.colors.reserve(elem.count);
      if (layout.refl >= 0)
        cloud.reflectances.reserve(elem.count);
    }

    for (size_t row = 0; row < elem.count; row++) {
      std::vector<double> values(elem.properties.size(),
                                 std::numeric_limits<double>::quiet_NaN());
      if (h.binary) {
        for (size_t pi = 0; pi < elem.properties.size(); pi++) {
          const Property& p = elem.properties[pi];
          if (p.isList) {
            int cs = typeSize(p.countType);
            if (pos + cs > bytes.size())
              throw TruncatedInput("ply: truncated list count");
            auto n = size_t(readScalarLE(bytes.data() + pos, p.countType));
            pos += cs;
            size_t span = n * size_t(typeSize(p.type));
            if (pos + span > bytes.size())
              throw TruncatedInput("ply: truncated list data");
            pos += span;
          } else {
            int s = typeSize(p.type);
            if (pos + s > bytes.size())
              throw TruncatedInput("ply: fewer data rows than declared");
            values[pi] = readScalarLE(bytes.data() + pos, p.type);
            pos += s;
          }
        }
      } else {
        auto toks = asciiTokens(1);
        size_t ti = 0;
        for (size_t pi = 0; pi < elem.properties.size(); pi++) {
          const Property& p = elem.properties[pi];
          if (p.isList) {
            if (ti >= toks.size())
              throw TruncatedInput("ply: short data row");
            size_t n = size_t(std::stod(toks[ti++]));
            ti += n;
            if (ti > toks.size())
              throw TruncatedInput("ply: short list row");
          } else {
            if (ti >= toks.size())
              throw TruncatedInput("ply: short data row");
            try {
              values[pi] = std::stod(toks[ti]);
            } catch (const std::exception&) {
              throw ParseError("ply: bad numeric token '" + toks[ti] + "'");
            }
            ti++;
          }
        }
      }

      if (isVertex) {
        Vec3d p{values[layout.xi], values[layout.yi], values[layout.zi]};
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
          throw ParseError("ply: non-finite coordinate");
        cloud.positions.push_back(p);
        if (layout.red >= 0 && layout.green >= 0 && layout.blue >= 0)
          cloud.colors.push_back({uint8_t(values[layout.red]),
                                  uint8_t(values[layout.green]),
                                  uint8_t(values[layout.blue])});
        if (layout.refl >= 0)
          cloud.reflectances.push_back(uint16_t(values[layout.refl]));
      }
    }
  }
  return cloud;
}

RawPointCloud loadPlyFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ParseError("cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return loadPly(bytes);
}

//============================================================================

std::vector<uint8_t> savePly(const RawPointCloud& cloud, bool binary) {
  std::ostringstream header;
  header << "ply\n";
  header << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  header << "element vertex " << cloud.size() << "\n";
  header << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.hasColors())
    header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.hasReflectances())
    header << "property ushort reflectance\n";
  header << "end_header\n";

  std::string hs = header.str();
  std::vector<uint8_t> out(hs.begin(), hs.end());

  if (binary) {
    auto put = [&](const void* p, size_t n) {
      const uint8_t* b = static_cast<const uint8_t*>(p);
      out.insert(out.end(), b, b + n);
    };
    for (size_t i = 0; i < cloud.size(); i++) {
      put(&cloud.positions[i].x, 8);
      put(&cloud.positions[i].y, 8);
      put(&cloud.positions[i].z, 8);
      if (cloud.hasColors())
        put(cloud.colors[i].data(), 3);
      if (cloud.hasReflectances()) {
        uint16_t r = cloud.reflectances[i];
        put(&r, 2);
      }
    }
  } else {
    std::ostringstream body;
    body.precision(17);
    for (size_t i = 0; i < cloud.size(); i++) {
      body << cloud.positions[i].x << ' ' << cloud.positions[i].y << ' '
           << cloud.positions[i].z;
      if (cloud.hasColors())
        body << ' ' << int(cloud.colors[i][0]) << ' ' << int(cloud.colors[i][1])
             << ' ' << int(cloud.colors[i][2]);
      if (cloud.hasReflectances())
        body << ' ' << cloud.reflectances[i];
      body << '\n';
    }
    std::string bs = body.str();
    out.insert(out.end(), bs.begin(), bs.end());
  }
  return out;
}

void savePlyFile(const RawPointCloud& cloud, const std::string& path, bool binary) {
  auto bytes = savePly(cloud, binary);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw Error("cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

}  // namespace apcc
