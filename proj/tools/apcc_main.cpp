// apcc command line: encode / decode / metrics / bench.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "apcc/codec.hpp"
#include "apcc/metrics.hpp"
#include "apcc/ply.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<uint8_t> readFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw apcc::Error("cannot open '" + path + "'");
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
}

void writeFile(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw apcc::Error("cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!f)
    throw apcc::Error("write failed for '" + path + "'");
}

apcc::GeomBranch parseGeom(const std::string& s) {
  if (s == "octree")
    return apcc::GeomBranch::Octree;
  if (s == "predtree")
    return apcc::GeomBranch::PredTree;
  throw apcc::ConfigError("unknown geometry branch '" + s + "'");
}

apcc::AttrBranch parseAttr(const std::string& s) {
  if (s == "transform")
    return apcc::AttrBranch::Transform;
  if (s == "predict")
    return apcc::AttrBranch::Predict;
  if (s == "none")
    return apcc::AttrBranch::None;
  throw apcc::ConfigError("unknown attribute branch '" + s + "'");
}

std::string fmt(double v) {
  if (std::isinf(v))
    return "inf";
  std::ostringstream ss;
  ss.precision(6);
  ss << std::fixed << v;
  return ss.str();
}

struct EncodeArgs {
  std::string input, output;
  std::string geom = "octree", attr = "transform", order = "hilbert";
  double scale = 1.0, theta = 1.0;
  int qp = 0;
  bool planar = false, isolated = false;
};

apcc::CodecConfig makeConfig(const EncodeArgs& a) {
  apcc::CodecConfig cfg;
  cfg.geomBranch = parseGeom(a.geom);
  cfg.attrBranch = parseAttr(a.attr);
  cfg.scale = a.scale;
  cfg.qp = a.qp;
  cfg.hilbertTheta = a.theta;
  cfg.octree.planarMode = a.planar;
  cfg.octree.isolatedMode = a.isolated;
  cfg.predict.order =
    a.order == "morton" ? apcc::CurveOrder::Morton : apcc::CurveOrder::Hilbert;
  return cfg;
}

int runEncode(const EncodeArgs& a) {
  auto t0 = Clock::now();
  apcc::RawPointCloud cloud = apcc::loadPlyFile(a.input);
  apcc::EncodedStream enc = apcc::encodeCloud(cloud, makeConfig(a));
  writeFile(a.output, enc.bytes);
  uint64_t totalBits = uint64_t(enc.bytes.size()) * 8;
  std::cout << "points=" << enc.stats.points << " geom_bits=" << enc.stats.geomBits
            << " attr_bits=" << enc.stats.attrBits
            << " bpp=" << fmt(double(totalBits) / double(cloud.size()))
            << " time_ms=" << fmt(msSince(t0)) << "\n";
  return 0;
}

int runDecode(const std::string& input, const std::string& output) {
  auto t0 = Clock::now();
  apcc::VoxelCloud cloud = apcc::decodeStream(readFile(input));
  apcc::savePlyFile(apcc::devoxelize(cloud), output);
  std::cout << "points=" << cloud.size() << " time_ms=" << fmt(msSince(t0)) << "\n";
  return 0;
}

int runMetrics(const std::string& refPath, const std::string& distPath) {
  apcc::VoxelCloud ref = apcc::voxelize(apcc::loadPlyFile(refPath), 1.0);
  apcc::VoxelCloud dist = apcc::voxelize(apcc::loadPlyFile(distPath), 1.0);
  apcc::QualityMetrics m = apcc::computeMetrics(ref, dist);
  std::cout << "d1_psnr=" << fmt(m.d1Psnr) << " hausdorff=" << fmt(m.hausdorff);
  if (m.hasColorPsnr)
    std::cout << " y_psnr=" << fmt(m.colorPsnr[0]) << " co_psnr=" << fmt(m.colorPsnr[1])
              << " cg_psnr=" << fmt(m.colorPsnr[2]);
  if (m.hasReflectancePsnr)
    std::cout << " refl_psnr=" << fmt(m.reflectancePsnr);
  std::cout << "\n";
  return 0;
}

//============================================================================

struct BenchRow {
  std::string file, geom, attr;
  double scale;
  int qp;
  size_t points;
  double geomBpp, attrBpp, d1Psnr, yPsnr, encMs, decMs;
};

std::string csvHeader() {
  return "file,geom_branch,attr_branch,scale,qp,points,geom_bpp,attr_bpp,"
         "d1_psnr,y_psnr,enc_ms,dec_ms";
}

std::string csvLine(const BenchRow& r) {
  std::ostringstream ss;
  ss << r.file << ',' << r.geom << ',' << r.attr << ',' << fmt(r.scale) << ','
     << r.qp << ',' << r.points << ',' << fmt(r.geomBpp) << ',' << fmt(r.attrBpp)
     << ',' << fmt(r.d1Psnr) << ',' << fmt(r.yPsnr) << ',' << fmt(r.encMs) << ','
     << fmt(r.decMs);
  return ss.str();
}

int runBench(const std::string& input, const std::string& csvOut) {
  const apcc::RawPointCloud raw = apcc::loadPlyFile(input);
  const apcc::VoxelCloud reference = apcc::voxelize(raw, 1.0);
  const bool colored = raw.hasColors();

  const std::vector<double> scales = {0.125, 0.25, 0.75, 0.875, 0.9375};
  const std::vector<int> qps = colored ? std::vector<int>{22, 28, 34, 40, 46, 51}
                                       : std::vector<int>{0};
  const std::vector<std::string> geoms = {"octree", "predtree"};
  const std::vector<std::string> attrs =
    colored ? std::vector<std::string>{"transform", "predict"}
            : std::vector<std::string>{"none"};

  std::ostringstream csv;
  csv << csvHeader() << "\n";

  for (const auto& geom : geoms) {
    for (const auto& attr : attrs) {
      for (double scale : scales) {
        for (int qp : qps) {
          EncodeArgs a;
          a.geom = geom;
          a.attr = attr;
          a.scale = scale;
          a.qp = qp;
          apcc::CodecConfig cfg = makeConfig(a);

          auto tEnc = Clock::now();
          apcc::VoxelCloud voxelized = apcc::voxelize(raw, scale);
          apcc::EncodedStream enc = apcc::encodeVoxelCloud(voxelized, cfg);
          double encMs = msSince(tEnc);

          auto tDec = Clock::now();
          apcc::VoxelCloud decoded = apcc::decodeStream(enc.bytes);
          double decMs = msSince(tDec);

          // round-trip gate: geometry must match the voxelized cloud exactly
          {
            auto key = [](const apcc::Vec3i& v) {
              return uint64_t(uint32_t(v.x)) | uint64_t(uint32_t(v.y)) << 21
                | uint64_t(uint32_t(v.z)) << 42;
            };
            std::vector<uint64_t> a1, a2;
            for (const auto& v : voxelized.voxels)
              a1.push_back(key(v));
            for (const auto& v : decoded.voxels)
              a2.push_back(key(v));
            std::sort(a1.begin(), a1.end());
            std::sort(a2.begin(), a2.end());
            if (a1 != a2)
              throw apcc::Error("bench: geometry round-trip mismatch");
          }

          apcc::VoxelCloud distorted = apcc::voxelize(apcc::devoxelize(decoded), 1.0);
          apcc::QualityMetrics m = apcc::computeMetrics(reference, distorted);

          BenchRow row;
          row.file = input;
          row.geom = geom;
          row.attr = attr;
          row.scale = scale;
          row.qp = qp;
          row.points = raw.size();
          row.geomBpp = double(enc.stats.geomBits) / double(raw.size());
          row.attrBpp = double(enc.stats.attrBits) / double(raw.size());
          row.d1Psnr = m.d1Psnr;
          row.yPsnr = m.hasColorPsnr ? m.colorPsnr[0]
                                     : std::numeric_limits<double>::infinity();
          row.encMs = encMs;
          row.decMs = decMs;
          csv << csvLine(row) << "\n";
        }
      }
    }
  }

  if (csvOut.empty()) {
    std::cout << csv.str();
  } else {
    std::string s = csv.str();
    writeFile(csvOut, std::vector<uint8_t>(s.begin(), s.end()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point cloud codec: octree/predictive-tree geometry, "
               "transform/interpolation attributes"};
  app.require_subcommand(1);

  EncodeArgs ea;
  CLI::App* enc = app.add_subcommand("encode", "encode a PLY file to .apc");
  enc->add_option("--input", ea.input)->required();
  enc->add_option("--output", ea.output)->required();
  enc->add_option("--geom", ea.geom)->check(CLI::IsMember({"octree", "predtree"}));
  enc->add_option("--attr", ea.attr)
    ->check(CLI::IsMember({"transform", "predict", "none"}));
  enc->add_option("--scale", ea.scale);
  enc->add_option("--qp", ea.qp)->check(CLI::Range(0, 63));
  enc->add_flag("--planar", ea.planar);
  enc->add_flag("--isolated", ea.isolated);
  enc->add_option("--order", ea.order)->check(CLI::IsMember({"morton", "hilbert"}));
  enc->add_option("--theta", ea.theta);

  std::string decIn, decOut;
  CLI::App* dec = app.add_subcommand("decode", "decode an .apc stream to PLY");
  dec->add_option("--input", decIn)->required();
  dec->add_option("--output", decOut)->required();

  std::string refPath, distPath;
  CLI::App* met = app.add_subcommand("metrics", "compare two PLY files");
  met->add_option("--reference", refPath)->required();
  met->add_option("--distorted", distPath)->required();

  std::string benchIn, benchCsv;
  CLI::App* ben = app.add_subcommand("bench", "run the rate ladders");
  ben->add_option("--input", benchIn)->required();
  ben->add_option("--csv", benchCsv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed())
      return runEncode(ea);
    if (dec->parsed())
      return runDecode(decIn, decOut);
    if (met->parsed())
      return runMetrics(refPath, distPath);
    if (ben->parsed())
      return runBench(benchIn, benchCsv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
