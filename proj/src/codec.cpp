#include "apcc/codec.hpp"

#include <algorithm>

#include "apcc/bitstream.hpp"
#include "apcc/curves.hpp"

namespace apcc {

namespace {

constexpr uint32_t kMaxPoints = 1u << 27;

void validate(const CodecConfig& cfg) {
  if (!(cfg.scale > 0))
    throw ConfigError("scale must be positive");
  if (cfg.qp < 0 || cfg.qp > 63)
    throw ConfigError("qp out of [0,63]");
  if (!(cfg.hilbertTheta > 0))
    throw ConfigError("hilbert theta must be positive");
  if (cfg.attrBranch == AttrBranch::Predict) {
    const PredictConfig& p = cfg.predict;
    if (p.maxNeighbors < 1 || p.cacheSizeM < uint32_t(p.maxNeighbors))
      throw ConfigError("predict cache must hold at least maxNeighbors points");
    if (p.lodLevelsN < 1 || p.offsetC == 0 || p.offsetC > (1u << 20)
        || !(p.samplingTarget > 0) || p.samplingTarget > 1)
      throw ConfigError("bad predict configuration");
  }
  if (cfg.attrBranch == AttrBranch::Transform) {
    const TransformConfig& t = cfg.transform;
    if (!(t.initialDistanceThreshold > 0) || !(t.thresholdGrowth >= 1)
        || t.smallLayerCutoff < 2 || !(t.forceMergeFraction > 0))
      throw ConfigError("bad transform configuration");
  }
}

// Curve depth wide enough for every coordinate, including the theta-scaled z.
CurveConfig curveConfigFor(const Vec3<int>& bitDepths, double theta) {
  CurveConfig cc;
  cc.hilbertTheta = theta;
  int depth = std::max(1, std::max(bitDepths.x, std::max(bitDepths.y, bitDepths.z)));
  double maxZ = theta * double((int64_t(1) << bitDepths.z) - 1);
  while (depth < 21 && double(int64_t(1) << depth) <= maxZ)
    depth++;
  cc.bitDepth = depth;
  return cc;
}

struct SortedAttrs {
  std::vector<Vec3i> voxels;
  std::vector<Color3> colors;
  std::vector<uint16_t> reflectances;
};

SortedAttrs applyOrder(const VoxelCloud& cloud, const std::vector<uint32_t>& perm) {
  SortedAttrs s;
  s.voxels.reserve(cloud.size());
  for (uint32_t i : perm)
    s.voxels.push_back(cloud.voxels[i]);
  if (cloud.hasColors()) {
    s.colors.reserve(cloud.size());
    for (uint32_t i : perm)
      s.colors.push_back(cloud.colors[i]);
  }
  if (cloud.hasReflectances()) {
    s.reflectances.reserve(cloud.size());
    for (uint32_t i : perm)
      s.reflectances.push_back(cloud.reflectances[i]);
  }
  return s;
}

// Channel layout shared by both attribute branches: the color group (YCoCg
// or RGB) first, then the reflectance group.
struct ChannelPlan {
  std::vector<AttrChannelGroup> groups;
  bool hasColors = false, hasReflectances = false;
};

ChannelPlan buildChannels(const SortedAttrs& s, bool colorTransform) {
  ChannelPlan plan;
  if (!s.colors.empty()) {
    AttrChannelGroup g;
    g.values.assign(3, std::vector<int32_t>(s.voxels.size()));
    for (size_t i = 0; i < s.colors.size(); i++) {
      if (colorTransform) {
        auto ycc = colorForward(s.colors[i]);
        for (int c = 0; c < 3; c++)
          g.values[c][i] = ycc[c];
      } else {
        for (int c = 0; c < 3; c++)
          g.values[c][i] = s.colors[i][c];
      }
    }
    g.midpoints = colorTransform ? std::vector<int32_t>{128, 0, 0}
                                 : std::vector<int32_t>{128, 128, 128};
    plan.groups.push_back(std::move(g));
    plan.hasColors = true;
  }
  if (!s.reflectances.empty()) {
    AttrChannelGroup g;
    g.values.assign(1, std::vector<int32_t>(s.voxels.size()));
    for (size_t i = 0; i < s.reflectances.size(); i++)
      g.values[0][i] = s.reflectances[i];
    g.midpoints = {32768};
    plan.groups.push_back(std::move(g));
    plan.hasReflectances = true;
  }
  return plan;
}

// Lossy YCoCg values can drift outside the reversible range, so the decoder
// clamps RGB after the inverse lift.
Color3 clampedColorInverse(const std::array<int32_t, 3>& ycc) {
  int32_t y = std::clamp(ycc[0], 0, 255);
  int32_t co = std::clamp(ycc[1], -255, 255);
  int32_t cg = std::clamp(ycc[2], -255, 255);
  int32_t t = y - (cg >> 1);
  int32_t g = cg + t;
  int32_t b = t - (co >> 1);
  int32_t r = b + co;
  return {uint8_t(std::clamp(r, 0, 255)), uint8_t(std::clamp(g, 0, 255)),
          uint8_t(std::clamp(b, 0, 255))};
}

//============================================================================
// Parameter blocks

std::vector<uint8_t> packGeomParams(const CodecConfig& cfg, uint32_t pointCount,
                                    bool planarActive) {
  ByteWriter w;
  w.u32(pointCount);
  if (cfg.geomBranch == GeomBranch::Octree) {
    w.u8(uint8_t(cfg.octree.kLayers));
    w.u8(uint8_t(cfg.octree.mLayers));
    w.u8(uint8_t(cfg.octree.isolatedMode));
    w.f64(cfg.octree.isolatedLayerRatio);
    w.u8(uint8_t(cfg.octree.contextSet));
    w.u8(uint8_t(planarActive));
    w.f64(cfg.octree.planarDensityThreshold);
  }
  return w.take();
}

struct GeomParams {
  uint32_t pointCount = 0;
  OctreeConfig octree;
  bool planarActive = false;
};

GeomParams unpackGeomParams(const SequenceHeader& h) {
  ByteReader r(h.geomParams);
  GeomParams p;
  p.pointCount = r.u32();
  if (p.pointCount == 0 || p.pointCount > kMaxPoints)
    throw CorruptStream("implausible point count");
  int totalBits = h.bitDepths.x + h.bitDepths.y + h.bitDepths.z;
  if (totalBits < 31 && p.pointCount > (1u << totalBits))
    throw CorruptStream("point count exceeds grid capacity");
  if (h.geomBranch == 0) {
    p.octree.kLayers = r.u8();
    p.octree.mLayers = r.u8();
    p.octree.isolatedMode = r.u8() != 0;
    p.octree.isolatedLayerRatio = r.f64();
    p.octree.contextSet = OctreeConfig::ContextSet(r.u8() & 1);
    p.planarActive = r.u8() != 0;
    p.octree.planarDensityThreshold = r.f64();
    p.octree.planarMode = p.planarActive;
  }
  return p;
}

std::vector<uint8_t> packAttrParams(const CodecConfig& cfg, int resolvedLodShift) {
  ByteWriter w;
  w.u8(uint8_t(cfg.qp));
  if (cfg.attrBranch == AttrBranch::Transform) {
    w.f64(cfg.transform.initialDistanceThreshold);
    w.f64(cfg.transform.thresholdGrowth);
    w.u32(uint32_t(cfg.transform.smallLayerCutoff));
    w.f64(cfg.transform.forceMergeFraction);
  } else if (cfg.attrBranch == AttrBranch::Predict) {
    w.u8(cfg.predict.order == CurveOrder::Morton ? 0 : 1);
    w.u32(cfg.predict.offsetC);
    w.u32(cfg.predict.cacheSizeM);
    w.u8(uint8_t(resolvedLodShift));
    w.u8(uint8_t(cfg.predict.lodLevelsN));
    w.u8(uint8_t(cfg.predict.intraLayer));
    w.u8(uint8_t(cfg.predict.maxNeighbors));
    w.f64(cfg.predict.crossAttrLambda);
  }
  return w.take();
}

struct AttrParams {
  int qp = 0;
  TransformConfig transform;
  PredictConfig predict;
};

AttrParams unpackAttrParams(const SequenceHeader& h) {
  ByteReader r(h.attrParams);
  AttrParams p;
  p.qp = r.u8();
  if (p.qp > 63)
    throw CorruptStream("qp out of range");
  if (h.attrBranch == 1) {
    p.transform.initialDistanceThreshold = r.f64();
    p.transform.thresholdGrowth = r.f64();
    p.transform.smallLayerCutoff = int(r.u32());
    p.transform.forceMergeFraction = r.f64();
    if (!(p.transform.initialDistanceThreshold > 0)
        || !(p.transform.thresholdGrowth >= 1) || p.transform.smallLayerCutoff < 2)
      throw CorruptStream("bad transform parameters");
  } else if (h.attrBranch == 2) {
    p.predict.order = r.u8() == 0 ? CurveOrder::Morton : CurveOrder::Hilbert;
    p.predict.offsetC = r.u32();
    p.predict.cacheSizeM = r.u32();
    p.predict.lodShiftK = r.u8();
    p.predict.lodLevelsN = r.u8();
    p.predict.intraLayer = r.u8() != 0;
    p.predict.maxNeighbors = r.u8();
    p.predict.crossAttrLambda = r.f64();
    if (p.predict.lodShiftK < 1 || p.predict.lodLevelsN < 1
        || p.predict.maxNeighbors < 1 || p.predict.offsetC == 0
        || p.predict.offsetC > (1u << 20)
        || p.predict.cacheSizeM < uint32_t(p.predict.maxNeighbors)
        || !(p.predict.crossAttrLambda >= 0))
      throw CorruptStream("bad predict parameters");
  }
  return p;
}

size_t totalChannels(const ChannelPlan& plan) {
  size_t n = 0;
  for (const auto& g : plan.groups)
    n += g.values.size();
  return n;
}

}  // namespace

//============================================================================

EncodedStream encodeVoxelCloud(const VoxelCloud& cloud, const CodecConfig& cfg) {
  validate(cfg);
  if (cloud.voxels.empty())
    throw EmptyInput("encode: empty cloud");
  if (cloud.size() > kMaxPoints)
    throw ConfigError("cloud exceeds supported point count");

  EncodedStream out;
  SequenceHeader h;
  h.origin = cloud.origin;
  h.scale = cloud.scale;
  h.bitDepths = cloud.bitDepths;
  h.geomBranch = uint8_t(cfg.geomBranch);
  h.hilbertTheta = cfg.hilbertTheta;

  const bool wantAttrs = cfg.attrBranch != AttrBranch::None && cloud.hasAttributes();
  h.attrBranch = wantAttrs ? uint8_t(cfg.attrBranch) : 0;
  h.hasColors = wantAttrs && cloud.hasColors();
  h.hasReflectances = wantAttrs && cloud.hasReflectances();
  h.colorTransform = h.hasColors && cfg.colorTransformEnabled;

  // geometry unit
  std::vector<DataUnit> units;
  bool planarActive = false;
  {
    DataUnit gu;
    gu.type = 1;
    if (cfg.geomBranch == GeomBranch::Octree) {
      planarActive = cfg.octree.planarMode
        && planarSliceEligible(cloud.size(), cloud.voxels, cfg.octree);
      ContextEncoder ce(kOctreeContextCount);
      encodeOctreeGeometry(cloud.voxels, cloud.bitDepths, cfg.octree, planarActive,
                           ce);
      gu.payload = ce.finish();
    } else {
      ContextEncoder ce(kPredTreeContextCount);
      auto chain = buildChain(cloud.voxels, cfg.predtree);
      encodeChain(cloud.voxels, chain, cloud.bitDepths, ce);
      gu.payload = ce.finish();
    }
    out.stats.geomBits = gu.payload.size() * 8;
    units.push_back(std::move(gu));
  }
  h.geomParams = packGeomParams(cfg, uint32_t(cloud.size()), planarActive);

  // attribute unit
  int resolvedLodShift = std::max(1, cfg.predict.lodShiftK);
  if (wantAttrs) {
    CurveOrder order = cfg.attrBranch == AttrBranch::Transform
      ? CurveOrder::Hilbert
      : cfg.predict.order;
    CurveConfig cc = curveConfigFor(cloud.bitDepths, cfg.hilbertTheta);
    auto perm = sortByCode(cloud.voxels, order, cc);
    SortedAttrs sorted = applyOrder(cloud, perm);
    ChannelPlan plan = buildChannels(sorted, h.colorTransform);

    DataUnit au;
    au.type = 2;
    if (cfg.attrBranch == AttrBranch::Transform) {
      std::vector<std::vector<int32_t>> channels;
      for (auto& g : plan.groups)
        for (auto& ch : g.values)
          channels.push_back(std::move(ch));
      ContextEncoder ce(transformContextCount(channels.size()));
      auto hierarchy = buildHierarchy(sorted.voxels, cfg.transform);
      encodeTransformAttributes(hierarchy, channels, cfg.qp, ce);
      au.payload = ce.finish();
    } else {
      if (cfg.predict.lodShiftK == 0) {
        std::vector<uint64_t> codes(sorted.voxels.size());
        int depth = std::max(
          1, std::max(cloud.bitDepths.x, std::max(cloud.bitDepths.y, cloud.bitDepths.z)));
        for (size_t i = 0; i < sorted.voxels.size(); i++)
          codes[i] = mortonEncode(sorted.voxels[i], depth);
        resolvedLodShift =
          autoSelectLodShift(codes, cfg.predict.samplingTarget, depth);
      }
      PredictConfig pc = cfg.predict;
      pc.lodShiftK = resolvedLodShift;
      ContextEncoder ce(predictAttrContextCount(totalChannels(plan)));
      encodePredictAttributes(sorted.voxels, plan.groups, cfg.qp, pc, ce);
      au.payload = ce.finish();
    }
    out.stats.attrBits = au.payload.size() * 8;
    units.push_back(std::move(au));
  }
  h.attrParams = packAttrParams(cfg, resolvedLodShift);

  out.stats.points = cloud.size();
  out.bytes = writeStream(h, units);
  return out;
}

EncodedStream encodeCloud(const RawPointCloud& cloud, const CodecConfig& cfg) {
  validate(cfg);
  return encodeVoxelCloud(voxelize(cloud, cfg.scale), cfg);
}

//============================================================================

VoxelCloud decodeStream(std::span<const uint8_t> bytes) {
  ParsedStream ps = readStream(bytes);
  const SequenceHeader& h = ps.header;
  GeomParams gp = unpackGeomParams(h);

  const bool wantAttrs = h.attrBranch != 0 && (h.hasColors || h.hasReflectances);
  if (wantAttrs && ps.units.size() < 2)
    throw CorruptStream("attribute data unit missing");

  VoxelCloud cloud;
  cloud.origin = h.origin;
  cloud.scale = h.scale;
  cloud.bitDepths = h.bitDepths;

  if (h.geomBranch == 0) {
    ContextDecoder cd(kOctreeContextCount, ps.units[0].payload);
    cloud.voxels = decodeOctreeGeometry(gp.pointCount, h.bitDepths, gp.octree,
                                        gp.planarActive, cd);
  } else {
    ContextDecoder cd(kPredTreeContextCount, ps.units[0].payload);
    cloud.voxels.reserve(std::min<uint32_t>(gp.pointCount, 1u << 20));
    decodeChain(gp.pointCount, h.bitDepths, cd, cloud.voxels);
  }

  // canonical curve order for attribute decode (and for the output)
  if (wantAttrs) {
    AttrParams ap = unpackAttrParams(h);
    CurveOrder order =
      h.attrBranch == 1 ? CurveOrder::Hilbert
                        : (h.attrBranch == 2 ? ap.predict.order : CurveOrder::Hilbert);
    CurveConfig cc = curveConfigFor(h.bitDepths, h.hilbertTheta);
    auto perm = sortByCode(cloud.voxels, order, cc);
    std::vector<Vec3i> sortedVoxels;
    sortedVoxels.reserve(cloud.size());
    for (uint32_t i : perm)
      sortedVoxels.push_back(cloud.voxels[i]);
    cloud.voxels = std::move(sortedVoxels);

    size_t colorChannels = h.hasColors ? 3 : 0;
    size_t reflChannels = h.hasReflectances ? 1 : 0;
    std::vector<AttrChannelGroup> groups;

    if (h.attrBranch == 1) {
      ContextDecoder cd(transformContextCount(colorChannels + reflChannels),
                        ps.units[1].payload);
      auto hierarchy = buildHierarchy(cloud.voxels, ap.transform);
      auto channels =
        decodeTransformAttributes(hierarchy, colorChannels + reflChannels, ap.qp, cd);
      size_t next = 0;
      if (h.hasColors) {
        AttrChannelGroup g;
        for (int c = 0; c < 3; c++)
          g.values.push_back(std::move(channels[next++]));
        groups.push_back(std::move(g));
      }
      if (h.hasReflectances) {
        AttrChannelGroup g;
        g.values.push_back(std::move(channels[next++]));
        groups.push_back(std::move(g));
      }
    } else {
      std::vector<size_t> groupChannels;
      std::vector<std::vector<int32_t>> groupMidpoints;
      if (h.hasColors) {
        groupChannels.push_back(3);
        groupMidpoints.push_back(h.colorTransform ? std::vector<int32_t>{128, 0, 0}
                                                  : std::vector<int32_t>{128, 128, 128});
      }
      if (h.hasReflectances) {
        groupChannels.push_back(1);
        groupMidpoints.push_back({32768});
      }
      ContextDecoder cd(predictAttrContextCount(colorChannels + reflChannels),
                        ps.units[1].payload);
      groups = decodePredictAttributes(cloud.voxels, groupChannels, groupMidpoints,
                                       ap.qp, ap.predict, cd);
    }

    size_t g = 0;
    if (h.hasColors) {
      const auto& vals = groups[g++].values;
      cloud.colors.resize(cloud.size());
      for (size_t i = 0; i < cloud.size(); i++) {
        if (h.colorTransform)
          cloud.colors[i] = clampedColorInverse({vals[0][i], vals[1][i], vals[2][i]});
        else
          cloud.colors[i] = {uint8_t(std::clamp(vals[0][i], 0, 255)),
                             uint8_t(std::clamp(vals[1][i], 0, 255)),
                             uint8_t(std::clamp(vals[2][i], 0, 255))};
      }
    }
    if (h.hasReflectances) {
      const auto& vals = groups[g++].values;
      cloud.reflectances.resize(cloud.size());
      for (size_t i = 0; i < cloud.size(); i++)
        cloud.reflectances[i] = uint16_t(std::clamp(vals[0][i], 0, 65535));
    }
  }
  return cloud;
}

}  // namespace apcc
