#include "apcc/attr_predict.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_set>

#include "apcc/attr_transform.hpp"  // quantize/dequantize

namespace apcc {

namespace {

uint64_t codeDistance(uint64_t a, uint64_t b) { return a > b ? a - b : b - a; }

int bitDepthOfMax(const std::vector<Vec3i>& voxels) {
  int32_t mx = 0;
  for (const auto& v : voxels)
    mx = std::max({mx, v.x, v.y, v.z});
  int d = 1;
  while ((int64_t(1) << d) <= mx)
    d++;
  return d;
}

}  // namespace

//============================================================================

int autoSelectLodShift(const std::vector<uint64_t>& mortonCodes, double target,
                       int maxShift) {
  const size_t n = mortonCodes.size();
  if (n == 0)
    return 1;
  for (int k = 1; k <= maxShift; k++) {
    std::unordered_set<uint64_t> blocks;
    blocks.reserve(n * 2);
    int shift = std::min(3 * k, 63);
    for (uint64_t m : mortonCodes)
      blocks.insert(m >> shift);
    double sampled = 1.0 - double(blocks.size()) / double(n);
    if (sampled >= target)
      return k;
  }
  return maxShift;
}

std::vector<uint8_t> buildLod(const std::vector<uint64_t>& mortonCodes, int shiftK,
                              int levelsN) {
  const size_t n = mortonCodes.size();
  std::vector<uint8_t> level(n, uint8_t(levelsN));
  std::unordered_set<uint64_t> seen;
  for (int r = 1; r <= levelsN - 1; r++) {
    const uint8_t curLevel = uint8_t(levelsN - r + 1);
    const int shift = std::min(3 * shiftK * r, 63);
    seen.clear();
    for (size_t i = 0; i < n; i++) {
      if (level[i] != curLevel)
        continue;
      uint64_t block = mortonCodes[i] >> shift;
      if (seen.insert(block).second)
        level[i] = uint8_t(curLevel - 1);  // first of the block is promoted
    }
  }
  return level;
}

std::vector<uint32_t> doubleMortonCandidates(std::span<const uint32_t> cache,
                                             const std::vector<uint64_t>& m1,
                                             const std::vector<uint64_t>& m2,
                                             uint64_t curM1, uint64_t curM2,
                                             int maxNeighbors) {
  const size_t take = std::min(cache.size(), size_t(maxNeighbors) * 2);
  std::vector<uint32_t> byM1(cache.begin(), cache.end());
  std::vector<uint32_t> byM2(cache.begin(), cache.end());
  auto rank = [](std::vector<uint32_t>& v, const std::vector<uint64_t>& codes,
                 uint64_t cur, size_t k) {
    std::partial_sort(v.begin(), v.begin() + std::ptrdiff_t(k), v.end(),
                      [&](uint32_t a, uint32_t b) {
                        uint64_t da = codeDistance(codes[a], cur);
                        uint64_t db = codeDistance(codes[b], cur);
                        if (da != db)
                          return da < db;
                        return a < b;
                      });
    v.resize(k);
  };
  rank(byM1, m1, curM1, take);
  rank(byM2, m2, curM2, take);

  std::vector<uint32_t> out = byM1;
  for (uint32_t idx : byM2)
    if (std::find(out.begin(), out.end(), idx) == out.end())
      out.push_back(idx);
  return out;
}

std::array<double, kMaxAttrChannels> predictPoint(
  const Vec3i& current, std::span<const PredictorCandidate> candidates,
  size_t channelCount, const PredictConfig& cfg, double lambda,
  std::span<const int32_t> midpoints) {
  std::array<double, kMaxAttrChannels> pred{};
  if (candidates.empty()) {
    for (size_t c = 0; c < channelCount; c++)
      pred[c] = double(midpoints[c]);
    return pred;
  }

  struct Scored {
    double dist;
    uint32_t idx;   // coding index, used as the deterministic tie-break
    size_t cand;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (size_t k = 0; k < candidates.size(); k++) {
    const auto& cand = candidates[k];
    double d = double(manhattanDistance(current, cand.pos)) + lambda * cand.attrDist;
    scored.push_back({d, cand.codingIndex, k});
  }
  size_t take = std::min<size_t>(size_t(cfg.maxNeighbors), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(take),
                    scored.end(), [](const Scored& a, const Scored& b) {
                      if (a.dist != b.dist)
                        return a.dist < b.dist;
                      return a.idx < b.idx;
                    });

  double wsum = 0;
  for (size_t k = 0; k < take; k++) {
    double w = 1.0 / (1.0 + scored[k].dist);
    wsum += w;
    for (size_t c = 0; c < channelCount; c++)
      pred[c] += w * candidates[scored[k].cand].recon[c];
  }
  for (size_t c = 0; c < channelCount; c++)
    pred[c] /= wsum;
  return pred;
}

void updateReferenceSet(std::vector<ReferenceEntry>& set, size_t capacity,
                        const ReferenceEntry& entry, const Vec3i& query) {
  if (set.size() < capacity) {
    set.push_back(entry);
    return;
  }
  if (set.empty())
    return;
  size_t farthest = 0;
  int64_t farDist = manhattanDistance(set[0].pos, query);
  for (size_t i = 1; i < set.size(); i++) {
    int64_t d = manhattanDistance(set[i].pos, query);
    if (d > farDist) {  // ties keep the earlier-inserted member
      farDist = d;
      farthest = i;
    }
  }
  if (manhattanDistance(entry.pos, query) < farDist)
    set[farthest] = entry;
}

//============================================================================
// Shared closed-loop driver. The policy supplies the per-channel residual
// coding step and returns the reconstructed value.

namespace {

constexpr size_t kPerChannelCtx = 9;  // magnitude base (8) + sign

struct ChannelCtx {
  size_t mag, sign;
};

ChannelCtx channelCtx(size_t globalChannel) {
  return {globalChannel * kPerChannelCtx, globalChannel * kPerChannelCtx + 8};
}

struct CodedPoint {
  uint32_t sortIdx;
  uint8_t level;
};

template<class Policy>
void runPredictAttributes(const std::vector<Vec3i>& voxels,
                          std::span<const size_t> groupChannels,
                          std::span<const std::vector<int32_t>> groupMidpoints,
                          int qp, const PredictConfig& cfg, Policy& policy,
                          std::vector<std::vector<std::vector<double>>>& recon,
                          PredictTrace* trace = nullptr) {
  const size_t n = voxels.size();
  const int depth = bitDepthOfMax(voxels);

  std::vector<uint64_t> m1(n), m2(n);
  {
    int depth2 = depth;
    int64_t maxOff = ((int64_t(1) << depth) - 1) + int64_t(cfg.offsetC);
    while (depth2 < 21 && (maxOff >> depth2) != 0)
      depth2++;
    // offset coordinates saturate at the 21-bit ceiling; order two is a
    // candidate heuristic, so both sides just need the same codes
    const int32_t lim = (int32_t(1) << depth2) - 1;
    for (size_t i = 0; i < n; i++) {
      m1[i] = mortonEncode(voxels[i], depth);
      auto off = [&](int32_t c) {
        return std::min(int32_t(c + int32_t(cfg.offsetC)), lim);
      };
      m2[i] = mortonEncode({off(voxels[i].x), off(voxels[i].y), off(voxels[i].z)},
                           depth2);
    }
  }

  int shiftK = cfg.lodShiftK > 0
    ? cfg.lodShiftK
    : autoSelectLodShift(m1, cfg.samplingTarget, depth);
  std::vector<uint8_t> level = buildLod(m1, shiftK, cfg.lodLevelsN);

  // coding order: coarse levels first, sort order within a level
  std::vector<uint32_t> codingOrder;
  codingOrder.reserve(n);
  for (int lv = 1; lv <= cfg.lodLevelsN; lv++)
    for (uint32_t i = 0; i < n; i++)
      if (level[i] == lv)
        codingOrder.push_back(i);

  const size_t groupCount = groupChannels.size();
  recon.assign(groupCount, {});
  for (size_t g = 0; g < groupCount; g++)
    recon[g].assign(groupChannels[g], std::vector<double>(n));

  size_t globalChannelBase = 0;
  for (size_t g = 0; g < groupCount; g++) {
    const size_t C = groupChannels[g];
    const double lambda = g == 0 ? 0.0 : cfg.crossAttrLambda;

    std::vector<uint32_t> cache;  // sort indices of coded points, oldest first
    cache.reserve(cfg.cacheSizeM + 1);
    std::vector<uint8_t> cacheLevel;
    cacheLevel.reserve(cfg.cacheSizeM + 1);
    std::vector<ReferenceEntry> refSet;

    auto crossDist = [&](uint32_t a, uint32_t b) {
      double d = 0;
      for (size_t pg = 0; pg < g; pg++)
        for (size_t c = 0; c < groupChannels[pg]; c++)
          d += std::abs(recon[pg][c][a] - recon[pg][c][b]);
      return d;
    };

    for (size_t k = 0; k < codingOrder.size(); k++) {
      const uint32_t i = codingOrder[k];
      const uint8_t curLevel = level[i];
      auto allowed = [&](uint8_t lv) {
        return lv < curLevel || (cfg.intraLayer && lv == curLevel);
      };

      // candidate pool: exhaustive while the cache covers the whole coded
      // prefix, double-Morton filtered beyond that
      std::vector<uint32_t> pool;
      if (k <= cfg.cacheSizeM) {
        for (size_t t = 0; t < cache.size(); t++)
          if (allowed(cacheLevel[t]))
            pool.push_back(cache[t]);
      } else {
        std::vector<uint32_t> windowIdx;
        windowIdx.reserve(cache.size());
        for (size_t t = 0; t < cache.size(); t++)
          if (allowed(cacheLevel[t]))
            windowIdx.push_back(cache[t]);
        pool =
          doubleMortonCandidates(windowIdx, m1, m2, m1[i], m2[i], cfg.maxNeighbors);
      }
      for (const auto& re : refSet)
        if (allowed(re.level)
            && std::find(pool.begin(), pool.end(), re.codingIndex) == pool.end())
          pool.push_back(re.codingIndex);

      std::vector<PredictorCandidate> cands;
      cands.reserve(pool.size());
      for (uint32_t j : pool) {
        assert(level[j] <= curLevel);  // causality: predictors decoded first
        PredictorCandidate pc;
        pc.pos = voxels[j];
        pc.codingIndex = j;
        pc.attrDist = lambda > 0 ? crossDist(i, j) : 0.0;
        for (size_t c = 0; c < C; c++)
          pc.recon[c] = recon[g][c][j];
        cands.push_back(pc);
      }

      auto pred = predictPoint(voxels[i], cands, C, cfg, lambda,
                               groupMidpoints[g]);
      if (trace) {
        trace->codingOrder.push_back(i);
        for (size_t c = 0; c < C; c++)
          trace->predictions.push_back(pred[c]);
      }

      ReferenceEntry re;
      re.pos = voxels[i];
      re.level = curLevel;
      re.codingIndex = i;
      for (size_t c = 0; c < C; c++) {
        int64_t predInt = roundHalfAway(pred[c]);
        ChannelCtx cc = channelCtx(globalChannelBase + c);
        double rec = policy.codeChannel(g, c, i, predInt, qp, cc.mag, cc.sign);
        recon[g][c][i] = rec;
        re.recon[c] = rec;
      }

      cache.push_back(i);
      cacheLevel.push_back(curLevel);
      if (cache.size() > cfg.cacheSizeM) {
        cache.erase(cache.begin());
        cacheLevel.erase(cacheLevel.begin());
      }
      updateReferenceSet(refSet, size_t(cfg.maxNeighbors), re, voxels[i]);
    }
    globalChannelBase += C;
  }
}

struct EncodePolicy {
  const std::vector<AttrChannelGroup>* groups;
  ContextEncoder* ce;

  double codeChannel(size_t g, size_t c, uint32_t i, int64_t predInt, int qp,
                     size_t magCtx, size_t signCtx) {
    int64_t value = (*groups)[g].values[c][i];
    if (qp == 0) {
      int64_t r = value - predInt;
      ce->encodeUint(uint32_t(std::abs(r)), magCtx);
      if (r != 0)
        ce->encodeBin(signCtx, r > 0);
      return double(value);
    }
    double r = double(value) - double(predInt);
    int64_t q = quantize(r, qp);
    ce->encodeUint(uint32_t(std::abs(q)), magCtx);
    if (q != 0)
      ce->encodeBin(signCtx, q > 0);
    return double(predInt) + dequantize(q, qp);
  }
};

struct DecodePolicy {
  ContextDecoder* cd;

  double codeChannel(size_t, size_t, uint32_t, int64_t predInt, int qp,
                     size_t magCtx, size_t signCtx) {
    auto mag = int64_t(cd->decodeUint(magCtx));
    int64_t v = mag == 0 ? 0 : (cd->decodeBin(signCtx) ? mag : -mag);
    if (qp == 0)
      return double(predInt + v);
    return double(predInt) + dequantize(v, qp);
  }
};

}  // namespace

size_t predictAttrContextCount(size_t totalChannels) {
  return totalChannels * kPerChannelCtx;
}

void encodePredictAttributes(const std::vector<Vec3i>& sortedVoxels,
                             const std::vector<AttrChannelGroup>& groups, int qp,
                             const PredictConfig& cfg, ContextEncoder& ce,
                             PredictTrace* trace) {
  std::vector<size_t> groupChannels;
  std::vector<std::vector<int32_t>> groupMidpoints;
  for (const auto& gr : groups) {
    groupChannels.push_back(gr.values.size());
    groupMidpoints.push_back(gr.midpoints);
  }
  EncodePolicy policy{&groups, &ce};
  std::vector<std::vector<std::vector<double>>> recon;
  runPredictAttributes(sortedVoxels, groupChannels, groupMidpoints, qp, cfg,
                       policy, recon, trace);
}

std::vector<AttrChannelGroup> decodePredictAttributes(
  const std::vector<Vec3i>& sortedVoxels, std::span<const size_t> groupChannels,
  std::span<const std::vector<int32_t>> groupMidpoints, int qp,
  const PredictConfig& cfg, ContextDecoder& cd) {
  DecodePolicy policy{&cd};
  std::vector<std::vector<std::vector<double>>> recon;
  runPredictAttributes(sortedVoxels, groupChannels, groupMidpoints, qp, cfg,
                       policy, recon);

  std::vector<AttrChannelGroup> out(groupChannels.size());
  for (size_t g = 0; g < groupChannels.size(); g++) {
    out[g].midpoints = groupMidpoints[g];
    out[g].values.assign(groupChannels[g],
                         std::vector<int32_t>(sortedVoxels.size()));
    for (size_t c = 0; c < groupChannels[g]; c++)
      for (size_t i = 0; i < sortedVoxels.size(); i++)
        out[g].values[c][i] = int32_t(roundHalfAway(recon[g][c][i]));
  }
  return out;
}

}  // namespace apcc
