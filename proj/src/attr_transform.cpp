#include "apcc/attr_transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace apcc {

namespace {

double squaredEuclidean(const Vec3d& a, const Vec3d& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

double manhattan(const Vec3d& a, const Vec3d& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

constexpr int kPredictionWindow = 64;
constexpr int kPredictionNeighbors = 3;

// Per-channel context regions: AC magnitude/sign, residual magnitude/sign,
// DC magnitude/sign.
constexpr size_t kPerChannelCtx = 27;

struct ChannelCtx {
  size_t acMag, acSign, resMag, resSign, dcMag, dcSign;
};

ChannelCtx channelCtx(size_t c) {
  size_t base = c * kPerChannelCtx;
  return {base, base + 8, base + 9, base + 17, base + 18, base + 26};
}

void encodeSigned(ContextEncoder& ce, int64_t v, size_t magBase, size_t signCtx) {
  ce.encodeUint(uint32_t(std::abs(v)), magBase);
  if (v != 0)
    ce.encodeBin(signCtx, v > 0);
}

int64_t decodeSigned(ContextDecoder& cd, size_t magBase, size_t signCtx) {
  auto mag = int64_t(cd.decodeUint(magBase));
  if (mag == 0)
    return 0;
  return cd.decodeBin(signCtx) ? mag : -mag;
}

// Integer-reversible lifting pair used on the lossless path.
//   high = a - b, low = (a + b) >> 1
void liftForward(int64_t a, int64_t b, int64_t& low, int64_t& high) {
  high = a - b;
  low = (a + b) >> 1;
}

void liftInverse(int64_t low, int64_t high, int64_t& a, int64_t& b) {
  a = low + ((high + 1) >> 1);
  b = a - high;
}

}  // namespace

//============================================================================

AttributeHierarchy buildHierarchy(const std::vector<Vec3i>& sortedVoxels,
                                  const TransformConfig& cfg) {
  if (sortedVoxels.empty())
    throw EmptyInput("hierarchy: empty cloud");

  AttributeHierarchy h;
  h.layers.emplace_back();
  h.layers[0].reserve(sortedVoxels.size());
  for (const auto& v : sortedVoxels) {
    HierNode n;
    n.pos = {double(v.x), double(v.y), double(v.z)};
    n.weight = 1;
    h.layers[0].push_back(n);
  }

  double threshold = cfg.initialDistanceThreshold;
  while (h.layers.back().size() > 1) {
    auto& cur = h.layers.back();
    const size_t count = cur.size();
    std::vector<HierNode> up;

    auto mergeInto = [&](size_t i, size_t j) {
      HierNode p;
      const HierNode &a = cur[i], &b = cur[j];
      p.weight = a.weight + b.weight;
      double wa = double(a.weight), wb = double(b.weight), ws = wa + wb;
      p.pos = {(a.pos.x * wa + b.pos.x * wb) / ws, (a.pos.y * wa + b.pos.y * wb) / ws,
               (a.pos.z * wa + b.pos.z * wb) / ws};
      p.child0 = int32_t(i);
      p.child1 = int32_t(j);
      cur[i].role = HierRole::Transformation;
      cur[j].role = HierRole::Transformation;
      up.push_back(p);
    };
    auto forcePairAll = [&]() {
      up.clear();
      for (size_t i = 0; i + 1 < count; i += 2)
        mergeInto(i, i + 1);
      if (count % 2) {
        HierNode p = cur[count - 1];
        p.child0 = int32_t(count - 1);
        p.child1 = -1;
        cur[count - 1].role = HierRole::Transformation;
        up.push_back(p);
      }
    };

    if (count < size_t(cfg.smallLayerCutoff)) {
      forcePairAll();
    } else {
      const double thr2 = threshold * threshold;
      size_t predCount = 0;
      size_t i = 0;
      while (i < count) {
        if (i + 1 < count && squaredEuclidean(cur[i].pos, cur[i + 1].pos) <= thr2) {
          mergeInto(i, i + 1);
          i += 2;
        } else {
          cur[i].role = HierRole::Prediction;
          predCount++;
          i += 1;
        }
      }
      if (double(predCount) > cfg.forceMergeFraction * double(count)) {
        for (auto& n : cur)
          n.role = HierRole::Transformation;
        forcePairAll();
      }
    }

    h.layers.push_back(std::move(up));
    threshold *= cfg.thresholdGrowth;
  }
  return h;
}

uint64_t hierarchyStructuralHash(const AttributeHierarchy& h) {
  uint64_t hash = 1469598103934665603ull;
  auto mix = [&](uint64_t v) {
    hash ^= v;
    hash *= 1099511628211ull;
  };
  mix(h.layers.size());
  for (const auto& layer : h.layers) {
    mix(layer.size());
    for (const auto& n : layer) {
      mix(uint64_t(uint32_t(n.child0)));
      mix(uint64_t(uint32_t(n.child1)));
      mix(n.weight);
      mix(uint64_t(n.role));
      uint64_t bits;
      static_assert(sizeof(double) == 8);
      std::memcpy(&bits, &n.pos.x, 8), mix(bits);
      std::memcpy(&bits, &n.pos.y, 8), mix(bits);
      std::memcpy(&bits, &n.pos.z, 8), mix(bits);
    }
  }
  return hash;
}

//============================================================================

void pairTransform(double a, double b, uint32_t wa, uint32_t wb, double& dc,
                   double& ac) {
  double sa = std::sqrt(double(wa)), sb = std::sqrt(double(wb));
  double ss = std::sqrt(double(wa) + double(wb));
  dc = (sa * a + sb * b) / ss;
  ac = (-sb * a + sa * b) / ss;
}

void pairInverse(double dc, double ac, uint32_t wa, uint32_t wb, double& a,
                 double& b) {
  double sa = std::sqrt(double(wa)), sb = std::sqrt(double(wb));
  double ss = std::sqrt(double(wa) + double(wb));
  a = (sa * dc - sb * ac) / ss;
  b = (sb * dc + sa * ac) / ss;
}

//============================================================================

double quantStep(int qp) {
  // 2^(r/6) for r = 0..5, frozen so every platform computes identical steps
  static constexpr double kSixth[6] = {
    1.0,
    1.122462048309373,
    1.2599210498948732,
    1.4142135623730951,
    1.5874010519681994,
    1.7817974362806785,
  };
  if (qp < 0 || qp > 63)
    throw ConfigError("qp out of [0,63]");
  int e = qp - 4;
  int k = e >= 0 ? e / 6 : -((-e + 5) / 6);
  int r = e - 6 * k;
  double step = std::ldexp(kSixth[r], k);
  return std::max(step, 1.0 / 256.0);
}

int64_t quantize(double coeff, int qp) { return roundHalfAway(coeff / quantStep(qp)); }

double dequantize(int64_t q, int qp) { return double(q) * quantStep(qp); }

//============================================================================

size_t transformContextCount(size_t channelCount) {
  return channelCount * kPerChannelCtx;
}

namespace {

// Prediction-point neighbor selection: the three nearest (Manhattan) among
// the last 64 already-processed nodes of the same layer, weights 1/(1+d).
struct Predictor {
  double dist;
  size_t node;
};

template<typename Recon>
std::vector<double> predictValue(const std::vector<HierNode>& layer,
                                 const std::vector<size_t>& processed,
                                 size_t nodeIdx, size_t channelCount,
                                 const Recon& recon) {
  size_t windowBegin =
    processed.size() > kPredictionWindow ? processed.size() - kPredictionWindow : 0;
  std::vector<Predictor> cands;
  cands.reserve(processed.size() - windowBegin);
  for (size_t k = windowBegin; k < processed.size(); k++) {
    size_t j = processed[k];
    cands.push_back({manhattan(layer[nodeIdx].pos, layer[j].pos), j});
  }
  size_t take = std::min<size_t>(kPredictionNeighbors, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + take, cands.end(),
                    [](const Predictor& a, const Predictor& b) {
                      if (a.dist != b.dist)
                        return a.dist < b.dist;
                      return a.node < b.node;
                    });

  std::vector<double> pred(channelCount, 0.0);
  if (take == 0)
    return pred;  // no processed neighbors: predict zero
  double wsum = 0;
  for (size_t k = 0; k < take; k++) {
    double w = 1.0 / (1.0 + cands[k].dist);
    wsum += w;
    for (size_t c = 0; c < channelCount; c++)
      pred[c] += w * recon(cands[k].node, c);
  }
  for (size_t c = 0; c < channelCount; c++)
    pred[c] /= wsum;
  return pred;
}

}  // namespace

void encodeTransformAttributes(const AttributeHierarchy& h,
                               const std::vector<std::vector<int32_t>>& channels,
                               int qp, ContextEncoder& ce) {
  const size_t C = channels.size();
  const size_t T = h.layers.size() - 1;
  const bool lossless = qp == 0;

  // Bottom-up pass over original values. On the lossy path values are the
  // real-valued transform outputs; on the lossless path the lifting outputs.
  std::vector<std::vector<std::vector<double>>> val(h.layers.size());
  std::vector<std::vector<std::vector<int64_t>>> ival(h.layers.size());
  std::vector<std::vector<std::vector<double>>> ac(h.layers.size());
  std::vector<std::vector<std::vector<int64_t>>> iac(h.layers.size());

  if (lossless) {
    ival[0].assign(h.layers[0].size(), std::vector<int64_t>(C));
    for (size_t i = 0; i < h.layers[0].size(); i++)
      for (size_t c = 0; c < C; c++)
        ival[0][i][c] = channels[c][i];
  } else {
    val[0].assign(h.layers[0].size(), std::vector<double>(C));
    for (size_t i = 0; i < h.layers[0].size(); i++)
      for (size_t c = 0; c < C; c++)
        val[0][i][c] = double(channels[c][i]);
  }

  for (size_t t = 1; t <= T; t++) {
    const auto& layer = h.layers[t];
    if (lossless) {
      ival[t].assign(layer.size(), std::vector<int64_t>(C));
      iac[t].assign(layer.size(), std::vector<int64_t>(C));
    } else {
      val[t].assign(layer.size(), std::vector<double>(C));
      ac[t].assign(layer.size(), std::vector<double>(C));
    }
    for (size_t j = 0; j < layer.size(); j++) {
      const HierNode& n = layer[j];
      for (size_t c = 0; c < C; c++) {
        if (lossless) {
          if (!n.isPair())
            ival[t][j][c] = ival[t - 1][n.child0][c];
          else
            liftForward(ival[t - 1][n.child0][c], ival[t - 1][n.child1][c],
                        ival[t][j][c], iac[t][j][c]);
        } else {
          if (!n.isPair())
            val[t][j][c] = val[t - 1][n.child0][c];
          else
            pairTransform(val[t - 1][n.child0][c], val[t - 1][n.child1][c],
                          h.layers[t - 1][n.child0].weight,
                          h.layers[t - 1][n.child1].weight, val[t][j][c],
                          ac[t][j][c]);
        }
      }
    }
  }

  // Top-down pass mirroring the decoder: reconstruct as we code so the
  // prediction points see decoder-identical values.
  std::vector<std::vector<std::vector<double>>> recon(h.layers.size());
  for (size_t t = 0; t <= T; t++)
    recon[t].assign(h.layers[t].size(), std::vector<double>(C));

  for (size_t c = 0; c < C; c++) {
    ChannelCtx cc = channelCtx(c);
    if (lossless) {
      encodeSigned(ce, ival[T][0][c], cc.dcMag, cc.dcSign);
      recon[T][0][c] = double(ival[T][0][c]);
    } else {
      int64_t q = quantize(val[T][0][c], qp);
      encodeSigned(ce, q, cc.dcMag, cc.dcSign);
      recon[T][0][c] = dequantize(q, qp);
    }
  }

  for (size_t t = T; t >= 1; t--) {
    const auto& layer = h.layers[t];
    for (size_t j = 0; j < layer.size(); j++) {
      const HierNode& n = layer[j];
      for (size_t c = 0; c < C; c++) {
        if (!n.isPair()) {
          recon[t - 1][n.child0][c] = recon[t][j][c];
          continue;
        }
        ChannelCtx cc = channelCtx(c);
        if (lossless) {
          encodeSigned(ce, iac[t][j][c], cc.acMag, cc.acSign);
          int64_t a, b;
          liftInverse(int64_t(recon[t][j][c]), iac[t][j][c], a, b);
          recon[t - 1][n.child0][c] = double(a);
          recon[t - 1][n.child1][c] = double(b);
        } else {
          int64_t q = quantize(ac[t][j][c], qp);
          encodeSigned(ce, q, cc.acMag, cc.acSign);
          double a, b;
          pairInverse(recon[t][j][c], dequantize(q, qp),
                      h.layers[t - 1][n.child0].weight,
                      h.layers[t - 1][n.child1].weight, a, b);
          recon[t - 1][n.child0][c] = a;
          recon[t - 1][n.child1][c] = b;
        }
      }
    }

    // prediction points of the layer below, in layer order
    const auto& below = h.layers[t - 1];
    std::vector<size_t> processed;
    processed.reserve(below.size());
    for (size_t i = 0; i < below.size(); i++) {
      if (below[i].role == HierRole::Prediction) {
        auto pred = predictValue(below, processed, i, C,
                                 [&](size_t nd, size_t c) { return recon[t - 1][nd][c]; });
        for (size_t c = 0; c < C; c++) {
          ChannelCtx cc = channelCtx(c);
          int64_t predInt = roundHalfAway(pred[c]);
          if (lossless) {
            int64_t r = ival[t - 1][i][c] - predInt;
            encodeSigned(ce, r, cc.resMag, cc.resSign);
            recon[t - 1][i][c] = double(predInt + r);
          } else {
            double r = val[t - 1][i][c] - double(predInt);
            int64_t q = quantize(r, qp);
            encodeSigned(ce, q, cc.resMag, cc.resSign);
            recon[t - 1][i][c] = double(predInt) + dequantize(q, qp);
          }
        }
      }
      processed.push_back(i);
    }
  }
}

std::vector<std::vector<int32_t>> decodeTransformAttributes(
  const AttributeHierarchy& h, size_t channelCount, int qp, ContextDecoder& cd) {
  const size_t C = channelCount;
  const size_t T = h.layers.size() - 1;
  const bool lossless = qp == 0;

  std::vector<std::vector<std::vector<double>>> recon(h.layers.size());
  for (size_t t = 0; t <= T; t++)
    recon[t].assign(h.layers[t].size(), std::vector<double>(C));

  for (size_t c = 0; c < C; c++) {
    ChannelCtx cc = channelCtx(c);
    recon[T][0][c] = lossless ? double(decodeSigned(cd, cc.dcMag, cc.dcSign))
                              : dequantize(decodeSigned(cd, cc.dcMag, cc.dcSign), qp);
  }

  for (size_t t = T; t >= 1; t--) {
    const auto& layer = h.layers[t];
    for (size_t j = 0; j < layer.size(); j++) {
      const HierNode& n = layer[j];
      for (size_t c = 0; c < C; c++) {
        if (!n.isPair()) {
          recon[t - 1][n.child0][c] = recon[t][j][c];
          continue;
        }
        ChannelCtx cc = channelCtx(c);
        if (lossless) {
          int64_t high = decodeSigned(cd, cc.acMag, cc.acSign);
          int64_t a, b;
          liftInverse(int64_t(recon[t][j][c]), high, a, b);
          recon[t - 1][n.child0][c] = double(a);
          recon[t - 1][n.child1][c] = double(b);
        } else {
          int64_t q = decodeSigned(cd, cc.acMag, cc.acSign);
          double a, b;
          pairInverse(recon[t][j][c], dequantize(q, qp),
                      h.layers[t - 1][n.child0].weight,
                      h.layers[t - 1][n.child1].weight, a, b);
          recon[t - 1][n.child0][c] = a;
          recon[t - 1][n.child1][c] = b;
        }
      }
    }

    const auto& below = h.layers[t - 1];
    std::vector<size_t> processed;
    processed.reserve(below.size());
    for (size_t i = 0; i < below.size(); i++) {
      if (below[i].role == HierRole::Prediction) {
        auto pred = predictValue(below, processed, i, C,
                                 [&](size_t nd, size_t c) { return recon[t - 1][nd][c]; });
        for (size_t c = 0; c < C; c++) {
          ChannelCtx cc = channelCtx(c);
          int64_t predInt = roundHalfAway(pred[c]);
          if (lossless) {
            recon[t - 1][i][c] = double(predInt + decodeSigned(cd, cc.resMag, cc.resSign));
          } else {
            int64_t q = decodeSigned(cd, cc.resMag, cc.resSign);
            recon[t - 1][i][c] = double(predInt) + dequantize(q, qp);
          }
        }
      }
      processed.push_back(i);
    }
  }

  std::vector<std::vector<int32_t>> out(C,
                                        std::vector<int32_t>(h.layers[0].size()));
  for (size_t i = 0; i < h.layers[0].size(); i++)
    for (size_t c = 0; c < C; c++)
      out[c][i] = int32_t(roundHalfAway(recon[0][i][c]));
  return out;
}

}  // namespace apcc
