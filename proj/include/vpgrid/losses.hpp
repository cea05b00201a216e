// Multi-task loss arithmetic: weighted sum of the four task losses and the
// reciprocal weight-balancing procedure, plus the grid L1 and cross-entropy
// primitives as pure numeric operations.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "vpgrid/core.hpp"

namespace vpg {

struct TaskLosses {
  double l_reg = 0;  // grid regression L1
  double l_om = 0;   // object-mask cross entropy
  double l_ml = 0;   // multi-label cross entropy
  double l_vp = 0;   // VPP cross entropy

  std::array<double, 4> values() const { return {l_reg, l_om, l_ml, l_vp}; }

  void validate() const {
    for (double v : values())
      if (!std::isfinite(v) || v < 0)
        throw ValidationError("task losses must be finite and non-negative");
  }
};

struct TaskWeights {
  double w1 = 1, w2 = 1, w3 = 1, w4 = 1;

  std::array<double, 4> values() const { return {w1, w2, w3, w4}; }

  void validate() const {
    for (double v : values())
      if (!std::isfinite(v) || v <= 0)
        throw ValidationError("task weights must be finite and positive");
  }
};

inline double combined_loss(const TaskLosses& l, const TaskWeights& w) {
  l.validate();
  w.validate();
  return w.w1 * l.l_reg + w.w2 * l.l_om + w.w3 * l.l_ml + w.w4 * l.l_vp;
}

// w_i = 1 / L_i, making every weighted term equal 1 at the initial point.
inline TaskWeights balance_weights(const TaskLosses& initial) {
  initial.validate();
  for (double v : initial.values())
    if (v == 0) throw ValidationError("cannot balance a zero loss");
  return {1.0 / initial.l_reg, 1.0 / initial.l_om, 1.0 / initial.l_ml,
          1.0 / initial.l_vp};
}

// Rebalances when max/min of the weighted losses exceeds ratio_limit;
// otherwise returns the weights unchanged.
inline TaskWeights rebalance_if_skewed(const TaskLosses& weighted,
                                       const TaskWeights& w,
                                       double ratio_limit) {
  weighted.validate();
  w.validate();
  if (!(ratio_limit > 1)) throw ValidationError("ratio_limit must exceed 1");
  const auto vals = weighted.values();
  const double hi = *std::max_element(vals.begin(), vals.end());
  const double lo = *std::min_element(vals.begin(), vals.end());
  if (lo == 0) throw ValidationError("cannot rebalance a zero weighted loss");
  if (hi / lo <= ratio_limit) return w;
  const auto wv = w.values();
  TaskWeights out;
  double* ow[4] = {&out.w1, &out.w2, &out.w3, &out.w4};
  for (int i = 0; i < 4; ++i) *ow[i] = wv[i] / vals[i];
  return out;
}

// Per-cell 2-D offset map (pixels) produced by the grid regression branch.
struct GridRegressionMap {
  int height = 0;
  int width = 0;
  std::vector<double> dx;
  std::vector<double> dy;

  GridRegressionMap() = default;
  GridRegressionMap(int h, int w)
      : height(h), width(w),
        dx(static_cast<std::size_t>(h) * w, 0.0),
        dy(static_cast<std::size_t>(h) * w, 0.0) {}

  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

// Mean absolute offset error over masked cells (and the 2 coordinates);
// empty mask yields 0.
inline double l1_grid_loss(const GridRegressionMap& pred,
                           const GridRegressionMap& gt,
                           const std::set<Cell>& mask) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw ValidationError("regression map shapes differ");
  if (mask.empty()) return 0.0;
  double sum = 0;
  for (const Cell& c : mask) {
    const auto i = pred.index(c.y, c.x);
    sum += std::abs(pred.dx[i] - gt.dx[i]) + std::abs(pred.dy[i] - gt.dy[i]);
  }
  return sum / (2.0 * mask.size());
}

inline constexpr double kProbClamp = 1e-7;

namespace detail {
inline double clamped(const ConfidenceMap& m, int c, int y, int x) {
  return std::max(static_cast<double>(m.at(c, y, x)), kProbClamp);
}
}  // namespace detail

// Mean over masked cells of -log of the (clamp+renormalized) predicted
// probability at the ground-truth channel. gt_channel holds one channel
// index per cell, row-major.
inline double cross_entropy(const ConfidenceMap& pred,
                            const std::vector<int>& gt_channel,
                            const std::set<Cell>& mask) {
  if (static_cast<std::size_t>(pred.height) * pred.width != gt_channel.size())
    throw ValidationError("gt channel map size mismatch");
  if (mask.empty()) return 0.0;
  double total = 0;
  for (const Cell& cell : mask) {
    const int g = gt_channel[static_cast<std::size_t>(cell.y) * pred.width + cell.x];
    if (g < 0 || g >= pred.channels)
      throw ValidationError("gt channel index out of range");
    double norm = 0;
    for (int c = 0; c < pred.channels; ++c)
      norm += detail::clamped(pred, c, cell.y, cell.x);
    total += -std::log(detail::clamped(pred, g, cell.y, cell.x) / norm);
  }
  return total / mask.size();
}

// Analytic gradient of cross_entropy with respect to every pred value
// (zero where the clamp is active).
inline ConfidenceMap cross_entropy_grad(const ConfidenceMap& pred,
                                        const std::vector<int>& gt_channel,
                                        const std::set<Cell>& mask) {
  ConfidenceMap grad(pred.channels, pred.height, pred.width);
  if (mask.empty()) return grad;
  const double inv_n = 1.0 / mask.size();
  for (const Cell& cell : mask) {
    const int g = gt_channel[static_cast<std::size_t>(cell.y) * pred.width + cell.x];
    double norm = 0;
    for (int c = 0; c < pred.channels; ++c)
      norm += detail::clamped(pred, c, cell.y, cell.x);
    for (int c = 0; c < pred.channels; ++c) {
      if (pred.at(c, cell.y, cell.x) < kProbClamp) continue;
      double d = 1.0 / norm;
      if (c == g) d -= 1.0 / detail::clamped(pred, g, cell.y, cell.x);
      grad.at(c, cell.y, cell.x) = static_cast<float>(d * inv_n);
    }
  }
  return grad;
}

// Two-phase schedule: phase 1 trains the VPP task alone, phase 2 uses the
// reciprocal-balanced weights. Phase-1 weights use 0 for frozen tasks and
// are not valid TaskWeights for combined_loss.
struct WeightSchedule {
  std::array<double, 4> phase1;
  TaskWeights phase2;
  double ratio_limit = 10.0;
};

inline WeightSchedule make_schedule(const TaskLosses& initial,
                                    double ratio_limit = 10.0) {
  WeightSchedule s;
  s.phase2 = balance_weights(initial);
  s.phase1 = {0.0, 0.0, 0.0, s.phase2.w4};
  s.ratio_limit = ratio_limit;
  return s;
}

}  // namespace vpg
