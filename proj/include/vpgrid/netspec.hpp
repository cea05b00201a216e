// Desk-checkable network-shape arithmetic: per-layer receptive fields and
// the total stride of a conv/pool stack.
#pragma once

#include <optional>
#include <vector>

#include "vpgrid/core.hpp"

namespace vpg {

struct PoolSpec {
  int size = 1;
  int stride = 1;
};

struct LayerSpec {
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  std::optional<PoolSpec> pool;

  void validate() const {
    if (kernel < 1 || stride < 1 || pad < 0)
      throw ValidationError("layer spec out of range");
    if (pool && (pool->size < 1 || pool->stride < 1))
      throw ValidationError("pool spec out of range");
  }
};

// Receptive field after the conv of each layer (the pool of a layer widens
// subsequent layers): rf += (k-1)*jump, jump *= stride.
inline std::vector<int> receptive_fields(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw ValidationError("empty layer list");
  std::vector<int> out;
  out.reserve(layers.size());
  int rf = 1, jump = 1;
  for (const auto& layer : layers) {
    layer.validate();
    rf += (layer.kernel - 1) * jump;
    jump *= layer.stride;
    out.push_back(rf);
    if (layer.pool) {
      rf += (layer.pool->size - 1) * jump;
      jump *= layer.pool->stride;
    }
  }
  return out;
}

// Product of all conv and pool strides.
inline int output_stride(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw ValidationError("empty layer list");
  int stride = 1;
  for (const auto& layer : layers) {
    layer.validate();
    stride *= layer.stride;
    if (layer.pool) stride *= layer.pool->stride;
  }
  return stride;
}

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  std::vector<int> declared_receptive_fields;  // published row, may be empty
  std::optional<int> declared_output_factor;   // input/output scale
};

struct NetspecReport {
  std::vector<int> computed_receptive_fields;
  int computed_output_stride = 1;
  bool receptive_fields_match = true;
  bool output_stride_matches = true;
};

// Computes the shape arithmetic and flags any disagreement with declared
// values; the caller decides whether a mismatch is fatal (--strict).
inline NetspecReport verify_network(const NetworkSpec& spec) {
  NetspecReport report;
  report.computed_receptive_fields = receptive_fields(spec.layers);
  report.computed_output_stride = output_stride(spec.layers);
  if (!spec.declared_receptive_fields.empty())
    report.receptive_fields_match =
        spec.declared_receptive_fields == report.computed_receptive_fields;
  if (spec.declared_output_factor)
    report.output_stride_matches =
        *spec.declared_output_factor == report.computed_output_stride;
  return report;
}

}  // namespace vpg
