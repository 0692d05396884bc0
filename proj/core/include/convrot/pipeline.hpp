#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convrot/matrix.hpp"
#include "convrot/quant.hpp"

namespace convrot {

enum class RotationKind { none, sylvester, regular, random_orthogonal };

const char* to_string(RotationKind kind);
// Accepts canonical names plus the aliases "standard" (sylvester) and
// "random" (random_orthogonal). Throws InvalidValueError otherwise.
RotationKind rotation_kind_from_string(const std::string& name);

// Group size 0 is the `global` sentinel (one block spanning all K columns).
inline constexpr int kGlobalGroup = 0;

struct RotationSpec {
  RotationKind kind = RotationKind::none;
  int group_size = kGlobalGroup;
  uint64_t seed = 0;           // random_orthogonal only
  bool identity_tail = false;  // opt-in: leave a final partial block unrotated

  friend bool operator==(const RotationSpec&, const RotationSpec&) = default;
};

// Multiply-add counter for the complexity probe.
struct RotationStats {
  uint64_t multiply_adds = 0;
};

// The normalized rotation matrix a spec applies to each block of width
// `group`: sign matrix / sqrt(group) for Hadamard kinds, the seeded
// orthogonal matrix for the random baseline. Cached per (kind, group, seed);
// the reference stays valid for the process lifetime.
const MatrixD& rotation_matrix(const RotationSpec& spec, int group);

// Partitions x into column blocks of the resolved group size and
// right-multiplies each block by the same normalized rotation.
// kind = none returns x unchanged.
MatrixD group_rotate(const MatrixD& x, const RotationSpec& spec,
                     RotationStats* stats = nullptr);

// Identical block rotation applied along K; with the same spec on both
// operands, sum_i rot(X_i) * rot(W_i)^T = X * W^T exactly.
MatrixD rotate_weights(const MatrixD& w, const RotationSpec& spec,
                       RotationStats* stats = nullptr);

// Offline-rotated, offline-quantized weights plus full-precision bias.
struct PreparedLayer {
  size_t out_features = 0;
  size_t in_features = 0;
  RotationSpec rotation;
  QuantSpec weight_quant;
  QuantizedTensor prepared_weights;  // per-output-channel scales
  std::optional<std::vector<double>> bias;
  std::string name;

  friend bool operator==(const PreparedLayer&, const PreparedLayer&) = default;
};

PreparedLayer prepare_layer(const MatrixD& w,
                            std::optional<std::vector<double>> bias,
                            const RotationSpec& rotation, const QuantSpec& wq,
                            std::string name);

struct LayerOutput {
  MatrixD values;
  bool accumulators_checked = false;
};

// out[m,n] = sum_k a[m,k] * b[n,k] in int32, ascending k. Throws
// CapacityError before computing when qmax_a * qmax_b * K could exceed
// the accumulator range.
MatrixI32 int_gemm(const MatrixI8& a_codes, const MatrixI8& b_codes,
                   int bits_a, int bits_b);

// Online half of the quantized layer: rotate activations, quantize
// per-token, integer GEMM against the prepared weights, dequantize by the
// outer product of scales, add bias.
LayerOutput forward(const MatrixD& x, const PreparedLayer& layer,
                    const QuantSpec& aq);

// Double-precision X*W^T (+ bias), ascending-k accumulation. Ground truth
// for error reports.
LayerOutput reference_forward(const MatrixD& x, const MatrixD& w,
                              const std::optional<std::vector<double>>& bias);

// Directory layout: weights.crt (packed int4 / int8 codes),
// weights.scales.crt (f32), optional bias.crt (f64), manifest.json.
void save_prepared_layer(const std::string& dir, const PreparedLayer& layer);
PreparedLayer load_prepared_layer(const std::string& dir);

}  // namespace convrot
