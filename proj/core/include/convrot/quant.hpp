#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "convrot/matrix.hpp"

namespace convrot {

enum class Granularity { per_row };

// Symmetric uniform quantizer configuration. Codes lie in [-qmax, qmax]
// with qmax = 2^(bits-1) - 1; -2^(bits-1) is representable but never emitted.
struct QuantSpec {
  int bits = 4;  // 4 or 8
  Granularity granularity = Granularity::per_row;

  int qmax() const { return (1 << (bits - 1)) - 1; }
};

// Integer codes with one strictly positive scale per row.
// In memory codes are one int8 per element; 4-bit codes are nibble-packed
// only in the serialized form (see pack_int4 / tensorio).
struct QuantizedTensor {
  size_t rows = 0;
  size_t cols = 0;
  int bits = 4;
  MatrixI8 codes;
  std::vector<double> scales;

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

// scale[i] = max_j |x[i,j]| / qmax; all-zero rows get scale 1.
// Throws InvalidValueError on non-finite input.
std::vector<double> compute_scales(const MatrixD& x, const QuantSpec& spec);

// codes[i,j] = clamp(round_half_even(x[i,j] / scale[i]), -qmax, qmax).
// Throws InvalidValueError when a scale is not strictly positive.
QuantizedTensor quantize(const MatrixD& x, const std::vector<double>& scales,
                         const QuantSpec& spec);

// out[i,j] = codes[i,j] * scale[i].
MatrixD dequantize(const QuantizedTensor& q);

// Two's-complement nibbles: element 2t in the low nibble of byte t,
// element 2t+1 in the high nibble; odd counts pad with a zero nibble.
// Codes must lie in [-8, 7].
std::vector<uint8_t> pack_int4(std::span<const int8_t> codes);
std::vector<int8_t> unpack_int4(std::span<const uint8_t> bytes, size_t count);

}  // namespace convrot
