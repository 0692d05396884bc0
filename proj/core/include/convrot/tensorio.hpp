#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convrot/matrix.hpp"

namespace convrot {

// File layout, all little-endian:
//   magic   4 bytes  "CRT1"
//   dtype   1 byte   (values below)
//   ndim    1 byte   (must be >= 1)
//   dims    ndim x u64
//   payload row-major; packed_i4 rows are padded to a whole byte with the
//           pad nibble zero
enum class DType : uint8_t { f32 = 0, f64 = 1, i8 = 2, packed_i4 = 3 };

struct Tensor {
  DType dtype = DType::f32;
  std::vector<uint64_t> dims;
  std::vector<uint8_t> payload;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Payload size implied by dtype and dims (includes packed_i4 row padding).
uint64_t payload_bytes(DType dtype, const std::vector<uint64_t>& dims);

void write_tensor(const std::string& path, const Tensor& t);

// Throws FormatError (with byte offset) on bad magic, unknown dtype,
// ndim = 0, or truncated/oversized payload.
Tensor read_tensor(const std::string& path);

// Converters between the on-disk tensor and in-memory types. f32
// conversions narrow doubles to float.
Tensor tensor_from_f32(const MatrixD& m);
Tensor tensor_from_f64(const MatrixD& m);
Tensor tensor_from_i8(const MatrixI8& m);
Tensor tensor_from_packed_i4(const MatrixI8& codes);
Tensor tensor_from_f32_vector(const std::vector<double>& v);
Tensor tensor_from_f64_vector(const std::vector<double>& v);

MatrixD matrix_from_tensor(const Tensor& t);    // f32 or f64, 2-D
MatrixI8 codes_from_tensor(const Tensor& t);    // i8 or packed_i4, 2-D
std::vector<double> vector_from_tensor(const Tensor& t);  // f32 or f64, 1-D

}  // namespace convrot
