#include "convrot/tensorio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "convrot/quant.hpp"

namespace convrot {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'T', '1'};

void append_u64_le(std::vector<uint8_t>& out, uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(v >> (8 * b)));
}

uint64_t load_u64_le(const uint8_t* p) {
  uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<uint64_t>(p[b]) << (8 * b);
  return v;
}

bool known_dtype(uint8_t d) { return d <= 3; }

uint64_t checked_product(const std::vector<uint64_t>& dims) {
  uint64_t total = 1;
  for (uint64_t d : dims) {
    if (d != 0 && total > std::numeric_limits<uint64_t>::max() / d) {
      throw FormatError("tensor dims overflow", 6);
    }
    total *= d;
  }
  return total;
}

}  // namespace

uint64_t payload_bytes(DType dtype, const std::vector<uint64_t>& dims) {
  uint64_t elems = checked_product(dims);
  switch (dtype) {
    case DType::f32:
      return elems * 4;
    case DType::f64:
      return elems * 8;
    case DType::i8:
      return elems;
    case DType::packed_i4: {
      uint64_t row_width = dims.back();
      uint64_t rows = row_width == 0 ? 0 : elems / row_width;
      return rows * ((row_width + 1) / 2);
    }
  }
  throw FormatError("unknown dtype", 4);
}

void write_tensor(const std::string& path, const Tensor& t) {
  if (t.dims.empty()) {
    throw FormatError("tensor must have at least one dimension", 5);
  }
  if (t.dims.size() > 255) {
    throw FormatError("tensor rank exceeds 255", 5);
  }
  uint64_t expected = payload_bytes(t.dtype, t.dims);
  if (t.payload.size() != expected) {
    throw FormatError("payload size does not match dims",
                      6 + 8 * t.dims.size());
  }
  std::vector<uint8_t> bytes;
  bytes.reserve(6 + 8 * t.dims.size() + t.payload.size());
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  bytes.push_back(static_cast<uint8_t>(t.dtype));
  bytes.push_back(static_cast<uint8_t>(t.dims.size()));
  for (uint64_t d : t.dims) append_u64_le(bytes, d);
  bytes.insert(bytes.end(), t.payload.begin(), t.payload.end());
  if (t.dtype == DType::packed_i4 && t.dims.back() % 2 == 1) {
    // force pad nibbles to zero in the emitted file
    size_t header = 6 + 8 * t.dims.size();
    uint64_t row_bytes = (t.dims.back() + 1) / 2;
    for (size_t off = header + row_bytes - 1; off < bytes.size();
         off += row_bytes) {
      bytes[off] &= 0x0F;
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FormatError("cannot open file for writing: " + path, 0);
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) throw FormatError("write failed: " + path, 0);
}

Tensor read_tensor(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot open file: " + path, 0);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 6) throw FormatError("truncated header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic", 0);
  }
  if (!known_dtype(bytes[4])) {
    throw FormatError("unknown dtype " + std::to_string(bytes[4]), 4);
  }
  Tensor t;
  t.dtype = static_cast<DType>(bytes[4]);
  uint8_t ndim = bytes[5];
  if (ndim == 0) throw FormatError("ndim must be >= 1", 5);
  size_t offset = 6;
  if (bytes.size() < offset + 8ull * ndim) {
    throw FormatError("truncated dims", bytes.size());
  }
  t.dims.resize(ndim);
  for (uint8_t i = 0; i < ndim; ++i) {
    t.dims[i] = load_u64_le(bytes.data() + offset);
    offset += 8;
  }
  uint64_t expected = payload_bytes(t.dtype, t.dims);
  if (bytes.size() - offset < expected) {
    throw FormatError("truncated payload", bytes.size());
  }
  if (bytes.size() - offset > expected) {
    throw FormatError("trailing bytes after payload", offset + expected);
  }
  t.payload.assign(bytes.begin() + static_cast<ptrdiff_t>(offset), bytes.end());
  return t;
}

Tensor tensor_from_f32(const MatrixD& m) {
  Tensor t;
  t.dtype = DType::f32;
  t.dims = {m.rows(), m.cols()};
  t.payload.reserve(m.size() * 4);
  for (double v : m.values()) {
    uint32_t bits = std::bit_cast<uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) {
      t.payload.push_back(static_cast<uint8_t>(bits >> (8 * b)));
    }
  }
  return t;
}

Tensor tensor_from_f64(const MatrixD& m) {
  Tensor t;
  t.dtype = DType::f64;
  t.dims = {m.rows(), m.cols()};
  t.payload.reserve(m.size() * 8);
  for (double v : m.values()) append_u64_le(t.payload, std::bit_cast<uint64_t>(v));
  return t;
}

Tensor tensor_from_i8(const MatrixI8& m) {
  Tensor t;
  t.dtype = DType::i8;
  t.dims = {m.rows(), m.cols()};
  t.payload.assign(reinterpret_cast<const uint8_t*>(m.data()),
                   reinterpret_cast<const uint8_t*>(m.data()) + m.size());
  return t;
}

Tensor tensor_from_packed_i4(const MatrixI8& codes) {
  Tensor t;
  t.dtype = DType::packed_i4;
  t.dims = {codes.rows(), codes.cols()};
  for (size_t i = 0; i < codes.rows(); ++i) {
    auto packed = pack_int4(codes.row(i));
    t.payload.insert(t.payload.end(), packed.begin(), packed.end());
  }
  return t;
}

Tensor tensor_from_f32_vector(const std::vector<double>& v) {
  MatrixD m(1, v.size(), v);
  Tensor t = tensor_from_f32(m);
  t.dims = {v.size()};
  return t;
}

Tensor tensor_from_f64_vector(const std::vector<double>& v) {
  MatrixD m(1, v.size(), v);
  Tensor t = tensor_from_f64(m);
  t.dims = {v.size()};
  return t;
}

namespace {

std::vector<double> decode_reals(const Tensor& t) {
  uint64_t elems = 1;
  for (uint64_t d : t.dims) elems *= d;
  std::vector<double> out(elems);
  if (t.dtype == DType::f32) {
    for (uint64_t i = 0; i < elems; ++i) {
      uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<uint32_t>(t.payload[i * 4 + b]) << (8 * b);
      }
      out[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
  } else if (t.dtype == DType::f64) {
    for (uint64_t i = 0; i < elems; ++i) {
      out[i] = std::bit_cast<double>(load_u64_le(t.payload.data() + i * 8));
    }
  } else {
    throw FormatError("expected a real dtype", 4);
  }
  return out;
}

}  // namespace

MatrixD matrix_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw FormatError("expected a 2-D tensor", 5);
  return MatrixD(t.dims[0], t.dims[1], decode_reals(t));
}

MatrixI8 codes_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw FormatError("expected a 2-D tensor", 5);
  size_t rows = t.dims[0];
  size_t cols = t.dims[1];
  MatrixI8 m(rows, cols);
  if (t.dtype == DType::i8) {
    std::memcpy(m.data(), t.payload.data(), t.payload.size());
  } else if (t.dtype == DType::packed_i4) {
    size_t row_bytes = (cols + 1) / 2;
    for (size_t i = 0; i < rows; ++i) {
      auto codes = unpack_int4(
          std::span<const uint8_t>(t.payload.data() + i * row_bytes, row_bytes),
          cols);
      std::memcpy(m.data() + i * cols, codes.data(), cols);
    }
  } else {
    throw FormatError("expected an integer dtype", 4);
  }
  return m;
}

std::vector<double> vector_from_tensor(const Tensor& t) {
  if (t.dims.size() != 1) throw FormatError("expected a 1-D tensor", 5);
  return decode_reals(t);
}

}  // namespace convrot
