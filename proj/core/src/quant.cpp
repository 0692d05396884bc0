#include "convrot/quant.hpp"

#include <algorithm>
#include <cmath>

#include "convrot/parallel.hpp"

namespace convrot {

std::vector<double> compute_scales(const MatrixD& x, const QuantSpec& spec) {
  std::vector<double> scales(x.rows());
  double qmax = static_cast<double>(spec.qmax());
  for (size_t i = 0; i < x.rows(); ++i) {
    double max_abs = 0.0;
    for (double v : x.row(i)) {
      if (!std::isfinite(v)) {
        throw InvalidValueError("compute_scales: non-finite input");
      }
      max_abs = std::max(max_abs, std::abs(v));
    }
    scales[i] = max_abs == 0.0 ? 1.0 : max_abs / qmax;
  }
  return scales;
}

QuantizedTensor quantize(const MatrixD& x, const std::vector<double>& scales,
                         const QuantSpec& spec) {
  if (scales.size() != x.rows()) {
    throw ShapeError("quantize: scales length must equal row count");
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidValueError("quantize: scales must be strictly positive");
    }
  }
  QuantizedTensor q;
  q.rows = x.rows();
  q.cols = x.cols();
  q.bits = spec.bits;
  q.codes = MatrixI8(x.rows(), x.cols());
  q.scales = scales;
  double qmax = static_cast<double>(spec.qmax());
  parallel_for(x.rows(), [&](size_t i) {
    double inv = scales[i];
    for (size_t j = 0; j < x.cols(); ++j) {
      double rounded = std::nearbyint(x(i, j) / inv);  // half-to-even
      rounded = std::clamp(rounded, -qmax, qmax);
      q.codes(i, j) = static_cast<int8_t>(rounded);
    }
  });
  return q;
}

MatrixD dequantize(const QuantizedTensor& q) {
  MatrixD out(q.rows, q.cols);
  for (size_t i = 0; i < q.rows; ++i) {
    for (size_t j = 0; j < q.cols; ++j) {
      out(i, j) = static_cast<double>(q.codes(i, j)) * q.scales[i];
    }
  }
  return out;
}

std::vector<uint8_t> pack_int4(std::span<const int8_t> codes) {
  for (int8_t c : codes) {
    if (c < -8 || c > 7) {
      throw InvalidValueError("pack_int4: code " + std::to_string(c) +
                              " outside [-8, 7]");
    }
  }
  std::vector<uint8_t> bytes((codes.size() + 1) / 2, 0);
  for (size_t t = 0; t < codes.size(); ++t) {
    uint8_t nibble = static_cast<uint8_t>(codes[t]) & 0x0F;
    if (t % 2 == 0) {
      bytes[t / 2] |= nibble;
    } else {
      bytes[t / 2] |= static_cast<uint8_t>(nibble << 4);
    }
  }
  return bytes;
}

std::vector<int8_t> unpack_int4(std::span<const uint8_t> bytes, size_t count) {
  if (bytes.size() < (count + 1) / 2) {
    throw InvalidValueError("unpack_int4: byte buffer too short for count");
  }
  std::vector<int8_t> codes(count);
  for (size_t t = 0; t < count; ++t) {
    uint8_t nibble = t % 2 == 0 ? bytes[t / 2] & 0x0F
                                : static_cast<uint8_t>(bytes[t / 2] >> 4);
    // sign-extend the 4-bit two's-complement value
    codes[t] = static_cast<int8_t>(nibble >= 8 ? static_cast<int>(nibble) - 16
                                               : static_cast<int>(nibble));
  }
  return codes;
}

}  // namespace convrot
