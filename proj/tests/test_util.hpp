#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "convrot/matrix.hpp"
#include "convrot/rng.hpp"

namespace convrot::testutil {

inline MatrixD gaussian_matrix(size_t rows, size_t cols, uint64_t seed) {
  Rng rng(seed);
  MatrixD m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  }
  return m;
}

inline MatrixD integer_matrix(size_t rows, size_t cols, uint64_t seed,
                              int max_abs = 100) {
  Rng rng(seed);
  MatrixD m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      m(i, j) = static_cast<double>(
          static_cast<int64_t>(rng.next_below(2 * max_abs + 1)) - max_abs);
    }
  }
  return m;
}

// Plain triple-loop X * W^T, kept independent of the library path it checks.
inline MatrixD matmul_nt(const MatrixD& x, const MatrixD& w) {
  MatrixD out(x.rows(), w.rows());
  for (size_t m = 0; m < x.rows(); ++m) {
    for (size_t n = 0; n < w.rows(); ++n) {
      double acc = 0.0;
      for (size_t k = 0; k < x.cols(); ++k) acc += x(m, k) * w(n, k);
      out(m, n) = acc;
    }
  }
  return out;
}

inline double frobenius(const MatrixD& m) {
  double total = 0.0;
  for (double v : m.values()) total += v * v;
  return std::sqrt(total);
}

inline double rel_frobenius_error(const MatrixD& got, const MatrixD& want) {
  double err = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    double d = got.data()[i] - want.data()[i];
    err += d * d;
  }
  double ref = frobenius(want);
  return ref == 0.0 ? std::sqrt(err) : std::sqrt(err) / ref;
}

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    path_ = base / (tag + "-" + std::to_string(rd()) + "-" +
                    std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace convrot::testutil
