#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convrot/matrix.hpp"

namespace convrot {

// Largest matrix order any construction here will produce.
inline constexpr int kMaxHadamardOrder = 4096;

enum class HadamardKind { sylvester, regular, custom };

const char* to_string(HadamardKind kind);

// Order-n sign matrix with H*H^T = n*I in exact integer arithmetic.
// Entries are +1/-1, unnormalized.
struct HadamardMatrix {
  int order = 0;
  HadamardKind kind = HadamardKind::custom;
  MatrixI32 entries;
};

// Seeded orthogonal matrix (Q^T Q = I to ~1e-14), used as the
// rotation baseline against the sign constructions.
struct OrthogonalMatrix {
  int order = 0;
  MatrixD entries;
  uint64_t seed = 0;
};

// Column sums, their max absolute value, and the sum of their squares.
struct DiscrepancySummary {
  std::vector<int64_t> column_sums;
  int64_t discrepancy = 0;
  int64_t sum_of_squares = 0;
};

// Doubling recursion [[H,H],[H,-H]] from [1]. n must be a power of two,
// 1 <= n <= 4096. First row and column are all +1.
HadamardMatrix sylvester(int n);

// Kronecker powers of the order-4 seed whose every row and column sums
// to +2. n must be a power of four, 4 <= n <= 4096. All row and column
// sums equal +sqrt(n).
HadamardMatrix regular(int n);

// Entry[(i*nb+p, j*nb+q)] = a[i,j] * b[p,q]. Kind is preserved when both
// factors share it, custom otherwise.
HadamardMatrix kronecker(const HadamardMatrix& a, const HadamardMatrix& b);

// Wraps caller-provided sign entries after checking H*H^T = n*I.
HadamardMatrix custom(MatrixI32 entries);

DiscrepancySummary discrepancy_summary(const HadamardMatrix& h);

// In-place unnormalized transform: x <- x * sylvester(n). Exact for
// integer-valued inputs. Length must be a power of two.
void fwht(std::span<double> x);
std::vector<double> fwht(std::vector<double> x);

// Deterministic for fixed (n, seed): gaussian fill, then column-by-column
// orthogonalization with positive diagonal pivots.
OrthogonalMatrix random_orthogonal(int n, uint64_t seed);

// '+'/'-' grid, one row per line, trailing newline.
std::string to_sign_text(const HadamardMatrix& h);

}  // namespace convrot
