#include "convrot/hadamard.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>

#include "convrot/parallel.hpp"
#include "convrot/rng.hpp"

namespace convrot {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

bool is_power_of_four(int n) {
  return is_power_of_two(n) && (n & 0x55555555) != 0;
}

void check_order_cap(long long order, const char* what) {
  if (order > kMaxHadamardOrder) {
    throw InvalidOrderError(std::string(what) + ": order " +
                            std::to_string(order) + " exceeds maximum " +
                            std::to_string(kMaxHadamardOrder));
  }
}

// H*H^T = n*I, checked in exact integer arithmetic.
bool is_hadamard(const MatrixI32& m) {
  size_t n = m.rows();
  if (n == 0 || m.cols() != n) return false;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      int32_t v = m(i, j);
      if (v != 1 && v != -1) return false;
    }
  }
  std::atomic<bool> ok{true};
  parallel_for(n, [&](size_t i) {
    if (!ok.load(std::memory_order_relaxed)) return;
    for (size_t j = i; j < n; ++j) {
      int64_t dot = 0;
      for (size_t k = 0; k < n; ++k) {
        dot += static_cast<int64_t>(m(i, k)) * m(j, k);
      }
      int64_t expected = i == j ? static_cast<int64_t>(n) : 0;
      if (dot != expected) {
        ok.store(false, std::memory_order_relaxed);
        return;
      }
    }
  });
  return ok.load();
}

}  // namespace

const char* to_string(HadamardKind kind) {
  switch (kind) {
    case HadamardKind::sylvester:
      return "sylvester";
    case HadamardKind::regular:
      return "regular";
    case HadamardKind::custom:
      return "custom";
  }
  return "?";
}

HadamardMatrix sylvester(int n) {
  if (!is_power_of_two(n)) {
    throw InvalidOrderError("sylvester: order must be a power of two, got " +
                            std::to_string(n));
  }
  check_order_cap(n, "sylvester");
  MatrixI32 h(static_cast<size_t>(n), static_cast<size_t>(n));
  h(0, 0) = 1;
  for (int m = 1; m < n; m *= 2) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        int32_t v = h(i, j);
        h(i, j + m) = v;
        h(i + m, j) = v;
        h(i + m, j + m) = -v;
      }
    }
  }
  return {n, HadamardKind::sylvester, std::move(h)};
}

HadamardMatrix regular(int n) {
  if (!is_power_of_four(n) || n < 4) {
    throw InvalidOrderError("regular: order must be a power of four >= 4, got " +
                            std::to_string(n));
  }
  check_order_cap(n, "regular");
  HadamardMatrix seed{4, HadamardKind::regular,
                      MatrixI32(4, 4,
                                {1, 1, 1, -1,    //
                                 1, 1, -1, 1,    //
                                 1, -1, 1, 1,    //
                                 -1, 1, 1, 1})};
  HadamardMatrix h = seed;
  while (h.order < n) h = kronecker(h, seed);
  return h;
}

HadamardMatrix kronecker(const HadamardMatrix& a, const HadamardMatrix& b) {
  long long order = static_cast<long long>(a.order) * b.order;
  check_order_cap(order, "kronecker");
  size_t na = static_cast<size_t>(a.order);
  size_t nb = static_cast<size_t>(b.order);
  MatrixI32 out(na * nb, na * nb);
  for (size_t i = 0; i < na; ++i) {
    for (size_t j = 0; j < na; ++j) {
      int32_t aij = a.entries(i, j);
      for (size_t p = 0; p < nb; ++p) {
        for (size_t q = 0; q < nb; ++q) {
          out(i * nb + p, j * nb + q) = aij * b.entries(p, q);
        }
      }
    }
  }
  HadamardKind kind = a.kind == b.kind ? a.kind : HadamardKind::custom;
  return {static_cast<int>(order), kind, std::move(out)};
}

HadamardMatrix custom(MatrixI32 entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw InvalidOrderError("custom: entries must be square and non-empty");
  }
  check_order_cap(static_cast<long long>(entries.rows()), "custom");
  if (!is_hadamard(entries)) {
    throw InvalidValueError("custom: entries do not satisfy H*H^T = n*I");
  }
  int n = static_cast<int>(entries.rows());
  return {n, HadamardKind::custom, std::move(entries)};
}

DiscrepancySummary discrepancy_summary(const HadamardMatrix& h) {
  size_t n = static_cast<size_t>(h.order);
  DiscrepancySummary summary;
  summary.column_sums.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      summary.column_sums[j] += h.entries(i, j);
    }
  }
  for (int64_t s : summary.column_sums) {
    summary.discrepancy = std::max(summary.discrepancy, std::abs(s));
    summary.sum_of_squares += s * s;
  }
  return summary;
}

void fwht(std::span<double> x) {
  size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw InvalidOrderError("fwht: length must be a power of two, got " +
                            std::to_string(n));
  }
  for (size_t h = 1; h < n; h *= 2) {
    for (size_t i = 0; i < n; i += 2 * h) {
      for (size_t j = i; j < i + h; ++j) {
        double a = x[j];
        double b = x[j + h];
        x[j] = a + b;
        x[j + h] = a - b;
      }
    }
  }
}

std::vector<double> fwht(std::vector<double> x) {
  fwht(std::span<double>(x));
  return x;
}

OrthogonalMatrix random_orthogonal(int n, uint64_t seed) {
  if (n < 1) {
    throw InvalidOrderError("random_orthogonal: order must be >= 1, got " +
                            std::to_string(n));
  }
  check_order_cap(n, "random_orthogonal");
  size_t un = static_cast<size_t>(n);
  Rng rng(seed);
  // Columns stored contiguously for the sweeps below.
  std::vector<std::vector<double>> cols(un, std::vector<double>(un));
  for (size_t i = 0; i < un; ++i) {
    for (size_t j = 0; j < un; ++j) {
      cols[j][i] = rng.next_gaussian();  // row-major draw order
    }
  }
  // Modified Gram-Schmidt with one re-orthogonalization pass. The pivot is
  // the column norm, so the triangular factor's diagonal is positive.
  for (size_t j = 0; j < un; ++j) {
    auto& v = cols[j];
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t k = 0; k < j; ++k) {
        const auto& q = cols[k];
        double proj = 0.0;
        for (size_t i = 0; i < un; ++i) proj += q[i] * v[i];
        for (size_t i = 0; i < un; ++i) v[i] -= proj * q[i];
      }
    }
    double norm = 0.0;
    for (size_t i = 0; i < un; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      throw InvalidValueError("random_orthogonal: degenerate column");
    }
    for (size_t i = 0; i < un; ++i) v[i] /= norm;
  }
  MatrixD q(un, un);
  for (size_t i = 0; i < un; ++i) {
    for (size_t j = 0; j < un; ++j) q(i, j) = cols[j][i];
  }
  return {n, std::move(q), seed};
}

std::string to_sign_text(const HadamardMatrix& h) {
  size_t n = static_cast<size_t>(h.order);
  std::string text;
  text.reserve(n * (n + 1));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      text += h.entries(i, j) > 0 ? '+' : '-';
    }
    text += '\n';
  }
  return text;
}

}  // namespace convrot
