#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convrot/matrix.hpp"
#include "convrot/pipeline.hpp"

namespace convrot {

// Outlier amplitude before/after rotation plus quantization error metrics
// for one layer run. reduction_pct is signed: negative means suppression.
struct ErrorReport {
  double outlier_before = 0.0;
  double outlier_after = 0.0;
  double reduction_pct = 0.0;
  double max_abs_error = 0.0;
  double mse = 0.0;
  double sqnr_db = 0.0;  // +infinity when the error power is zero
};

// Max |x[i,j]| over all entries. Throws InvalidValueError on an empty matrix.
double outlier_amplitude(const MatrixD& x);

enum class OutlierMode { rowwise, colwise, gaussian };

const char* to_string(OutlierMode mode);
OutlierMode outlier_mode_from_string(const std::string& name);

// Standard-normal base drawn row-major from `seed`; rowwise/colwise modes
// then scale ceil(fraction * M) rows (resp. ceil(fraction * K) columns),
// chosen by a partial Fisher-Yates shuffle continuing the same stream, by
// `magnitude`. Deterministic in all parameters.
MatrixD synth_outliers(size_t rows, size_t cols, OutlierMode mode,
                       double magnitude, double fraction, uint64_t seed);

struct SweepConfig {
  std::vector<RotationKind> kinds;
  std::vector<int> group_sizes;
  bool include_global = false;
  uint64_t seed = 0;
};

struct SweepRow {
  RotationKind kind = RotationKind::none;
  int group_size = 0;  // the group size actually applied (K for global rows)
  double outlier_after = 0.0;
  double reduction_pct = 0.0;
  std::string error;  // non-empty when this combination was rejected
};

struct SweepResult {
  double original_amplitude = 0.0;
  std::vector<SweepRow> rows;  // fixed config order
};

// One row per (kind, group size) in config order, then global rows when
// requested. Order errors are recorded per row, not thrown.
SweepResult rotation_sweep(const MatrixD& x, const SweepConfig& cfg);

// Header `kind,group_size,outlier_after,reduction_pct`, then an `original`
// row, then every successful sweep row. Rejected rows are omitted.
std::string sweep_to_csv(const SweepResult& result);

// Fills max_abs_error, mse and sqnr_db; the outlier fields are the
// caller's to set. sqnr_db = 10*log10(sum y_ref^2 / sum (y_ref-y_quant)^2).
ErrorReport layer_error_report(const MatrixD& y_ref, const MatrixD& y_quant);

// 100 * (after / before - 1) when before > 0, else 0.
double reduction_pct(double before, double after);

}  // namespace convrot
