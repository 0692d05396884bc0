#include "convrot/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "convrot/rng.hpp"

namespace convrot {

double outlier_amplitude(const MatrixD& x) {
  if (x.empty()) throw InvalidValueError("outlier_amplitude: empty matrix");
  double max_abs = 0.0;
  for (double v : x.values()) max_abs = std::max(max_abs, std::abs(v));
  return max_abs;
}

const char* to_string(OutlierMode mode) {
  switch (mode) {
    case OutlierMode::rowwise:
      return "rowwise";
    case OutlierMode::colwise:
      return "colwise";
    case OutlierMode::gaussian:
      return "gaussian";
  }
  return "?";
}

OutlierMode outlier_mode_from_string(const std::string& name) {
  if (name == "rowwise") return OutlierMode::rowwise;
  if (name == "colwise") return OutlierMode::colwise;
  if (name == "gaussian") return OutlierMode::gaussian;
  throw InvalidValueError("unknown outlier mode: " + name);
}

namespace {

// First `count` entries of a seeded Fisher-Yates shuffle of [0, n).
std::vector<size_t> choose_indices(size_t n, size_t count, Rng& rng) {
  std::vector<size_t> indices(n);
  std::iota(indices.begin(), indices.end(), size_t{0});
  for (size_t i = 0; i < count; ++i) {
    size_t j = i + static_cast<size_t>(rng.next_below(n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(count);
  return indices;
}

}  // namespace

MatrixD synth_outliers(size_t rows, size_t cols, OutlierMode mode,
                       double magnitude, double fraction, uint64_t seed) {
  if (rows < 1 || cols < 1) {
    throw InvalidValueError("synth_outliers: rows and cols must be >= 1");
  }
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw InvalidValueError("synth_outliers: fraction must be in (0, 1]");
  }
  if (!(magnitude >= 1.0)) {
    throw InvalidValueError("synth_outliers: magnitude must be >= 1");
  }
  Rng rng(seed);
  MatrixD x(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) x(i, j) = rng.next_gaussian();
  }
  if (mode == OutlierMode::gaussian) return x;
  size_t axis = mode == OutlierMode::rowwise ? rows : cols;
  size_t count = static_cast<size_t>(std::ceil(fraction * static_cast<double>(axis)));
  auto chosen = choose_indices(axis, count, rng);
  for (size_t idx : chosen) {
    if (mode == OutlierMode::rowwise) {
      for (size_t j = 0; j < cols; ++j) x(idx, j) *= magnitude;
    } else {
      for (size_t i = 0; i < rows; ++i) x(i, idx) *= magnitude;
    }
  }
  return x;
}

double reduction_pct(double before, double after) {
  if (before <= 0.0) return 0.0;
  return 100.0 * (after / before - 1.0);
}

SweepResult rotation_sweep(const MatrixD& x, const SweepConfig& cfg) {
  if (cfg.kinds.empty() || cfg.group_sizes.empty()) {
    throw InvalidValueError("rotation_sweep: kinds and group_sizes must be "
                            "non-empty");
  }
  SweepResult result;
  result.original_amplitude = outlier_amplitude(x);
  auto run = [&](RotationKind kind, int group) {
    SweepRow row;
    row.kind = kind;
    row.group_size = group;
    try {
      RotationSpec spec{kind, group, cfg.seed};
      row.outlier_after = outlier_amplitude(group_rotate(x, spec));
      row.reduction_pct = reduction_pct(result.original_amplitude,
                                        row.outlier_after);
    } catch (const Error& e) {
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  };
  for (RotationKind kind : cfg.kinds) {
    for (int group : cfg.group_sizes) run(kind, group);
  }
  if (cfg.include_global) {
    for (RotationKind kind : cfg.kinds) run(kind, static_cast<int>(x.cols()));
  }
  return result;
}

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string sweep_to_csv(const SweepResult& result) {
  std::string csv = "kind,group_size,outlier_after,reduction_pct\n";
  csv += "original,0," + format_real(result.original_amplitude) + ",0\n";
  for (const auto& row : result.rows) {
    if (!row.error.empty()) continue;
    csv += std::string(to_string(row.kind)) + "," +
           std::to_string(row.group_size) + "," +
           format_real(row.outlier_after) + "," +
           format_real(row.reduction_pct) + "\n";
  }
  return csv;
}

ErrorReport layer_error_report(const MatrixD& y_ref, const MatrixD& y_quant) {
  if (y_ref.rows() != y_quant.rows() || y_ref.cols() != y_quant.cols()) {
    throw ShapeError("layer_error_report: shape mismatch");
  }
  ErrorReport report;
  double signal_power = 0.0;
  double error_power = 0.0;
  for (size_t i = 0; i < y_ref.size(); ++i) {
    double ref = y_ref.data()[i];
    double err = ref - y_quant.data()[i];
    signal_power += ref * ref;
    error_power += err * err;
    report.max_abs_error = std::max(report.max_abs_error, std::abs(err));
  }
  report.mse = y_ref.size() == 0 ? 0.0
                                 : error_power / static_cast<double>(y_ref.size());
  report.sqnr_db = error_power == 0.0
                       ? std::numeric_limits<double>::infinity()
                       : 10.0 * std::log10(signal_power / error_power);
  return report;
}

}  // namespace convrot
