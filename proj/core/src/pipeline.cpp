#include "convrot/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <nlohmann/json.hpp>

#include "convrot/hadamard.hpp"
#include "convrot/parallel.hpp"
#include "convrot/tensorio.hpp"

namespace convrot {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
bool is_power_of_four(int n) {
  return is_power_of_two(n) && (n & 0x55555555) != 0;
}

void check_group_order(RotationKind kind, int group) {
  switch (kind) {
    case RotationKind::none:
      return;
    case RotationKind::sylvester:
      if (!is_power_of_two(group)) {
        throw InvalidOrderError("sylvester rotation needs a power-of-two "
                                "group size, got " + std::to_string(group));
      }
      return;
    case RotationKind::regular:
      if (!is_power_of_four(group) || group < 4) {
        throw InvalidOrderError("regular rotation needs a power-of-four "
                                "group size, got " + std::to_string(group));
      }
      return;
    case RotationKind::random_orthogonal:
      if (group < 1) {
        throw InvalidOrderError("rotation group size must be >= 1, got " +
                                std::to_string(group));
      }
      return;
  }
}

MatrixD build_rotation(RotationKind kind, int group, uint64_t seed) {
  if (kind == RotationKind::random_orthogonal) {
    return random_orthogonal(group, seed).entries;
  }
  HadamardMatrix h = kind == RotationKind::sylvester ? sylvester(group)
                                                     : regular(group);
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(group));
  MatrixD r(h.entries.rows(), h.entries.cols());
  for (size_t i = 0; i < r.rows(); ++i) {
    for (size_t j = 0; j < r.cols(); ++j) {
      r(i, j) = h.entries(i, j) > 0 ? inv_sqrt : -inv_sqrt;
    }
  }
  return r;
}

}  // namespace

const char* to_string(RotationKind kind) {
  switch (kind) {
    case RotationKind::none:
      return "none";
    case RotationKind::sylvester:
      return "sylvester";
    case RotationKind::regular:
      return "regular";
    case RotationKind::random_orthogonal:
      return "random_orthogonal";
  }
  return "?";
}

RotationKind rotation_kind_from_string(const std::string& name) {
  if (name == "none") return RotationKind::none;
  if (name == "sylvester" || name == "standard") return RotationKind::sylvester;
  if (name == "regular") return RotationKind::regular;
  if (name == "random_orthogonal" || name == "random") {
    return RotationKind::random_orthogonal;
  }
  throw InvalidValueError("unknown rotation kind: " + name);
}

const MatrixD& rotation_matrix(const RotationSpec& spec, int group) {
  check_group_order(spec.kind, group);
  uint64_t seed = spec.kind == RotationKind::random_orthogonal ? spec.seed : 0;
  using Key = std::tuple<int, int, uint64_t>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<const MatrixD>> cache;
  Key key{static_cast<int>(spec.kind), group, seed};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto built = std::make_unique<const MatrixD>(
        build_rotation(spec.kind, group, seed));
    it = cache.emplace(key, std::move(built)).first;
  }
  return *it->second;
}

MatrixD group_rotate(const MatrixD& x, const RotationSpec& spec,
                     RotationStats* stats) {
  if (stats != nullptr) stats->multiply_adds = 0;
  if (spec.kind == RotationKind::none) return x;
  size_t cols = x.cols();
  if (cols == 0) throw ShapeError("group_rotate: empty input");
  if (spec.group_size < 0) {
    throw InvalidValueError("group_rotate: negative group size");
  }
  size_t group = spec.group_size == kGlobalGroup
                     ? cols
                     : static_cast<size_t>(spec.group_size);
  check_group_order(spec.kind, static_cast<int>(group));
  size_t blocks = cols / group;
  size_t rotated_cols = blocks * group;
  if (rotated_cols != cols && !spec.identity_tail) {
    throw ShapeError("group_rotate: " + std::to_string(cols) +
                     " columns not divisible by group size " +
                     std::to_string(group));
  }
  const MatrixD& r = rotation_matrix(spec, static_cast<int>(group));
  MatrixD out(x.rows(), cols);
  parallel_for(x.rows(), [&](size_t m) {
    for (size_t b = 0; b < blocks; ++b) {
      size_t base = b * group;
      for (size_t j = 0; j < group; ++j) {
        double acc = 0.0;
        for (size_t k = 0; k < group; ++k) {
          acc += x(m, base + k) * r(k, j);
        }
        out(m, base + j) = acc;
      }
    }
    for (size_t j = rotated_cols; j < cols; ++j) out(m, j) = x(m, j);
  });
  if (stats != nullptr) {
    stats->multiply_adds =
        static_cast<uint64_t>(x.rows()) * rotated_cols * group;
  }
  return out;
}

MatrixD rotate_weights(const MatrixD& w, const RotationSpec& spec,
                       RotationStats* stats) {
  return group_rotate(w, spec, stats);
}

PreparedLayer prepare_layer(const MatrixD& w,
                            std::optional<std::vector<double>> bias,
                            const RotationSpec& rotation, const QuantSpec& wq,
                            std::string name) {
  if (bias.has_value() && bias->size() != w.rows()) {
    throw ShapeError("prepare_layer: bias length must equal out_features");
  }
  MatrixD rotated = rotate_weights(w, rotation);
  auto scales = compute_scales(rotated, wq);
  PreparedLayer layer;
  layer.out_features = w.rows();
  layer.in_features = w.cols();
  layer.rotation = rotation;
  layer.weight_quant = wq;
  layer.prepared_weights = quantize(rotated, scales, wq);
  layer.bias = std::move(bias);
  layer.name = std::move(name);
  return layer;
}

MatrixI32 int_gemm(const MatrixI8& a_codes, const MatrixI8& b_codes,
                   int bits_a, int bits_b) {
  if (a_codes.cols() != b_codes.cols()) {
    throw ShapeError("int_gemm: inner dimensions differ");
  }
  size_t depth = a_codes.cols();
  int64_t qmax_a = (1 << (bits_a - 1)) - 1;
  int64_t qmax_b = (1 << (bits_b - 1)) - 1;
  int64_t worst = qmax_a * qmax_b * static_cast<int64_t>(depth);
  if (worst > std::numeric_limits<int32_t>::max()) {
    throw CapacityError("int_gemm: " + std::to_string(depth) +
                        "-deep accumulation can overflow int32 at " +
                        std::to_string(bits_a) + "x" + std::to_string(bits_b) +
                        " bits");
  }
  MatrixI32 out(a_codes.rows(), b_codes.rows());
  parallel_for(a_codes.rows(), [&](size_t m) {
    for (size_t n = 0; n < b_codes.rows(); ++n) {
      int32_t acc = 0;
      for (size_t k = 0; k < depth; ++k) {
        acc += static_cast<int32_t>(a_codes(m, k)) * b_codes(n, k);
      }
      out(m, n) = acc;
    }
  });
  return out;
}

LayerOutput forward(const MatrixD& x, const PreparedLayer& layer,
                    const QuantSpec& aq) {
  if (x.cols() != layer.in_features) {
    throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                     " columns, layer expects " +
                     std::to_string(layer.in_features));
  }
  if (aq.bits != 4 && aq.bits != 8) {
    throw InvalidValueError("forward: activation bits must be 4 or 8");
  }
  MatrixD rotated = group_rotate(x, layer.rotation);
  auto act_scales = compute_scales(rotated, aq);
  QuantizedTensor act = quantize(rotated, act_scales, aq);
  MatrixI32 accum = int_gemm(act.codes, layer.prepared_weights.codes, aq.bits,
                             layer.weight_quant.bits);
  const auto& w_scales = layer.prepared_weights.scales;
  LayerOutput out;
  out.values = MatrixD(x.rows(), layer.out_features);
  parallel_for(x.rows(), [&](size_t m) {
    for (size_t n = 0; n < layer.out_features; ++n) {
      double v = static_cast<double>(accum(m, n)) * act_scales[m] * w_scales[n];
      if (layer.bias.has_value()) v += (*layer.bias)[n];
      out.values(m, n) = v;
    }
  });
  out.accumulators_checked = true;
  return out;
}

LayerOutput reference_forward(const MatrixD& x, const MatrixD& w,
                              const std::optional<std::vector<double>>& bias) {
  if (x.cols() != w.cols()) {
    throw ShapeError("reference_forward: inner dimensions differ");
  }
  if (bias.has_value() && bias->size() != w.rows()) {
    throw ShapeError("reference_forward: bias length must equal out_features");
  }
  LayerOutput out;
  out.values = MatrixD(x.rows(), w.rows());
  parallel_for(x.rows(), [&](size_t m) {
    for (size_t n = 0; n < w.rows(); ++n) {
      double acc = 0.0;
      for (size_t k = 0; k < x.cols(); ++k) acc += x(m, k) * w(n, k);
      if (bias.has_value()) acc += (*bias)[n];
      out.values(m, n) = acc;
    }
  });
  out.accumulators_checked = true;
  return out;
}

void save_prepared_layer(const std::string& dir, const PreparedLayer& layer) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& q = layer.prepared_weights;
  Tensor weights = q.bits == 4 ? tensor_from_packed_i4(q.codes)
                               : tensor_from_i8(q.codes);
  write_tensor((fs::path(dir) / "weights.crt").string(), weights);
  write_tensor((fs::path(dir) / "weights.scales.crt").string(),
               tensor_from_f32_vector(q.scales));
  if (layer.bias.has_value()) {
    write_tensor((fs::path(dir) / "bias.crt").string(),
                 tensor_from_f64_vector(*layer.bias));
  }
  nlohmann::json manifest{
      {"name", layer.name},
      {"out_features", layer.out_features},
      {"in_features", layer.in_features},
      {"bits", q.bits},
      {"rotation",
       {{"kind", to_string(layer.rotation.kind)},
        {"group_size", layer.rotation.group_size},
        {"seed", layer.rotation.seed},
        {"identity_tail", layer.rotation.identity_tail}}},
  };
  std::ofstream file(fs::path(dir) / "manifest.json");
  file << manifest.dump(2) << "\n";
}

PreparedLayer load_prepared_layer(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream file(fs::path(dir) / "manifest.json");
  if (!file) throw FormatError("missing manifest.json in " + dir, 0);
  nlohmann::json manifest = nlohmann::json::parse(file);
  PreparedLayer layer;
  layer.name = manifest.at("name").get<std::string>();
  layer.out_features = manifest.at("out_features").get<size_t>();
  layer.in_features = manifest.at("in_features").get<size_t>();
  const auto& rot = manifest.at("rotation");
  layer.rotation.kind =
      rotation_kind_from_string(rot.at("kind").get<std::string>());
  layer.rotation.group_size = rot.at("group_size").get<int>();
  layer.rotation.seed = rot.at("seed").get<uint64_t>();
  layer.rotation.identity_tail = rot.at("identity_tail").get<bool>();
  layer.weight_quant.bits = manifest.at("bits").get<int>();
  QuantizedTensor q;
  q.bits = layer.weight_quant.bits;
  q.codes = codes_from_tensor(read_tensor((fs::path(dir) / "weights.crt").string()));
  q.rows = q.codes.rows();
  q.cols = q.codes.cols();
  q.scales = vector_from_tensor(
      read_tensor((fs::path(dir) / "weights.scales.crt").string()));
  layer.prepared_weights = std::move(q);
  if (fs::exists(fs::path(dir) / "bias.crt")) {
    layer.bias = vector_from_tensor(
        read_tensor((fs::path(dir) / "bias.crt").string()));
  }
  return layer;
}

}  // namespace convrot
