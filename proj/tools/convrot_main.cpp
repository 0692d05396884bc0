// convrot: generate and check rotation matrices, synthesize outlier tensors,
// run rotation sweeps and quantized linear layers, and resolve precision
// policies. Exit codes: 0 success, 1 usage, 2 validation/format,
// 3 numeric capacity.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "convrot/analysis.hpp"
#include "convrot/hadamard.hpp"
#include "convrot/manifest.hpp"
#include "convrot/pipeline.hpp"
#include "convrot/policy.hpp"
#include "convrot/quant.hpp"
#include "convrot/rng.hpp"
#include "convrot/tensorio.hpp"
#include "convrot/version.hpp"

namespace {

using namespace convrot;

// Flag values that fail semantic parsing are usage errors, not validation
// errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RotationKind parse_kind(const std::string& name) {
  try {
    return rotation_kind_from_string(name);
  } catch (const InvalidValueError& e) {
    throw UsageError(e.what());
  }
}

OutlierMode parse_mode(const std::string& name) {
  try {
    return outlier_mode_from_string(name);
  } catch (const InvalidValueError& e) {
    throw UsageError(e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidValueError("cannot open for writing: " + path);
  file << text;
}

void write_sidecar_manifest(const std::string& path, const RunManifest& m) {
  write_text_file(path + ".manifest.json", m.to_json().dump(2) + "\n");
}

nlohmann::json error_report_json(const ErrorReport& r) {
  nlohmann::json j{{"outlier_before", r.outlier_before},
                   {"outlier_after", r.outlier_after},
                   {"reduction_pct", r.reduction_pct},
                   {"max_abs_error", r.max_abs_error},
                   {"mse", r.mse}};
  if (std::isinf(r.sqnr_db)) {
    j["sqnr_db"] = "inf";
  } else {
    j["sqnr_db"] = r.sqnr_db;
  }
  return j;
}

std::vector<std::string> argv_words(int argc, char** argv) {
  return std::vector<std::string>(argv, argv + argc);
}

// ---------------------------------------------------------------- hadamard

struct HadamardArgs {
  int order = 0;
  std::string kind = "regular";
  bool check = false;
  std::string out;
  bool text = false;
};

int run_hadamard(const HadamardArgs& args,
                 const std::vector<std::string>& words) {
  HadamardMatrix h;
  if (args.kind == "sylvester" || args.kind == "standard") {
    h = sylvester(args.order);
  } else if (args.kind == "regular") {
    h = regular(args.order);
  } else {
    throw UsageError("unknown matrix kind: " + args.kind);
  }
  auto summary = discrepancy_summary(h);
  if (args.check) {
    bool ok = true;
    auto report = [&](bool pass, const std::string& what) {
      std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
      ok = ok && pass;
    };
    bool orthogonal = true;
    try {
      custom(h.entries);
    } catch (const Error&) {
      orthogonal = false;
    }
    report(orthogonal, "H*H^T = n*I");
    int64_t n = h.order;
    report(summary.sum_of_squares == n * n, "column sum of squares = n^2");
    int64_t sqrt_n = static_cast<int64_t>(std::llround(std::sqrt(double(n))));
    report(summary.discrepancy >= sqrt_n && summary.discrepancy <= n,
           "sqrt(n) <= discrepancy <= n");
    if (h.kind == HadamardKind::regular) {
      bool regular_sums = summary.discrepancy == sqrt_n;
      for (int64_t s : summary.column_sums) regular_sums &= s == sqrt_n;
      for (size_t i = 0; i < h.entries.rows(); ++i) {
        int64_t row_sum = 0;
        for (size_t j = 0; j < h.entries.cols(); ++j) row_sum += h.entries(i, j);
        regular_sums &= row_sum == sqrt_n;
      }
      report(regular_sums, "all row/column sums = +sqrt(n)");
    }
    std::cout << "order=" << h.order << " kind=" << to_string(h.kind)
              << " discrepancy=" << summary.discrepancy << "\n";
    if (!ok) throw InvalidValueError("matrix checks failed");
  } else {
    std::cout << "order=" << h.order << " kind=" << to_string(h.kind)
              << " discrepancy=" << summary.discrepancy << "\n";
  }
  if (args.text) std::cout << to_sign_text(h);
  if (!args.out.empty()) {
    MatrixD signs(h.entries.rows(), h.entries.cols());
    for (size_t i = 0; i < signs.rows(); ++i) {
      for (size_t j = 0; j < signs.cols(); ++j) {
        signs(i, j) = static_cast<double>(h.entries(i, j));
      }
    }
    write_tensor(args.out, tensor_from_f32(signs));
    write_sidecar_manifest(args.out, make_manifest(words, {}, {}));
  }
  return 0;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string mode = "gaussian";
  size_t rows = 0;
  size_t cols = 0;
  double magnitude = 1.0;
  double fraction = 1.0;
  uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& args, const std::vector<std::string>& words) {
  MatrixD x = synth_outliers(args.rows, args.cols, parse_mode(args.mode),
                             args.magnitude, args.fraction, args.seed);
  write_tensor(args.out, tensor_from_f32(x));
  RunManifest m = make_manifest(words, {args.seed}, {});
  m.rng_contract = kRngContract;
  write_sidecar_manifest(args.out, m);
  std::cout << "wrote " << args.out << " (" << args.rows << "x" << args.cols
            << ", amplitude " << outlier_amplitude(x) << ")\n";
  return 0;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string input;
  std::vector<std::string> kinds;
  std::vector<int> groups;
  bool include_global = false;
  uint64_t seed = 0;
  std::string csv;
};

int run_analyze(const AnalyzeArgs& args,
                const std::vector<std::string>& words) {
  MatrixD x = matrix_from_tensor(read_tensor(args.input));
  SweepConfig cfg;
  for (const auto& kind : args.kinds) cfg.kinds.push_back(parse_kind(kind));
  cfg.group_sizes = args.groups;
  cfg.include_global = args.include_global;
  cfg.seed = args.seed;
  if (cfg.group_sizes.empty() && cfg.include_global) {
    // `--global` alone still needs a non-empty group list for the sweep;
    // run the global rows by passing the full width as the only group.
    cfg.group_sizes.push_back(static_cast<int>(x.cols()));
    cfg.include_global = false;
  }
  SweepResult result = rotation_sweep(x, cfg);
  for (const auto& row : result.rows) {
    if (!row.error.empty()) {
      std::cerr << "skipped kind=" << to_string(row.kind)
                << " group=" << row.group_size << ": " << row.error << "\n";
    }
  }
  std::string csv = sweep_to_csv(result);
  if (args.csv.empty()) {
    std::cout << csv;
  } else {
    write_text_file(args.csv, csv);
    write_sidecar_manifest(args.csv,
                           make_manifest(words, {args.seed}, {args.input}));
    std::cout << "wrote " << args.csv << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------ linear

struct LinearArgs {
  std::string x_path;
  std::string w_path;
  std::string bias_path;
  int bits_a = 4;
  int bits_w = 4;
  std::string kind = "regular";
  int group = 256;
  bool global = false;
  uint64_t seed = 0;
  std::string policy_path;
  std::string name = "layer";
  std::string report;
};

int run_linear(const LinearArgs& args, const std::vector<std::string>& words) {
  MatrixD x = matrix_from_tensor(read_tensor(args.x_path));
  MatrixD w = matrix_from_tensor(read_tensor(args.w_path));
  std::optional<std::vector<double>> bias;
  std::vector<std::string> inputs{args.x_path, args.w_path};
  if (!args.bias_path.empty()) {
    bias = vector_from_tensor(read_tensor(args.bias_path));
    inputs.push_back(args.bias_path);
  }

  LayerSpec spec;
  spec.bits_a = args.bits_a;
  spec.bits_w = args.bits_w;
  spec.rotation = parse_kind(args.kind);
  spec.group_size = args.global ? kGlobalGroup : args.group;
  if (!args.policy_path.empty()) {
    PrecisionPolicy policy = load_policy(args.policy_path);
    spec = resolve(args.name, policy);
    inputs.push_back(args.policy_path);
  }

  RotationSpec rotation{spec.rotation, spec.group_size, args.seed};
  QuantSpec wq{spec.bits_w};
  QuantSpec aq{spec.bits_a};
  PreparedLayer layer = prepare_layer(w, bias, rotation, wq, args.name);
  LayerOutput quant = forward(x, layer, aq);
  LayerOutput ref = reference_forward(x, w, bias);
  ErrorReport report = layer_error_report(ref.values, quant.values);
  report.outlier_before = outlier_amplitude(x);
  report.outlier_after = outlier_amplitude(group_rotate(x, rotation));
  report.reduction_pct = reduction_pct(report.outlier_before,
                                       report.outlier_after);

  RunManifest manifest = make_manifest(words, {args.seed}, inputs);
  nlohmann::json doc{
      {"config",
       {{"name", args.name},
        {"bits_a", aq.bits},
        {"bits_w", wq.bits},
        {"rotation", to_string(rotation.kind)},
        {"group_size", rotation.group_size},
        {"seed", rotation.seed}}},
      {"error_report", error_report_json(report)},
      {"manifest", manifest.to_json()},
  };
  std::string text = doc.dump(2) + "\n";
  if (args.report.empty()) {
    std::cout << text;
  } else {
    write_text_file(args.report, text);
    std::cout << "wrote " << args.report << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------ policy

struct PolicyArgs {
  std::string config;
  std::string name;
  std::string manifest;
  bool stats = false;
};

int run_policy(const PolicyArgs& args) {
  PrecisionPolicy policy = load_policy(args.config);
  if (!args.name.empty()) {
    const LayerSpec& spec = resolve(args.name, policy);
    nlohmann::json j{{"name", args.name},
                     {"bits_a", spec.bits_a},
                     {"bits_w", spec.bits_w},
                     {"rotation", to_string(spec.rotation)},
                     {"group_size", spec.group_size}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (!args.stats || args.manifest.empty()) {
    throw UsageError("policy: need either --name or --manifest with --stats");
  }
  auto names = load_name_manifest(args.manifest);
  CoverageStats stats = coverage_stats(names, policy);
  nlohmann::json rules = nlohmann::json::array();
  for (size_t r = 0; r < policy.rules.size(); ++r) {
    rules.push_back({{"pattern", policy.rules[r].pattern},
                     {"matches", stats.per_rule[r]}});
  }
  nlohmann::json j{{"rules", std::move(rules)},
                   {"default_count", stats.default_count},
                   {"total", stats.total},
                   {"non_default_fraction", stats.non_default_fraction}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-wise regular-Hadamard rotation quantization toolkit"};
  app.set_version_flag("--version", convrot::kVersion);
  app.require_subcommand(1);

  HadamardArgs hadamard_args;
  auto* hadamard_cmd =
      app.add_subcommand("hadamard", "generate / check a rotation matrix");
  hadamard_cmd->add_option("--order", hadamard_args.order, "matrix order")
      ->required();
  hadamard_cmd->add_option("--kind", hadamard_args.kind,
                           "sylvester|regular (alias: standard)");
  hadamard_cmd->add_flag("--check", hadamard_args.check,
                         "verify orthogonality, column sums, regularity");
  hadamard_cmd->add_option("--out", hadamard_args.out,
                           "write signs as an f32 tensor file");
  hadamard_cmd->add_flag("--text", hadamard_args.text,
                         "print a +/- sign grid");

  SynthArgs synth_args;
  auto* synth_cmd =
      app.add_subcommand("synth", "synthesize an outlier-structured tensor");
  synth_cmd->add_option("--mode", synth_args.mode,
                        "rowwise|colwise|gaussian");
  synth_cmd->add_option("--rows", synth_args.rows, "rows")->required();
  synth_cmd->add_option("--cols", synth_args.cols, "cols")->required();
  synth_cmd->add_option("--magnitude", synth_args.magnitude,
                        "outlier scale factor");
  synth_cmd->add_option("--fraction", synth_args.fraction,
                        "fraction of rows/columns scaled");
  synth_cmd->add_option("--seed", synth_args.seed, "stream seed");
  synth_cmd->add_option("--out", synth_args.out, "output tensor path")
      ->required();

  AnalyzeArgs analyze_args;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "rotation sweep over a tensor");
  analyze_cmd->add_option("--input", analyze_args.input, "input tensor")
      ->required();
  analyze_cmd->add_option("--kinds", analyze_args.kinds,
                          "rotation kinds (comma separated)")
      ->delimiter(',')
      ->required();
  analyze_cmd->add_option("--groups", analyze_args.groups,
                          "group sizes (comma separated)")
      ->delimiter(',');
  analyze_cmd->add_flag("--global", analyze_args.include_global,
                        "also sweep one full-width block per kind");
  analyze_cmd->add_option("--seed", analyze_args.seed,
                          "seed for random rotations");
  analyze_cmd->add_option("--csv", analyze_args.csv, "output CSV path");

  LinearArgs linear_args;
  auto* linear_cmd =
      app.add_subcommand("linear", "run a quantized linear layer");
  linear_cmd->add_option("--x", linear_args.x_path, "activation tensor")
      ->required();
  linear_cmd->add_option("--w", linear_args.w_path, "weight tensor")
      ->required();
  linear_cmd->add_option("--bias", linear_args.bias_path, "bias tensor (1-D)");
  linear_cmd->add_option("--bits-a", linear_args.bits_a, "activation bits");
  linear_cmd->add_option("--bits-w", linear_args.bits_w, "weight bits");
  linear_cmd->add_option("--kind", linear_args.kind, "rotation kind");
  linear_cmd->add_option("--group", linear_args.group, "rotation group size");
  linear_cmd->add_flag("--global", linear_args.global,
                       "rotate with one full-width block");
  linear_cmd->add_option("--seed", linear_args.seed,
                         "seed for random rotations");
  linear_cmd->add_option("--policy", linear_args.policy_path,
                         "policy file; resolved spec overrides bit/kind flags");
  linear_cmd->add_option("--name", linear_args.name,
                         "layer name for policy resolution");
  linear_cmd->add_option("--report", linear_args.report,
                         "output JSON report path");

  PolicyArgs policy_args;
  auto* policy_cmd =
      app.add_subcommand("policy", "resolve a name or compute coverage stats");
  policy_cmd->add_option("--config", policy_args.config, "policy JSON file")
      ->required();
  policy_cmd->add_option("--name", policy_args.name, "layer name to resolve");
  policy_cmd->add_option("--manifest", policy_args.manifest,
                         "layer-name manifest file");
  policy_cmd->add_flag("--stats", policy_args.stats,
                       "print per-rule coverage stats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 1;
  }

  auto words = argv_words(argc, argv);
  try {
    if (hadamard_cmd->parsed()) return run_hadamard(hadamard_args, words);
    if (synth_cmd->parsed()) return run_synth(synth_args, words);
    if (analyze_cmd->parsed()) return run_analyze(analyze_args, words);
    if (linear_cmd->parsed()) return run_linear(linear_args, words);
    if (policy_cmd->parsed()) return run_policy(policy_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const convrot::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const convrot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
