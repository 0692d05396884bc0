#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convrot/pipeline.hpp"

namespace convrot {

// Per-layer precision assignment: weight/activation bits plus the rotation
// applied before quantization.
struct LayerSpec {
  int bits_w = 4;
  int bits_a = 4;
  RotationKind rotation = RotationKind::regular;
  int group_size = 256;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Patterns support `*` (any run, possibly empty) and `{i}` (one or more
// digits); matches are anchored to the whole name.
struct PolicyRule {
  std::string pattern;
  LayerSpec spec;

  friend bool operator==(const PolicyRule&, const PolicyRule&) = default;
};

// Ordered first-match-wins rule list with a catch-all default.
struct PrecisionPolicy {
  int version = 1;
  std::vector<PolicyRule> rules;
  LayerSpec default_spec;

  friend bool operator==(const PrecisionPolicy&, const PrecisionPolicy&) = default;
};

// Throws ParseError (with the offending rule index) on malformed patterns
// or invalid field values.
PrecisionPolicy parse_policy(const std::string& json_text);
PrecisionPolicy load_policy(const std::string& path);

// Canonical serialization: alphabetical keys, two-space indent, trailing
// newline. parse(serialize(p)) == p and serialize(parse(text)) == text for
// canonical text.
std::string policy_to_json(const PrecisionPolicy& policy);

// Spec of the first rule whose pattern matches, else the default.
const LayerSpec& resolve(const std::string& name,
                         const PrecisionPolicy& policy);

// Anchored glob match; `pattern` must be well-formed.
bool pattern_matches(const std::string& pattern, const std::string& name);

struct CoverageStats {
  std::vector<size_t> per_rule;  // first-match attribution
  size_t default_count = 0;
  size_t total = 0;
  double non_default_fraction = 0.0;
};

CoverageStats coverage_stats(const std::vector<std::string>& names,
                             const PrecisionPolicy& policy);

// One name per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_name_manifest(const std::string& path);

}  // namespace convrot
