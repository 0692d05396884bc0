#include "convrot/policy.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace convrot {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// `{` is only valid as the token `{i}`; `}` only as its closer.
void check_pattern(const std::string& pattern, int rule_index) {
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{') {
      if (i + 2 >= pattern.size() || pattern[i + 1] != 'i' ||
          pattern[i + 2] != '}') {
        throw ParseError("malformed pattern '" + pattern +
                         "': '{' must start the token '{i}'", rule_index);
      }
      i += 2;
    } else if (pattern[i] == '}') {
      throw ParseError("malformed pattern '" + pattern +
                       "': unmatched '}'", rule_index);
    }
  }
}

bool match_impl(const char* p, const char* pe, const char* s, const char* se) {
  while (p < pe) {
    if (*p == '*') {
      while (p < pe && *p == '*') ++p;
      if (p == pe) return true;
      for (const char* t = s; t <= se; ++t) {
        if (match_impl(p, pe, t, se)) return true;
      }
      return false;
    }
    if (*p == '{') {  // validated "{i}"
      const char* run_end = s;
      while (run_end < se && is_digit(*run_end)) ++run_end;
      if (run_end == s) return false;
      for (const char* t = run_end; t > s; --t) {
        if (match_impl(p + 3, pe, t, se)) return true;
      }
      return false;
    }
    if (s == se || *p != *s) return false;
    ++p;
    ++s;
  }
  return s == se;
}

LayerSpec spec_from_json(const nlohmann::json& j, int rule_index) {
  LayerSpec spec;
  try {
    spec.bits_w = j.at("bits_w").get<int>();
    spec.bits_a = j.at("bits_a").get<int>();
    spec.rotation = rotation_kind_from_string(j.at("rotation").get<std::string>());
    spec.group_size = j.at("group_size").get<int>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid spec: ") + e.what(), rule_index);
  }
  auto valid_bits = [](int b) { return b == 4 || b == 8; };
  if (!valid_bits(spec.bits_w) || !valid_bits(spec.bits_a)) {
    throw ParseError("bits must be 4 or 8", rule_index);
  }
  if (spec.group_size < 0) {
    throw ParseError("group_size must be >= 0", rule_index);
  }
  return spec;
}

nlohmann::json spec_to_json(const LayerSpec& spec) {
  return {{"bits_a", spec.bits_a},
          {"bits_w", spec.bits_w},
          {"group_size", spec.group_size},
          {"rotation", to_string(spec.rotation)}};
}

}  // namespace

PrecisionPolicy parse_policy(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), -1);
  }
  PrecisionPolicy policy;
  try {
    policy.version = j.at("version").get<int>();
  } catch (const std::exception& e) {
    throw ParseError(std::string("missing version: ") + e.what(), -1);
  }
  if (!j.contains("rules") || !j["rules"].is_array()) {
    throw ParseError("policy must contain a rules array", -1);
  }
  int index = 0;
  for (const auto& rule_json : j["rules"]) {
    PolicyRule rule;
    try {
      rule.pattern = rule_json.at("pattern").get<std::string>();
    } catch (const std::exception& e) {
      throw ParseError(std::string("missing pattern: ") + e.what(), index);
    }
    check_pattern(rule.pattern, index);
    rule.spec = spec_from_json(rule_json, index);
    policy.rules.push_back(std::move(rule));
    ++index;
  }
  if (!j.contains("default")) {
    throw ParseError("policy must contain a default spec", -1);
  }
  policy.default_spec = spec_from_json(j["default"], -1);
  return policy;
}

PrecisionPolicy load_policy(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open policy file: " + path, -1);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_policy(buffer.str());
}

std::string policy_to_json(const PrecisionPolicy& policy) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : policy.rules) {
    nlohmann::json r = spec_to_json(rule.spec);
    r["pattern"] = rule.pattern;
    rules.push_back(std::move(r));
  }
  nlohmann::json j{{"default", spec_to_json(policy.default_spec)},
                   {"rules", std::move(rules)},
                   {"version", policy.version}};
  return j.dump(2) + "\n";
}

bool pattern_matches(const std::string& pattern, const std::string& name) {
  return match_impl(pattern.data(), pattern.data() + pattern.size(),
                    name.data(), name.data() + name.size());
}

const LayerSpec& resolve(const std::string& name,
                         const PrecisionPolicy& policy) {
  for (const auto& rule : policy.rules) {
    if (pattern_matches(rule.pattern, name)) return rule.spec;
  }
  return policy.default_spec;
}

CoverageStats coverage_stats(const std::vector<std::string>& names,
                             const PrecisionPolicy& policy) {
  if (names.empty()) {
    throw InvalidValueError("coverage_stats: name list must be non-empty");
  }
  CoverageStats stats;
  stats.per_rule.assign(policy.rules.size(), 0);
  stats.total = names.size();
  for (const auto& name : names) {
    bool matched = false;
    for (size_t r = 0; r < policy.rules.size(); ++r) {
      if (pattern_matches(policy.rules[r].pattern, name)) {
        ++stats.per_rule[r];
        matched = true;
        break;
      }
    }
    if (!matched) ++stats.default_count;
  }
  stats.non_default_fraction =
      static_cast<double>(stats.total - stats.default_count) /
      static_cast<double>(stats.total);
  return stats;
}

std::vector<std::string> load_name_manifest(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open manifest file: " + path, -1);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(file, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    names.push_back(line);
  }
  return names;
}

}  // namespace convrot
