#include "convrot/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "convrot/errors.hpp"
#include "convrot/version.hpp"

namespace convrot {

std::string fnv1a64_hex(const void* data, size_t size) {
  const uint8_t* bytes = static_cast<const uint8_t*>(data);
  uint64_t hash = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string digest_string(const std::string& text) {
  return fnv1a64_hex(text.data(), text.size());
}

std::string digest_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InvalidValueError("cannot open file for digest: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  std::string bytes = buffer.str();
  return fnv1a64_hex(bytes.data(), bytes.size());
}

std::string current_timestamp() {
  std::time_t when;
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch != nullptr && *epoch != '\0') {
    when = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    when = std::time(nullptr);
  }
  std::tm utc{};
  gmtime_r(&when, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

RunManifest make_manifest(const std::vector<std::string>& argv_words,
                          const std::vector<uint64_t>& seeds,
                          const std::vector<std::string>& input_files) {
  RunManifest m;
  std::string joined;
  for (const auto& word : argv_words) {
    if (!joined.empty()) joined += ' ';
    joined += word;
  }
  m.command_line = joined;
  m.config_hash = digest_string(joined);
  m.seeds = seeds;
  m.tool_version = kVersion;
  for (const auto& path : input_files) {
    m.input_digests.emplace_back(path, digest_file(path));
  }
  m.timestamp = current_timestamp();
  return m;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& [path, digest] : input_digests) digests[path] = digest;
  nlohmann::json j{{"command_line", command_line},
                   {"config_hash", config_hash},
                   {"seeds", seeds},
                   {"tool_version", tool_version},
                   {"input_digests", std::move(digests)},
                   {"timestamp", timestamp}};
  if (!rng_contract.empty()) j["rng_contract"] = rng_contract;
  return j;
}

}  // namespace convrot
