#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace convrot {

// Reproducibility record embedded in (or written alongside) every report:
// the exact command line, a hash of the effective configuration, the seeds
// used, tool version, digests of the input files, and a timestamp. The
// timestamp honors SOURCE_DATE_EPOCH so outputs can be byte-reproducible.
struct RunManifest {
  std::string command_line;
  std::string config_hash;
  std::vector<uint64_t> seeds;
  std::string tool_version;
  std::vector<std::pair<std::string, std::string>> input_digests;
  std::string timestamp;
  std::string rng_contract;  // set on outputs produced from a random stream

  nlohmann::json to_json() const;
};

// fnv1a64 hex digest, prefixed with the algorithm name.
std::string fnv1a64_hex(const void* data, size_t size);
std::string digest_string(const std::string& text);
std::string digest_file(const std::string& path);

// ISO-8601 UTC; SOURCE_DATE_EPOCH overrides the wall clock when set.
std::string current_timestamp();

RunManifest make_manifest(const std::vector<std::string>& argv_words,
                          const std::vector<uint64_t>& seeds,
                          const std::vector<std::string>& input_files);

}  // namespace convrot
