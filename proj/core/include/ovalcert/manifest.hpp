#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ovalcert {

struct ArtifactRef {
  std::string name;
  std::string path;  // relative to the manifest directory when below it
  std::string sha256;
  bool operator==(const ArtifactRef&) const = default;
};

// One line of a run manifest. `results` values are JSON text so stages can
// record structured aggregates without widening this header.
struct StageRecord {
  std::string stage;
  std::map<std::string, std::string> params;
  std::vector<ArtifactRef> inputs;
  std::vector<ArtifactRef> outputs;
  std::map<std::string, std::string> results;
  double seconds = 0;
  int jobs = 1;
  std::uint64_t seed = 0;
};

// Hashes `file` and records it relative to `manifest_dir`.
ArtifactRef artifact(const std::string& name, const std::filesystem::path& file,
                     const std::filesystem::path& manifest_dir);

// Appends one JSON line. Throws std::runtime_error on I/O failure.
void append_record(const std::filesystem::path& manifest, const StageRecord& record);
std::vector<StageRecord> read_manifest(const std::filesystem::path& manifest);

// Problems found when re-hashing every referenced artifact (missing files,
// hash mismatches, inputs not produced earlier or present on disk).
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest);

}  // namespace ovalcert
