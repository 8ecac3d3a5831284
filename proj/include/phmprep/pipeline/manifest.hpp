#pragma once

// manifest.json: one entry per executed stage with the SHA-256 of every file
// it wrote. No wall-clock data, so identical runs give identical manifests.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "phmprep/core/error.hpp"
#include "phmprep/core/text.hpp"
#include "phmprep/pipeline/serialize.hpp"

namespace phmprep {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::IoFailure, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

struct StageEntry {
  std::size_t index = 0;
  std::string name;
  std::map<std::string, std::string> files;  // path relative to the run directory -> sha256
};

struct Manifest {
  std::string config_sha256;
  std::uint64_t seed = 0;
  std::string preset = "none";
  std::vector<StageEntry> stages;
};

inline constexpr const char* kManifestFile = "manifest.json";

inline json to_json(const Manifest& m) {
  json stages = json::array();
  for (const auto& s : m.stages) stages.push_back({{"index", s.index}, {"name", s.name}, {"files", s.files}});
  return {{"config_sha256", m.config_sha256}, {"seed", m.seed}, {"preset", m.preset}, {"stages", stages}};
}

inline Manifest load_manifest(const std::filesystem::path& run_dir) {
  Manifest m;
  const auto path = run_dir / kManifestFile;
  if (!std::filesystem::exists(path)) return m;
  const json j = read_json(path);
  m.config_sha256 = j.value("config_sha256", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.preset = j.value("preset", "none");
  for (const auto& s : j.at("stages"))
    m.stages.push_back({s.at("index").get<std::size_t>(), s.at("name").get<std::string>(),
                        s.at("files").get<std::map<std::string, std::string>>()});
  return m;
}

/// Records a finished stage. Entries at or after its index belong to an
/// earlier run and are dropped, as is a manifest written under another config.
inline void record_stage(const std::filesystem::path& run_dir, const Manifest& header, StageEntry entry) {
  Manifest m = load_manifest(run_dir);
  if (m.config_sha256 != header.config_sha256 || m.seed != header.seed || m.preset != header.preset) {
    m = header;
    m.stages.clear();
  }
  std::erase_if(m.stages, [&](const StageEntry& s) { return s.index >= entry.index; });
  for (auto& [rel, hash] : entry.files) hash = sha256_file(run_dir / rel);
  m.stages.push_back(std::move(entry));
  write_json(run_dir / kManifestFile, to_json(m));
}

}  // namespace phmprep
