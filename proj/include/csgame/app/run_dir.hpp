#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace csgame {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

/// One directory per run, `<root>/<hash12>-<UTC timestamp>[-k]`; never
/// reuses an existing directory. `finalize` writes manifest.json with a
/// SHA-256 digest of every recorded output and appends one line to
/// `<root>/runs.jsonl`.
class RunDirectory {
 public:
  RunDirectory(const std::filesystem::path& root, const std::string& command, const std::string& config_hash);

  const std::filesystem::path& path() const noexcept { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

  /// Registers an output (relative to the run directory).
  void record(const std::string& name);
  /// Writes `value` as pretty JSON and records it.
  void write_json(const std::string& name, const nlohmann::json& value);
  void stage(const std::string& name, double seconds);

  nlohmann::json& manifest() noexcept { return manifest_; }

  /// Idempotent; returns the manifest path.
  std::filesystem::path finalize(int exit_code);

 private:
  std::filesystem::path root_;
  std::filesystem::path dir_;
  nlohmann::json manifest_;
  std::vector<std::string> outputs_;
  bool finalized_ = false;
};

}  // namespace csgame
